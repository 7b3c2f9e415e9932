use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use duelsim::envgen::{lb_epsilon, EnvSpec, LbKind, SequenceFile};
use duelsim_harness::config::{preset_config, Axis, ExperimentConfig, Preset};
use duelsim_harness::output::{read_episodes, write_atomic, write_csv};
use duelsim_harness::{aggregate, loglog_slope, run_config, AggregateRow, RunOptions};

#[derive(Parser)]
#[command(name = "duelsim", version, about = "Non-stationary dueling bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write episode and aggregate CSVs.
    Run {
        config: PathBuf,
        /// Worker threads (1 = serial).
        #[arg(long)]
        threads: Option<usize>,
        /// Override the config's output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate an experiment config from a preset, optionally running it.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_enum, default_value = "static")]
        preset: Preset,
        /// Use the 10^4..10^6 horizon grid (and T = 10^6 for K sweeps).
        #[arg(long)]
        full_scale: bool,
        /// Explicit grid values, replacing the preset grid.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fixed arm count for T sweeps.
        #[arg(long)]
        k: Option<usize>,
        /// Directory for result files.
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Where to write the config; printed to stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Run the generated config right away.
        #[arg(long)]
        run: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Re-aggregate an episode CSV and print log-log slopes.
    Report {
        episodes: PathBuf,
        /// Write the aggregate CSV here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Axis to fit slopes along; inferred when only one of K, T varies.
        #[arg(long, value_enum)]
        axis: Option<Axis>,
    },
    /// Materialize or describe an environment from an EnvSpec JSON file.
    GenEnv {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Store every matrix instead of only the generator.
        #[arg(long)]
        materialize: bool,
    },
    /// Print the lower-bound gap ε for the given instance size.
    LbEps {
        #[arg(long, value_enum)]
        kind: LbKindArg,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        v: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LbKindArg {
    Switching,
    Continuous,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn run(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<()> {
    log::info!(
        "{}: {} grid points x {} policies x {} reps",
        cfg.name,
        cfg.grid.values.len(),
        cfg.policies.len(),
        cfg.repetitions
    );
    let summary = run_config(cfg, &RunOptions { threads })?;
    println!(
        "{} episodes in {:.1?}\n  {}\n  {}",
        summary.episodes,
        summary.wall_time,
        summary.episodes_path.display(),
        summary.aggregate_path.display()
    );
    print_slopes(&summary.aggregate_rows, Some(cfg.grid.axis));
    Ok(())
}

fn print_slopes(rows: &[AggregateRow], axis: Option<Axis>) {
    let axis = axis.or_else(|| {
        let ks: std::collections::BTreeSet<_> = rows.iter().map(|r| r.k).collect();
        let ts: std::collections::BTreeSet<_> = rows.iter().map(|r| r.t).collect();
        match (ks.len() > 1, ts.len() > 1) {
            (true, false) => Some(Axis::K),
            (false, true) => Some(Axis::T),
            _ => None,
        }
    });
    let Some(axis) = axis else {
        println!("no single varying axis; skipping slopes");
        return;
    };
    let mut series: BTreeMap<(String, String, &str, &str), Vec<AggregateRow>> = BTreeMap::new();
    for r in rows {
        series
            .entry((r.experiment.clone(), r.policy.clone(), r.regret_kind.name(), r.benchmark.name()))
            .or_default()
            .push(r.clone());
    }
    println!("{:<24} {:<14} {:<13} {:>8} {:>8} {:>5}", "policy", "regret", "benchmark", "slope", "stderr", "pts");
    for ((_, policy, kind, bench), rows) in &series {
        match loglog_slope(rows, axis) {
            Ok(s) => println!(
                "{policy:<24} {kind:<14} {bench:<13} {:>8.4} {:>8.4} {:>5}",
                s.slope, s.std_error, s.used
            ),
            Err(e) => println!("{policy:<24} {kind:<14} {bench:<13} {e}"),
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, threads, output } => {
            let mut cfg = load_config(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            run(&cfg, threads)
        }
        Command::Sweep {
            axis,
            preset,
            full_scale,
            values,
            reps,
            seed,
            k,
            out_dir,
            output,
            run: run_now,
            threads,
        } => {
            let mut cfg = preset_config(preset, axis, full_scale, out_dir);
            if let Some(v) = values {
                cfg.grid.values = v;
            }
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(k) = k {
                if axis == Axis::K {
                    bail!("--k fixes the arm count and cannot be combined with --axis K");
                }
                cfg.env.k = k;
            }
            cfg.validate()?;
            match &output {
                Some(path) => write_atomic(path, cfg.to_json().as_bytes())?,
                None if !run_now => println!("{}", cfg.to_json()),
                None => {}
            }
            if run_now {
                run(&cfg, threads)?;
            }
            Ok(())
        }
        Command::Report { episodes, output, axis } => {
            let rows = read_episodes(&episodes)?;
            let agg = aggregate(&rows);
            if let Some(path) = output {
                write_csv(&path, &agg)?;
                println!("wrote {}", path.display());
            }
            for r in &agg {
                println!(
                    "{:<24} K={:<4} T={:<8} {:<14} {:<13} mean={:<14.4} std={:<12.4} n={}",
                    r.policy,
                    r.k,
                    r.t,
                    r.regret_kind.name(),
                    r.benchmark.name(),
                    r.mean,
                    r.std,
                    r.n
                );
            }
            print_slopes(&agg, axis);
            Ok(())
        }
        Command::GenEnv { spec, output, materialize } => {
            let text = std::fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let spec: EnvSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", spec.display()))?;
            let file = SequenceFile::from_spec(&spec, materialize)?;
            write_atomic(&output, file.to_json()?.as_bytes())?;
            let m = &file.meta;
            println!(
                "{} K={} T={} realized S={} V={:.6}",
                spec.kind.name(),
                spec.k,
                spec.t_horizon,
                m.s_realized.unwrap_or_default(),
                m.v_realized.unwrap_or_default()
            );
            Ok(())
        }
        Command::LbEps { kind, k, t, s, v } => {
            let kind = match kind {
                LbKindArg::Switching => LbKind::Switching,
                LbKindArg::Continuous => LbKind::Continuous,
            };
            let e = lb_epsilon(kind, k, t, s, v)?;
            match e.delta_segment {
                Some(d) => println!("epsilon={} delta={d}", e.epsilon),
                None => println!("epsilon={}", e.epsilon),
            }
            Ok(())
        }
    }
}
