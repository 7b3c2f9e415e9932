use std::time::{Duration, Instant};

use duelsim::simulate::{run_episode, EnvSource, EpisodeOptions, EpisodeResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{aggregate, write_atomic, write_csv, AggregateRow, EpisodeRow};
use crate::{HarnessError, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `base_seed ⊕ f(grid value, rep)`. The policy is deliberately not an input,
/// so every policy at a grid point faces the same environment realizations.
pub fn episode_seed(base_seed: u64, grid_value: usize, rep: usize) -> u64 {
    base_seed ^ splitmix64(splitmix64(grid_value as u64) ^ rep as u64)
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `Some(1)` runs serially, `None` uses rayon's default.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    grid_index: usize,
    policy_index: usize,
    rep: usize,
}

/// Episode results for every (grid value, policy, repetition), in that order.
pub fn run_episodes(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<(EpisodeRowKey, EpisodeResult)>> {
    cfg.validate()?;
    let requests = cfg.requests();
    let mut jobs = Vec::new();
    for grid_index in 0..cfg.grid.values.len() {
        for policy_index in 0..cfg.policies.len() {
            for rep in 0..cfg.repetitions {
                jobs.push(Job {
                    grid_index,
                    policy_index,
                    rep,
                });
            }
        }
    }
    let episode_opts = EpisodeOptions {
        retain_trajectory: Some(false),
        delta: Some(cfg.delta),
    };
    let work = |job: &Job| -> Result<(EpisodeRowKey, EpisodeResult)> {
        let value = cfg.grid.values[job.grid_index];
        let seed = episode_seed(cfg.base_seed, value, job.rep);
        let spec = cfg.env_at(value, seed);
        let policy = &cfg.policies[job.policy_index];
        let res = run_episode(&EnvSource::Spec(spec), policy, seed, &requests, &episode_opts).map_err(|source| {
            HarnessError::Episode {
                policy: policy.label(),
                axis: cfg.grid.axis.name(),
                value,
                rep: job.rep,
                source,
            }
        })?;
        log::debug!(
            "{} {}={} rep {} done in {:?}",
            policy.label(),
            cfg.grid.axis.name(),
            value,
            job.rep,
            res.wall_time
        );
        let key = EpisodeRowKey {
            policy_index: job.policy_index,
            rep: job.rep,
        };
        Ok((key, res))
    };
    match opts.threads {
        Some(1) => jobs.iter().map(work).collect(),
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .expect("thread pool");
            pool.install(|| jobs.par_iter().map(work).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeRowKey {
    pub policy_index: usize,
    pub rep: usize,
}

pub fn episode_rows(cfg: &ExperimentConfig, results: &[(EpisodeRowKey, EpisodeResult)]) -> Vec<EpisodeRow> {
    let mut rows = Vec::new();
    for (key, res) in results {
        let policy = &cfg.policies[key.policy_index];
        for r in &res.reports {
            rows.push(EpisodeRow {
                experiment: cfg.name.clone(),
                policy: policy.label(),
                schedule: policy.schedule_label().to_string(),
                k: res.k,
                t: res.t_horizon,
                s_declared: res.env.s_declared,
                v_declared: res.env.v_declared,
                s_realized: res.env.s_realized,
                v_realized: res.env.v_realized,
                seed: res.seed,
                rep: key.rep,
                regret_kind: r.request.kind,
                benchmark: r.request.benchmark,
                total: r.report.total,
                row_part: r.report.row_part,
                column_part: r.report.column_part,
            });
        }
    }
    rows
}

#[derive(Serialize)]
struct CurveRecord<'a> {
    policy: String,
    k: usize,
    t: usize,
    seed: u64,
    rep: usize,
    report: &'a duelsim::regret::RegretReport,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub episodes: usize,
    pub episode_rows: Vec<EpisodeRow>,
    pub aggregate_rows: Vec<AggregateRow>,
    pub episodes_path: std::path::PathBuf,
    pub aggregate_path: std::path::PathBuf,
    pub wall_time: Duration,
}

/// Run every episode of `cfg` and write `<output>/<name>_episodes.csv` and
/// `<output>/<name>_aggregate.csv`.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let started = Instant::now();
    let results = run_episodes(cfg, opts)?;
    let episode_rows = episode_rows(cfg, &results);
    let aggregate_rows = aggregate(&episode_rows);

    std::fs::create_dir_all(&cfg.output).map_err(|source| HarnessError::Unwritable {
        path: cfg.output.clone(),
        source,
    })?;
    let episodes_path = cfg.output.join(format!("{}_episodes.csv", cfg.name));
    let aggregate_path = cfg.output.join(format!("{}_aggregate.csv", cfg.name));
    write_csv(&episodes_path, &episode_rows)?;
    write_csv(&aggregate_path, &aggregate_rows)?;
    if cfg.curves {
        let mut body = String::new();
        for (key, res) in &results {
            for r in &res.reports {
                let rec = CurveRecord {
                    policy: cfg.policies[key.policy_index].label(),
                    k: res.k,
                    t: res.t_horizon,
                    seed: res.seed,
                    rep: key.rep,
                    report: &r.report,
                };
                body.push_str(&serde_json::to_string(&rec).expect("curve serializes"));
                body.push('\n');
            }
        }
        write_atomic(&cfg.output.join(format!("{}_curves.jsonl", cfg.name)), body.as_bytes())?;
    }
    Ok(RunSummary {
        episodes: results.len(),
        episode_rows,
        aggregate_rows,
        episodes_path,
        aggregate_path,
        wall_time: started.elapsed(),
    })
}
