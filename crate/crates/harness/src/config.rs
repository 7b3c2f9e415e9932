use std::path::PathBuf;

use duelsim::envgen::{EnvKind, EnvSpec};
use duelsim::policies::{PolicyConfig, PolicyKind, ScheduleKind, DEFAULT_DELTA};
use duelsim::regret::{BenchmarkKind, RegretKind};
use duelsim::simulate::RegretRequest;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

/// Desk-scale horizon grid, 2^12 through 2^17.
pub const DESK_T_GRID: [usize; 6] = [4096, 8192, 16384, 32768, 65536, 131072];
/// Horizons spanning 10^4 to 10^6.
pub const FULL_T_GRID: [usize; 5] = [10_000, 31_623, 100_000, 316_228, 1_000_000];
pub const DESK_K_GRID: [usize; 5] = [4, 8, 16, 32, 64];
pub const DEFAULT_REPETITIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
pub enum Axis {
    #[value(name = "T", alias = "t")]
    T,
    #[value(name = "K", alias = "k")]
    K,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::T => "T",
            Axis::K => "K",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub axis: Axis,
    pub values: Vec<usize>,
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Template; the grid axis overrides `k` or `t_horizon`, the episode seed
    /// overrides `seed`.
    pub env: EnvSpec,
    pub policies: Vec<PolicyConfig>,
    pub grid: Grid,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub benchmarks: Vec<BenchmarkKind>,
    pub regret_kinds: Vec<RegretKind>,
    pub output: PathBuf,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Also write per-episode regret curves as JSON lines.
    #[serde(default)]
    pub curves: bool,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> HarnessError {
    HarnessError::InvalidConfig {
        field: field.into(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| invalid("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\', ',', '"', '\n']) {
            return Err(invalid("name", "must be non-empty without path separators, commas or quotes"));
        }
        if self.grid.values.is_empty() {
            return Err(invalid("grid.values", "empty grid"));
        }
        for (i, w) in self.grid.values.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(invalid(
                    format!("grid.values[{}]", i + 1),
                    format!("{} does not exceed {}", w[1], w[0]),
                ));
            }
        }
        if self.grid.values[0] == 0 {
            return Err(invalid("grid.values[0]", "must be positive"));
        }
        if self.repetitions == 0 {
            return Err(invalid("repetitions", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        if self.policies.is_empty() {
            return Err(invalid("policies", "no policies"));
        }
        let mut labels = std::collections::BTreeSet::new();
        for (i, p) in self.policies.iter().enumerate() {
            if !labels.insert(p.label()) {
                return Err(invalid(
                    format!("policies[{i}]"),
                    format!("duplicate label {:?}; set `name` to tell them apart", p.label()),
                ));
            }
            if p.label().contains([',', '"', '\n']) {
                return Err(invalid(format!("policies[{i}].name"), "commas and quotes are not allowed"));
            }
        }
        if self.benchmarks.is_empty() {
            return Err(invalid("benchmarks", "no benchmarks"));
        }
        if self.regret_kinds.is_empty() {
            return Err(invalid("regret_kinds", "no regret kinds"));
        }
        if self.regret_kinds.contains(&RegretKind::Static) && !self.benchmarks.contains(&BenchmarkKind::BestFixed) {
            return Err(invalid("regret_kinds", "static regret needs the best_fixed benchmark"));
        }
        if self.benchmarks.contains(&BenchmarkKind::LbBenchmark) && self.env.kind != EnvKind::LowerBound {
            return Err(invalid("benchmarks", "lb_benchmark needs a lower_bound environment"));
        }
        for &v in &self.grid.values {
            let spec = self.env_at(v, 0);
            spec.validate()
                .map_err(|e| invalid(format!("env (at {} = {v})", self.grid.axis.name()), e.to_string()))?;
            for (i, p) in self.policies.iter().enumerate() {
                p.resolve(self.schedule_inputs(&spec)).map_err(|e| {
                    invalid(format!("policies[{i}] (at {} = {v})", self.grid.axis.name()), e.to_string())
                })?;
            }
        }
        Ok(())
    }

    /// Every valid (kind, benchmark) pair, kinds outermost.
    pub fn requests(&self) -> Vec<RegretRequest> {
        let mut out = Vec::new();
        for &kind in &self.regret_kinds {
            for &benchmark in &self.benchmarks {
                let r = RegretRequest::new(kind, benchmark);
                if r.is_valid() && !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }

    pub fn env_at(&self, grid_value: usize, seed: u64) -> EnvSpec {
        let mut spec = self.env.clone();
        match self.grid.axis {
            Axis::T => spec.t_horizon = grid_value,
            Axis::K => spec.k = grid_value,
        }
        spec.seed = seed;
        spec
    }

    fn schedule_inputs(&self, spec: &EnvSpec) -> duelsim::policies::ScheduleInputs {
        let mut inputs = duelsim::policies::ScheduleInputs::new(spec.k, spec.t_horizon).delta(self.delta);
        inputs.s_switches = spec.s_switches;
        inputs.v_budget = spec.v_budget;
        inputs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Static,
    Switching,
    Continuous,
    LowerBound,
}

/// Ready-made experiment shapes for `sweep`.
pub fn preset_config(preset: Preset, axis: Axis, full_scale: bool, output: PathBuf) -> ExperimentConfig {
    let values: Vec<usize> = match (axis, full_scale) {
        (Axis::T, false) => DESK_T_GRID.to_vec(),
        (Axis::T, true) => FULL_T_GRID.to_vec(),
        (Axis::K, _) => DESK_K_GRID.to_vec(),
    };
    let t_fixed = if full_scale { 1_000_000 } else { 1 << 15 };
    let named = |kind, schedule, name: &str| PolicyConfig {
        name: Some(name.to_string()),
        ..PolicyConfig::new(kind).with_schedule(schedule)
    };
    let (name, env, policies, benchmarks, kinds) = match preset {
        Preset::Static => (
            "static",
            EnvSpec::new(EnvKind::GaussianWalk, 10, t_fixed, 0),
            vec![
                PolicyConfig::new(PolicyKind::Dex3P),
                PolicyConfig::new(PolicyKind::Rex3),
                PolicyConfig::new(PolicyKind::Rand),
            ],
            vec![BenchmarkKind::BestFixed],
            vec![RegretKind::Static],
        ),
        Preset::Switching => (
            "switching",
            EnvSpec::new(EnvKind::SwitchingWalk, 5, t_fixed, 0).with_switches(5),
            vec![
                named(PolicyKind::Dex3S, ScheduleKind::SwitchingKnown, "DEX3S-known"),
                named(PolicyKind::Dex3S, ScheduleKind::SwitchingUnknown, "DEX3S-unknown"),
                PolicyConfig::new(PolicyKind::Rex3),
                PolicyConfig::new(PolicyKind::Rand),
            ],
            vec![BenchmarkKind::PerInterval],
            vec![RegretKind::Dynamic],
        ),
        Preset::Continuous => (
            "continuous",
            EnvSpec::new(EnvKind::ContinuousBudget, 10, t_fixed, 0).with_budget(10.0),
            vec![
                named(PolicyKind::Dex3S, ScheduleKind::Continuous, "DEX3S"),
                PolicyConfig::new(PolicyKind::Rex3),
                PolicyConfig::new(PolicyKind::Rand),
            ],
            vec![BenchmarkKind::PerStep],
            vec![RegretKind::Dynamic],
        ),
        Preset::LowerBound => (
            "lower-bound",
            EnvSpec::new(EnvKind::LowerBound, 5, t_fixed, 0).with_switches(4),
            vec![
                PolicyConfig::new(PolicyKind::Dex3S),
                PolicyConfig::new(PolicyKind::Rand),
            ],
            vec![BenchmarkKind::LbBenchmark],
            vec![RegretKind::Dynamic],
        ),
    };
    ExperimentConfig {
        name: format!("{name}-{}", axis.name()),
        env,
        policies,
        grid: Grid { axis, values },
        repetitions: DEFAULT_REPETITIONS,
        base_seed: 0,
        benchmarks,
        regret_kinds: kinds,
        output,
        delta: DEFAULT_DELTA,
        curves: false,
    }
}
