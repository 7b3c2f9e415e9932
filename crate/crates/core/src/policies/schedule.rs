//! Parameter schedules for the sparring learners.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Static,
    SwitchingKnown,
    SwitchingUnknown,
    Continuous,
    Borda,
    Manual,
    ExpectedRegret,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Static => "static",
            ScheduleKind::SwitchingKnown => "switching_known",
            ScheduleKind::SwitchingUnknown => "switching_unknown",
            ScheduleKind::Continuous => "continuous",
            ScheduleKind::Borda => "borda",
            ScheduleKind::Manual => "manual",
            ScheduleKind::ExpectedRegret => "expected_regret",
        }
    }
}

/// Tuning of one learner: learning rate η, estimator bias β, exploration γ,
/// mixing α (0 for the plain sparring learner) and confidence δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub eta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub delta: f64,
    pub schedule: ScheduleKind,
}

/// Horizon-dependent inputs to a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleInputs {
    pub k_arms: usize,
    pub t_horizon: usize,
    pub s_switches: Option<usize>,
    pub v_budget: Option<f64>,
    pub delta: Option<f64>,
}

impl ScheduleInputs {
    pub fn new(k_arms: usize, t_horizon: usize) -> Self {
        Self {
            k_arms,
            t_horizon,
            s_switches: None,
            v_budget: None,
            delta: None,
        }
    }

    pub fn switches(mut self, s: usize) -> Self {
        self.s_switches = Some(s);
        self
    }

    pub fn budget(mut self, v: f64) -> Self {
        self.v_budget = Some(v);
        self
    }

    pub fn delta(mut self, d: f64) -> Self {
        self.delta = Some(d);
        self
    }
}

impl PolicyParams {
    /// Range checks shared by every schedule, manual ones included.
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return bad("eta", self.eta, "must be positive and finite");
        }
        if !(0.0..1.0).contains(&self.beta) {
            return bad("beta", self.beta, "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma", self.gamma, "must lie in [0, 1)");
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha", self.alpha, "must lie in [0, 1)");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("delta", self.delta, "must lie in (0, 1)");
        }
        Ok(())
    }

    /// Exploration large enough for the estimator range:
    /// `γ ≥ (1+β)·η·K`, or `γ² ≥ (1+γβ)·η·K` for the Borda schedule.
    pub fn exploration_suffices(&self, k_arms: usize) -> bool {
        let k = k_arms as f64;
        let slack = 1e-12;
        match self.schedule {
            ScheduleKind::Borda => {
                self.gamma * self.gamma + slack >= (1.0 + self.gamma * self.beta) * self.eta * k
            }
            _ => self.gamma + slack >= (1.0 + self.beta) * self.eta * k,
        }
    }
}

/// Parameters prescribed by a schedule.
///
/// - `static` / `expected_regret`: `η = ½√(ln K/(KT))`, `β = 2η`, `γ = 2ηK`, `α = 0`.
/// - `switching_known`: `β = η = √(S/(KT))`, `γ = 2ηK`, `α = 1/T`.
/// - `switching_unknown`: `β = η = 1/√(KT)`, `γ = 2ηK`, `α = 1/T`.
/// - `continuous`: `β = η = V^{1/3}/(4K^{2/3}T^{1/3})`, `γ = 2ηK`, `α = 1/T`.
/// - `borda`: `η = (S ln K/(T√(2K)))^{2/3}`,
///   `β = S^{1/3}√(ln(2K/δ))/((2η)^{1/4}K^{3/4}√T)`, `γ = √(2ηK)`, `α = 1/(KT)`.
///
/// `expected_regret` fixes `δ = 1/T`; elsewhere δ defaults to 0.1 and only
/// the Borda schedule uses it.
pub fn schedule(kind: ScheduleKind, inputs: ScheduleInputs) -> Result<PolicyParams> {
    let ScheduleInputs {
        k_arms,
        t_horizon,
        s_switches,
        v_budget,
        delta,
    } = inputs;
    if k_arms < 2 {
        return Err(Error::TooFewArms { k: k_arms, min: 2 });
    }
    if t_horizon == 0 {
        return Err(Error::InvalidEnvSpec("t_horizon must be >= 1".into()));
    }
    let k = k_arms as f64;
    let t = t_horizon as f64;
    let need_s = || {
        s_switches
            .filter(|&s| s >= 1)
            .map(|s| s as f64)
            .ok_or(Error::MissingScheduleInput {
                schedule: kind.name(),
                missing: "s_switches",
            })
    };
    let mut delta = delta.unwrap_or(DEFAULT_DELTA);
    let (eta, beta, gamma, alpha) = match kind {
        ScheduleKind::Static | ScheduleKind::ExpectedRegret => {
            let eta = 0.5 * (k.ln() / (k * t)).sqrt();
            (eta, (k.ln() / (k * t)).sqrt(), 2.0 * eta * k, 0.0)
        }
        ScheduleKind::SwitchingKnown => {
            let eta = (need_s()? / (k * t)).sqrt();
            (eta, eta, 2.0 * eta * k, 1.0 / t)
        }
        ScheduleKind::SwitchingUnknown => {
            let eta = 1.0 / (k * t).sqrt();
            (eta, eta, 2.0 * eta * k, 1.0 / t)
        }
        ScheduleKind::Continuous => {
            let v = v_budget.ok_or(Error::MissingScheduleInput {
                schedule: kind.name(),
                missing: "v_budget",
            })?;
            let eta = v.cbrt() / (4.0 * k.powf(2.0 / 3.0) * t.cbrt());
            (eta, eta, 2.0 * eta * k, 1.0 / t)
        }
        ScheduleKind::Borda => {
            let s = need_s()?;
            let eta = (s * k.ln() / (t * (2.0 * k).sqrt())).powf(2.0 / 3.0);
            let beta = s.cbrt() * (2.0 * k / delta).ln().sqrt()
                / ((2.0 * eta).powf(0.25) * k.powf(0.75) * t.sqrt());
            (eta, beta, (2.0 * eta * k).sqrt(), 1.0 / (k * t))
        }
        ScheduleKind::Manual => {
            return Err(Error::MissingScheduleInput {
                schedule: "manual",
                missing: "eta, beta, gamma and alpha",
            })
        }
    };
    if kind == ScheduleKind::ExpectedRegret {
        delta = 1.0 / t;
        if delta >= 1.0 {
            delta = 0.5;
        }
    }
    let params = PolicyParams {
        eta,
        beta,
        gamma,
        alpha,
        delta,
        schedule: kind,
    };
    params
        .validate()
        .map_err(|e| Error::ScheduleInvariant(format!("{} at K={k_arms}, T={t_horizon}: {e}", kind.name())))?;
    if !params.exploration_suffices(k_arms) {
        return Err(Error::ScheduleInvariant(format!(
            "{}: exploration γ = {gamma} too small for η = {eta}, β = {beta}",
            kind.name()
        )));
    }
    Ok(params)
}

/// REX3's exploration rate `γ = √(2K ln K/(eT))`, capped at ½.
pub fn rex3_gamma(k_arms: usize, t_horizon: usize) -> f64 {
    let k = k_arms as f64;
    (2.0 * k * k.ln() / (std::f64::consts::E * t_horizon as f64))
        .sqrt()
        .min(0.5)
}
