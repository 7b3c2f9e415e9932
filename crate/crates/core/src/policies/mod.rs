//! Dueling learners.
//!
//! The sparring learners run two exponential-weights players against each
//! other: the row player is rewarded with the duel outcome `o`, the column
//! player with `1 − o`. DEX3.P uses the plain exponential update, DEX3.S adds
//! a share `e·α·ΣW` of the total weight to every arm, and Borda-DEX3.S feeds
//! the DEX3.S update with a Borda-score estimate instead.
//!
//! Within a round the policy stream is consumed in a fixed order (row draw,
//! then column draw); the duel itself draws from the separate outcome stream.

mod rules;
mod schedule;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::prefmat::{sample_outcome, PreferenceMatrix};
use crate::{Error, Result};

pub use rules::{
    borda_estimate, dex3s_update, estimate_g, exp3_update, mixed_distribution, sample_index,
};
pub use schedule::{rex3_gamma, schedule, PolicyParams, ScheduleInputs, ScheduleKind, DEFAULT_DELTA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "DEX3P")]
    Dex3P,
    #[serde(rename = "DEX3S")]
    Dex3S,
    #[serde(rename = "BordaDEX3S")]
    BordaDex3S,
    #[serde(rename = "RAND")]
    Rand,
    #[serde(rename = "REX3")]
    Rex3,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Dex3P => "DEX3P",
            PolicyKind::Dex3S => "DEX3S",
            PolicyKind::BordaDex3S => "BordaDEX3S",
            PolicyKind::Rand => "RAND",
            PolicyKind::Rex3 => "REX3",
        }
    }

    fn default_schedule(self) -> Option<ScheduleKind> {
        match self {
            PolicyKind::Dex3P => Some(ScheduleKind::Static),
            PolicyKind::Dex3S => Some(ScheduleKind::SwitchingKnown),
            PolicyKind::BordaDex3S => Some(ScheduleKind::Borda),
            PolicyKind::Rand | PolicyKind::Rex3 => None,
        }
    }
}

/// Policy configuration as written in experiment files. Explicit parameter
/// fields override the schedule; `manual` requires all four of η, β, γ, α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Label used in result files; defaults to the kind name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            name: None,
            schedule: None,
            eta: None,
            beta: None,
            gamma: None,
            alpha: None,
            delta: None,
        }
    }

    pub fn with_schedule(mut self, s: ScheduleKind) -> Self {
        self.schedule = Some(s);
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    /// Schedule tag as reported in result files (`-` for the baselines).
    pub fn schedule_label(&self) -> &'static str {
        match self.kind {
            PolicyKind::Rand => "-",
            PolicyKind::Rex3 => "rex3",
            _ => self
                .schedule
                .or(self.kind.default_schedule())
                .map(ScheduleKind::name)
                .unwrap_or("-"),
        }
    }

    /// Resolve the schedule against the environment and apply overrides.
    pub fn resolve(&self, inputs: ScheduleInputs) -> Result<PolicyParams> {
        let delta = self.delta.or(inputs.delta);
        let inputs = ScheduleInputs { delta, ..inputs };
        let mut params = match self.kind {
            PolicyKind::Rand => PolicyParams {
                eta: 1.0,
                beta: 0.0,
                gamma: 0.0,
                alpha: 0.0,
                delta: delta.unwrap_or(DEFAULT_DELTA),
                schedule: ScheduleKind::Manual,
            },
            PolicyKind::Rex3 => {
                let gamma = rex3_gamma(inputs.k_arms, inputs.t_horizon);
                PolicyParams {
                    eta: gamma / inputs.k_arms as f64,
                    beta: 0.0,
                    gamma,
                    alpha: 0.0,
                    delta: delta.unwrap_or(DEFAULT_DELTA),
                    schedule: ScheduleKind::Manual,
                }
            }
            _ => {
                let kind = self.schedule.or(self.kind.default_schedule()).expect("sparring kinds have one");
                if kind == ScheduleKind::Manual {
                    match (self.eta, self.beta, self.gamma, self.alpha) {
                        (Some(eta), Some(beta), Some(gamma), Some(alpha)) => PolicyParams {
                            eta,
                            beta,
                            gamma,
                            alpha,
                            delta: delta.unwrap_or(DEFAULT_DELTA),
                            schedule: ScheduleKind::Manual,
                        },
                        _ => {
                            return Err(Error::MissingScheduleInput {
                                schedule: "manual",
                                missing: "eta, beta, gamma and alpha",
                            })
                        }
                    }
                } else {
                    schedule(kind, inputs)?
                }
            }
        };
        if let Some(eta) = self.eta {
            params.eta = eta;
        }
        if let Some(beta) = self.beta {
            params.beta = beta;
        }
        if let Some(gamma) = self.gamma {
            params.gamma = gamma;
            if self.kind == PolicyKind::Rex3 && self.eta.is_none() {
                params.eta = gamma / inputs.k_arms as f64;
            }
        }
        if let Some(alpha) = self.alpha {
            params.alpha = alpha;
        }
        if self.kind == PolicyKind::Dex3P {
            params.alpha = 0.0;
        }
        params.validate()?;
        Ok(params)
    }
}

/// Exponential-weights state of one player. Weights are kept normalized;
/// `log_scale` accumulates the factors divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerState {
    weights: Vec<f64>,
    log_scale: f64,
    probs: Vec<f64>,
    estimates: Vec<f64>,
}

impl PlayerState {
    pub fn new(k: usize) -> Self {
        Self {
            weights: vec![1.0 / k as f64; k],
            log_scale: (k as f64).ln(),
            probs: vec![1.0 / k as f64; k],
            estimates: vec![0.0; k],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln ΣW` of the unnormalized weights.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// Sampling distribution of the most recent round.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Reward estimates of the most recent round.
    pub fn last_estimates(&self) -> &[f64] {
        &self.estimates
    }

    fn prepare(&mut self, gamma: f64) -> Result<()> {
        rules::mixed_distribution_into(&self.weights, gamma, &mut self.probs)
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probs, rng)
    }

    fn apply(&mut self, eta: f64, alpha: f64) -> Result<()> {
        self.log_scale += rules::update_in_place(&mut self.weights, &self.estimates, eta, alpha)?;
        Ok(())
    }

    fn fill_g(&mut self, chosen: usize, reward: f64, beta: f64) -> Result<()> {
        for (k, g) in self.estimates.iter_mut().enumerate() {
            *g = estimate_g(reward, self.probs[k], k == chosen, beta)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub k_plus: usize,
    pub k_minus: usize,
    /// `true` when `k_plus` won the duel.
    pub o: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    params: PolicyParams,
    k: usize,
    row: PlayerState,
    column: PlayerState,
}

impl Policy {
    pub fn new(kind: PolicyKind, k: usize, params: PolicyParams) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewArms { k, min: 2 });
        }
        params.validate()?;
        Ok(Self {
            kind,
            params,
            k,
            row: PlayerState::new(k),
            column: PlayerState::new(k),
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Row player (the single shared state for REX3).
    pub fn row(&self) -> &PlayerState {
        &self.row
    }

    pub fn column(&self) -> &PlayerState {
        &self.column
    }

    /// Scale every stored weight by `c`; the trajectory is unaffected.
    pub fn scale_weights(&mut self, c: f64) {
        for w in self.row.weights.iter_mut().chain(self.column.weights.iter_mut()) {
            *w *= c;
        }
    }

    /// Play one round against `m`.
    pub fn play<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        &mut self,
        m: &PreferenceMatrix,
        policy_rng: &mut R1,
        outcome_rng: &mut R2,
    ) -> Result<RoundOutcome> {
        if m.k() != self.k {
            return Err(Error::ArmCountMismatch {
                expected: self.k,
                got: m.k(),
            });
        }
        match self.kind {
            PolicyKind::Dex3P | PolicyKind::Dex3S | PolicyKind::BordaDex3S => {
                sparring_round(self, m, policy_rng, outcome_rng)
            }
            PolicyKind::Rand => {
                let (k_plus, k_minus) = rand_round(self.k, policy_rng)?;
                let o = sample_outcome(m, k_plus, k_minus, outcome_rng)?;
                Ok(RoundOutcome { k_plus, k_minus, o })
            }
            PolicyKind::Rex3 => rex3_round(self, m, policy_rng, outcome_rng),
        }
    }
}

/// One round of a sparring learner (DEX3.P, DEX3.S or Borda-DEX3.S).
pub fn sparring_round<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    policy: &mut Policy,
    m: &PreferenceMatrix,
    policy_rng: &mut R1,
    outcome_rng: &mut R2,
) -> Result<RoundOutcome> {
    let PolicyParams {
        eta,
        beta,
        gamma,
        alpha,
        ..
    } = policy.params;
    policy.row.prepare(gamma)?;
    policy.column.prepare(gamma)?;
    let k_plus = policy.row.draw(policy_rng);
    let k_minus = policy.column.draw(policy_rng);
    let o = sample_outcome(m, k_plus, k_minus, outcome_rng)?;
    let r = if o { 1.0 } else { 0.0 };
    match policy.kind {
        PolicyKind::Dex3P | PolicyKind::Dex3S => {
            policy.row.fill_g(k_plus, r, beta)?;
            policy.column.fill_g(k_minus, 1.0 - r, beta)?;
        }
        PolicyKind::BordaDex3S => {
            let k = policy.k;
            for arm in 0..k {
                policy.row.estimates[arm] = borda_estimate(
                    arm,
                    k_plus,
                    k_minus,
                    o,
                    &policy.row.probs,
                    &policy.column.probs,
                    beta,
                    k,
                )?;
                policy.column.estimates[arm] = borda_estimate(
                    arm,
                    k_minus,
                    k_plus,
                    !o,
                    &policy.column.probs,
                    &policy.row.probs,
                    beta,
                    k,
                )?;
            }
        }
        PolicyKind::Rand | PolicyKind::Rex3 => {
            return Err(Error::Config(format!("{} is not a sparring learner", policy.kind.name())))
        }
    }
    let mix = if policy.kind == PolicyKind::Dex3P { 0.0 } else { alpha };
    policy.row.apply(eta, mix)?;
    policy.column.apply(eta, mix)?;
    Ok(RoundOutcome { k_plus, k_minus, o })
}

/// Two independent uniform arms.
pub fn rand_round<R: Rng + ?Sized>(k_arms: usize, rng: &mut R) -> Result<(usize, usize)> {
    if k_arms < 2 {
        return Err(Error::TooFewArms { k: k_arms, min: 2 });
    }
    Ok((rng.random_range(0..k_arms), rng.random_range(0..k_arms)))
}

/// One REX3 round: both arms drawn i.i.d. from a single γ-mixed distribution;
/// relative estimates `(o − ½)/p(a)` on the first arm and `(½ − o)/p(b)` on
/// the second feed `W(k) ← W(k)·exp((γ/K)·ĉ(k))`.
pub fn rex3_round<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    policy: &mut Policy,
    m: &PreferenceMatrix,
    policy_rng: &mut R1,
    outcome_rng: &mut R2,
) -> Result<RoundOutcome> {
    let PolicyParams { eta, gamma, .. } = policy.params;
    let state = &mut policy.row;
    state.prepare(gamma)?;
    let a = state.draw(policy_rng);
    let b = state.draw(policy_rng);
    let o = sample_outcome(m, a, b, outcome_rng)?;
    let centered = if o { 0.5 } else { -0.5 };
    state.estimates.iter_mut().for_each(|c| *c = 0.0);
    state.estimates[a] += centered / state.probs[a];
    state.estimates[b] -= centered / state.probs[b];
    state.apply(eta, 0.0)?;
    Ok(RoundOutcome {
        k_plus: a,
        k_minus: b,
        o,
    })
}
