//! Environment generators.
//!
//! Every generator is a pure function of its [`EnvSpec`] (seed included) and
//! runs lazily through [`EnvStream`], which holds O(K²) matrix state plus
//! O(S) segment bookkeeping regardless of the horizon. [`generate`]
//! materializes the same stream when the whole sequence is wanted.
//!
//! Rounds are 0-indexed: the stream starts at round 0 and each
//! [`EnvStream::advance`] produces the next round's matrix.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::prefmat::{
    PreferenceMatrix, PreferenceSequence, SequenceMeta, VariationTracker,
};
use crate::stream::{split_stream, substream, RandomStreamSpec, StreamLabel, StreamRng};
use crate::{Error, KahanSum, Result};

pub const DEFAULT_WALK_SIGMA: f64 = 0.002;
pub const DEFAULT_SWITCH_SIGMA: f64 = 0.05;

/// Largest admissible lower-bound gap (the instance family needs ε < ¼).
pub const LB_EPSILON_CAP: f64 = 0.25 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    GaussianWalk,
    SwitchingWalk,
    ContinuousBudget,
    LowerBound,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::GaussianWalk => "gaussian_walk",
            EnvKind::SwitchingWalk => "switching_walk",
            EnvKind::ContinuousBudget => "continuous_budget",
            EnvKind::LowerBound => "lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub k: usize,
    pub t_horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_switches: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_budget: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl EnvSpec {
    pub fn new(kind: EnvKind, k: usize, t_horizon: usize, seed: u64) -> Self {
        Self {
            kind,
            k,
            t_horizon,
            sigma: None,
            s_switches: None,
            v_budget: None,
            epsilon: None,
            seed,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn with_switches(mut self, s: usize) -> Self {
        self.s_switches = Some(s);
        self
    }

    pub fn with_budget(mut self, v: f64) -> Self {
        self.v_budget = Some(v);
        self
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    fn sigma_or(&self, default: f64) -> Result<f64> {
        let s = self.sigma.unwrap_or(default);
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidEnvSpec(format!("sigma must be finite and >= 0, got {s}")));
        }
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let min_k = if self.kind == EnvKind::LowerBound { 3 } else { 2 };
        if self.k < min_k {
            return Err(Error::TooFewArms { k: self.k, min: min_k });
        }
        if self.t_horizon == 0 {
            return Err(Error::InvalidEnvSpec("t_horizon must be >= 1".into()));
        }
        match self.kind {
            EnvKind::GaussianWalk => {
                self.sigma_or(DEFAULT_WALK_SIGMA)?;
            }
            EnvKind::SwitchingWalk => {
                self.sigma_or(DEFAULT_SWITCH_SIGMA)?;
                match self.s_switches {
                    Some(s) if s >= 2 => {}
                    other => {
                        return Err(Error::InvalidEnvSpec(format!(
                            "switching_walk needs s_switches >= 2, got {other:?}"
                        )))
                    }
                }
            }
            EnvKind::ContinuousBudget => match self.v_budget {
                Some(v) if v.is_finite() && v >= 0.0 => {}
                other => {
                    return Err(Error::InvalidEnvSpec(format!(
                        "continuous_budget needs finite v_budget >= 0, got {other:?}"
                    )))
                }
            },
            EnvKind::LowerBound => {
                if let Some(e) = self.epsilon {
                    if !(0.0..=0.25).contains(&e) {
                        return Err(Error::InvalidParameter {
                            name: "epsilon",
                            value: e,
                            reason: "lower-bound gap must lie in [0, 0.25]",
                        });
                    }
                }
                if self.s_switches.is_none() && self.v_budget.is_none() {
                    return Err(Error::InvalidEnvSpec(
                        "lower_bound needs s_switches or v_budget".into(),
                    ));
                }
                if self.s_switches == Some(0) {
                    return Err(Error::InvalidEnvSpec("lower_bound needs s_switches >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbKind {
    Switching,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LbEpsilon {
    pub epsilon: f64,
    /// Segment length Δ for the continuous-variation construction.
    pub delta_segment: Option<usize>,
}

/// Gap ε for the lower-bound instance family, clamped below ¼.
///
/// Switching: `ε = ½·√(S(K−1) / (T·ln(4/3)))`.
/// Continuous: `Δ = round(K^{−5/3}·(T/V_T)^{2/3})`, then
/// `ε = min{V_T / (2⌈T/Δ⌉), 1 / (16·√(Δ·K·ln(4/3)))}`.
pub fn lb_epsilon(
    kind: LbKind,
    k: usize,
    t_horizon: usize,
    s_switches: Option<usize>,
    v_budget: Option<f64>,
) -> Result<LbEpsilon> {
    if k < 2 {
        return Err(Error::TooFewArms { k, min: 2 });
    }
    if t_horizon == 0 {
        return Err(Error::InvalidEnvSpec("t_horizon must be >= 1".into()));
    }
    let kf = k as f64;
    let tf = t_horizon as f64;
    let ln43 = (4.0f64 / 3.0).ln();
    let (raw, delta_segment) = match kind {
        LbKind::Switching => {
            let s = s_switches.ok_or(Error::MissingScheduleInput {
                schedule: "lb_epsilon(switching)",
                missing: "s_switches",
            })? as f64;
            (0.5 * (s * (kf - 1.0) / (tf * ln43)).sqrt(), None)
        }
        LbKind::Continuous => {
            let v = v_budget.ok_or(Error::MissingScheduleInput {
                schedule: "lb_epsilon(continuous)",
                missing: "v_budget",
            })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "v_budget",
                    value: v,
                    reason: "must be positive and finite",
                });
            }
            let delta = segment_length(kf, tf, v);
            let segments = t_horizon.div_ceil(delta) as f64;
            let df = delta as f64;
            let eps = (v / (2.0 * segments)).min(1.0 / (16.0 * (df * kf * ln43).sqrt()));
            (eps, Some(delta))
        }
    };
    if !(raw > 0.0) || !raw.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: raw,
            reason: "parameters imply a non-positive gap",
        });
    }
    Ok(LbEpsilon {
        epsilon: raw.min(LB_EPSILON_CAP),
        delta_segment,
    })
}

/// `K^{−5/3}·(T/V)^{2/3}`, rounded half-up, at least 1.
fn segment_length(k: f64, t: f64, v: f64) -> usize {
    let real = k.powf(-5.0 / 3.0) * (t / v).powf(2.0 / 3.0);
    ((real + 0.5).floor() as usize).max(1)
}

/// Segment structure of a lower-bound instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundMeta {
    /// `[0, …, T]`; segment `s` covers `boundaries[s]..boundaries[s + 1]`.
    pub boundaries: Vec<usize>,
    /// Condorcet winner of each segment, never arm 0.
    pub winners: Vec<usize>,
    pub epsilon: f64,
}

impl LowerBoundMeta {
    pub fn segments(&self) -> usize {
        self.winners.len()
    }

    /// The benchmark sequence `j_t = j^s` for `t` in segment `s`.
    pub fn benchmark(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(*self.boundaries.last().unwrap_or(&0));
        for (s, w) in self.winners.iter().enumerate() {
            out.extend(std::iter::repeat_n(*w, self.boundaries[s + 1] - self.boundaries[s]));
        }
        out
    }
}

/// Segment matrix of the lower-bound family with Condorcet winner `winner`.
///
/// For `i < j`: `½+ε` if `i` is the winner or (`i = 0` and `j` is not the
/// winner); `½−ε` if `j` is arm 0 or the winner; `½` otherwise.
pub fn lower_bound_matrix(k: usize, winner: usize, epsilon: f64) -> Result<PreferenceMatrix> {
    let mut m = PreferenceMatrix::uniform(k)?;
    m.check_arm(winner)?;
    for i in 0..k {
        for j in (i + 1)..k {
            let v = if i == winner || (i == 0 && j != winner) {
                0.5 + epsilon
            } else if j == 0 || j == winner {
                0.5 - epsilon
            } else {
                0.5
            };
            m.set_upper(i, j, v);
        }
    }
    Ok(m)
}

/// Near-equal split: the first `T mod S` segments get `⌈T/S⌉` rounds.
fn near_equal_boundaries(t_horizon: usize, segments: usize) -> Vec<usize> {
    let base = t_horizon / segments;
    let extra = t_horizon % segments;
    let mut b = Vec::with_capacity(segments + 1);
    b.push(0);
    for s in 0..segments {
        let len = base + usize::from(s < extra);
        b.push(b[s] + len);
    }
    b
}

enum Driver {
    Walk {
        sigma: f64,
    },
    Switching {
        sigma: f64,
        period: usize,
        max_jumps: usize,
    },
    Budget {
        budget: f64,
        mu_rng: StreamRng,
        mu_total: f64,
        declared: KahanSum,
    },
    LowerBound {
        meta: LowerBoundMeta,
        segment: usize,
    },
}

/// Lazily generated preference sequence.
pub struct EnvStream {
    spec: EnvSpec,
    round: usize,
    current: PreferenceMatrix,
    prev: PreferenceMatrix,
    rng: StreamRng,
    driver: Driver,
    tracker: VariationTracker,
}

impl EnvStream {
    pub fn new(spec: &EnvSpec) -> Result<Self> {
        spec.validate()?;
        let k = spec.k;
        let t = spec.t_horizon;
        let base = split_stream(RandomStreamSpec::new(spec.seed, StreamLabel::Environment, 0));
        let mut rng = base.clone();
        let (current, driver) = match spec.kind {
            EnvKind::GaussianWalk => (
                uniform_start(k, &mut rng)?,
                Driver::Walk {
                    sigma: spec.sigma_or(DEFAULT_WALK_SIGMA)?,
                },
            ),
            EnvKind::SwitchingWalk => {
                let s = spec.s_switches.expect("validated");
                (
                    uniform_start(k, &mut rng)?,
                    Driver::Switching {
                        sigma: spec.sigma_or(DEFAULT_SWITCH_SIGMA)?,
                        period: (t / (s - 1)).max(1),
                        max_jumps: s - 1,
                    },
                )
            }
            EnvKind::ContinuousBudget => {
                let start = uniform_start(k, &mut rng)?;
                // flat Dirichlet over the T-1 transitions: normalized Exp(1) draws,
                // summed in a first pass and replayed in the second
                let mu_rng = substream(&base, 1);
                let mut pass = mu_rng.clone();
                let total: KahanSum = (1..t).map(|_| pass.sample::<f64, _>(Exp1)).collect();
                rng = substream(&base, 2);
                (
                    start,
                    Driver::Budget {
                        budget: spec.v_budget.expect("validated"),
                        mu_rng,
                        mu_total: total.value(),
                        declared: KahanSum::new(),
                    },
                )
            }
            EnvKind::LowerBound => {
                let meta = build_lower_bound_meta(spec, &mut rng)?;
                let first = lower_bound_matrix(k, meta.winners[0], meta.epsilon)?;
                (first, Driver::LowerBound { meta, segment: 0 })
            }
        };
        Ok(Self {
            spec: spec.clone(),
            round: 0,
            prev: current.clone(),
            current,
            rng,
            driver,
            tracker: VariationTracker::default(),
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn horizon(&self) -> usize {
        self.spec.t_horizon
    }

    /// 0-indexed round of [`Self::current`].
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn current(&self) -> &PreferenceMatrix {
        &self.current
    }

    /// Move to the next round. Calling past the horizon is an error.
    pub fn advance(&mut self) -> Result<()> {
        if self.round + 1 >= self.spec.t_horizon {
            return Err(Error::HorizonMismatch {
                expected: self.spec.t_horizon,
                got: self.round + 2,
            });
        }
        self.prev.clone_from(&self.current);
        let k = self.spec.k;
        let next_round = self.round + 1;
        match &mut self.driver {
            Driver::Walk { sigma } => {
                gaussian_step(&mut self.current, *sigma, &mut self.rng);
            }
            Driver::Switching {
                sigma,
                period,
                max_jumps,
            } => {
                if next_round.is_multiple_of(*period) && next_round / *period <= *max_jumps {
                    gaussian_step(&mut self.current, *sigma, &mut self.rng);
                }
            }
            Driver::Budget {
                budget,
                mu_rng,
                mu_total,
                declared,
            } => {
                let e: f64 = mu_rng.sample(Exp1);
                let target = if *mu_total > 0.0 { e / *mu_total * *budget } else { 0.0 };
                declared.add(target);
                budget_step(&mut self.current, k, target, &mut self.rng);
            }
            Driver::LowerBound { meta, segment } => {
                if next_round == meta.boundaries[*segment + 1] {
                    *segment += 1;
                    self.current = lower_bound_matrix(k, meta.winners[*segment], meta.epsilon)?;
                }
            }
        }
        self.round = next_round;
        self.tracker.observe(&self.prev, &self.current)?;
        Ok(())
    }

    /// Segment boundaries `[0, …, T]` when the generator has a piecewise structure.
    pub fn boundaries(&self) -> Option<Vec<usize>> {
        let t = self.spec.t_horizon;
        match &self.driver {
            Driver::Switching {
                period, max_jumps, ..
            } => {
                let mut b: Vec<usize> = (0..=*max_jumps)
                    .map(|c| c * period)
                    .take_while(|&x| x < t)
                    .collect();
                b.push(t);
                Some(b)
            }
            Driver::LowerBound { meta, .. } => Some(meta.boundaries.clone()),
            _ => None,
        }
    }

    pub fn lower_bound_meta(&self) -> Option<&LowerBoundMeta> {
        match &self.driver {
            Driver::LowerBound { meta, .. } => Some(meta),
            _ => None,
        }
    }

    /// Benchmark arm `j_t` of a lower-bound instance at the current round.
    pub fn lb_winner(&self) -> Option<usize> {
        match &self.driver {
            Driver::LowerBound { meta, segment } => Some(meta.winners[*segment]),
            _ => None,
        }
    }

    /// Sum of the pre-clip per-step maxima handed out so far (budget kind).
    pub fn declared_step_total(&self) -> Option<f64> {
        match &self.driver {
            Driver::Budget { declared, .. } => Some(declared.value()),
            _ => None,
        }
    }

    pub fn realized_switches(&self) -> usize {
        self.tracker.switches()
    }

    pub fn realized_variation(&self) -> f64 {
        self.tracker.variation()
    }

    /// Provenance plus the variation realized over the rounds generated so far.
    pub fn meta(&self) -> SequenceMeta {
        let lb = self.lower_bound_meta();
        SequenceMeta {
            generator: Some(self.spec.kind.name().to_string()),
            seed: Some(self.spec.seed),
            s_declared: self
                .spec
                .s_switches
                .or_else(|| lb.map(|m| m.segments())),
            v_declared: self.spec.v_budget,
            s_realized: Some(self.realized_switches()),
            v_realized: Some(self.realized_variation()),
            boundaries: self.boundaries(),
            winners: lb.map(|m| m.winners.clone()),
            epsilon: lb.map(|m| m.epsilon),
        }
    }
}

fn uniform_start(k: usize, rng: &mut StreamRng) -> Result<PreferenceMatrix> {
    let mut m = PreferenceMatrix::uniform(k)?;
    for i in 0..k {
        for j in (i + 1)..k {
            m.set_upper(i, j, rng.random::<f64>());
        }
    }
    Ok(m)
}

/// Perturb the upper triangle by `σ·N(0,1)`, clip to [0,1], refill complements.
fn gaussian_step(m: &mut PreferenceMatrix, sigma: f64, rng: &mut StreamRng) {
    let k = m.k();
    for i in 0..k {
        for j in (i + 1)..k {
            let z: f64 = rng.sample(StandardNormal);
            let v = (m.get(i, j) + sigma * z).clamp(0.0, 1.0);
            m.set_upper(i, j, v);
        }
    }
}

/// Signed uniform perturbation rescaled so its largest magnitude is `target`.
fn budget_step(m: &mut PreferenceMatrix, k: usize, target: f64, rng: &mut StreamRng) {
    let pairs = k * (k - 1) / 2;
    let mut draws = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        draws.push(rng.random_range(-1.0..=1.0f64));
    }
    let peak = draws.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if peak == 0.0 || target == 0.0 {
        return;
    }
    let scale = target / peak;
    let mut it = draws.into_iter();
    for i in 0..k {
        for j in (i + 1)..k {
            let d = it.next().expect("one draw per pair");
            let v = (m.get(i, j) + d * scale).clamp(0.0, 1.0);
            m.set_upper(i, j, v);
        }
    }
}

fn build_lower_bound_meta(spec: &EnvSpec, rng: &mut StreamRng) -> Result<LowerBoundMeta> {
    let t = spec.t_horizon;
    let k = spec.k;
    let (segments, computed_eps) = match (spec.s_switches, spec.v_budget) {
        (Some(s), _) => {
            let eps = match spec.epsilon {
                Some(_) => None,
                None => Some(lb_epsilon(LbKind::Switching, k, t, Some(s), None)?.epsilon),
            };
            (s, eps)
        }
        (None, Some(v)) => {
            let lb = lb_epsilon(LbKind::Continuous, k, t, None, Some(v))?;
            let delta = lb.delta_segment.expect("continuous kind yields Δ");
            (t.div_ceil(delta), Some(lb.epsilon))
        }
        (None, None) => unreachable!("validated"),
    };
    if segments > t {
        return Err(Error::InvalidEnvSpec(format!(
            "{segments} segments do not fit in horizon {t}"
        )));
    }
    let epsilon = spec.epsilon.or(computed_eps).expect("one of the two is set");
    let boundaries = near_equal_boundaries(t, segments);
    let winners = (0..segments).map(|_| rng.random_range(1..k)).collect();
    Ok(LowerBoundMeta {
        boundaries,
        winners,
        epsilon,
    })
}

/// Run a stream to the horizon and keep every matrix.
pub fn generate(spec: &EnvSpec) -> Result<PreferenceSequence> {
    let mut stream = EnvStream::new(spec)?;
    let mut matrices = Vec::with_capacity(spec.t_horizon);
    matrices.push(stream.current().clone());
    for _ in 1..spec.t_horizon {
        stream.advance()?;
        matrices.push(stream.current().clone());
    }
    PreferenceSequence::new(matrices, stream.meta())
}

fn generate_kind(spec: &EnvSpec, kind: EnvKind) -> Result<PreferenceSequence> {
    if spec.kind != kind {
        return Err(Error::InvalidEnvSpec(format!(
            "expected kind {}, got {}",
            kind.name(),
            spec.kind.name()
        )));
    }
    generate(spec)
}

pub fn gaussian_walk(spec: &EnvSpec) -> Result<PreferenceSequence> {
    generate_kind(spec, EnvKind::GaussianWalk)
}

pub fn switching_walk(spec: &EnvSpec) -> Result<PreferenceSequence> {
    generate_kind(spec, EnvKind::SwitchingWalk)
}

pub fn continuous_budget(spec: &EnvSpec) -> Result<PreferenceSequence> {
    generate_kind(spec, EnvKind::ContinuousBudget)
}

pub fn lower_bound_instance(spec: &EnvSpec) -> Result<(PreferenceSequence, LowerBoundMeta)> {
    let seq = generate_kind(spec, EnvKind::LowerBound)?;
    let meta = LowerBoundMeta {
        boundaries: seq.meta.boundaries.clone().expect("lower bound has boundaries"),
        winners: seq.meta.winners.clone().expect("lower bound has winners"),
        epsilon: seq.meta.epsilon.expect("lower bound has epsilon"),
    };
    Ok((seq, meta))
}

/// On-disk form of a sequence. `matrices` holds row-major upper triangles and
/// is omitted when the sequence can be regenerated from `generator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub k: usize,
    pub t_horizon: usize,
    #[serde(default)]
    pub generator: Option<EnvSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub meta: SequenceMeta,
}

impl SequenceFile {
    pub fn from_spec(spec: &EnvSpec, materialize: bool) -> Result<Self> {
        let seq = generate(spec)?;
        let mut file = Self::from_sequence(&seq, materialize);
        file.generator = Some(spec.clone());
        file.seed = Some(spec.seed);
        Ok(file)
    }

    pub fn from_sequence(seq: &PreferenceSequence, materialize: bool) -> Self {
        Self {
            k: seq.k(),
            t_horizon: seq.horizon(),
            generator: None,
            seed: seq.meta.seed,
            matrices: materialize.then(|| seq.matrices().iter().map(|m| m.upper_triangle()).collect()),
            meta: seq.meta.clone(),
        }
    }

    pub fn to_sequence(&self) -> Result<PreferenceSequence> {
        let seq = match (&self.matrices, &self.generator) {
            (Some(rows), _) => {
                if rows.len() != self.t_horizon {
                    return Err(Error::HorizonMismatch {
                        expected: self.t_horizon,
                        got: rows.len(),
                    });
                }
                let ms = rows
                    .iter()
                    .map(|u| PreferenceMatrix::from_upper_slice(self.k, u))
                    .collect::<Result<Vec<_>>>()?;
                PreferenceSequence::new(ms, self.meta.clone())?
            }
            (None, Some(spec)) => generate(spec)?,
            (None, None) => {
                return Err(Error::Serde(
                    "sequence file has neither matrices nor a generator".into(),
                ))
            }
        };
        if seq.k() != self.k {
            return Err(Error::ArmCountMismatch {
                expected: self.k,
                got: seq.k(),
            });
        }
        Ok(seq)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefmat::{condorcet_winner, continuous_variation, switching_variation};

    fn spec(kind: EnvKind, k: usize, t: usize, seed: u64) -> EnvSpec {
        EnvSpec::new(kind, k, t, seed)
    }

    #[test]
    fn zero_sigma_walk_is_constant() {
        let seq = gaussian_walk(&spec(EnvKind::GaussianWalk, 4, 50, 1).with_sigma(0.0)).unwrap();
        assert_eq!(switching_variation(&seq), 0);
        assert_eq!(seq.meta.s_realized, Some(0));
    }

    #[test]
    fn walk_replays_identically() {
        let s = spec(EnvKind::GaussianWalk, 10, 2000, 99);
        let a = SequenceFile::from_spec(&s, true).unwrap().to_json().unwrap();
        let b = SequenceFile::from_spec(&s, true).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        let c = SequenceFile::from_spec(&EnvSpec { seed: 100, ..s }, true)
            .unwrap()
            .to_json()
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn walk_matrices_are_valid_and_tracked() {
        let seq = gaussian_walk(&spec(EnvKind::GaussianWalk, 5, 300, 3).with_sigma(0.2)).unwrap();
        for m in seq.matrices() {
            m.validate().unwrap();
        }
        assert_eq!(seq.meta.s_realized, Some(switching_variation(&seq)));
        let v = continuous_variation(&seq).unwrap();
        assert!((seq.meta.v_realized.unwrap() - v).abs() < 1e-9);
    }

    #[test]
    fn switching_walk_single_period_has_no_interior_change() {
        let s = spec(EnvKind::SwitchingWalk, 4, 100, 5).with_switches(2);
        let seq = switching_walk(&s).unwrap();
        assert_eq!(switching_variation(&seq), 0);
        assert_eq!(seq.meta.boundaries, Some(vec![0, 100]));
    }

    #[test]
    fn switching_walk_changes_only_on_period() {
        for seed in 0..20 {
            let s = spec(EnvKind::SwitchingWalk, 5, 97, seed).with_switches(5);
            let seq = switching_walk(&s).unwrap();
            let period = 97 / 4;
            for t in 1..97 {
                if t % period != 0 {
                    assert_eq!(seq.at(t), seq.at(t - 1), "t = {t}");
                }
            }
            assert!(switching_variation(&seq) <= 4);
            assert_eq!(seq.meta.boundaries, Some(vec![0, 24, 48, 72, 96, 97]));
        }
    }

    #[test]
    fn switching_walk_caps_jumps_when_period_is_short() {
        // T=5, S=4 gives Δ=1; only S-1 = 3 jumps are allowed
        for seed in 0..10 {
            let s = spec(EnvKind::SwitchingWalk, 3, 5, seed).with_switches(4).with_sigma(0.3);
            let seq = switching_walk(&s).unwrap();
            assert!(switching_variation(&seq) <= 3);
            assert_eq!(seq.at(4), seq.at(3));
        }
    }

    #[test]
    fn switching_walk_needs_two_segments() {
        let s = spec(EnvKind::SwitchingWalk, 3, 10, 0).with_switches(1);
        assert!(switching_walk(&s).is_err());
    }

    #[test]
    fn zero_budget_is_constant() {
        let seq = continuous_budget(&spec(EnvKind::ContinuousBudget, 4, 200, 2).with_budget(0.0)).unwrap();
        assert_eq!(switching_variation(&seq), 0);
        assert_eq!(seq.meta.v_realized, Some(0.0));
    }

    #[test]
    fn budget_is_spent_exactly_and_realized_below() {
        for seed in 0..10 {
            let s = spec(EnvKind::ContinuousBudget, 6, 500, seed).with_budget(3.0);
            let mut stream = EnvStream::new(&s).unwrap();
            let mut prev = stream.current().clone();
            let mut acc = 0.0;
            for _ in 1..500 {
                stream.advance().unwrap();
                acc += stream.current().max_abs_diff(&prev).unwrap();
                prev = stream.current().clone();
            }
            assert!((stream.declared_step_total().unwrap() - 3.0).abs() < 1e-9);
            assert!(acc <= 3.0 + 1e-9);
            assert!((stream.realized_variation() - acc).abs() < 1e-9);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let m = lower_bound_matrix(3, 1, 0.1).unwrap();
        assert!((m.get(1, 0) - 0.6).abs() < 1e-12);
        assert!((m.get(1, 2) - 0.6).abs() < 1e-12);
        assert!((m.get(0, 2) - 0.6).abs() < 1e-12);
        assert_eq!(condorcet_winner(&m), Some(1));

        let m = lower_bound_matrix(4, 2, 0.2).unwrap();
        for j in [0, 1, 3] {
            assert!((m.get(2, j) - 0.7).abs() < 1e-12);
        }
        assert!((m.get(0, 1) - 0.7).abs() < 1e-12);
        assert!((m.get(0, 3) - 0.7).abs() < 1e-12);
        assert_eq!(m.get(1, 3), 0.5);

        let m = lower_bound_matrix(5, 3, 0.0).unwrap();
        assert_eq!(m, PreferenceMatrix::uniform(5).unwrap());
        assert_eq!(condorcet_winner(&m), None);
    }

    #[test]
    fn lower_bound_segments_and_winners() {
        let s = spec(EnvKind::LowerBound, 5, 103, 8).with_switches(4).with_epsilon(0.2);
        let (seq, meta) = lower_bound_instance(&s).unwrap();
        assert_eq!(meta.boundaries, vec![0, 26, 52, 78, 103]);
        assert_eq!(meta.benchmark().len(), 103);
        for (seg, w) in meta.winners.iter().enumerate() {
            assert_ne!(*w, 0);
            for t in meta.boundaries[seg]..meta.boundaries[seg + 1] {
                assert_eq!(condorcet_winner(seq.at(t)), Some(*w));
            }
        }
    }

    #[test]
    fn lower_bound_rejects_small_k_and_bad_epsilon() {
        assert!(EnvStream::new(&spec(EnvKind::LowerBound, 2, 10, 0).with_switches(1)).is_err());
        assert!(EnvStream::new(&spec(EnvKind::LowerBound, 3, 10, 0).with_switches(1).with_epsilon(0.3)).is_err());
        assert!(EnvStream::new(&spec(EnvKind::LowerBound, 3, 10, 0).with_switches(1).with_epsilon(-0.1)).is_err());
    }

    #[test]
    fn lower_bound_from_budget_uses_computed_segments() {
        let s = spec(EnvKind::LowerBound, 3, 10_000, 1).with_budget(10.0);
        let (_, meta) = lower_bound_instance(&s).unwrap();
        assert_eq!(meta.segments(), 625);
        assert!((meta.epsilon - 0.008).abs() < 1e-15);
    }

    #[test]
    fn lb_epsilon_switching_value() {
        let e = lb_epsilon(LbKind::Switching, 3, 10_000, Some(2), None).unwrap();
        // ½·√(4 / (10⁴·ln(4/3)))
        assert!((e.epsilon - 0.018_645).abs() < 1e-6);
        assert_eq!(e.delta_segment, None);
    }

    #[test]
    fn lb_epsilon_continuous_value() {
        let e = lb_epsilon(LbKind::Continuous, 3, 10_000, None, Some(10.0)).unwrap();
        assert_eq!(e.delta_segment, Some(16));
        assert!((e.epsilon - 0.008).abs() < 1e-15);
    }

    #[test]
    fn lb_epsilon_clamps_and_errors() {
        let e = lb_epsilon(LbKind::Switching, 10, 10, Some(10), None).unwrap();
        assert_eq!(e.epsilon, LB_EPSILON_CAP);
        assert!(lb_epsilon(LbKind::Switching, 10, 10, Some(0), None).is_err());
        assert!(lb_epsilon(LbKind::Continuous, 10, 10, None, Some(0.0)).is_err());
        assert!(lb_epsilon(LbKind::Continuous, 10, 10, None, None).is_err());
    }

    #[test]
    fn sequence_file_roundtrip_and_regeneration() {
        let s = spec(EnvKind::SwitchingWalk, 3, 40, 4).with_switches(3);
        let full = SequenceFile::from_spec(&s, true).unwrap();
        let lazy = SequenceFile::from_spec(&s, false).unwrap();
        assert!(lazy.matrices.is_none());
        let back = SequenceFile::from_json(&full.to_json().unwrap()).unwrap();
        assert_eq!(back.to_sequence().unwrap(), lazy.to_sequence().unwrap());
        assert!(SequenceFile::from_json(r#"{"k":2,"t_horizon":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn spec_rejects_unknown_fields() {
        let ok = r#"{"kind":"gaussian_walk","k":3,"t_horizon":10,"seed":1}"#;
        assert!(serde_json::from_str::<EnvSpec>(ok).is_ok());
        let bad = r#"{"kind":"gaussian_walk","k":3,"t_horizon":10,"seed":1,"foo":2}"#;
        assert!(serde_json::from_str::<EnvSpec>(bad).is_err());
    }
}
