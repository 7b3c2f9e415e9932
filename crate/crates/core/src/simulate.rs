//! Seeded episode engine.
//!
//! An episode draws from three streams derived from its seed: the
//! environment (inside the generator, keyed by the environment spec's own
//! seed), the policy's arm draws, and the duel outcomes. Regret for every
//! requested (kind, benchmark) pair is accumulated online, so lazy
//! environments never hold more than one matrix plus O(K) accumulators.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::envgen::{EnvSpec, EnvStream};
use crate::policies::{Policy, PolicyConfig, PolicyParams, ScheduleInputs};
use crate::prefmat::{borda_scores_into, PreferenceMatrix, PreferenceSequence, SequenceMeta, VariationTracker};
use crate::regret::{
    argmax_first, borda_terms, duel_terms, step_best, BenchmarkKind, RegretAccumulator, RegretKind,
    RegretReport, Trajectory,
};
use crate::stream::{split_stream, RandomStreamSpec, StreamLabel};
use crate::{Error, Result};

/// Trajectories longer than this are dropped unless retention is forced.
pub const DEFAULT_RETENTION_LIMIT: usize = 100_000;

#[derive(Debug, Clone)]
pub enum EnvSource {
    Spec(EnvSpec),
    Sequence(Arc<PreferenceSequence>),
}

impl EnvSource {
    pub fn k(&self) -> usize {
        match self {
            EnvSource::Spec(s) => s.k,
            EnvSource::Sequence(s) => s.k(),
        }
    }

    pub fn horizon(&self) -> usize {
        match self {
            EnvSource::Spec(s) => s.t_horizon,
            EnvSource::Sequence(s) => s.horizon(),
        }
    }

    fn declared_switches(&self) -> Option<usize> {
        match self {
            EnvSource::Spec(s) => s.s_switches,
            EnvSource::Sequence(s) => s.meta.s_declared,
        }
    }

    fn declared_budget(&self) -> Option<f64> {
        match self {
            EnvSource::Spec(s) => s.v_budget,
            EnvSource::Sequence(s) => s.meta.v_declared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegretRequest {
    pub kind: RegretKind,
    pub benchmark: BenchmarkKind,
}

impl RegretRequest {
    pub fn new(kind: RegretKind, benchmark: BenchmarkKind) -> Self {
        Self { kind, benchmark }
    }

    /// Static regret is only defined against the best fixed arm.
    pub fn is_valid(&self) -> bool {
        self.kind != RegretKind::Static || self.benchmark == BenchmarkKind::BestFixed
    }
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeOptions {
    /// Keep the per-round trajectory; `None` keeps it up to
    /// [`DEFAULT_RETENTION_LIMIT`] rounds.
    pub retain_trajectory: Option<bool>,
    /// Confidence parameter handed to the schedule.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub request: RegretRequest,
    pub report: RegretReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub policy: String,
    pub seed: u64,
    pub k: usize,
    pub t_horizon: usize,
    pub params: PolicyParams,
    pub trajectory: Option<Trajectory>,
    pub reports: Vec<BenchmarkReport>,
    /// Declared and realized environment statistics.
    pub env: SequenceMeta,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl EpisodeResult {
    pub fn report(&self, kind: RegretKind, benchmark: BenchmarkKind) -> Option<&RegretReport> {
        self.reports
            .iter()
            .find(|r| r.request.kind == kind && r.request.benchmark == benchmark)
            .map(|r| &r.report)
    }
}

/// Walks segment boundaries forward as rounds advance.
#[derive(Debug, Clone)]
struct SegmentCursor {
    boundaries: Vec<usize>,
    index: usize,
}

impl SegmentCursor {
    fn new(boundaries: Vec<usize>) -> Self {
        Self { boundaries, index: 0 }
    }

    fn segment_of(&mut self, t: usize) -> usize {
        while t >= self.boundaries[self.index + 1] {
            self.index += 1;
        }
        self.index
    }

    fn is_last_round(&self, t: usize) -> bool {
        t + 1 == self.boundaries[self.index + 1]
    }

    fn count(&self) -> usize {
        self.boundaries.len() - 1
    }
}

enum Feed<'a> {
    Lazy(Box<EnvStream>),
    Stored {
        seq: &'a PreferenceSequence,
        t: usize,
        tracker: VariationTracker,
        winners: Option<SegmentCursor>,
    },
}

impl Feed<'_> {
    fn current(&self) -> &PreferenceMatrix {
        match self {
            Feed::Lazy(s) => s.current(),
            Feed::Stored { seq, t, .. } => seq.at(*t),
        }
    }

    fn advance(&mut self) -> Result<()> {
        match self {
            Feed::Lazy(s) => s.advance(),
            Feed::Stored { seq, t, tracker, .. } => {
                tracker.observe(seq.at(*t), seq.at(*t + 1))?;
                *t += 1;
                Ok(())
            }
        }
    }

    fn boundaries(&self) -> Option<Vec<usize>> {
        match self {
            Feed::Lazy(s) => s.boundaries(),
            Feed::Stored { seq, .. } => seq.meta.boundaries.clone(),
        }
    }

    fn lb_winner(&mut self) -> Option<usize> {
        match self {
            Feed::Lazy(s) => s.lb_winner(),
            Feed::Stored {
                seq, t, winners, ..
            } => {
                let cursor = winners.as_mut()?;
                let s = cursor.segment_of(*t);
                seq.meta.winners.as_ref().map(|w| w[s])
            }
        }
    }

    fn meta(&self) -> SequenceMeta {
        match self {
            Feed::Lazy(s) => s.meta(),
            Feed::Stored { seq, tracker, .. } => SequenceMeta {
                s_realized: Some(tracker.switches()),
                v_realized: Some(tracker.variation()),
                ..seq.meta.clone()
            },
        }
    }
}

/// Running best-arm-in-hindsight over segments: one accumulator per arm,
/// settled into `settled` at each segment end.
struct HindsightTracker {
    cursor: SegmentCursor,
    per_arm: Vec<RegretAccumulator>,
    settled: RegretAccumulator,
    chosen: Vec<usize>,
}

impl HindsightTracker {
    fn new(k: usize, boundaries: Vec<usize>) -> Self {
        Self {
            cursor: SegmentCursor::new(boundaries),
            per_arm: vec![RegretAccumulator::new(); k],
            settled: RegretAccumulator::new(),
            chosen: Vec::new(),
        }
    }

    fn add<F: Fn(usize) -> (f64, f64, f64)>(&mut self, t: usize, terms: F) {
        self.cursor.segment_of(t);
        for (j, acc) in self.per_arm.iter_mut().enumerate() {
            acc.add(terms(j));
        }
        if self.cursor.is_last_round(t) {
            let best = argmax_first(self.per_arm.iter().map(RegretAccumulator::total));
            if self.cursor.count() == 1 {
                self.settled = std::mem::take(&mut self.per_arm[best]);
            } else {
                self.settled.merge_values(&self.per_arm[best]);
            }
            self.chosen.push(best);
            self.per_arm.iter_mut().for_each(|a| *a = RegretAccumulator::new());
        }
    }

    fn finish(self, kind: RegretKind) -> RegretReport {
        let description = match self.chosen.as_slice() {
            [j] => format!("arm {j}"),
            many => format!("best arm per segment over {} segments", many.len()),
        };
        self.settled.report(kind, description)
    }
}

enum Tracker {
    Hindsight(HindsightTracker),
    Online(RegretAccumulator),
}

struct RequestState {
    request: RegretRequest,
    tracker: Tracker,
}

/// Run one episode.
pub fn run_episode(
    env: &EnvSource,
    policy_config: &PolicyConfig,
    seed: u64,
    requests: &[RegretRequest],
    options: &EpisodeOptions,
) -> Result<EpisodeResult> {
    let started = Instant::now();
    let k = env.k();
    let t_horizon = env.horizon();
    let mut feed = match env {
        EnvSource::Spec(spec) => Feed::Lazy(Box::new(EnvStream::new(spec)?)),
        EnvSource::Sequence(seq) => Feed::Stored {
            seq,
            t: 0,
            tracker: VariationTracker::default(),
            winners: match (&seq.meta.boundaries, &seq.meta.winners) {
                (Some(b), Some(_)) => Some(SegmentCursor::new(b.clone())),
                _ => None,
            },
        },
    };

    let mut inputs = ScheduleInputs::new(k, t_horizon);
    inputs.s_switches = env.declared_switches();
    inputs.v_budget = env.declared_budget();
    inputs.delta = options.delta;
    let params = policy_config.resolve(inputs)?;
    let mut policy = Policy::new(policy_config.kind, k, params)?;

    let mut states = Vec::with_capacity(requests.len());
    for &request in requests {
        if !request.is_valid() {
            return Err(Error::Config(format!(
                "{} regret needs the best_fixed benchmark, got {}",
                request.kind.name(),
                request.benchmark.name()
            )));
        }
        let tracker = match request.benchmark {
            BenchmarkKind::BestFixed => Tracker::Hindsight(HindsightTracker::new(k, vec![0, t_horizon])),
            BenchmarkKind::PerInterval => Tracker::Hindsight(HindsightTracker::new(
                k,
                feed.boundaries().unwrap_or_else(|| vec![0, t_horizon]),
            )),
            BenchmarkKind::PerStep => Tracker::Online(RegretAccumulator::with_curve(t_horizon)),
            BenchmarkKind::LbBenchmark => {
                if feed.lb_winner().is_none() {
                    return Err(Error::BenchmarkUnavailable("lb_benchmark"));
                }
                Tracker::Online(RegretAccumulator::with_curve(t_horizon))
            }
        };
        states.push(RequestState { request, tracker });
    }
    let needs_borda = requests.iter().any(|r| r.kind == RegretKind::BordaDynamic);

    let retain = options
        .retain_trajectory
        .unwrap_or(t_horizon <= DEFAULT_RETENTION_LIMIT);
    let mut rounds = Vec::with_capacity(if retain { t_horizon } else { 0 });
    let mut policy_rng = split_stream(RandomStreamSpec::new(seed, StreamLabel::Policy, 0));
    let mut outcome_rng = split_stream(RandomStreamSpec::new(seed, StreamLabel::Outcome, 0));
    let mut scores = Vec::with_capacity(k);

    for t in 0..t_horizon {
        if t > 0 {
            feed.advance()?;
        }
        let winner = feed.lb_winner();
        let m = feed.current();
        let r = policy.play(m, &mut policy_rng, &mut outcome_rng)?;
        let (a, b) = (r.k_plus, r.k_minus);
        if needs_borda {
            borda_scores_into(m, false, &mut scores);
        }
        for state in &mut states {
            let borda = state.request.kind == RegretKind::BordaDynamic;
            match &mut state.tracker {
                Tracker::Hindsight(h) => {
                    if borda {
                        h.add(t, |j| borda_terms(&scores, j, a, b));
                    } else {
                        h.add(t, |j| duel_terms(m, j, a, b));
                    }
                }
                Tracker::Online(acc) => {
                    let j = match state.request.benchmark {
                        BenchmarkKind::LbBenchmark => winner.expect("checked at setup"),
                        _ if borda => argmax_first(scores.iter().copied()),
                        _ => step_best(m, a, b),
                    };
                    acc.add(if borda {
                        borda_terms(&scores, j, a, b)
                    } else {
                        duel_terms(m, j, a, b)
                    });
                }
            }
        }
        if retain {
            rounds.push(r);
        }
    }

    let reports = states
        .into_iter()
        .map(|s| {
            let kind = s.request.kind;
            let report = match s.tracker {
                Tracker::Hindsight(h) => h.finish(kind),
                Tracker::Online(acc) => {
                    let description = match s.request.benchmark {
                        BenchmarkKind::LbBenchmark => "planted segment winners",
                        _ => "best response per round",
                    };
                    acc.report(kind, description.to_string())
                }
            };
            BenchmarkReport {
                request: s.request,
                report,
            }
        })
        .collect();

    let label = policy_config.label();
    Ok(EpisodeResult {
        trajectory: retain.then(|| Trajectory {
            t_horizon,
            rounds,
            policy: label.clone(),
            seed,
        }),
        policy: label,
        seed,
        k,
        t_horizon,
        params,
        reports,
        env: feed.meta(),
        wall_time: started.elapsed(),
    })
}
