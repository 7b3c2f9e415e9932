//! Preference matrices, variation measures, winner notions and duel sampling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, KahanSum, Result};

/// Entrywise tolerance for matrix equality and the complement invariant.
pub const EQ_TOL: f64 = 1e-12;

/// Dense K×K matrix of pairwise win probabilities.
///
/// `get(a, b)` is the probability that arm `a` beats arm `b`. The diagonal is
/// fixed at 0.5 and `get(a, b) + get(b, a) == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMatrix {
    k: usize,
    p: Vec<f64>,
}

impl PreferenceMatrix {
    /// The matrix where every duel is a coin flip.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::TooFewArms { k, min: 2 });
        }
        Ok(Self {
            k,
            p: vec![0.5; k * k],
        })
    }

    /// Build from the strict upper triangle keyed by `(i, j)` with `i < j`.
    pub fn from_upper_triangle(k: usize, entries: &BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let mut m = Self::uniform(k)?;
        for i in 0..k {
            for j in (i + 1)..k {
                let v = *entries.get(&(i, j)).ok_or(Error::MissingPair { i, j })?;
                check_probability(i, j, v)?;
                m.set_upper(i, j, v);
            }
        }
        Ok(m)
    }

    /// Build from the row-major upper triangle `(0,1), (0,2), …, (0,K-1), (1,2), …`.
    pub fn from_upper_slice(k: usize, upper: &[f64]) -> Result<Self> {
        let mut m = Self::uniform(k)?;
        let want = k * (k - 1) / 2;
        if upper.len() != want {
            return Err(Error::ArmCountMismatch {
                expected: want,
                got: upper.len(),
            });
        }
        let mut it = upper.iter();
        for i in 0..k {
            for j in (i + 1)..k {
                let v = *it.next().expect("length checked");
                check_probability(i, j, v)?;
                m.set_upper(i, j, v);
            }
        }
        Ok(m)
    }

    /// Build from full rows, checking every invariant.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if k < 2 {
            return Err(Error::TooFewArms { k, min: 2 });
        }
        let mut p = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::ArmCountMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            p.extend_from_slice(row);
        }
        let m = Self { k, p };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.k {
            if (self.get(i, i) - 0.5).abs() > EQ_TOL {
                return Err(Error::InvalidMatrix {
                    i,
                    j: i,
                    what: "diagonal = 0.5",
                });
            }
            for j in 0..self.k {
                let v = self.get(i, j);
                check_probability(i, j, v)?;
                if (v + self.get(j, i) - 1.0).abs() > EQ_TOL {
                    return Err(Error::InvalidMatrix {
                        i,
                        j,
                        what: "complement symmetry",
                    });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.k + b]
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[f64] {
        &self.p[a * self.k..(a + 1) * self.k]
    }

    /// Set `P(i, j) = v` and `P(j, i) = 1 - v`. Callers guarantee `v ∈ [0, 1]`.
    #[inline]
    pub(crate) fn set_upper(&mut self, i: usize, j: usize, v: f64) {
        self.p[i * self.k + j] = v;
        self.p[j * self.k + i] = 1.0 - v;
    }

    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k * (self.k - 1) / 2);
        for i in 0..self.k {
            for j in (i + 1)..self.k {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.k != other.k {
            return Err(Error::ArmCountMismatch {
                expected: self.k,
                got: other.k,
            });
        }
        Ok(self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Equality up to [`EQ_TOL`] in every entry.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.k == other.k && self.p.iter().zip(&other.p).all(|(a, b)| (a - b).abs() <= EQ_TOL)
    }

    pub fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.k {
            Err(Error::ArmOutOfRange { arm, k: self.k })
        } else {
            Ok(())
        }
    }

    /// CSV with header `i,j,p` and one row per ordered pair (diagonal included).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,p\n");
        for i in 0..self.k {
            for j in 0..self.k {
                writeln!(s, "{},{},{}", i, j, self.get(i, j)).expect("write to String");
            }
        }
        s
    }
}

fn check_probability(i: usize, j: usize, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange { i, j, value: v })
    }
}

/// The arm that beats every other arm with probability strictly above ½.
pub fn condorcet_winner(m: &PreferenceMatrix) -> Option<usize> {
    (0..m.k()).find(|&w| (0..m.k()).all(|j| j == w || m.get(w, j) > 0.5))
}

/// Borda scores. Unshifted: mean win probability against the other K−1 arms.
/// Shifted: mean over all K arms including the self-duel at ½.
pub fn borda_scores(m: &PreferenceMatrix, shifted: bool) -> Vec<f64> {
    let k = m.k();
    let mut out = Vec::with_capacity(k);
    borda_scores_into(m, shifted, &mut out);
    out
}

pub(crate) fn borda_scores_into(m: &PreferenceMatrix, shifted: bool, out: &mut Vec<f64>) {
    let k = m.k();
    out.clear();
    for i in 0..k {
        let row_sum: f64 = m.row(i).iter().sum();
        out.push(if shifted {
            row_sum / k as f64
        } else {
            (row_sum - m.get(i, i)) / (k - 1) as f64
        });
    }
}

/// One Bernoulli duel: `true` when `a` beats `b`. Consumes exactly one draw.
#[inline]
pub fn sample_outcome<R: Rng + ?Sized>(
    m: &PreferenceMatrix,
    a: usize,
    b: usize,
    rng: &mut R,
) -> Result<bool> {
    m.check_arm(a)?;
    m.check_arm(b)?;
    let u: f64 = rng.random();
    Ok(u < m.get(a, b))
}

/// Provenance and realized statistics attached to a sequence.
///
/// Times are 0-indexed rounds; `boundaries` is `[0, …, T]` so segment `s`
/// covers rounds `boundaries[s]..boundaries[s + 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_declared: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_declared: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_realized: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_realized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winners: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Materialized sequence of T preference matrices sharing one arm count.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceSequence {
    k: usize,
    matrices: Vec<PreferenceMatrix>,
    pub meta: SequenceMeta,
}

impl PreferenceSequence {
    pub fn new(matrices: Vec<PreferenceMatrix>, meta: SequenceMeta) -> Result<Self> {
        let k = matrices
            .first()
            .ok_or_else(|| Error::InvalidEnvSpec("sequence must hold at least one matrix".into()))?
            .k();
        if let Some(m) = matrices.iter().find(|m| m.k() != k) {
            return Err(Error::ArmCountMismatch {
                expected: k,
                got: m.k(),
            });
        }
        if let Some(b) = &meta.boundaries {
            check_boundaries(b, matrices.len())?;
        }
        Ok(Self { k, matrices, meta })
    }

    pub fn constant(m: PreferenceMatrix, t_horizon: usize) -> Result<Self> {
        Self::new(vec![m; t_horizon], SequenceMeta::default())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn horizon(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[PreferenceMatrix] {
        &self.matrices
    }

    pub fn at(&self, t: usize) -> &PreferenceMatrix {
        &self.matrices[t]
    }
}

/// Segment boundaries must read `[0, …, T]`, strictly increasing.
pub fn check_boundaries(b: &[usize], t_horizon: usize) -> Result<()> {
    if b.len() < 2 {
        return Err(Error::InvalidBoundaries("need at least two entries".into()));
    }
    if b[0] != 0 {
        return Err(Error::InvalidBoundaries(format!("first boundary is {}, not 0", b[0])));
    }
    if *b.last().expect("len >= 2") != t_horizon {
        return Err(Error::InvalidBoundaries(format!(
            "last boundary is {}, not T = {t_horizon}",
            b.last().expect("len >= 2")
        )));
    }
    if b.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidBoundaries("not strictly increasing".into()));
    }
    Ok(())
}

/// Number of rounds `t ≥ 1` at which `P_t` differs from `P_{t-1}`.
pub fn switching_variation(seq: &PreferenceSequence) -> usize {
    seq.matrices
        .windows(2)
        .filter(|w| !w[0].approx_eq(&w[1]))
        .count()
}

/// Sum over consecutive pairs of the largest absolute entry change.
pub fn continuous_variation(seq: &PreferenceSequence) -> Result<f64> {
    let mut acc = KahanSum::new();
    for w in seq.matrices.windows(2) {
        acc.add(w[1].max_abs_diff(&w[0])?);
    }
    Ok(acc.value())
}

/// Online S and V_T for sequences that are never materialized.
#[derive(Debug, Clone, Default)]
pub struct VariationTracker {
    switches: usize,
    variation: KahanSum,
}

impl VariationTracker {
    pub fn observe(&mut self, prev: &PreferenceMatrix, next: &PreferenceMatrix) -> Result<()> {
        let d = next.max_abs_diff(prev)?;
        if d > EQ_TOL {
            self.switches += 1;
        }
        self.variation.add(d);
        Ok(())
    }

    pub fn switches(&self) -> usize {
        self.switches
    }

    pub fn variation(&self) -> f64 {
        self.variation.value()
    }
}
