//! Sampling distributions, reward estimators and weight updates.

use std::f64::consts::E;

use rand::Rng;

use crate::{Error, Result};

/// `p(k) = (1 − γ)·W(k)/ΣW + γ/K`.
pub fn mixed_distribution(weights: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let mut p = vec![0.0; weights.len()];
    mixed_distribution_into(weights, gamma, &mut p)?;
    Ok(p)
}

pub(crate) fn mixed_distribution_into(weights: &[f64], gamma: f64, out: &mut [f64]) -> Result<()> {
    let sum = checked_sum(weights)?;
    let floor = gamma / weights.len() as f64;
    for (p, w) in out.iter_mut().zip(weights) {
        *p = (1.0 - gamma) * (w / sum) + floor;
    }
    Ok(())
}

fn checked_sum(weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (arm, &w) in weights.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::BadWeight { arm, value: w });
        }
        sum += w;
    }
    if !sum.is_finite() {
        return Err(Error::WeightOverflow { arm: 0 });
    }
    Ok(sum)
}

/// Inverse-CDF draw from a probability vector. Consumes one uniform.
#[inline]
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the cumulative sum just below 1
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Importance-weighted reward estimate with additive bias:
/// `(r + β)/p` for the played arm, `β/p` otherwise.
#[inline]
pub fn estimate_g(reward: f64, p_k: f64, chosen: bool, beta: f64) -> Result<f64> {
    if !(p_k > 0.0) {
        return Err(Error::BadProbability { arm: 0, value: p_k });
    }
    Ok(if chosen { (reward + beta) / p_k } else { beta / p_k })
}

/// Borda reward estimate for arm `k`:
/// `1(own = k)/(K·p_own(k)) · o/p_opp(opp) + β/p_own(k)`, where `o` is the
/// outcome from the owner's point of view (owner's arm beat the opponent's).
#[allow(clippy::too_many_arguments)]
pub fn borda_estimate(
    k: usize,
    own_draw: usize,
    opp_draw: usize,
    o: bool,
    p_own: &[f64],
    p_opp: &[f64],
    beta: f64,
    k_arms: usize,
) -> Result<f64> {
    let pk = p_own[k];
    if !(pk > 0.0) {
        return Err(Error::BadProbability { arm: k, value: pk });
    }
    let bias = beta / pk;
    if own_draw != k {
        return Ok(bias);
    }
    let pj = p_opp[opp_draw];
    if !(pj > 0.0) {
        return Err(Error::BadProbability {
            arm: opp_draw,
            value: pj,
        });
    }
    let win = if o { 1.0 } else { 0.0 };
    Ok(win / (k_arms as f64 * pk * pj) + bias)
}

/// `W'(k) = W(k)·exp(η·ĝ(k))`, renormalized to sum 1.
pub fn exp3_update(weights: &[f64], g_hat: &[f64], eta: f64) -> Result<Vec<f64>> {
    let mut w = weights.to_vec();
    update_in_place(&mut w, g_hat, eta, 0.0)?;
    Ok(w)
}

/// `W'(k) = W(k)·exp(η·ĝ(k)) + e·α·ΣW`, renormalized to sum 1.
pub fn dex3s_update(weights: &[f64], g_hat: &[f64], eta: f64, alpha: f64) -> Result<Vec<f64>> {
    let mut w = weights.to_vec();
    update_in_place(&mut w, g_hat, eta, alpha)?;
    Ok(w)
}

/// Shared update. The input is first normalized (both rules are degree-1
/// homogeneous in the weights) and exponents are shifted by their maximum
/// before `exp`. Returns the log of the factor divided out, so that
/// `ln(true weight) = ln(stored weight) + Σ returned values`.
pub(crate) fn update_in_place(weights: &mut [f64], g_hat: &[f64], eta: f64, alpha: f64) -> Result<f64> {
    debug_assert_eq!(weights.len(), g_hat.len());
    let sum = checked_sum(weights)?;
    let mut shift = f64::NEG_INFINITY;
    for (arm, &g) in g_hat.iter().enumerate() {
        let x = eta * g;
        if !x.is_finite() {
            return Err(Error::WeightOverflow { arm });
        }
        shift = shift.max(x);
    }
    let mix = E * alpha * (-shift).exp();
    let mut new_sum = 0.0;
    for (w, &g) in weights.iter_mut().zip(g_hat) {
        *w = (*w / sum) * (eta * g - shift).exp() + mix;
        new_sum += *w;
    }
    for (arm, w) in weights.iter_mut().enumerate() {
        *w /= new_sum;
        if !w.is_finite() {
            return Err(Error::WeightOverflow { arm });
        }
        if *w == 0.0 {
            *w = f64::MIN_POSITIVE;
        }
    }
    Ok(sum.ln() + shift + new_sum.ln())
}
