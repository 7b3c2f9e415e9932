use serde::Serialize;

use crate::config::Axis;
use crate::output::AggregateRow;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slope {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub std_error: f64,
    pub used: usize,
    pub excluded: usize,
}

/// OLS fit of `ln mean` on `ln x` for one series of aggregate rows, where `x`
/// is the horizon or the arm count. Non-positive and non-finite means are
/// dropped with a warning; static regret may legitimately be negative.
pub fn loglog_slope(rows: &[AggregateRow], axis: Axis) -> Result<Slope> {
    if let Some(first) = rows.first() {
        let same = |r: &AggregateRow| {
            r.policy == first.policy
                && r.regret_kind == first.regret_kind
                && r.benchmark == first.benchmark
                && r.experiment == first.experiment
        };
        if let Some(r) = rows.iter().find(|r| !same(r)) {
            return Err(HarnessError::MixedSeries(format!(
                "{}/{}/{} next to {}/{}/{}",
                first.policy,
                first.regret_kind.name(),
                first.benchmark.name(),
                r.policy,
                r.regret_kind.name(),
                r.benchmark.name()
            )));
        }
    }
    let mut pts = Vec::with_capacity(rows.len());
    for r in rows {
        let x = match axis {
            Axis::T => r.t,
            Axis::K => r.k,
        } as f64;
        if r.mean > 0.0 && r.mean.is_finite() {
            pts.push((x.ln(), r.mean.ln()));
        } else {
            log::warn!(
                "{}: dropping {}={} with mean regret {} from the log-log fit",
                r.policy,
                axis.name(),
                x,
                r.mean
            );
        }
    }
    let excluded = rows.len() - pts.len();
    if pts.len() < 3 {
        return Err(HarnessError::TooFewPoints(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::TooFewPoints(1));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (sse / (n - 2.0) / sxx).sqrt();
    Ok(Slope {
        slope,
        intercept,
        std_error,
        used: pts.len(),
        excluded,
    })
}
