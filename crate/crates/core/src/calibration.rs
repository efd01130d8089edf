//! Per-context statistics: variance-balancing weights and the clamped
//! rejection threshold.
//!
//! The threshold is a percentile of the finite normalized junction costs
//! observed under one context, inflated by a margin and clamped to
//! `[tau_min, tau_max]`:
//!
//! ```text
//! raw     = percentile_p(costs) * (1 + delta)
//! clamped = min(tau_max, max(tau_min, raw))
//! ```
//!
//! Barrier junctions never enter the sample.

use serde::{Deserialize, Serialize};

use crate::config::CalibrationConfig;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSample {
    /// Finite normalized junction totals.
    pub finite_costs: Vec<f64>,
    pub infinite_count: usize,
    /// Finite raw values of each proxy: struct, curv, logic.
    pub per_proxy_values: [Vec<f64>; 3],
}

impl CalibrationSample {
    pub fn push_total(&mut self, total: f64) {
        if total.is_finite() {
            self.finite_costs.push(total);
        } else {
            self.infinite_count += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationWeights {
    pub w_struct: f64,
    pub w_curv: f64,
    pub w_logic: f64,
}

impl NormalizationWeights {
    pub fn unit() -> Self {
        Self {
            w_struct: 1.0,
            w_curv: 1.0,
            w_logic: 1.0,
        }
    }

    /// Weighted sum; infinite whenever `tau_struct` is.
    pub fn combine(&self, tau_struct: f64, tau_curv: f64, tau_logic: f64) -> f64 {
        if tau_struct.is_infinite() {
            return f64::INFINITY;
        }
        self.w_struct * tau_struct + self.w_curv * tau_curv + self.w_logic * tau_logic
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub raw: f64,
    pub clamped: f64,
}

/// Population standard deviation over the finite entries; `None` when there are none.
pub fn population_std(values: &[f64]) -> Option<f64> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return None;
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(var.sqrt())
}

/// `w_k = 1 / max(σ_k, sigma_floor)`.
pub fn normalization_weights(
    per_proxy_values: &[Vec<f64>; 3],
    sigma_floor: f64,
) -> NormalizationWeights {
    let w = |values: &[f64]| {
        let sigma = population_std(values).unwrap_or(0.0);
        1.0 / sigma.max(sigma_floor)
    };
    NormalizationWeights {
        w_struct: w(&per_proxy_values[0]),
        w_curv: w(&per_proxy_values[1]),
        w_logic: w(&per_proxy_values[2]),
    }
}

/// Linear-interpolation percentile of an ascending, finite, nonempty slice:
/// position `(p/100)(N-1)`, interpolating between its neighbours.
pub fn percentile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let pos = (p / 100.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 >= sorted.len() {
        return Ok(sorted[sorted.len() - 1]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

pub fn calibrate_threshold(sample: &CalibrationSample, cfg: &CalibrationConfig) -> Threshold {
    let mut costs: Vec<f64> = sample
        .finite_costs
        .iter()
        .copied()
        .filter(|c| c.is_finite())
        .collect();
    let raw = if costs.is_empty() {
        0.0
    } else {
        costs.sort_by(f64::total_cmp);
        percentile(&costs, cfg.percentile_p).expect("nonempty") * (1.0 + cfg.delta_margin)
    };
    Threshold {
        raw,
        clamped: raw.max(cfg.tau_min).min(cfg.tau_max),
    }
}
