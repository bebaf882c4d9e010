//! Per-group sample size for a one-way fixed-effects ANOVA F test.

use serde::{Deserialize, Serialize};

use super::dist::{f_isf, noncentral_f_sf};
use crate::error::{Error, Result};

pub const N_MIN: f64 = 1.01;
pub const N_MAX: f64 = 1e6;
const N_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    /// Cohen's f.
    pub effect_size: f64,
    pub groups: usize,
    pub alpha: f64,
    pub power: f64,
}

impl PowerSpec {
    pub fn new(effect_size: f64, groups: usize) -> Self {
        Self {
            effect_size,
            groups,
            alpha: 0.05,
            power: 0.8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.effect_size >= 0.0 && self.effect_size.is_finite()) {
            return Err(Error::param("effect_size", "must be finite and non-negative"));
        }
        if self.groups < 2 {
            return Err(Error::param("groups", "at least two groups are required"));
        }
        for (name, v) in [("alpha", self.alpha), ("power", self.power)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, "must lie strictly between 0 and 1"));
            }
        }
        Ok(())
    }

    /// Power at `n` observations per group (`n` may be fractional).
    pub fn power_at(&self, n: f64) -> f64 {
        let k = self.groups as f64;
        let df1 = k - 1.0;
        let df2 = k * (n - 1.0);
        if df2 <= 0.0 {
            return 0.0;
        }
        let crit = f_isf(self.alpha, df1, df2);
        noncentral_f_sf(crit, df1, df2, self.effect_size.powi(2) * k * n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSolution {
    /// Continuous per-group size where power reaches the target.
    pub n: f64,
    /// Smallest whole per-group size reaching the target.
    pub n_ceil: u64,
    pub achieved_power: f64,
}

/// Bisects `n ∈ [1.01, 1e6]` for the target power.
pub fn anova_power_required_n(spec: &PowerSpec) -> Result<PowerSolution> {
    spec.validate()?;
    let target = spec.power;
    if spec.power_at(N_MAX) < target {
        return Err(Error::param(
            "power",
            format!("target {target} is unattainable with at most {N_MAX} observations per group"),
        ));
    }
    let (mut lo, mut hi) = (N_MIN, N_MAX);
    if spec.power_at(lo) >= target {
        hi = lo;
    }
    while hi - lo > N_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if spec.power_at(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut n_ceil = hi.ceil() as u64;
    while spec.power_at(n_ceil as f64) < target {
        n_ceil += 1;
    }
    Ok(PowerSolution {
        n: hi,
        n_ceil,
        achieved_power: spec.power_at(n_ceil as f64),
    })
}
