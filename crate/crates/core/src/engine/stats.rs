//! Binomial confidence intervals for bit error counts.

use crate::error::{domain, Result};
use crate::specfun::q_inverse;

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    wilson_interval_effective(errors, trials, 1.0, confidence)
}

/// Wilson interval with the sample size deflated by a design effect, for
/// bits that are correlated within a frame.
pub fn wilson_interval_effective(
    errors: u64,
    trials: u64,
    design_effect: f64,
    confidence: f64,
) -> Result<(f64, f64)> {
    if trials == 0 || errors > trials {
        return Err(domain(format!(
            "need 0 <= errors <= trials, trials > 0; got {errors}/{trials}"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(domain(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    if !(design_effect.is_finite() && design_effect >= 1.0) {
        return Err(domain(format!(
            "design effect must be >= 1, got {design_effect}"
        )));
    }
    let p = errors as f64 / trials as f64;
    let n = trials as f64 / design_effect;
    let z = q_inverse(0.5 * (1.0 - confidence));
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 {
        0.0
    } else {
        (center - half).max(0.0).min(p)
    };
    let hi = if errors == trials {
        1.0
    } else {
        (center + half).min(1.0).max(p)
    };
    Ok((lo, hi))
}

/// Running per-frame error moments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameTally {
    pub frames: u64,
    pub bit_errors: u64,
    /// Sum of squared per-frame error counts.
    pub sq_errors: u128,
}

impl FrameTally {
    pub fn push(&mut self, errors: u32) {
        self.frames += 1;
        self.bit_errors += errors as u64;
        self.sq_errors += (errors as u128) * (errors as u128);
    }

    /// Ratio of the observed variance of per-frame counts to the binomial
    /// variance for independent bits, floored at 1.
    pub fn design_effect(&self, bits_per_frame: u64) -> f64 {
        if self.frames < 2 || self.bit_errors == 0 || bits_per_frame <= 1 {
            return 1.0;
        }
        let n = self.frames as f64;
        let mean = self.bit_errors as f64 / n;
        let var = (self.sq_errors as f64 - n * mean * mean) / (n - 1.0);
        let p = mean / bits_per_frame as f64;
        let binom = bits_per_frame as f64 * p * (1.0 - p);
        if binom <= 0.0 {
            return 1.0;
        }
        (var / binom).max(1.0)
    }
}
