use super::incgamma::reg_upper_unchecked;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Uses `Q(x) = Gamma(1/2, x^2/2) / (2 sqrt(pi))` on the right half-line so the
/// tail keeps full relative precision; the left half comes from symmetry.
pub fn q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    if x >= 0.0 {
        0.5 * reg_upper_unchecked(0.5, 0.5 * x * x)
    } else {
        1.0 - q_function(-x)
    }
}

/// Complementary error function for `x >= 0`, via `erfc(x) = 2 Q(x sqrt 2)`.
pub fn erfc(x: f64) -> f64 {
    2.0 * q_function(x * std::f64::consts::SQRT_2)
}

/// Inverse of [`q_function`] by bisection; `p` must lie in (0, 1).
pub fn q_inverse(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}
