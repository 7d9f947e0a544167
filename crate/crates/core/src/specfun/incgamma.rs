//! Incomplete Gamma functions.
//!
//! Series for `x < s + 1`, modified Lentz continued fraction otherwise. The
//! `x^s e^{-x} / Gamma(s)` prefactor is formed in the log domain so large shapes
//! do not overflow.

use super::gamma::ln_gamma_unchecked;
use crate::error::{domain, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

fn check(s: f64, x: f64) -> Result<()> {
    if !s.is_finite() || s <= 0.0 {
        return Err(domain(format!(
            "incomplete gamma requires finite s > 0, got {s}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// ln of `x^s e^{-x} / Gamma(s)`.
fn ln_prefactor(s: f64, x: f64) -> f64 {
    s * x.ln() - x - ln_gamma_unchecked(s)
}

/// Lower series: P(s, x) = prefactor * sum x^n / (s (s+1) ... (s+n)).
fn p_series(s: f64, x: f64) -> f64 {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (ln_prefactor(s, x) + sum.ln()).exp()
}

/// Upper continued fraction for Q(s, x), valid for x >= s + 1.
fn q_continued_fraction(s: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (ln_prefactor(s, x) + h.ln()).exp()
}

/// Regularized lower incomplete Gamma `P(s, x) = gamma(s, x) / Gamma(s)`.
pub fn regularized_lower_gamma(s: f64, x: f64) -> Result<f64> {
    check(s, x)?;
    Ok(reg_lower_unchecked(s, x))
}

/// Regularized upper incomplete Gamma `Q(s, x) = Gamma(s, x) / Gamma(s)`.
pub fn regularized_upper_gamma(s: f64, x: f64) -> Result<f64> {
    check(s, x)?;
    Ok(reg_upper_unchecked(s, x))
}

pub(crate) fn reg_lower_unchecked(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else if x < s + 1.0 {
        p_series(s, x)
    } else {
        1.0 - q_continued_fraction(s, x)
    }
}

pub(crate) fn reg_upper_unchecked(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else if x < s + 1.0 {
        1.0 - p_series(s, x)
    } else {
        q_continued_fraction(s, x)
    }
}

/// Lower incomplete Gamma `gamma(s, x) = int_0^x t^{s-1} e^{-t} dt`.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check(s, x)?;
    Ok(reg_lower_unchecked(s, x) * ln_gamma_unchecked(s).exp())
}

/// Upper incomplete Gamma `Gamma(s, x) = int_x^inf t^{s-1} e^{-t} dt`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check(s, x)?;
    Ok(reg_upper_unchecked(s, x) * ln_gamma_unchecked(s).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{gamma, integrate, QuadratureSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn upper_at_zero_is_complete_gamma() {
        for &s in &[0.3, 1.0, 2.5, 7.0] {
            assert_relative_eq!(
                upper_incomplete_gamma(s, 0.0).unwrap(),
                gamma(s).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn unit_shape_is_exponential_tail() {
        for &x in &[0.0, 0.1, 1.0, 3.0, 25.0, 200.0] {
            assert_relative_eq!(
                upper_incomplete_gamma(1.0, x).unwrap(),
                (-x).exp(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn integer_shape_finite_sum() {
        // Gamma(n, x) = (n-1)! e^{-x} sum_{k<n} x^k / k!
        assert_relative_eq!(
            upper_incomplete_gamma(3.0, 2.0).unwrap(),
            10.0 * (-2.0f64).exp(),
            max_relative = 1e-13
        );
        for n in 1..8u32 {
            for &x in &[0.2, 1.7, 6.0, 14.0] {
                let mut term = 1.0;
                let mut sum = 1.0;
                for k in 1..n {
                    term *= x / k as f64;
                    sum += term;
                }
                let expected = crate::specfun::factorial(n - 1) * (-x).exp() * sum;
                assert_relative_eq!(
                    upper_incomplete_gamma(n as f64, x).unwrap(),
                    expected,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn matches_quadrature_of_tail_integral() {
        let spec = QuadratureSpec::new(1e-15, 1e-13, 2000).unwrap();
        for &(s, x) in &[(3.0, 2.0), (0.5, 0.7), (2.5, 4.0), (12.3, 9.0)] {
            let q = integrate(|t: f64| t.powf(s - 1.0) * (-t).exp(), 0.0, x, &spec).unwrap();
            assert_relative_eq!(
                lower_incomplete_gamma(s, x).unwrap(),
                q,
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn large_shape_does_not_overflow() {
        let p = regularized_lower_gamma(80.0, 80.0).unwrap();
        assert!(p > 0.45 && p < 0.55);
        assert!(regularized_upper_gamma(300.0, 1.0).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn rejects_invalid_domain() {
        assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
        assert!(lower_incomplete_gamma(f64::NAN, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn lower_plus_upper_is_complete(s in 0.05f64..60.0, x in 0.0f64..120.0) {
            let total = gamma(s).unwrap();
            let sum = lower_incomplete_gamma(s, x).unwrap() + upper_incomplete_gamma(s, x).unwrap();
            prop_assert!(((sum - total) / total).abs() <= 1e-10);
        }

        #[test]
        fn regularized_in_unit_interval(s in 0.05f64..60.0, x in 0.0f64..120.0) {
            let p = regularized_lower_gamma(s, x).unwrap();
            let q = regularized_upper_gamma(s, x).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!((0.0..=1.0).contains(&q));
        }
    }
}
