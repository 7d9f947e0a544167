//! The single Meijer-G instance `G^{3,1}_{2,3}(x | 1-m, 1 ; 0, 1-m, 1/2)`.
//!
//! Reference path: the Mellin-Barnes integral along a vertical line,
//!
//! ```text
//! G(x) = (1/pi) int_0^inf Re[ K(c + i t) x^{-c - i t} ] dt,
//! K(s) = Gamma(1 - m + s) Gamma(1/2 + s) Gamma(m - s) / s,
//! ```
//!
//! with `max(0, m - 1) < c < m`. The kernel decays like `exp(-3 pi |t| / 2)`,
//! so a finite window is enough. A residue series over the left poles serves
//! as an independent cross-check when `m` is neither an integer nor a
//! half-integer.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{ln_gamma_complex, ln_gamma_unchecked};
use super::quadrature::{integrate, QuadratureSpec};
use crate::error::{domain, Result};

/// Upper limit of the contour window; the kernel there is below e^{-180}.
const CONTOUR_T_MAX: f64 = 40.0;

fn contour_abscissa(x: f64, m: f64) -> f64 {
    let lower = (m - 1.0).max(0.0);
    // Leaning towards the dominant poles limits cancellation in the oscillatory integral.
    let frac = if x >= 1.0 { 0.8 } else { 0.2 };
    lower + frac * (m - lower)
}

fn validate(x: f64, m: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(domain(format!(
            "Meijer-G argument must be finite and > 0, got {x}"
        )));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(domain(format!(
            "Meijer-G shape must be finite and > 0, got {m}"
        )));
    }
    Ok(())
}

/// Evaluates `G^{3,1}_{2,3}(x | 1-m, 1 ; 0, 1-m, 1/2)` by contour quadrature.
pub fn meijer_g_2313(x: f64, m: f64) -> Result<f64> {
    validate(x, m)?;
    let c = contour_abscissa(x, m);
    let ln_x = x.ln();
    let one = Complex64::new(1.0, 0.0);
    let integrand = |t: f64| {
        let s = Complex64::new(c, t);
        let ln_k = ln_gamma_complex(s + (1.0 - m))
            + ln_gamma_complex(s + 0.5)
            + ln_gamma_complex(one * m - s)
            - s * ln_x;
        (ln_k.exp() / s).re
    };
    let spec = QuadratureSpec::new(1e-300, 1e-13, 50_000)?;
    Ok(integrate(integrand, 0.0, CONTOUR_T_MAX, &spec)? / PI)
}

/// Real Gamma for any non-pole argument, via reflection on the negative axis.
fn gamma_real(z: f64) -> f64 {
    if z > 0.0 {
        ln_gamma_unchecked(z).exp()
    } else {
        PI / ((PI * z).sin() * ln_gamma_unchecked(1.0 - z).exp())
    }
}

/// Residue-series evaluation; `None` when `m` sits on a pole collision
/// (integer or half-integer) or `x` is large enough for the alternating
/// series to lose accuracy.
pub fn meijer_g_2313_series(x: f64, m: f64) -> Result<Option<f64>> {
    validate(x, m)?;
    let near_grid = |v: f64| (v - v.round()).abs() < 1e-6;
    if near_grid(m) || near_grid(m - 0.5) || x > 8.0 {
        return Ok(None);
    }
    let mut sum = PI.sqrt() * PI / (PI * m).sin();
    let mut quiet = 0;
    for n in 0..600 {
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        // Poles of Gamma(1 - m + s) at s = m - 1 - n.
        let t1 = sign * gamma_real(m - 0.5 - nf) / (m - 1.0 - nf) * x.powf(nf + 1.0 - m);
        // Poles of Gamma(1/2 + s) at s = -1/2 - n.
        let ln_fact = ln_gamma_unchecked(nf + 1.0);
        let t2 = sign * gamma_real(0.5 - m - nf) * gamma_real(m + 0.5 + nf) / (-0.5 - nf)
            * ((nf + 0.5) * x.ln() - ln_fact).exp();
        sum += t1 + t2;
        if (t1 + t2).abs() <= 1e-17 * sum.abs() && nf > x {
            quiet += 1;
            if quiet >= 3 {
                return Ok(Some(sum));
            }
        } else {
            quiet = 0;
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Reference values from an arbitrary-precision evaluation.
    #[allow(clippy::excessive_precision)]
    const REFERENCE: [(f64, f64, f64); 9] = [
        (0.01, 1.5, 15.641_071_206_749_996),
        (0.3, 2.5, 2.818_376_213_733_136_8),
        (1.0, 0.7, 0.986_331_602_237_881_98),
        (2.0, 1.3, 0.208_204_583_256_479_44),
        (5.0, 3.3, 0.004_616_169_899_756_993_9),
        (20.0, 2.5, 0.000_405_526_268_011_083_56),
        (1.0, 2.0, 0.299_608_178_870_408_01),
        (10.0, 3.0, 0.000_890_200_560_135_301_72),
        (0.5, 1.0, 0.945_521_142_892_529_59),
    ];

    #[test]
    fn contour_matches_reference_values() {
        for &(x, m, g) in &REFERENCE {
            assert_relative_eq!(meijer_g_2313(x, m).unwrap(), g, max_relative = 1e-10);
        }
    }

    #[test]
    fn series_matches_reference_where_defined() {
        for &(x, m, g) in &REFERENCE {
            if let Some(v) = meijer_g_2313_series(x, m).unwrap() {
                assert_relative_eq!(v, g, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn contour_and_series_agree_on_grid() {
        let mut compared = 0;
        for i in 0..10 {
            let x = 0.02 * 1.8f64.powi(i);
            for j in 0..10 {
                let m = 0.37 + 0.41 * j as f64;
                let contour = meijer_g_2313(x, m).unwrap();
                if let Some(series) = meijer_g_2313_series(x, m).unwrap() {
                    assert_relative_eq!(contour, series, max_relative = 1e-6);
                    compared += 1;
                }
            }
        }
        assert!(
            compared >= 80,
            "only {compared} grid points had a series value"
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(meijer_g_2313(0.0, 1.0).is_err());
        assert!(meijer_g_2313(1.0, f64::NAN).is_err());
        assert!(meijer_g_2313(f64::INFINITY, 1.0).is_err());
        assert!(meijer_g_2313(1.0, -2.0).is_err());
    }

    #[test]
    fn decays_for_large_argument() {
        let mut prev = meijer_g_2313(1.0, 2.0).unwrap();
        for k in 1..6 {
            let v = meijer_g_2313(10f64.powi(k), 2.0).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }
}
