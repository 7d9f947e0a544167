//! Diversity order from BER slopes and its closed-form approximations.

use serde::{Deserialize, Serialize};

use crate::engine::BerCurve;
use crate::error::{domain, Error, Result};

/// Default slope window in dB.
pub const DEFAULT_WINDOW: (f64, f64) = (10.0, 20.0);
/// Window approaching the asymptote, for analytic curves only.
pub const ASYMPTOTIC_WINDOW: (f64, f64) = (30.0, 40.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub label: String,
    pub snr_pair: (f64, f64),
    /// Slope of the simulated curve; absent for analytic-only reports.
    pub gd_empirical: Option<f64>,
    /// Slope of the closed-form curve over the same window.
    pub gd_analytic: Option<f64>,
    pub gd_approx: f64,
}

/// `-(log10 b2 - log10 b1) / (log10 g2 - log10 g1)` between two `(dB, BER)` points.
pub fn slope_between(p1: (f64, f64), p2: (f64, f64)) -> Result<f64> {
    let ((s1, b1), (s2, b2)) = (p1, p2);
    for (s, b) in [(s1, b1), (s2, b2)] {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InsufficientErrors { snr_db: s });
        }
    }
    if s1 == s2 {
        return Err(domain("slope needs two distinct SNR points"));
    }
    // dB / 10 = log10 of the linear SNR
    Ok(-(b2.log10() - b1.log10()) / ((s2 - s1) / 10.0))
}

fn lookup(curve: &BerCurve, snr_db: f64, analytic: bool) -> Result<f64> {
    let p = curve
        .points
        .iter()
        .find(|p| p.snr_db == snr_db)
        .ok_or_else(|| domain(format!("{snr_db} dB is not a point of the curve")))?;
    if analytic {
        p.ber_analytic.ok_or(Error::InsufficientErrors { snr_db })
    } else {
        Ok(p.ber)
    }
}

/// Empirical diversity order of the simulated curve.
pub fn empirical_gd(curve: &BerCurve, snr1_db: f64, snr2_db: f64) -> Result<f64> {
    slope_between(
        (snr1_db, lookup(curve, snr1_db, false)?),
        (snr2_db, lookup(curve, snr2_db, false)?),
    )
}

/// Same slope on the attached analytic values.
pub fn analytic_gd(curve: &BerCurve, snr1_db: f64, snr2_db: f64) -> Result<f64> {
    slope_between(
        (snr1_db, lookup(curve, snr1_db, true)?),
        (snr2_db, lookup(curve, snr2_db, true)?),
    )
}

/// `P * min_p m_p`.
pub fn siso_gd_approx(shapes: &[f64]) -> Result<f64> {
    if shapes.is_empty() {
        return Err(domain("at least one path shape is required"));
    }
    Ok(shapes.len() as f64 * shapes.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `K_u [min_p m + (log2(1 + P) / P) sum_p (m_p - min_p m)]` with the same
/// path shapes on every branch.
pub fn simo_gd_approx(users: usize, shapes: &[f64]) -> Result<f64> {
    if users == 0 || shapes.is_empty() {
        return Err(domain("need K_u >= 1 and at least one path shape"));
    }
    let p = shapes.len() as f64;
    let min = shapes.iter().copied().fold(f64::INFINITY, f64::min);
    let excess: f64 = shapes.iter().map(|m| m - min).sum();
    Ok(users as f64 * (min + (1.0 + p).log2() / p * excess))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{BerPoint, Mode, Waveform};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn curve(points: &[(f64, f64)]) -> BerCurve {
        BerCurve {
            waveform: Waveform::Otfs,
            mode: Mode::Siso,
            cp_len: 0,
            points: points
                .iter()
                .map(|&(snr_db, ber)| BerPoint {
                    snr_db,
                    ber,
                    ci_low: ber,
                    ci_high: ber,
                    ber_analytic: Some(ber),
                    bit_errors: 0,
                    bits: 1,
                    frames: 1,
                    design_effect: 1.0,
                })
                .collect(),
            warnings: vec![],
            assumptions: vec![],
        }
    }

    #[test]
    fn power_law_slope() {
        let pts: Vec<(f64, f64)> = [0.0, 10.0, 20.0]
            .iter()
            .map(|&db| (db, 0.3 * 10f64.powf(db / 10.0).powi(-2)))
            .collect();
        assert_relative_eq!(
            empirical_gd(&curve(&pts), 10.0, 20.0).unwrap(),
            2.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn table_values() {
        let c = curve(&[(10.0, 0.07919), (20.0, 0.00903)]);
        assert!((empirical_gd(&c, 10.0, 20.0).unwrap() - 0.94).abs() < 0.005);
        let c = curve(&[(10.0, 0.0181), (20.0, 0.0002918)]);
        assert!((empirical_gd(&c, 10.0, 20.0).unwrap() - 1.79).abs() < 0.01);
    }

    #[test]
    fn zero_ber_is_insufficient() {
        let c = curve(&[(10.0, 0.01), (20.0, 0.0)]);
        assert!(matches!(
            empirical_gd(&c, 10.0, 20.0),
            Err(Error::InsufficientErrors { snr_db }) if snr_db == 20.0
        ));
        assert!(empirical_gd(&c, 10.0, 30.0).is_err());
    }

    #[test]
    fn approximations() {
        assert_eq!(siso_gd_approx(&[1.0]).unwrap(), 1.0);
        assert_eq!(siso_gd_approx(&[1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(siso_gd_approx(&[2.0, 3.0, 4.0]).unwrap(), 6.0);
        assert_eq!(simo_gd_approx(2, &[1.0]).unwrap(), 2.0);
        assert_eq!(simo_gd_approx(2, &[2.0]).unwrap(), 4.0);
        assert_relative_eq!(
            simo_gd_approx(2, &[2.0, 3.0]).unwrap(),
            5.584_962_500_721_156,
            max_relative = 1e-12
        );
    }

    #[test]
    fn analytic_slopes_approach_approximation() {
        use crate::analytic::siso_ber;
        use crate::fading::PathSpec;
        use crate::modulation::{mod_params, Scheme};
        let qpsk = mod_params(Scheme::Qpsk, 4).unwrap();
        for m in [1.0, 2.0] {
            let paths = [PathSpec::new(m, 1.0, 0, 0)];
            let (a, b) = ASYMPTOTIC_WINDOW;
            let ba = siso_ber(10f64.powf(a / 10.0), &paths, &qpsk).unwrap();
            let bb = siso_ber(10f64.powf(b / 10.0), &paths, &qpsk).unwrap();
            let gd = slope_between((a, ba), (b, bb)).unwrap();
            assert!(
                (gd - siso_gd_approx(&[m]).unwrap()).abs() <= 0.25,
                "m={m} gd={gd}"
            );
        }
    }

    proptest! {
        #[test]
        fn scale_invariant(b1 in 1e-8f64..0.5, b2 in 1e-8f64..0.5, c in 1e-3f64..1.0) {
            let g = slope_between((10.0, b1), (20.0, b2)).unwrap();
            let h = slope_between((10.0, c * b1), (20.0, c * b2)).unwrap();
            prop_assert!((g - h).abs() < 1e-9);
        }
    }
}
