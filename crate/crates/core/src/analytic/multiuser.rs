//! Multi-user SINR with a moment-matched Gamma interference model.
//!
//! With unit symbol energy and interference normalized by `N0`, the SINR is
//! `Y = g / (1 + S)`, `g = Es/N0`, `S = g * sum |h|^2` over interfering paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::PathSpec;
use crate::modulation::ModErrorParams;
use crate::specfun::{
    integrate, integrate_from, ln_gamma_unchecked, meijer_g_2313, q_function, reg_lower_unchecked,
    reg_upper_unchecked, QuadratureSpec,
};

/// Gamma law `Gamma(m_z, omega_z)` fitted to the interference power `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrGammaApprox {
    pub mu_s: f64,
    pub sigma2_s: f64,
    pub m_z: f64,
    pub omega_z: f64,
}

/// Mean and variance of `S` for independent Nakagami interferers.
pub fn sinr_moments(es_n0: f64, interferers: &[Vec<PathSpec>]) -> Result<(f64, f64)> {
    if !(es_n0.is_finite() && es_n0 >= 0.0) {
        return Err(domain(format!(
            "Es/N0 must be finite and >= 0, got {es_n0}"
        )));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for p in interferers.iter().flatten() {
        p.validate()?;
        mean += p.omega;
        var += p.omega * p.omega / p.m;
    }
    Ok((es_n0 * mean, es_n0 * es_n0 * var))
}

pub fn gamma_approx(mu_s: f64, sigma2_s: f64) -> Result<SinrGammaApprox> {
    if sigma2_s == 0.0 {
        return Err(Error::NoInterference);
    }
    if !(mu_s.is_finite() && mu_s > 0.0 && sigma2_s.is_finite() && sigma2_s > 0.0) {
        return Err(domain(format!(
            "interference moments must be positive, got mean {mu_s}, variance {sigma2_s}"
        )));
    }
    Ok(SinrGammaApprox {
        mu_s,
        sigma2_s,
        m_z: mu_s * mu_s / sigma2_s,
        omega_z: sigma2_s / mu_s,
    })
}

fn check_sinr_arg(y: f64, es_n0: f64) -> Result<()> {
    if !(es_n0.is_finite() && es_n0 > 0.0) {
        return Err(domain(format!("Es/N0 must be > 0, got {es_n0}")));
    }
    if !(y > 0.0 && y <= es_n0) {
        return Err(domain(format!(
            "SINR argument must lie in (0, {es_n0}], got {y}"
        )));
    }
    Ok(())
}

fn interference_level(y: f64, es_n0: f64, approx: &SinrGammaApprox) -> f64 {
    ((es_n0 / y - 1.0) / approx.omega_z).max(0.0)
}

/// `P(Y <= y) = P(S >= g/y - 1)`, the regularized upper incomplete Gamma.
pub fn sinr_cdf(y: f64, es_n0: f64, approx: &SinrGammaApprox) -> Result<f64> {
    check_sinr_arg(y, es_n0)?;
    Ok(reg_upper_unchecked(
        approx.m_z,
        interference_level(y, es_n0, approx),
    ))
}

/// `P(Y > y)`: the lower incomplete Gamma form, which is 0 at `y = g` and
/// tends to 1 as `y -> 0`.
pub fn sinr_ccdf(y: f64, es_n0: f64, approx: &SinrGammaApprox) -> Result<f64> {
    check_sinr_arg(y, es_n0)?;
    Ok(reg_lower_unchecked(
        approx.m_z,
        interference_level(y, es_n0, approx),
    ))
}

/// Density of `Y` on `(0, g)`.
pub fn sinr_pdf(y: f64, es_n0: f64, approx: &SinrGammaApprox) -> Result<f64> {
    check_sinr_arg(y, es_n0)?;
    let x = interference_level(y, es_n0, approx);
    if x == 0.0 {
        return Ok(if approx.m_z < 1.0 {
            f64::INFINITY
        } else if approx.m_z == 1.0 {
            es_n0 / (y * y * approx.omega_z)
        } else {
            0.0
        });
    }
    let m = approx.m_z;
    let ln_f = (m - 1.0) * x.ln() - x - ln_gamma_unchecked(m) - approx.omega_z.ln();
    Ok(ln_f.exp() * es_n0 / (y * y))
}

fn mu_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-300, 1e-13, 50_000).expect("static spec")
}

fn check_ber_inputs(es_n0: f64, approx: &SinrGammaApprox) -> Result<()> {
    if !(es_n0.is_finite() && es_n0 > 0.0) {
        return Err(domain(format!("Es/N0 must be > 0, got {es_n0}")));
    }
    if !(approx.m_z > 0.0 && approx.omega_z > 0.0) {
        return Err(domain("approximation needs m_z, omega_z > 0"));
    }
    Ok(())
}

fn finish(ser: f64, mp: &ModErrorParams) -> f64 {
    (ser / mp.bits_per_symbol()).clamp(0.0, (0.5 * mp.a).min(1.0))
}

/// Average BER `A E_S[Q(sqrt(2 B g / (1 + S)))] / log2 M` under the Gamma
/// interference law, integrated over the interference power.
pub fn multiuser_ber(es_n0: f64, approx: &SinrGammaApprox, mp: &ModErrorParams) -> Result<f64> {
    check_ber_inputs(es_n0, approx)?;
    let (m, om, b) = (approx.m_z, approx.omega_z, mp.b);
    let cond = move |s: f64| q_function((2.0 * b * es_n0 / (1.0 + s)).sqrt());
    let spec = mu_spec();
    let mean_q = if m < 1.0 {
        // u = v^{1/m} removes the u^{m-1} singularity of the Gamma density
        let inv_m = 1.0 / m;
        let lg = ln_gamma_unchecked(m + 1.0);
        integrate_from(
            |v: f64| {
                let u = v.powf(inv_m);
                (-u - lg).exp() * cond(om * u)
            },
            0.0,
            &spec,
        )?
    } else {
        let lg = ln_gamma_unchecked(m);
        integrate_from(
            |u: f64| {
                if u == 0.0 {
                    return if m == 1.0 { cond(0.0) } else { 0.0 };
                }
                ((m - 1.0) * u.ln() - u - lg).exp() * cond(om * u)
            },
            0.0,
            &spec,
        )?
    };
    Ok(finish(mp.a * mean_q, mp))
}

/// Same quantity through the SER integral over the SINR,
/// `A sqrt(B) / (2 sqrt(pi)) int y^{-1/2} F(y) e^{-B y} dy`, with `t = sqrt(y)`
/// on `(0, sqrt(g)]` and the closed-form tail where `F = 1`.
pub fn multiuser_ber_single_integral(
    es_n0: f64,
    approx: &SinrGammaApprox,
    mp: &ModErrorParams,
) -> Result<f64> {
    check_ber_inputs(es_n0, approx)?;
    let b = mp.b;
    let body = integrate(
        |t: f64| {
            if t == 0.0 {
                return 0.0;
            }
            let y = t * t;
            2.0 * (-b * y).exp()
                * reg_upper_unchecked(approx.m_z, interference_level(y, es_n0, approx))
        },
        0.0,
        es_n0.sqrt(),
        &mu_spec(),
    )?;
    let pref = mp.a * b.sqrt() / (2.0 * std::f64::consts::PI.sqrt());
    let tail = mp.a * q_function((2.0 * b * es_n0).sqrt());
    Ok(finish(pref * body + tail, mp))
}

/// `A Q(sqrt(2 B g)) / log2 M`: the SINR is deterministic without interferers.
pub fn interference_free_ber(es_n0: f64, mp: &ModErrorParams) -> Result<f64> {
    if !(es_n0.is_finite() && es_n0 > 0.0) {
        return Err(domain(format!("Es/N0 must be > 0, got {es_n0}")));
    }
    Ok(finish(mp.a * q_function((2.0 * mp.b * es_n0).sqrt()), mp))
}

/// `A / (2 log2 M) * G^{3,1}_{2,3}(g / omega_z | 1-m_z, 1; 0, 1-m_z, 1/2)`.
///
/// Diagnostic only: `g / omega_z` does not depend on SNR and the G value is
/// not bounded by 1, so this does not agree with [`multiuser_ber`].
pub fn single_g_closed_form_ber(
    es_n0: f64,
    approx: &SinrGammaApprox,
    mp: &ModErrorParams,
) -> Result<f64> {
    check_ber_inputs(es_n0, approx)?;
    let g = meijer_g_2313(es_n0 / approx.omega_z, approx.m_z)?;
    Ok(mp.a / (2.0 * mp.bits_per_symbol()) * g)
}

/// Multi-user BER for interferers given per user; without interference the
/// deterministic-SINR formula is used and a warning is returned.
pub fn multiuser_ber_or_free(
    es_n0: f64,
    interferers: &[Vec<PathSpec>],
    mp: &ModErrorParams,
) -> Result<(f64, Option<String>)> {
    let (mu, var) = sinr_moments(es_n0, interferers)?;
    match gamma_approx(mu, var) {
        Ok(approx) => Ok((multiuser_ber(es_n0, &approx, mp)?, None)),
        Err(Error::NoInterference) => Ok((
            interference_free_ber(es_n0, mp)?,
            Some(
                "no interferers (K_u = 1): SINR equals Es/N0, deterministic-SINR BER used"
                    .to_string(),
            ),
        )),
        Err(e) => Err(e),
    }
}

/// Sample mean and standard error of a Monte Carlo BER estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub ber: f64,
    pub std_err: f64,
    pub trials: u64,
}

/// Minimum trial count accepted by [`semi_analytic_mc_ber`].
pub const MIN_SEMI_ANALYTIC_TRIALS: u64 = 10_000;

/// Interference power `S` for one draw of every interfering path.
pub fn sample_interference<R: Rng + ?Sized>(
    es_n0: f64,
    interferers: &[Vec<PathSpec>],
    rng: &mut R,
) -> Result<f64> {
    let mut s = 0.0;
    for p in interferers.iter().flatten() {
        s += crate::fading::sample_nakagami_gain(p, rng)?.norm_sqr();
    }
    Ok(es_n0 * s)
}

/// Conditional BER `A Q(sqrt(2 B Y)) / log2 M` given the interference power.
pub fn conditional_ber(es_n0: f64, s: f64, mp: &ModErrorParams) -> f64 {
    mp.a * q_function((2.0 * mp.b * es_n0 / (1.0 + s)).sqrt()) / mp.bits_per_symbol()
}

/// Averages the conditional BER over sampled interference.
pub fn semi_analytic_mc_ber<R: Rng + ?Sized>(
    es_n0: f64,
    interferers: &[Vec<PathSpec>],
    mp: &ModErrorParams,
    rng: &mut R,
    trials: u64,
) -> Result<McEstimate> {
    if trials < MIN_SEMI_ANALYTIC_TRIALS {
        return Err(domain(format!(
            "semi-analytic MC needs at least {MIN_SEMI_ANALYTIC_TRIALS} trials, got {trials}"
        )));
    }
    if !(es_n0.is_finite() && es_n0 > 0.0) {
        return Err(domain(format!("Es/N0 must be > 0, got {es_n0}")));
    }
    // Welford accumulation
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for n in 1..=trials {
        let s = sample_interference(es_n0, interferers, rng)?;
        let v = conditional_ber(es_n0, s, mp);
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (trials - 1) as f64;
    Ok(McEstimate {
        ber: mean,
        std_err: (var / trials as f64).sqrt(),
        trials,
    })
}
