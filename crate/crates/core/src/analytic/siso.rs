//! Single-user MRC error rate over a sum of independent Erlang path powers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fading::PathSpec;
use crate::modulation::ModErrorParams;
use crate::specfun::{
    factorial, integrate_semi_infinite, ln_gamma_unchecked, neumaier_sum, reg_lower_unchecked,
    QuadratureSpec,
};

/// Two scales closer than this (relative) are treated as equal.
pub const SCALE_GAP: f64 = 1e-9;

/// One component of the Erlang mixture: `weight * erlang_pdf(z; k, scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaMixTerm {
    /// Zero-based path index.
    pub i: usize,
    pub k: u32,
    pub weight: f64,
    pub scale: f64,
}

fn check_erlang(z: f64, m: u32, mu: f64) -> Result<()> {
    if m == 0 {
        return Err(domain("Erlang shape must be >= 1"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(domain(format!("Erlang scale must be > 0, got {mu}")));
    }
    if z.is_nan() || z < 0.0 {
        return Err(domain(format!("Erlang argument must be >= 0, got {z}")));
    }
    Ok(())
}

/// `z^{m-1} e^{-z/mu} / (mu^m (m-1)!)`.
pub fn erlang_pdf(z: f64, m: u32, mu: f64) -> Result<f64> {
    check_erlang(z, m, mu)?;
    Ok(erlang_pdf_unchecked(z, m, mu))
}

fn erlang_pdf_unchecked(z: f64, m: u32, mu: f64) -> f64 {
    if z == 0.0 {
        return if m == 1 { 1.0 / mu } else { 0.0 };
    }
    if z.is_infinite() {
        return 0.0;
    }
    let x = z / mu;
    ((m as f64 - 1.0) * x.ln() - x - ln_gamma_unchecked(m as f64)).exp() / mu
}

/// Regularized lower incomplete Gamma `P(m, z / mu)`.
pub fn erlang_cdf(z: f64, m: u32, mu: f64) -> Result<f64> {
    check_erlang(z, m, mu)?;
    Ok(reg_lower_unchecked(m as f64, z / mu))
}

/// Integer Nakagami shape, as the closed forms need factorials.
pub fn integer_shape(m: f64) -> Result<u32> {
    if m.is_finite() && m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64 {
        Ok(m as u32)
    } else {
        Err(domain(format!(
            "closed-form analysis needs an integer shape >= 1, got {m}"
        )))
    }
}

fn check_distinct(scales: &[f64]) -> Result<()> {
    for (a_idx, &a) in scales.iter().enumerate() {
        for (b_idx, &b) in scales.iter().enumerate().skip(a_idx + 1) {
            if (a - b).abs() <= SCALE_GAP * a.abs().max(b.abs()) {
                return Err(Error::DegenerateScales {
                    first: a_idx,
                    second: b_idx,
                    a,
                    b,
                });
            }
        }
    }
    Ok(())
}

/// Partial-fraction weights expressing the density of `sum_q Erlang(m_q, mu_q)`
/// as `sum_{i,k} weight * Erlang(k, mu_i)`, `k = 1..=m_i`.
///
/// Each weight is a sum over non-increasing chains
/// `m_i = p_0 >= p_1 >= ... >= p_{P-2} >= p_{P-1} = k`, the `d`-th link
/// pairing path `i` with the `d`-th other path `j`:
///
/// ```text
/// (p_{d-1} + m_j - p_d - 1)! / ((m_j - 1)! (p_{d-1} - p_d)!)
///     * (1/mu_i - 1/mu_j)^(p_d - p_{d-1} - m_j)
/// ```
///
/// times `(-1)^(R - m_i) mu_i^k / prod_h mu_h^m_h`, `R = sum m_h`. The
/// weights are scale-free, so scales are normalized by their maximum first.
pub fn xi_coefficients(shapes: &[u32], scales: &[f64]) -> Result<Vec<GammaMixTerm>> {
    let p = shapes.len();
    if p == 0 {
        return Err(domain("at least one path is required"));
    }
    if scales.len() != p {
        return Err(Error::Shape(format!(
            "{} shapes but {} scales",
            p,
            scales.len()
        )));
    }
    if let Some(&bad) = shapes.iter().find(|&&m| m == 0) {
        return Err(domain(format!("shape must be >= 1, got {bad}")));
    }
    if let Some(&bad) = scales.iter().find(|&&s| !(s.is_finite() && s > 0.0)) {
        return Err(domain(format!("scale must be finite and > 0, got {bad}")));
    }
    if p == 1 {
        return Ok(vec![GammaMixTerm {
            i: 0,
            k: shapes[0],
            weight: 1.0,
            scale: scales[0],
        }]);
    }
    check_distinct(scales)?;

    let top = scales.iter().copied().fold(0.0, f64::max);
    let mu: Vec<f64> = scales.iter().map(|s| s / top).collect();
    let r_total: u32 = shapes.iter().sum();
    let prod: f64 = shapes
        .iter()
        .zip(&mu)
        .map(|(&m, &u)| u.powi(m as i32))
        .product();

    let mut terms = Vec::with_capacity(r_total as usize);
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
        let deltas: Vec<f64> = others.iter().map(|&j| 1.0 / mu[i] - 1.0 / mu[j]).collect();
        for k in 1..=shapes[i] {
            let mut chain_terms = Vec::new();
            let mut chain = vec![0u32; p];
            chain[0] = shapes[i];
            chain[p - 1] = k;
            // Walk all chains by fixing p_1..p_{P-2} recursively.
            fn walk(depth: usize, chain: &mut [u32], visit: &mut dyn FnMut(&[u32])) {
                let last = chain.len() - 1;
                if depth == last {
                    visit(chain);
                    return;
                }
                let (lo, hi) = (chain[last], chain[depth - 1]);
                for v in lo..=hi {
                    chain[depth] = v;
                    walk(depth + 1, chain, visit);
                }
            }
            walk(1, &mut chain, &mut |c: &[u32]| {
                let mut v = 1.0;
                for (d, (&j, &delta)) in others.iter().zip(&deltas).enumerate() {
                    let (prev, cur) = (c[d], c[d + 1]);
                    let mj = shapes[j];
                    let e = cur as i32 - prev as i32 - mj as i32;
                    v *= factorial(prev + mj - cur - 1)
                        / (factorial(mj - 1) * factorial(prev - cur))
                        * delta.powi(e);
                }
                chain_terms.push(v);
            });
            let sign = if (r_total - shapes[i]) % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let pref = mu[i].powi(k as i32) / prod;
            let weight = sign * pref * neumaier_sum(chain_terms.into_iter());
            terms.push(GammaMixTerm {
                i,
                k,
                weight,
                scale: scales[i],
            });
        }
    }
    Ok(terms)
}

pub fn mixture_pdf(z: f64, terms: &[GammaMixTerm]) -> f64 {
    neumaier_sum(
        terms
            .iter()
            .map(|t| t.weight * erlang_pdf_unchecked(z, t.k, t.scale)),
    )
}

pub fn mixture_cdf(z: f64, terms: &[GammaMixTerm]) -> f64 {
    neumaier_sum(
        terms
            .iter()
            .map(|t| t.weight * reg_lower_unchecked(t.k as f64, z / t.scale)),
    )
}

/// `int_0^inf y^{-1/2} e^{-B y} dy = sqrt(pi / B)`.
pub fn c_integral(b: f64) -> Result<f64> {
    if !(b.is_finite() && b > 0.0) {
        return Err(domain(format!("B must be > 0, got {b}")));
    }
    Ok((std::f64::consts::PI / b).sqrt())
}

/// `int_0^inf y^{-1/2} e^{-B y} e^{-y/mu} (y/mu)^l dy
///  = mu^{-l} (2l - 1)!! sqrt(pi) / (2^l (B + 1/mu)^{l + 1/2})`.
pub fn d_integral(b: f64, mu: f64, l: u32) -> Result<f64> {
    if !(b.is_finite() && b > 0.0 && mu.is_finite() && mu > 0.0) {
        return Err(domain(format!(
            "D integral needs B, mu > 0, got B={b}, mu={mu}"
        )));
    }
    let s = b + 1.0 / mu;
    // (2l - 1)!! sqrt(pi) / 2^l = Gamma(l + 1/2)
    let ln_g = ln_gamma_unchecked(l as f64 + 0.5);
    Ok((ln_g - l as f64 * mu.ln() - (l as f64 + 0.5) * s.ln()).exp())
}

/// `sqrt(B / pi) * (C - sum_{l<k} D_l / l!)`, the fraction of `A / 2` one
/// mixture component contributes to the SER.
///
/// With `t = (1/mu) / (B + 1/mu)` the bracket equals
/// `sqrt(1 - t) * sum_{l >= k} binom(2l, l) (t/4)^l`, which avoids the
/// cancellation of the direct difference when `t` is small (high SNR).
fn component_fraction(b: f64, mu: f64, k: u32) -> f64 {
    let a = 1.0 / mu;
    let t = a / (b + a);
    let one_minus_t = b / (b + a);
    // c_l = binom(2l, l) / 4^l, c_{l+1} = c_l (2l + 1) / (2l + 2)
    if t < 0.5 {
        let mut c = 1.0;
        let mut tp = 1.0;
        for l in 0..k {
            c *= (2 * l + 1) as f64 / (2 * l + 2) as f64;
            tp *= t;
        }
        let mut sum = 0.0;
        let mut term = c * tp;
        let mut l = k;
        while term > 1e-18 * sum || sum == 0.0 {
            sum += term;
            c *= (2 * l + 1) as f64 / (2 * l + 2) as f64;
            term = c * tp * t;
            tp *= t;
            l += 1;
            if term == 0.0 {
                break;
            }
        }
        one_minus_t.sqrt() * sum
    } else {
        let mut c = 1.0;
        let mut tp = 1.0;
        let mut head = 0.0;
        for l in 0..k {
            head += c * tp;
            c *= (2 * l + 1) as f64 / (2 * l + 2) as f64;
            tp *= t;
        }
        1.0 - one_minus_t.sqrt() * head
    }
}

/// Per-path SNR scales `mu_i = es_n0 * omega_i / m_i` and integer shapes.
pub fn snr_scales(es_n0: f64, paths: &[PathSpec]) -> Result<(Vec<u32>, Vec<f64>)> {
    if !(es_n0.is_finite() && es_n0 > 0.0) {
        return Err(domain(format!("Es/N0 must be > 0, got {es_n0}")));
    }
    if paths.is_empty() {
        return Err(domain("at least one path is required"));
    }
    let mut shapes = Vec::with_capacity(paths.len());
    let mut scales = Vec::with_capacity(paths.len());
    for p in paths {
        p.validate()?;
        let m = integer_shape(p.m)?;
        shapes.push(m);
        scales.push(es_n0 * p.omega / m as f64);
    }
    Ok((shapes, scales))
}

fn clamp_ber(ber: f64, mp: &ModErrorParams) -> f64 {
    ber.clamp(0.0, (0.5 * mp.a).min(1.0))
}

/// Closed-form average BER with MRC over `paths` at linear `es_n0`.
pub fn siso_ber(es_n0: f64, paths: &[PathSpec], mp: &ModErrorParams) -> Result<f64> {
    let (shapes, scales) = snr_scales(es_n0, paths)?;
    let terms = xi_coefficients(&shapes, &scales)?;
    let frac = neumaier_sum(
        terms
            .iter()
            .map(|t| t.weight * component_fraction(mp.b, t.scale, t.k)),
    );
    Ok(clamp_ber(0.5 * mp.a * frac / mp.bits_per_symbol(), mp))
}

/// Quadrature route: `A sqrt(B) / (2 sqrt(pi)) int y^{-1/2} F(y) e^{-B y} dy`
/// with the mixture CDF, divided by `log2 M`.
pub fn siso_ber_quadrature(
    es_n0: f64,
    paths: &[PathSpec],
    mp: &ModErrorParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (shapes, scales) = snr_scales(es_n0, paths)?;
    let terms = xi_coefficients(&shapes, &scales)?;
    let b = mp.b;
    let integral = integrate_semi_infinite(
        |y: f64| {
            if y == 0.0 {
                return 0.0;
            }
            mixture_cdf(y, &terms) * (-b * y).exp() / y.sqrt()
        },
        spec,
    )?;
    let ser = mp.a * b.sqrt() / (2.0 * std::f64::consts::PI.sqrt()) * integral;
    Ok(clamp_ber(ser / mp.bits_per_symbol(), mp))
}
