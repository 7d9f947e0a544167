//! Gamma function, its logarithm and the double factorial.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// zeta(2), zeta(3), ... used by the Taylor series of ln Gamma(1 + z).
#[allow(clippy::excessive_precision)]
const ZETA: [f64; 29] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_370_0,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926_0,
    1.000_000_059_608_189_1,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334_0,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
];

/// Radius around 1 and 2 where the Taylor expansion replaces Lanczos.
const TAYLOR_RADIUS: f64 = 0.25;

/// ln Gamma(1 + z) for |z| <= 0.25.
fn ln_gamma_1p_series(z: f64) -> f64 {
    let mut sum = 0.0;
    // zk runs through (-z)^k
    let mut zk = -z;
    for (i, zeta) in ZETA.iter().enumerate() {
        zk *= -z;
        let k = (i + 2) as f64;
        sum += zeta * zk / k;
    }
    -EULER_GAMMA * z + sum
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let xm1 = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (xm1 + i as f64);
    }
    let t = xm1 + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (xm1 + 0.5) * t.ln() - t + acc.ln()
}

/// Natural logarithm of the Gamma function for real `x > 0`.
///
/// Near the zeros of ln Gamma (x = 1, 2) a Taylor expansion keeps the
/// relative error small; elsewhere the Lanczos approximation is used.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if (x - 1.0).abs() <= TAYLOR_RADIUS {
        ln_gamma_1p_series(x - 1.0)
    } else if (x - 2.0).abs() <= TAYLOR_RADIUS {
        let z = x - 2.0;
        z.ln_1p() + ln_gamma_1p_series(z)
    } else if x < 0.5 {
        // Gamma(x) = Gamma(1 + x) / x
        ln_gamma_unchecked(x + 1.0) - x.ln()
    } else {
        lanczos_ln_gamma(x)
    }
}

/// Gamma function for real `x > 0`. Overflows to infinity above x ~ 171.6.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// `n!` as a float (exact for n <= 22).
pub fn factorial(n: u32) -> f64 {
    if n <= 22 {
        (1..=n).fold(1.0, |acc, k| acc * k as f64)
    } else {
        ln_gamma_unchecked(n as f64 + 1.0).exp()
    }
}

/// Double factorial `n!! = n (n - 2) (n - 4) ...` with `(-1)!! = 0!! = 1`.
///
/// Returns a domain error for `n < -1` and for results that overflow `u128`.
pub fn double_factorial(n: i64) -> Result<u128> {
    if n < -1 {
        return Err(domain(format!("double factorial undefined for n = {n}")));
    }
    let mut acc: u128 = 1;
    let mut k = n;
    while k > 1 {
        acc = acc
            .checked_mul(k as u128)
            .ok_or_else(|| domain(format!("{n}!! overflows u128")))?;
        k -= 2;
    }
    Ok(acc)
}

/// Complex ln Gamma via Lanczos with reflection for Re(z) < 1/2.
///
/// Returns the principal-branch-agnostic value suitable for `exp()`; the
/// imaginary part is only defined modulo 2 pi.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let pi = Complex64::new(PI, 0.0);
        let s = (pi * z).sin();
        return pi.ln() - s.ln() - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (zm1 + 0.5) * t.ln() - t + acc.ln()
}
