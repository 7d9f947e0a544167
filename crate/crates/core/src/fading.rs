//! Nakagami-m path gains and their placement on the delay-Doppler grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::ddmodem::{OtfsGrid, PathTap};
use crate::error::{config, domain, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 3GPP Extended Vehicular A tap delays in nanoseconds.
pub const EVA_DELAYS_NS: [f64; 9] = [
    0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0,
];
/// Relative tap powers in dB.
pub const EVA_POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];

/// One fading path: Nakagami shape and mean power, grid position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub m: f64,
    pub omega: f64,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub k: i64,
    #[serde(default)]
    pub kappa: f64,
}

impl PathSpec {
    pub fn new(m: f64, omega: f64, l: usize, k: i64) -> Self {
        Self {
            m,
            omega,
            l,
            k,
            kappa: 0.0,
        }
    }

    /// Sampler-level checks; the analytic engine additionally needs integer `m`.
    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m >= 0.5) {
            return Err(domain(format!(
                "Nakagami shape must be >= 0.5, got {}",
                self.m
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(domain(format!(
                "path power must be > 0, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// Draws `h = sqrt(G) e^{j theta}` with `G ~ Gamma(m, omega / m)` and `theta ~ U[0, 2 pi)`.
pub fn sample_nakagami_gain<R: Rng + ?Sized>(spec: &PathSpec, rng: &mut R) -> Result<Complex64> {
    spec.validate()?;
    let power = Gamma::new(spec.m, spec.omega / spec.m)
        .map_err(|e| domain(format!("gamma law rejected: {e}")))?
        .sample(rng);
    let phase = rng.random::<f64>() * 2.0 * PI;
    Ok(Complex64::from_polar(power.sqrt(), phase))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub gains: Vec<Complex64>,
    pub specs: Vec<PathSpec>,
    pub stream_id: u64,
}

impl ChannelRealization {
    pub fn taps(&self) -> Vec<PathTap> {
        self.gains
            .iter()
            .zip(&self.specs)
            .map(|(&gain, s)| PathTap {
                gain,
                l: s.l,
                k: s.k,
                kappa: s.kappa,
            })
            .collect()
    }
}

/// Rejects empty path lists, invalid specs and repeated `(l, k)` positions.
pub fn validate_paths(specs: &[PathSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(config("at least one path is required"));
    }
    for (i, a) in specs.iter().enumerate() {
        a.validate()?;
        for (j, b) in specs.iter().enumerate().skip(i + 1) {
            if a.l == b.l && a.k == b.k {
                return Err(config(format!(
                    "paths {i} and {j} share the grid point (l={}, k={})",
                    a.l, a.k
                )));
            }
        }
    }
    Ok(())
}

/// Independent gains for each path. Specs are carried through unchanged.
pub fn generate_channel<R: Rng + ?Sized>(
    specs: &[PathSpec],
    rng: &mut R,
    stream_id: u64,
) -> Result<ChannelRealization> {
    validate_paths(specs)?;
    let gains = specs
        .iter()
        .map(|s| sample_nakagami_gain(s, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelRealization {
        gains,
        specs: specs.to_vec(),
        stream_id,
    })
}

/// Rescales path powers to sum to one.
pub fn normalize(specs: &[PathSpec]) -> Result<Vec<PathSpec>> {
    validate_paths(specs)?;
    let total: f64 = specs.iter().map(|s| s.omega).sum();
    Ok(specs
        .iter()
        .map(|s| PathSpec {
            omega: s.omega / total,
            ..*s
        })
        .collect())
}

/// Maximum Doppler shift `fc v / c` in Hz.
pub fn max_doppler(fc_hz: f64, speed_mps: f64) -> f64 {
    fc_hz * speed_mps / SPEED_OF_LIGHT
}

/// Places `shapes.len()` paths on delay bins `0..P` with Jakes-angle Doppler.
///
/// Powers come from the strongest `P` EVA taps, kept in delay order and
/// renormalized; Doppler `nu_max cos(theta)` is rounded to the nearest bin of
/// width `1 / (N T)`.
pub fn eva_grid_placement<R: Rng + ?Sized>(
    grid: &OtfsGrid,
    fc_hz: f64,
    speed_mps: f64,
    shapes: &[f64],
    rng: &mut R,
) -> Result<Vec<PathSpec>> {
    let p = shapes.len();
    if p == 0 {
        return Err(config("EVA placement needs at least one path"));
    }
    if p > grid.m {
        return Err(config(format!(
            "P = {p} paths do not fit in M = {} delay bins",
            grid.m
        )));
    }
    if p > EVA_POWERS_DB.len() {
        return Err(config(format!(
            "EVA profile has only {} taps",
            EVA_POWERS_DB.len()
        )));
    }
    let mut order: Vec<usize> = (0..EVA_POWERS_DB.len()).collect();
    order.sort_by(|&a, &b| EVA_POWERS_DB[b].total_cmp(&EVA_POWERS_DB[a]));
    let mut kept: Vec<usize> = order[..p].to_vec();
    kept.sort_unstable();
    let powers: Vec<f64> = kept
        .iter()
        .map(|&i| 10f64.powf(EVA_POWERS_DB[i] / 10.0))
        .collect();
    let total: f64 = powers.iter().sum();
    let nu_max = max_doppler(fc_hz, speed_mps);
    let bin_width = grid.delta_f / grid.n as f64;
    let specs = shapes
        .iter()
        .zip(&powers)
        .enumerate()
        .map(|(l, (&m, &power))| {
            let theta = rng.random::<f64>() * 2.0 * PI;
            let nu = nu_max * theta.cos();
            PathSpec::new(m, power / total, l, (nu / bin_width).round() as i64)
        })
        .collect::<Vec<_>>();
    validate_paths(&specs)?;
    Ok(specs)
}
