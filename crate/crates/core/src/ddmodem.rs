//! Matrix-level OTFS transmitter, channel and receiver, a cyclic-prefix OFDM
//! baseline on the same grid, and exhaustive ML detection.
//!
//! Vectors use column stacking of the `M x N` delay-Doppler grid, so grid
//! entry `[l, k]` sits at index `l + M k`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::modulation::Constellation;

/// Default bound on the ML search space.
pub const DEFAULT_MAX_HYPOTHESES: u64 = 1 << 20;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pulse {
    #[default]
    Rectangular,
}

/// Delay-Doppler grid geometry. `T = 1 / delta_f` is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtfsGrid {
    pub m: usize,
    pub n: usize,
    pub delta_f: f64,
    #[serde(default)]
    pub pulse: Pulse,
}

impl OtfsGrid {
    pub fn new(m: usize, n: usize, delta_f: f64) -> Result<Self> {
        let grid = Self {
            m,
            n,
            delta_f,
            pulse: Pulse::Rectangular,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(config(format!(
                "grid needs M, N >= 1, got {}x{}",
                self.m, self.n
            )));
        }
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(config(format!(
                "subcarrier spacing must be > 0, got {}",
                self.delta_f
            )));
        }
        Ok(())
    }

    /// Symbol duration `T = 1 / delta_f`.
    pub fn symbol_time(&self) -> f64 {
        1.0 / self.delta_f
    }

    pub fn frame_len(&self) -> usize {
        self.m * self.n
    }
}

fn shape_err(what: &str, expected: impl std::fmt::Debug, got: impl std::fmt::Debug) -> Error {
    Error::Shape(format!("{what}: expected {expected:?}, got {got:?}"))
}

/// Delay-Doppler symbol grid, `symbols[[l, k]]` with `l` the delay bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DdFrame {
    pub symbols: Array2<Complex64>,
}

impl DdFrame {
    pub fn from_matrix(symbols: Array2<Complex64>) -> Self {
        Self { symbols }
    }

    pub fn from_vector(grid: &OtfsGrid, v: &[Complex64]) -> Result<Self> {
        if v.len() != grid.frame_len() {
            return Err(shape_err("frame vector length", grid.frame_len(), v.len()));
        }
        let symbols = Array2::from_shape_fn((grid.m, grid.n), |(l, k)| v[l + grid.m * k]);
        Ok(Self { symbols })
    }

    pub fn from_labels(
        grid: &OtfsGrid,
        constellation: &Constellation,
        labels: &[usize],
    ) -> Result<Self> {
        let v: Vec<Complex64> = labels.iter().map(|&s| constellation.point(s)).collect();
        Self::from_vector(grid, &v)
    }

    /// Column stacking, index `l + M k`.
    pub fn vectorized(&self) -> Array1<Complex64> {
        self.symbols.t().iter().copied().collect()
    }

    fn check(&self, grid: &OtfsGrid) -> Result<()> {
        if self.symbols.dim() != (grid.m, grid.n) {
            return Err(shape_err(
                "frame shape",
                (grid.m, grid.n),
                self.symbols.dim(),
            ));
        }
        Ok(())
    }
}

/// ISFFT: `M x N` delay-Doppler grid to the `N x M` time-frequency grid,
/// `X[n, m] = (MN)^{-1/2} sum_{k,l} x[l, k] exp(j 2 pi (n k / N - m l / M))`.
pub fn isfft(dd: &Array2<Complex64>) -> Array2<Complex64> {
    let (m_len, n_len) = dd.dim();
    let scale = 1.0 / ((m_len * n_len) as f64).sqrt();
    Array2::from_shape_fn((n_len, m_len), |(n, m)| {
        let mut acc = ZERO;
        for l in 0..m_len {
            for k in 0..n_len {
                let phase =
                    2.0 * PI * ((n * k) as f64 / n_len as f64 - (m * l) as f64 / m_len as f64);
                acc += dd[[l, k]] * Complex64::from_polar(1.0, phase);
            }
        }
        acc * scale
    })
}

/// SFFT, the inverse of [`isfft`]: `N x M` time-frequency to `M x N` delay-Doppler.
pub fn sfft(tf: &Array2<Complex64>) -> Array2<Complex64> {
    let (n_len, m_len) = tf.dim();
    let scale = 1.0 / ((m_len * n_len) as f64).sqrt();
    Array2::from_shape_fn((m_len, n_len), |(l, k)| {
        let mut acc = ZERO;
        for n in 0..n_len {
            for m in 0..m_len {
                let phase =
                    -2.0 * PI * ((n * k) as f64 / n_len as f64 - (m * l) as f64 / m_len as f64);
                acc += tf[[n, m]] * Complex64::from_polar(1.0, phase);
            }
        }
        acc * scale
    })
}

/// Unitary DFT matrix, `F[a, b] = exp(-j 2 pi a b / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> Array2<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(a, b)| {
        Complex64::from_polar(scale, -2.0 * PI * ((a * b) % n) as f64 / n as f64)
    })
}

pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    Array2::from_shape_fn((ar * br, ac * bc), |(i, j)| {
        a[[i / br, j / bc]] * b[[i % br, j % bc]]
    })
}

fn identity(n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

fn adjoint(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// `s = (F_N^H kron I_M) x`, evaluated per delay row as `vec(X F_N^H)`.
pub fn build_tx_vector(frame: &DdFrame, grid: &OtfsGrid) -> Result<Array1<Complex64>> {
    frame.check(grid)?;
    let (m_len, n_len) = (grid.m, grid.n);
    let scale = 1.0 / (n_len as f64).sqrt();
    let mut s = Array1::from_elem(m_len * n_len, ZERO);
    for n in 0..n_len {
        for l in 0..m_len {
            let mut acc = ZERO;
            for k in 0..n_len {
                let phase = 2.0 * PI * ((k * n) % n_len) as f64 / n_len as f64;
                acc += frame.symbols[[l, k]] * Complex64::from_polar(1.0, phase);
            }
            s[l + m_len * n] = acc * scale;
        }
    }
    Ok(s)
}

/// One resolvable path on the grid: gain, integer delay, Doppler `k + kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTap {
    pub gain: Complex64,
    pub l: usize,
    pub k: i64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrices {
    /// Time-domain channel `sum_p h_p Pi^{l_p} Delta^{k_p + kappa_p}`.
    pub h: Array2<Complex64>,
    /// Delay-Doppler effective channel `(F_N kron I) H (F_N^H kron I)`.
    pub h_eff: Array2<Complex64>,
}

fn validate_taps(taps: &[PathTap], grid: &OtfsGrid) -> Result<()> {
    if taps.is_empty() {
        return Err(config("channel needs at least one path"));
    }
    for t in taps {
        if t.l >= grid.frame_len() {
            return Err(config(format!(
                "delay index {} outside [0, {})",
                t.l,
                grid.frame_len()
            )));
        }
        if !(-0.5..0.5).contains(&t.kappa) {
            return Err(config(format!(
                "fractional Doppler {} outside [-0.5, 0.5)",
                t.kappa
            )));
        }
        if !(t.gain.re.is_finite() && t.gain.im.is_finite()) {
            return Err(config("path gain is not finite"));
        }
    }
    Ok(())
}

/// Cached grid transforms shared by every frame of a sweep.
#[derive(Debug, Clone)]
pub struct Modem {
    grid: OtfsGrid,
    /// `F_N kron I_M`
    dd_transform: Array2<Complex64>,
    /// `I_N kron F_M`
    ofdm_transform: Array2<Complex64>,
}

impl Modem {
    pub fn new(grid: OtfsGrid) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            dd_transform: kron(&dft_matrix(grid.n), &identity(grid.m)),
            ofdm_transform: kron(&identity(grid.n), &dft_matrix(grid.m)),
            grid,
        })
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    pub fn time_domain_channel(&self, taps: &[PathTap]) -> Result<Array2<Complex64>> {
        validate_taps(taps, &self.grid)?;
        let len = self.grid.frame_len();
        let mut h = Array2::from_elem((len, len), ZERO);
        for t in taps {
            let nu = t.k as f64 + t.kappa;
            for row in 0..len {
                let col = (row + len - t.l) % len;
                let phase = 2.0 * PI * nu * col as f64 / len as f64;
                h[[row, col]] += t.gain * Complex64::from_polar(1.0, phase);
            }
        }
        Ok(h)
    }

    pub fn channel(&self, taps: &[PathTap]) -> Result<ChannelMatrices> {
        let h = self.time_domain_channel(taps)?;
        let h_eff = self.dd_transform.dot(&h).dot(&adjoint(&self.dd_transform));
        Ok(ChannelMatrices { h, h_eff })
    }

    /// `y = H_eff x + (F_N kron I) w`.
    pub fn otfs_link(
        &self,
        frame: &DdFrame,
        channel: &ChannelMatrices,
        noise: &[Complex64],
    ) -> Result<Array1<Complex64>> {
        frame.check(&self.grid)?;
        self.check_noise(noise)?;
        let x = frame.vectorized();
        let w = Array1::from(noise.to_vec());
        Ok(channel.h_eff.dot(&x) + self.dd_transform.dot(&w))
    }

    /// Effective OFDM channel in the time-frequency domain.
    ///
    /// With `cp_len = 0` this is `(I_N kron F_M) H (I_N kron F_M^H)` on the
    /// frame-cyclic `H`. With a cyclic prefix every `M`-sample block sees its
    /// own circulant channel and the Doppler phase runs over the absolute
    /// sample clock including prefixes; delays must then fit in the prefix.
    pub fn ofdm_channel(&self, taps: &[PathTap], cp_len: usize) -> Result<Array2<Complex64>> {
        let h = if cp_len == 0 {
            self.time_domain_channel(taps)?
        } else {
            validate_taps(taps, &self.grid)?;
            let (m_len, n_len) = (self.grid.m, self.grid.n);
            let len = self.grid.frame_len();
            let mut h = Array2::from_elem((len, len), ZERO);
            for t in taps {
                if t.l > cp_len {
                    return Err(config(format!(
                        "delay index {} exceeds cyclic prefix length {cp_len}",
                        t.l
                    )));
                }
                let nu = t.k as f64 + t.kappa;
                for block in 0..n_len {
                    let start = block * (m_len + cp_len) + cp_len;
                    for i in 0..m_len {
                        let src = (i + m_len * (t.l / m_len + 1) - t.l) % m_len;
                        let clock = (start + i - t.l) as f64;
                        let phase = 2.0 * PI * nu * clock / len as f64;
                        h[[block * m_len + i, block * m_len + src]] +=
                            t.gain * Complex64::from_polar(1.0, phase);
                    }
                }
            }
            h
        };
        Ok(self
            .ofdm_transform
            .dot(&h)
            .dot(&adjoint(&self.ofdm_transform)))
    }

    /// `y = H_ofdm x + sqrt((M + L) / M) (I_N kron F_M) w`. The noise scaling
    /// charges the prefix energy so both waveforms spend equal energy per frame.
    pub fn ofdm_link(
        &self,
        frame: &DdFrame,
        h_ofdm: &Array2<Complex64>,
        noise: &[Complex64],
        cp_len: usize,
    ) -> Result<Array1<Complex64>> {
        frame.check(&self.grid)?;
        self.check_noise(noise)?;
        let x = frame.vectorized();
        let w = Array1::from(noise.to_vec());
        let scale = ((self.grid.m + cp_len) as f64 / self.grid.m as f64).sqrt();
        Ok(h_ofdm.dot(&x) + self.ofdm_transform.dot(&w) * scale)
    }

    fn check_noise(&self, noise: &[Complex64]) -> Result<()> {
        if noise.len() != self.grid.frame_len() {
            return Err(shape_err(
                "noise length",
                self.grid.frame_len(),
                noise.len(),
            ));
        }
        Ok(())
    }
}

/// Convenience wrapper over [`Modem::channel`].
pub fn build_channel_matrix(taps: &[PathTap], grid: &OtfsGrid) -> Result<ChannelMatrices> {
    Modem::new(*grid)?.channel(taps)
}

/// Number of ML hypotheses, `order^(MN)`, as a float to survive overflow.
pub fn hypothesis_count(order: u32, frame_len: usize) -> f64 {
    (order as f64).powi(frame_len as i32)
}

pub fn check_capacity(order: u32, frame_len: usize, max_hypotheses: u64) -> Result<()> {
    let required = hypothesis_count(order, frame_len);
    if required > max_hypotheses as f64 {
        return Err(Error::Capacity {
            required,
            allowed: max_hypotheses,
        });
    }
    Ok(())
}

/// Exhaustive ML detection, returning constellation labels in frame order.
///
/// Hypotheses are visited in lexicographic label order (first symbol most
/// significant) and only a strictly smaller metric replaces the incumbent, so
/// ties resolve to the lexicographically smallest hypothesis.
pub fn ml_detect(
    y: &[Complex64],
    h_eff: &Array2<Complex64>,
    constellation: &Constellation,
    max_hypotheses: u64,
) -> Result<Vec<usize>> {
    let (rows, cols) = h_eff.dim();
    if y.len() != rows {
        return Err(shape_err("received vector length", rows, y.len()));
    }
    check_capacity(constellation.order(), cols, max_hypotheses)?;
    let q = constellation.order() as usize;
    // contrib[(j * q + s) * rows + r] = H[r, j] * point_s
    let mut contrib = vec![ZERO; cols * q * rows];
    for j in 0..cols {
        for (s, p) in constellation.points().iter().enumerate() {
            for r in 0..rows {
                contrib[(j * q + s) * rows + r] = h_eff[[r, j]] * p;
            }
        }
    }
    let mut search = Search {
        rows,
        cols,
        q,
        contrib: &contrib,
        residuals: vec![ZERO; (cols + 1) * rows],
        current: vec![0; cols],
        best: vec![0; cols],
        best_metric: f64::INFINITY,
    };
    search.residuals[..rows].copy_from_slice(y);
    search.descend(0);
    Ok(search.best)
}

struct Search<'a> {
    rows: usize,
    cols: usize,
    q: usize,
    contrib: &'a [Complex64],
    /// residuals[d * rows..] = y - sum_{j < d} H[:, j] x_j
    residuals: Vec<Complex64>,
    current: Vec<usize>,
    best: Vec<usize>,
    best_metric: f64,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        let rows = self.rows;
        if depth == self.cols {
            let r = &self.residuals[depth * rows..(depth + 1) * rows];
            let metric: f64 = r.iter().map(|z| z.norm_sqr()).sum();
            if metric < self.best_metric {
                self.best_metric = metric;
                self.best.copy_from_slice(&self.current);
            }
            return;
        }
        for s in 0..self.q {
            let c = &self.contrib[(depth * self.q + s) * rows..(depth * self.q + s + 1) * rows];
            let (head, tail) = self.residuals.split_at_mut((depth + 1) * rows);
            let parent = &head[depth * rows..];
            for r in 0..rows {
                tail[r] = parent[r] - c[r];
            }
            self.current[depth] = s;
            self.descend(depth + 1);
        }
    }
}
