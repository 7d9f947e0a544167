//! BER-versus-SNR sweeps with early stopping and schedule-independent output.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::{frame_rng, snr_point_key, DOMAIN_FRAMES, DOMAIN_SINR};
use super::stats::{wilson_interval_effective, FrameTally};
use crate::analytic::{conditional_ber, multiuser_ber_or_free, sample_interference, siso_ber};
use crate::ddmodem::{check_capacity, ml_detect, DdFrame, Modem, OtfsGrid, DEFAULT_MAX_HYPOTHESES};
use crate::error::{config, Error, Result};
use crate::fading::{
    eva_grid_placement, generate_channel, normalize, validate_paths, PathSpec, EVA_DELAYS_NS,
};
use crate::modulation::{Constellation, ConstellationSpec, ModErrorParams};

/// First batch size; later batches double up to [`MAX_BATCH`].
pub const INITIAL_BATCH: u64 = 1024;
pub const MAX_BATCH: u64 = 1 << 16;
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Waveform {
    #[default]
    Otfs,
    Ofdm,
}

impl Waveform {
    pub fn name(self) -> &'static str {
        match self {
            Waveform::Otfs => "otfs",
            Waveform::Ofdm => "ofdm",
        }
    }
}

/// `Siso` simulates the waveform link; `Simo` averages the conditional error
/// probability over sampled multi-user interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Siso,
    Simo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelModel {
    /// Fixed grid positions and Nakagami parameters.
    Paths { paths: Vec<PathSpec> },
    /// Strongest EVA taps on consecutive delay bins with a fresh Jakes Doppler
    /// draw per frame.
    Eva {
        carrier_hz: f64,
        speed_kmh: f64,
        shapes: Vec<f64>,
    },
}

/// Early-stopping defaults.
pub const DEFAULT_TARGET_BIT_ERRORS: u64 = 200;
pub const DEFAULT_MAX_FRAMES: u64 = 10_000_000;

fn default_target() -> u64 {
    DEFAULT_TARGET_BIT_ERRORS
}

fn default_max_frames() -> u64 {
    DEFAULT_MAX_FRAMES
}

fn default_users() -> usize {
    2
}

fn default_max_hypotheses() -> u64 {
    DEFAULT_MAX_HYPOTHESES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: OtfsGrid,
    pub constellation: ConstellationSpec,
    pub channel: ChannelModel,
    /// Strictly increasing SNR points in dB.
    pub snr_db: Vec<f64>,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_target")]
    pub target_bit_errors: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub waveform: Waveform,
    #[serde(default)]
    pub mode: Mode,
    /// OFDM cyclic prefix in samples; derived from the delay spread when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_len: Option<usize>,
    /// Number of users `K_u` in SIMO mode; users other than the desired one interfere.
    #[serde(default = "default_users")]
    pub users: usize,
    /// Rescale path powers to sum to one.
    #[serde(default)]
    pub normalize: bool,
    #[serde(default = "default_max_hypotheses")]
    pub max_hypotheses: u64,
}

/// Progress snapshot passed to the hook after every batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
}

/// Execution knobs that never change the numbers produced.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Worker threads; `Some(1)` runs the sequential path.
    pub workers: Option<usize>,
    pub progress: Option<&'a (dyn Fn(&Progress) + Sync)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ber_analytic: Option<f64>,
    pub bit_errors: u64,
    pub bits: u64,
    pub frames: u64,
    pub design_effect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub waveform: Waveform,
    pub mode: Mode,
    pub cp_len: usize,
    pub points: Vec<BerPoint>,
    pub warnings: Vec<String>,
    /// Modelling choices the output depends on that are not fixed by the inputs.
    pub assumptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCurve {
    pub mode: Mode,
    /// `(snr_db, ber)` pairs.
    pub values: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
    pub assumptions: Vec<String>,
}

/// Longest EVA excess delay in seconds.
pub fn eva_max_delay() -> f64 {
    EVA_DELAYS_NS[EVA_DELAYS_NS.len() - 1] * 1e-9
}

/// Prepared, validated sweep.
struct Plan {
    cfg: SweepConfig,
    modem: Modem,
    constellation: Constellation,
    mp: ModErrorParams,
    /// Fixed paths, or EVA shapes with deterministic powers for the analytic curve.
    analytic_paths: Vec<PathSpec>,
    interferers: Vec<Vec<PathSpec>>,
    cp_len: usize,
    bits_per_frame: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        Constellation::new(self.constellation.scheme, self.constellation.order)?;
        if self.snr_db.is_empty() {
            return Err(config("at least one SNR point is required"));
        }
        if let Some(bad) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(config(format!("SNR values must be finite, got {bad}")));
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config("SNR points must be strictly increasing"));
        }
        if self.max_frames == 0 || self.target_bit_errors == 0 {
            return Err(config("max_frames and target_bit_errors must be >= 1"));
        }
        if self.mode == Mode::Simo && self.users == 0 {
            return Err(config("SIMO mode needs at least one user"));
        }
        if self.mode == Mode::Simo && self.waveform == Waveform::Ofdm {
            return Err(config(
                "SIMO mode is waveform-agnostic; use waveform = \"otfs\"",
            ));
        }
        match &self.channel {
            ChannelModel::Paths { paths } => validate_paths(paths)?,
            ChannelModel::Eva {
                carrier_hz,
                speed_kmh,
                shapes,
            } => {
                if !(carrier_hz.is_finite() && *carrier_hz > 0.0) {
                    return Err(config(format!("carrier must be > 0 Hz, got {carrier_hz}")));
                }
                if !(speed_kmh.is_finite() && *speed_kmh >= 0.0) {
                    return Err(config(format!("speed must be >= 0, got {speed_kmh}")));
                }
                if shapes.is_empty() {
                    return Err(config("EVA placement needs at least one shape"));
                }
            }
        }
        if self.mode == Mode::Siso {
            check_capacity(
                self.constellation.order,
                self.grid.frame_len(),
                self.max_hypotheses,
            )?;
        }
        Ok(())
    }

    fn plan(&self) -> Result<Plan> {
        self.validate()?;
        let constellation =
            Constellation::new(self.constellation.scheme, self.constellation.order)?;
        let mp = constellation.error_params();
        let modem = Modem::new(self.grid)?;
        let mut analytic_paths = match &self.channel {
            ChannelModel::Paths { paths } => paths.clone(),
            ChannelModel::Eva {
                carrier_hz,
                speed_kmh,
                shapes,
            } => {
                // powers are fixed by the profile; only the Doppler bins are random
                let mut rng = frame_rng(self.master_seed, DOMAIN_FRAMES, 0, 0);
                eva_grid_placement(&self.grid, *carrier_hz, speed_kmh / 3.6, shapes, &mut rng)?
            }
        };
        if self.normalize {
            analytic_paths = normalize(&analytic_paths)?;
        }
        let max_l = analytic_paths.iter().map(|p| p.l).max().unwrap_or(0);
        let cp_len = match (self.waveform, self.cp_len) {
            (Waveform::Otfs, _) => 0,
            (Waveform::Ofdm, Some(l)) => l,
            (Waveform::Ofdm, None) => {
                let spread =
                    (eva_max_delay() * self.grid.m as f64 * self.grid.delta_f).ceil() as usize;
                spread.max(max_l)
            }
        };
        let interferers = match self.mode {
            Mode::Siso => Vec::new(),
            Mode::Simo => vec![analytic_paths.clone(); self.users - 1],
        };
        let bits_per_frame =
            (self.grid.frame_len() as u64) * constellation.bits_per_symbol() as u64;
        Ok(Plan {
            cfg: self.clone(),
            modem,
            constellation,
            mp,
            analytic_paths,
            interferers,
            cp_len,
            bits_per_frame,
        })
    }
}

fn complex_noise(rng: &mut ChaCha8Rng, std: f64, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * std
        })
        .collect()
}

impl Plan {
    fn frame_paths(&self, rng: &mut ChaCha8Rng) -> Result<Vec<PathSpec>> {
        match &self.cfg.channel {
            ChannelModel::Paths { .. } => Ok(self.analytic_paths.clone()),
            ChannelModel::Eva {
                carrier_hz,
                speed_kmh,
                shapes,
            } => {
                let placed =
                    eva_grid_placement(&self.cfg.grid, *carrier_hz, speed_kmh / 3.6, shapes, rng)?;
                if self.cfg.normalize {
                    normalize(&placed)
                } else {
                    Ok(placed)
                }
            }
        }
    }

    /// Bit errors in one waveform frame. Draw order: placement, gains,
    /// symbols, noise; identical for both waveforms.
    fn waveform_frame(&self, es_n0: f64, point: u64, frame: u64) -> Result<u32> {
        let mut rng = frame_rng(self.cfg.master_seed, DOMAIN_FRAMES, point, frame);
        let specs = self.frame_paths(&mut rng)?;
        let taps = generate_channel(&specs, &mut rng, frame)?.taps();
        let len = self.cfg.grid.frame_len();
        let q = self.constellation.order() as usize;
        let labels: Vec<usize> = (0..len).map(|_| rng.random_range(0..q)).collect();
        let frame_syms = DdFrame::from_labels(&self.cfg.grid, &self.constellation, &labels)?;
        // Es = 1, so each complex noise sample has variance 1 / es_n0
        let noise = complex_noise(&mut rng, (0.5 / es_n0).sqrt(), len);
        let (y, h) = match self.cfg.waveform {
            Waveform::Otfs => {
                let ch = self.modem.channel(&taps)?;
                (self.modem.otfs_link(&frame_syms, &ch, &noise)?, ch.h_eff)
            }
            Waveform::Ofdm => {
                let h = self.modem.ofdm_channel(&taps, self.cp_len)?;
                (
                    self.modem.ofdm_link(&frame_syms, &h, &noise, self.cp_len)?,
                    h,
                )
            }
        };
        let detected = ml_detect(
            y.as_slice().expect("contiguous"),
            &h,
            &self.constellation,
            self.cfg.max_hypotheses,
        )?;
        Ok(labels
            .iter()
            .zip(&detected)
            .map(|(&t, &r)| Constellation::bit_errors(t, r))
            .sum())
    }

    /// One interference draw shared by the frame, then a Bernoulli decision
    /// per bit at the conditional error probability.
    fn simo_frame(&self, es_n0: f64, point: u64, frame: u64) -> Result<u32> {
        let mut rng = frame_rng(self.cfg.master_seed, DOMAIN_SINR, point, frame);
        let s = sample_interference(es_n0, &self.interferers, &mut rng)?;
        let p = conditional_ber(es_n0, s, &self.mp);
        Ok((0..self.bits_per_frame)
            .filter(|_| rng.random::<f64>() < p)
            .count() as u32)
    }

    fn frame(&self, es_n0: f64, point: u64, frame: u64) -> Result<u32> {
        match self.cfg.mode {
            Mode::Siso => self.waveform_frame(es_n0, point, frame),
            Mode::Simo => self.simo_frame(es_n0, point, frame),
        }
    }

    fn analytic_value(&self, es_n0: f64) -> Result<(f64, Option<String>)> {
        match self.cfg.mode {
            Mode::Siso => Ok((siso_ber(es_n0, &self.analytic_paths, &self.mp)?, None)),
            Mode::Simo => multiuser_ber_or_free(es_n0, &self.interferers, &self.mp),
        }
    }

    fn analytic(&self, es_n0: f64, warnings: &mut Vec<String>) -> Option<f64> {
        match self.analytic_value(es_n0) {
            Ok((v, w)) => {
                if let Some(w) = w {
                    push_unique(warnings, w);
                }
                Some(v)
            }
            Err(e) => {
                push_unique(warnings, format!("analytic curve unavailable: {e}"));
                None
            }
        }
    }

    fn assumptions(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let ChannelModel::Eva { .. } = self.cfg.channel {
            out.push(
                "EVA placement keeps the strongest P taps in delay order on bins 0..P-1, renormalized"
                    .to_string(),
            );
        }
        if self.cfg.waveform == Waveform::Ofdm && self.cfg.cp_len.is_none() {
            out.push(format!(
                "OFDM cyclic prefix of {} samples covers the 2.51 us EVA delay spread; prefix energy charged as noise",
                self.cp_len
            ));
        }
        if self.cfg.mode == Mode::Simo {
            out.push(format!(
                "SIMO is semi-analytic: {} interferer(s) with the desired user's path profile, Bernoulli bits at A Q(sqrt(2 B SINR)) / log2 M",
                self.interferers.len()
            ));
        }
        out
    }
}

fn push_unique(v: &mut Vec<String>, s: String) {
    if !v.contains(&s) {
        v.push(s);
    }
}

fn map_frames<F>(range: Range<u64>, workers: Option<usize>, f: F) -> Result<Vec<u32>>
where
    F: Fn(u64) -> Result<u32> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != Some(1) {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = workers;
    range.map(f).collect()
}

fn run_point(
    plan: &Plan,
    snr_db: f64,
    opts: &RunOptions<'_>,
    warnings: &mut Vec<String>,
) -> Result<BerPoint> {
    let es_n0 = 10f64.powf(snr_db / 10.0);
    let point = snr_point_key(snr_db);
    let mut tally = FrameTally::default();
    let mut batch = INITIAL_BATCH;
    while tally.frames < plan.cfg.max_frames && tally.bit_errors < plan.cfg.target_bit_errors {
        let end = (tally.frames + batch).min(plan.cfg.max_frames);
        let errs = map_frames(tally.frames..end, opts.workers, |f| {
            plan.frame(es_n0, point, f)
        })?;
        for e in errs {
            tally.push(e);
        }
        batch = (batch * 2).min(MAX_BATCH);
        if let Some(hook) = opts.progress {
            hook(&Progress {
                snr_db,
                frames: tally.frames,
                bit_errors: tally.bit_errors,
            });
        }
    }
    let bits = tally.frames * plan.bits_per_frame;
    let deff = tally.design_effect(plan.bits_per_frame);
    let (ci_low, ci_high) = wilson_interval_effective(tally.bit_errors, bits, deff, CONFIDENCE)?;
    if tally.bit_errors < plan.cfg.target_bit_errors {
        push_unique(
            warnings,
            format!(
                "{snr_db} dB: frame budget exhausted with {} of {} target bit errors",
                tally.bit_errors, plan.cfg.target_bit_errors
            ),
        );
    }
    Ok(BerPoint {
        snr_db,
        ber: tally.bit_errors as f64 / bits as f64,
        ci_low,
        ci_high,
        // the closed forms describe the OTFS link only
        ber_analytic: match plan.cfg.waveform {
            Waveform::Otfs => plan.analytic(es_n0, warnings),
            Waveform::Ofdm => None,
        },
        bit_errors: tally.bit_errors,
        bits,
        frames: tally.frames,
        design_effect: deff,
    })
}

fn run_plan(plan: &Plan, opts: &RunOptions<'_>) -> Result<BerCurve> {
    let mut warnings = Vec::new();
    let points = plan
        .cfg
        .snr_db
        .iter()
        .map(|&s| run_point(plan, s, opts, &mut warnings))
        .collect::<Result<Vec<_>>>()?;
    Ok(BerCurve {
        waveform: plan.cfg.waveform,
        mode: plan.cfg.mode,
        cp_len: plan.cp_len,
        points,
        warnings,
        assumptions: plan.assumptions(),
    })
}

/// Closed-form values on the SNR grid of `cfg`, without simulation. Unlike
/// [`run_sweep`], analysis errors are returned rather than downgraded to warnings.
pub fn analytic_sweep(cfg: &SweepConfig) -> Result<AnalyticCurve> {
    if cfg.waveform == Waveform::Ofdm {
        return Err(config("closed-form BER is available for OTFS only"));
    }
    let plan = cfg.plan()?;
    let mut warnings = Vec::new();
    let mut values = Vec::with_capacity(cfg.snr_db.len());
    for &snr_db in &cfg.snr_db {
        let (v, w) = plan.analytic_value(10f64.powf(snr_db / 10.0))?;
        if let Some(w) = w {
            push_unique(&mut warnings, w);
        }
        values.push((snr_db, v));
    }
    Ok(AnalyticCurve {
        mode: cfg.mode,
        values,
        warnings,
        assumptions: plan.assumptions(),
    })
}

/// Runs every SNR point of `cfg`. Output depends only on `cfg`.
pub fn run_sweep(cfg: &SweepConfig, opts: &RunOptions<'_>) -> Result<BerCurve> {
    let plan = cfg.plan()?;
    #[cfg(feature = "parallel")]
    if let Some(w) = opts.workers.filter(|&w| w > 1) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| config(format!("thread pool: {e}")))?;
        return pool.install(|| run_plan(&plan, opts));
    }
    if opts.workers == Some(0) {
        return Err(Error::Config("workers must be >= 1".into()));
    }
    run_plan(&plan, opts)
}
