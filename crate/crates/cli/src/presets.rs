//! Named presets on the 2x2 grid, 15 kHz spacing, 4 GHz carrier at 120 km/h.

use otfs_core::ddmodem::{OtfsGrid, DEFAULT_MAX_HYPOTHESES};
use otfs_core::engine::{
    ChannelModel, Mode, SweepConfig, Waveform, DEFAULT_MAX_FRAMES, DEFAULT_TARGET_BIT_ERRORS,
};
use otfs_core::fading::PathSpec;
use otfs_core::modulation::{ConstellationSpec, Scheme};

use crate::error::{usage, CliResult};

pub const GRID_M: usize = 2;
pub const GRID_N: usize = 2;
pub const DELTA_F_HZ: f64 = 15e3;
pub const CARRIER_HZ: f64 = 4e9;
pub const SPEED_KMH: f64 = 120.0;
pub const DEFAULT_SEED: u64 = 1;

/// One curve of a preset: a labelled config plus the modelling choices it
/// makes where the source parameters are silent.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub label: String,
    pub config: SweepConfig,
    pub assumptions: Vec<String>,
}

pub fn default_snr_grid() -> Vec<f64> {
    (0..=10).map(|i| 2.0 * i as f64).collect()
}

fn base(
    scheme: Scheme,
    order: u32,
    channel: ChannelModel,
    waveform: Waveform,
    mode: Mode,
) -> SweepConfig {
    SweepConfig {
        grid: OtfsGrid::new(GRID_M, GRID_N, DELTA_F_HZ).expect("static grid"),
        constellation: ConstellationSpec { scheme, order },
        channel,
        snr_db: default_snr_grid(),
        max_frames: DEFAULT_MAX_FRAMES,
        target_bit_errors: DEFAULT_TARGET_BIT_ERRORS,
        master_seed: DEFAULT_SEED,
        waveform,
        mode,
        cp_len: None,
        users: 2,
        normalize: false,
        max_hypotheses: DEFAULT_MAX_HYPOTHESES,
    }
}

fn eva(shapes: &[f64]) -> ChannelModel {
    ChannelModel::Eva {
        carrier_hz: CARRIER_HZ,
        speed_kmh: SPEED_KMH,
        shapes: shapes.to_vec(),
    }
}

const TWO_PATH_POSITIONS: &str = "second path at grid point (l, k) = (1, 1), first at (0, 0)";

fn two_path(shapes: (f64, f64), omega: (f64, f64)) -> ChannelModel {
    ChannelModel::Paths {
        paths: vec![
            PathSpec::new(shapes.0, omega.0, 0, 0),
            PathSpec::new(shapes.1, omega.1, 1, 1),
        ],
    }
}

pub const PRESET_LABELS: [&str; 8] = [
    "fig1-m1",
    "fig1-m2",
    "fig2-m12",
    "fig2-m23",
    "fig3-ku1",
    "fig3-ku2",
    "fig4-m1-ku1",
    "fig4-m2-ku2",
];

/// A single preset curve by label, for the given waveform.
pub fn preset(label: &str, waveform: Waveform) -> CliResult<Preset> {
    let (config, assumptions) = match label {
        "fig1-m1" | "fig1-m2" => {
            let m = if label == "fig1-m1" { 1.0 } else { 2.0 };
            (
                base(Scheme::Bpsk, 2, eva(&[m]), waveform, Mode::Siso),
                vec![],
            )
        }
        "fig2-m12" | "fig2-m23" => {
            let shapes = if label == "fig2-m12" {
                (1.0, 2.0)
            } else {
                (2.0, 3.0)
            };
            (
                base(
                    Scheme::Qpsk,
                    4,
                    two_path(shapes, (2.0 / 3.0, 1.0 / 3.0)),
                    waveform,
                    Mode::Siso,
                ),
                vec![
                    "per-path powers Omega = (2/3, 1/3)".to_string(),
                    TWO_PATH_POSITIONS.to_string(),
                ],
            )
        }
        "fig3-ku1" | "fig3-ku2" => {
            let mut c = base(Scheme::Qpsk, 4, eva(&[2.0]), Waveform::Otfs, Mode::Simo);
            c.users = if label == "fig3-ku1" { 1 } else { 2 };
            (c, vec![])
        }
        "fig4-m1-ku1" | "fig4-m2-ku2" => {
            let (m, users) = if label == "fig4-m1-ku1" {
                (1.0, 1)
            } else {
                (2.0, 2)
            };
            let mut c = base(
                Scheme::Qpsk,
                4,
                two_path((m, m), (0.5, 0.5)),
                Waveform::Otfs,
                Mode::Simo,
            );
            c.users = users;
            (
                c,
                vec![
                    "per-path powers equal split Omega = (1/2, 1/2)".to_string(),
                    TWO_PATH_POSITIONS.to_string(),
                ],
            )
        }
        other => {
            return Err(usage(format!(
                "unknown preset '{other}'; known presets: {}",
                PRESET_LABELS.join(", ")
            )))
        }
    };
    if config.mode == Mode::Simo && waveform == Waveform::Ofdm {
        return Err(usage(format!(
            "preset '{label}' is a semi-analytic SIMO preset and has no OFDM variant"
        )));
    }
    Ok(Preset {
        label: label.to_string(),
        config,
        assumptions,
    })
}

/// All curves of a figure: both waveforms for the SISO figures, OTFS only for
/// the semi-analytic SIMO figures.
pub fn figure(n: u8) -> CliResult<Vec<Preset>> {
    let (labels, waveforms): (&[&str], &[Waveform]) = match n {
        1 => (&["fig1-m1", "fig1-m2"], &[Waveform::Otfs, Waveform::Ofdm]),
        2 => (&["fig2-m12", "fig2-m23"], &[Waveform::Otfs, Waveform::Ofdm]),
        3 => (&["fig3-ku1", "fig3-ku2"], &[Waveform::Otfs]),
        4 => (&["fig4-m1-ku1", "fig4-m2-ku2"], &[Waveform::Otfs]),
        _ => return Err(usage(format!("figure must be 1, 2, 3 or 4, got {n}"))),
    };
    let mut out = Vec::new();
    for label in labels {
        for &w in waveforms {
            out.push(preset(label, w)?);
        }
    }
    Ok(out)
}
