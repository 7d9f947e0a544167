//! Argument parsing and command execution.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use otfs_core::diversity::{
    analytic_gd, empirical_gd, simo_gd_approx, siso_gd_approx, slope_between, DiversityReport,
    ASYMPTOTIC_WINDOW, DEFAULT_WINDOW,
};
use otfs_core::engine::{
    analytic_sweep, run_sweep, ChannelModel, Mode, Progress, RunOptions, SweepConfig, Waveform,
};

use crate::csvio::{
    body, data_section, read_table, write_table, Manifest, Row, RunKind, RunSpec, Table,
};
use crate::error::{usage, CliError, CliResult, EXIT_CONFIG, EXIT_OK};
use crate::presets::{figure, preset, Preset};

#[derive(Debug, Parser)]
#[command(
    name = "otfs-lab",
    version,
    about = "OTFS/OFDM BER sweeps over Nakagami-m channels"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo sweep with the closed form attached where it applies.
    Sweep(RunArgs),
    /// Closed-form BER only, on a dense SNR grid.
    Analytic(RunArgs),
    /// Diversity order from BER slopes, as JSON.
    Diversity(DiversityArgs),
    /// Paired OTFS and OFDM sweeps on identical draws.
    Compare(RunArgs),
    /// All curves of one figure preset.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        number: u8,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-run the configs recorded in a table and check the rows match.
    Replay {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// TOML sweep config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset, e.g. fig1-m1.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SNR grid in dB as start:step:stop, or a single value.
    #[arg(long, value_parser = parse_snr)]
    snr: Option<SnrGrid>,
    #[arg(long)]
    frames_max: Option<u64>,
    #[arg(long)]
    target_errors: Option<u64>,
    /// Worker threads; 1 runs the sequential path.
    #[arg(long)]
    workers: Option<usize>,
    /// Report progress on stderr after every batch.
    #[arg(long)]
    progress: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    waveform: Option<WaveformArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
struct DiversityArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Slope window in dB as lo:hi.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Analytic slope near the asymptote instead of a simulated one.
    #[arg(long)]
    asymptotic: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WaveformArg {
    Otfs,
    Ofdm,
}

impl From<WaveformArg> for Waveform {
    fn from(w: WaveformArg) -> Self {
        match w {
            WaveformArg::Otfs => Waveform::Otfs,
            WaveformArg::Ofdm => Waveform::Ofdm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Siso,
    Simo,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Siso => Mode::Siso,
            ModeArg::Simo => Mode::Simo,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

/// Parses `start:step:stop` (inclusive) or a single dB value.
pub fn parse_snr(s: &str) -> Result<SnrGrid, String> {
    let nums: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number '{t}'"))
        })
        .collect::<Result<_, _>>()?;
    if nums.iter().any(|x| !x.is_finite()) {
        return Err("SNR values must be finite".into());
    }
    match nums[..] {
        [x] => Ok(SnrGrid(vec![x])),
        [a, step, b] => {
            if step <= 0.0 || b < a {
                return Err(format!("need step > 0 and stop >= start in '{s}'"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            if n > 100_000 {
                return Err(format!("'{s}' yields {n} points"));
            }
            // snap to 1e-9 dB so 0.1 steps give clean keys
            Ok(SnrGrid(
                (0..n)
                    .map(|i| ((a + i as f64 * step) * 1e9).round() / 1e9)
                    .collect(),
            ))
        }
        _ => Err(format!(
            "expected start:step:stop or a single value, got '{s}'"
        )),
    }
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let nums: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number '{t}'"))
        })
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [a, b] if a < b => Ok((a, b)),
        _ => Err(format!("expected lo:hi with lo < hi, got '{s}'")),
    }
}

const DENSE_ANALYTIC_GRID: &str = "0:0.5:40";

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let command_line = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match execute(cli, &command_line) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, command_line: &str) -> CliResult<()> {
    match cli.command {
        Command::Sweep(args) => {
            let presets = resolve(&args)?;
            let table = simulate(&presets, &args.common, command_line)?;
            emit_table(&table, args.common.out.as_deref())
        }
        Command::Compare(args) => {
            let mut presets = Vec::new();
            for base in resolve(&args)? {
                for w in [Waveform::Otfs, Waveform::Ofdm] {
                    let mut p = base.clone();
                    p.config.waveform = w;
                    presets.push(p);
                }
            }
            let table = simulate(&presets, &args.common, command_line)?;
            emit_table(&table, args.common.out.as_deref())
        }
        Command::Figure { number, common } => {
            let mut presets = figure(number)?;
            for p in &mut presets {
                apply_common(&mut p.config, &common);
            }
            let table = simulate(&presets, &common, command_line)?;
            emit_table(&table, common.out.as_deref())
        }
        Command::Analytic(mut args) => {
            if args.common.snr.is_none() {
                args.common.snr = Some(parse_snr(DENSE_ANALYTIC_GRID).map_err(usage)?);
            }
            let presets = resolve(&args)?;
            let table = analytic_table(&presets, command_line)?;
            emit_table(&table, args.common.out.as_deref())
        }
        Command::Diversity(args) => {
            let report = diversity(&args, command_line)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit_text(&text, args.run.common.out.as_deref())
        }
        Command::Replay { file, out, workers } => replay(&file, out.as_deref(), workers),
    }
}

fn resolve(args: &RunArgs) -> CliResult<Vec<Preset>> {
    let waveform = args.waveform.map(Waveform::from).unwrap_or_default();
    let mut p = match (&args.source.config, &args.source.preset) {
        (Some(path), None) => load_config(path)?,
        (None, Some(label)) => preset(label, Waveform::Otfs)?,
        _ => return Err(usage("one of --config or --preset is required")),
    };
    if let Some(w) = args.waveform {
        p.config.waveform = w.into();
    } else if args.source.preset.is_some() {
        p.config.waveform = waveform;
    }
    if let Some(m) = args.mode {
        p.config.mode = m.into();
    }
    apply_common(&mut p.config, &args.common);
    Ok(vec![p])
}

fn load_config(path: &Path) -> CliResult<Preset> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: SweepConfig = toml::from_str(&text).map_err(|source| CliError::Toml {
        path: path.to_path_buf(),
        source,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().replace(char::is_whitespace, "_"))
        .unwrap_or_else(|| "config".into());
    Ok(Preset {
        label,
        config,
        assumptions: vec![],
    })
}

fn apply_common(cfg: &mut SweepConfig, common: &CommonArgs) {
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(SnrGrid(snr)) = &common.snr {
        cfg.snr_db = snr.clone();
    }
    if let Some(f) = common.frames_max {
        cfg.max_frames = f;
    }
    if let Some(t) = common.target_errors {
        cfg.target_bit_errors = t;
    }
}

fn tagged(label: &str, waveform: Waveform, msg: &str) -> String {
    format!("[{label}/{}] {msg}", waveform.name())
}

fn new_manifest(presets: &[Preset], command_line: &str) -> Manifest {
    let mut m = Manifest::new(command_line);
    m.seed = presets.first().map(|p| p.config.master_seed);
    for p in presets {
        for a in &p.assumptions {
            m.push_assumption(format!("[{}] {a}", p.label));
        }
    }
    m
}

/// Monte Carlo rows for each preset, in order.
pub fn simulate_presets(
    presets: &[Preset],
    workers: Option<usize>,
    command_line: &str,
) -> CliResult<Table> {
    let mut manifest = new_manifest(presets, command_line);
    let mut rows = Vec::new();
    for p in presets {
        let curve = run_sweep(
            &p.config,
            &RunOptions {
                workers,
                progress: None,
            },
        )?;
        collect_curve(&mut manifest, &mut rows, p, &curve);
    }
    Ok(Table { manifest, rows })
}

fn collect_curve(
    manifest: &mut Manifest,
    rows: &mut Vec<Row>,
    p: &Preset,
    curve: &otfs_core::engine::BerCurve,
) {
    let w = p.config.waveform;
    for a in &curve.assumptions {
        manifest.push_assumption(tagged(&p.label, w, a));
    }
    for warning in &curve.warnings {
        manifest.push_warning(tagged(&p.label, w, warning));
    }
    manifest.runs.push(RunSpec {
        kind: RunKind::Sweep,
        label: p.label.clone(),
        config: p.config.clone(),
    });
    rows.extend(
        curve
            .points
            .iter()
            .map(|pt| Row::from_point(pt, w, &p.label)),
    );
}

fn simulate(presets: &[Preset], common: &CommonArgs, command_line: &str) -> CliResult<Table> {
    if !common.progress {
        return simulate_presets(presets, common.workers, command_line);
    }
    let mut manifest = new_manifest(presets, command_line);
    let mut rows = Vec::new();
    for p in presets {
        let label = format!("{}/{}", p.label, p.config.waveform.name());
        let hook = |pr: &Progress| {
            eprintln!(
                "{label}: {:.2} dB, {} frames, {} bit errors",
                pr.snr_db, pr.frames, pr.bit_errors
            );
        };
        let curve = run_sweep(
            &p.config,
            &RunOptions {
                workers: common.workers,
                progress: Some(&hook),
            },
        )?;
        collect_curve(&mut manifest, &mut rows, p, &curve);
    }
    Ok(Table { manifest, rows })
}

/// Closed-form rows for each preset.
pub fn analytic_table(presets: &[Preset], command_line: &str) -> CliResult<Table> {
    let mut manifest = new_manifest(presets, command_line);
    let mut rows = Vec::new();
    for p in presets {
        let curve = analytic_sweep(&p.config)?;
        let w = p.config.waveform;
        for a in &curve.assumptions {
            manifest.push_assumption(tagged(&p.label, w, a));
        }
        for warning in &curve.warnings {
            manifest.push_warning(tagged(&p.label, w, warning));
        }
        manifest.runs.push(RunSpec {
            kind: RunKind::Analytic,
            label: p.label.clone(),
            config: p.config.clone(),
        });
        rows.extend(
            curve
                .values
                .iter()
                .map(|&(snr, v)| Row::analytic(snr, v, w, &p.label)),
        );
    }
    Ok(Table { manifest, rows })
}

#[derive(Debug, Serialize)]
struct DiversityOutput {
    version: &'static str,
    command: String,
    seed: u64,
    reports: Vec<DiversityReport>,
    warnings: Vec<String>,
}

fn path_shapes(cfg: &SweepConfig) -> Vec<f64> {
    match &cfg.channel {
        ChannelModel::Paths { paths } => paths.iter().map(|p| p.m).collect(),
        ChannelModel::Eva { shapes, .. } => shapes.clone(),
    }
}

fn diversity(args: &DiversityArgs, command_line: &str) -> CliResult<DiversityOutput> {
    let window = match (args.window, args.asymptotic) {
        (Some(w), _) => w,
        (None, true) => ASYMPTOTIC_WINDOW,
        (None, false) => DEFAULT_WINDOW,
    };
    let mut warnings = Vec::new();
    let mut reports = Vec::new();
    let presets = resolve(&args.run)?;
    let seed = presets[0].config.master_seed;
    for mut p in presets {
        p.config.snr_db = vec![window.0, window.1];
        let shapes = path_shapes(&p.config);
        let gd_approx = match p.config.mode {
            Mode::Siso => siso_gd_approx(&shapes)?,
            Mode::Simo => simo_gd_approx(p.config.users, &shapes)?,
        };
        let label = format!("{}/{}", p.label, p.config.waveform.name());
        let (gd_empirical, gd_analytic) = if args.asymptotic {
            let curve = analytic_sweep(&p.config)?;
            warnings.extend(curve.warnings.iter().map(|w| format!("[{label}] {w}")));
            let gd = slope_between(curve.values[0], curve.values[1])?;
            (None, Some(gd))
        } else {
            let curve = run_sweep(
                &p.config,
                &RunOptions {
                    workers: args.run.common.workers,
                    progress: None,
                },
            )?;
            warnings.extend(curve.warnings.iter().map(|w| format!("[{label}] {w}")));
            let emp = empirical_gd(&curve, window.0, window.1)?;
            (Some(emp), analytic_gd(&curve, window.0, window.1).ok())
        };
        reports.push(DiversityReport {
            label,
            snr_pair: window,
            gd_empirical,
            gd_analytic,
            gd_approx,
        });
    }
    Ok(DiversityOutput {
        version: env!("CARGO_PKG_VERSION"),
        command: command_line.to_string(),
        seed,
        reports,
        warnings,
    })
}

fn replay(file: &Path, out: Option<&Path>, workers: Option<usize>) -> CliResult<()> {
    let text = fs::read_to_string(file).map_err(|source| CliError::Io {
        path: file.to_path_buf(),
        source,
    })?;
    let original = read_table(text.as_bytes())?;
    if original.manifest.runs.is_empty() {
        return Err(usage(format!("{} records no #cfg lines", file.display())));
    }
    let mut fresh = Table {
        manifest: Manifest::new(format!("replay {}", file.display())),
        rows: Vec::new(),
    };
    fresh.manifest.seed = original.manifest.seed;
    fresh.manifest.assumptions = original.manifest.assumptions.clone();
    for run in &original.manifest.runs {
        let p = Preset {
            label: run.label.clone(),
            config: run.config.clone(),
            assumptions: vec![],
        };
        let part = match run.kind {
            RunKind::Sweep => simulate_presets(std::slice::from_ref(&p), workers, "")?,
            RunKind::Analytic => analytic_table(std::slice::from_ref(&p), "")?,
        };
        for w in part.manifest.warnings {
            fresh.manifest.push_warning(w);
        }
        fresh.manifest.runs.extend(part.manifest.runs);
        fresh.rows.extend(part.rows);
    }
    let expected = data_section(&text);
    let got = body(&fresh.rows)?;
    if let Some(path) = out {
        emit_table(&fresh, Some(path))?;
    }
    if expected != got {
        let line = expected
            .lines()
            .zip(got.lines())
            .position(|(a, b)| a != b)
            .unwrap_or_else(|| expected.lines().count().min(got.lines().count()));
        return Err(CliError::ReplayMismatch(format!(
            "data differs from {} at data line {}",
            file.display(),
            line + 1
        )));
    }
    eprintln!("replay: {} rows identical", fresh.rows.len());
    Ok(())
}

fn emit_table(table: &Table, out: Option<&Path>) -> CliResult<()> {
    for w in &table.manifest.warnings {
        eprintln!("warning: {w}");
    }
    let mut buf = Vec::new();
    write_table(&mut buf, table)?;
    emit_bytes(&buf, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> CliResult<()> {
    emit_bytes(text.as_bytes(), out)
}

fn emit_bytes(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
