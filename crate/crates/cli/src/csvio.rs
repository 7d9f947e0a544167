//! BER tables: a `#`-commented manifest followed by a fixed-header CSV body.

use std::io::{Read, Write};

use otfs_core::engine::{BerPoint, SweepConfig, Waveform};

use crate::error::{usage, CliError, CliResult};

pub const HEADER: [&str; 9] = [
    "snr_db",
    "ber_mc",
    "ci_low",
    "ci_high",
    "ber_analytic",
    "bit_errors",
    "bits",
    "waveform",
    "preset",
];

/// One CSV row. Monte Carlo fields are absent on analytic-only rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub snr_db: f64,
    pub ber_mc: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ber_analytic: Option<f64>,
    pub bit_errors: Option<u64>,
    pub bits: Option<u64>,
    pub waveform: String,
    pub preset: String,
}

impl Row {
    pub fn from_point(p: &BerPoint, waveform: Waveform, preset: &str) -> Self {
        Row {
            snr_db: p.snr_db,
            ber_mc: Some(p.ber),
            ci_low: Some(p.ci_low),
            ci_high: Some(p.ci_high),
            ber_analytic: p.ber_analytic,
            bit_errors: Some(p.bit_errors),
            bits: Some(p.bits),
            waveform: waveform.name().to_string(),
            preset: preset.to_string(),
        }
    }

    pub fn analytic(snr_db: f64, ber: f64, waveform: Waveform, preset: &str) -> Self {
        Row {
            snr_db,
            ber_mc: None,
            ci_low: None,
            ci_high: None,
            ber_analytic: Some(ber),
            bit_errors: None,
            bits: None,
            waveform: waveform.name().to_string(),
            preset: preset.to_string(),
        }
    }

    fn record(&self) -> [String; 9] {
        let f = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        let u = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            format_float(self.snr_db),
            f(self.ber_mc),
            f(self.ci_low),
            f(self.ci_high),
            f(self.ber_analytic),
            u(self.bit_errors),
            u(self.bits),
            self.waveform.clone(),
            self.preset.clone(),
        ]
    }

    fn parse(rec: &csv::StringRecord) -> CliResult<Self> {
        if rec.len() != HEADER.len() {
            return Err(usage(format!(
                "expected {} fields, found {}",
                HEADER.len(),
                rec.len()
            )));
        }
        fn float(s: &str) -> CliResult<Option<f64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| usage(format!("invalid number '{s}'")))
        }
        fn int(s: &str) -> CliResult<Option<u64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| usage(format!("invalid count '{s}'")))
        }
        Ok(Row {
            snr_db: float(&rec[0])?.ok_or_else(|| usage("missing snr_db"))?,
            ber_mc: float(&rec[1])?,
            ci_low: float(&rec[2])?,
            ci_high: float(&rec[3])?,
            ber_analytic: float(&rec[4])?,
            bit_errors: int(&rec[5])?,
            bits: int(&rec[6])?,
            waveform: rec[7].to_string(),
            preset: rec[8].to_string(),
        })
    }
}

/// Scientific notation with 12 fractional digits, enough for a 1e-12
/// relative round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunKind {
    Sweep,
    Analytic,
}

impl RunKind {
    fn name(self) -> &'static str {
        match self {
            RunKind::Sweep => "sweep",
            RunKind::Analytic => "analytic",
        }
    }
}

/// A run recorded in the manifest with its full config, so the table can be
/// regenerated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub kind: RunKind,
    pub label: String,
    pub config: SweepConfig,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub version: String,
    pub timestamp: String,
    pub command: String,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
    pub assumptions: Vec<String>,
    pub runs: Vec<RunSpec>,
}

impl Manifest {
    pub fn new(command: impl Into<String>) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: humantime::format_rfc3339_seconds(std::time::SystemTime::now()).to_string(),
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn push_warning(&mut self, w: String) {
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn push_assumption(&mut self, a: String) {
        if !self.assumptions.contains(&a) {
            self.assumptions.push(a);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub manifest: Manifest,
    pub rows: Vec<Row>,
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

pub fn write_table<W: Write>(mut w: W, table: &Table) -> CliResult<()> {
    let m = &table.manifest;
    let mut head = String::new();
    head.push_str(&format!("# otfs-lab {}\n", m.version));
    head.push_str(&format!("# generated: {}\n", m.timestamp));
    head.push_str(&format!("# command: {}\n", one_line(&m.command)));
    if let Some(seed) = m.seed {
        head.push_str(&format!("# seed: {seed}\n"));
    }
    for warning in &m.warnings {
        head.push_str(&format!("# warning: {}\n", one_line(warning)));
    }
    for a in &m.assumptions {
        head.push_str(&format!("# ASSUMED: {}\n", one_line(a)));
    }
    for run in &m.runs {
        head.push_str(&format!(
            "#cfg {} {} {}\n",
            run.kind.name(),
            run.label,
            serde_json::to_string(&run.config)?
        ));
    }
    w.write_all(head.as_bytes()).map_err(io_err)?;
    w.write_all(body(&table.rows)?.as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Header plus data rows, without the manifest.
pub fn body(rows: &[Row]) -> CliResult<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(HEADER)?;
    for row in rows {
        wtr.write_record(row.record())?;
    }
    let bytes = wtr.into_inner().map_err(|e| io_err(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| usage(e.to_string()))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "<stream>".into(),
        source: e,
    }
}

pub fn read_table<R: Read>(mut r: R) -> CliResult<Table> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(io_err)?;
    let mut manifest = Manifest::default();
    for line in text.lines().filter(|l| l.starts_with('#')) {
        if let Some(rest) = line.strip_prefix("#cfg ") {
            manifest.runs.push(parse_cfg_line(rest)?);
        } else if let Some(rest) = line.strip_prefix("# otfs-lab ") {
            manifest.version = rest.to_string();
        } else if let Some(rest) = line.strip_prefix("# generated: ") {
            manifest.timestamp = rest.to_string();
        } else if let Some(rest) = line.strip_prefix("# command: ") {
            manifest.command = rest.to_string();
        } else if let Some(rest) = line.strip_prefix("# seed: ") {
            manifest.seed = Some(
                rest.parse()
                    .map_err(|_| usage(format!("invalid seed line '{line}'")))?,
            );
        } else if let Some(rest) = line.strip_prefix("# warning: ") {
            manifest.warnings.push(rest.to_string());
        } else if let Some(rest) = line.strip_prefix("# ASSUMED: ") {
            manifest.assumptions.push(rest.to_string());
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(usage(format!(
            "unexpected header '{}', expected '{}'",
            header.join(","),
            HEADER.join(",")
        )));
    }
    let rows = rdr
        .records()
        .map(|rec| Row::parse(&rec?))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Table { manifest, rows })
}

fn parse_cfg_line(rest: &str) -> CliResult<RunSpec> {
    let mut parts = rest.splitn(3, ' ');
    let (Some(kind), Some(label), Some(json)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(usage(format!("malformed #cfg line '{rest}'")));
    };
    let kind = match kind {
        "sweep" => RunKind::Sweep,
        "analytic" => RunKind::Analytic,
        other => return Err(usage(format!("unknown run kind '{other}'"))),
    };
    Ok(RunSpec {
        kind,
        label: label.to_string(),
        config: serde_json::from_str(json)?,
    })
}

/// The data section of a table file: everything but the `#` lines.
pub fn data_section(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}
