//! Serialization: JSON with 17 significant digits, scan files, CSV export.

use std::io::{self, Write};
use std::path::Path;

use cmvlab::tracemap::{ScanPoint, SpectrumScan};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "cmvlab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every float as `d.dddddddddddddddde±x`, which round-trips any `f64`.
pub struct SeventeenDigits<F>(F);

fn write_float<W: ?Sized + Write>(w: &mut W, v: f64) -> io::Result<()> {
    write!(w, "{v:.16e}")
}

impl<F: Formatter> Formatter for SeventeenDigits<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> Result<String, CliError> {
    let mut buf = Vec::new();
    if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(PrettyFormatter::new()));
        value.serialize(&mut ser)?;
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits(CompactFormatter));
        value.serialize(&mut ser)?;
    }
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(path.display().to_string(), e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

/// Header shared by every JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub kind: String,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(kind: &str, result: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.into(),
            tool_version: TOOL_VERSION.into(),
            kind: kind.into(),
            result,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanHeader {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config: ExperimentConfig,
    /// Partial quotients actually used.
    pub cf: Vec<u64>,
    pub grid_size: usize,
    pub budget: usize,
    /// `arc_measure[n]`: bounded-arc measure still bounded at step `n`.
    pub arc_measure: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScanFile {
    pub header: ScanHeader,
    /// One row per grid point, in angle order.
    pub rows: Vec<ScanPoint>,
    /// Bisection points added by refinement, in angle order.
    pub refined: Vec<ScanPoint>,
}

impl SpectrumScanFile {
    pub fn new(config: &ExperimentConfig, scan: &SpectrumScan) -> Self {
        Self {
            header: ScanHeader {
                schema_version: SCHEMA_VERSION,
                tool: TOOL.into(),
                tool_version: TOOL_VERSION.into(),
                config: config.clone(),
                cf: scan.cf.clone(),
                grid_size: scan.grid_size,
                budget: scan.budget,
                arc_measure: scan.arc_measure.clone(),
            },
            rows: scan.grid().to_vec(),
            refined: scan.points[scan.grid_size..].to_vec(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let h = &self.header;
        if h.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                h.schema_version
            )));
        }
        if self.rows.len() != h.grid_size {
            return Err(CliError::Schema(format!(
                "{} rows for grid size {}",
                self.rows.len(),
                h.grid_size
            )));
        }
        if h.arc_measure.len() != h.budget + 1 {
            return Err(CliError::Schema("arc measure length does not match budget".into()));
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let file: Self = read_json(path)?;
        file.validate()?;
        Ok(file)
    }

    /// Lossy spreadsheet export of the grid rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle,zeta_re,zeta_im,status,escape_step,lyapunov,invariant_drift\n");
        for p in &self.rows {
            let status = match p.status {
                cmvlab::tracemap::OrbitStatus::Bounded => "bounded",
                cmvlab::tracemap::OrbitStatus::Escaped => "escaped",
            };
            let step = p.escape_step.map(|s| s.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{status},{step},{:.16e},{:.16e}\n",
                p.angle, p.zeta[0], p.zeta[1], p.lyapunov, p.invariant_drift
            ));
        }
        out
    }
}
