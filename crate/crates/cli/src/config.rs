use std::path::PathBuf;

use cmvlab::contfrac::Frequency;
use cmvlab::real::{Real, DEFAULT_PRECISION_BITS};
use cmvlab::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PRECISION_ENV: &str = "CMVLAB_PRECISION";

/// Bits used when rounding decimal input, from `CMVLAB_PRECISION` if set.
pub fn precision_bits() -> Result<u32, CliError> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
        Ok(s) => {
            let bits: u32 = s
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{PRECISION_ENV}={s:?} is not an integer")))?;
            if !(64..=65_536).contains(&bits) {
                return Err(CliError::Config(format!("{PRECISION_ENV}={bits} outside 64..=65536")));
            }
            Ok(bits)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSpec {
    Named(String),
    Decimal(String),
    /// Purely periodic expansion `[0; period, period, ...]`.
    Cf(Vec<u64>),
}

impl ThetaSpec {
    pub fn parse(theta: Option<&str>, cf: Option<&str>) -> Result<Self, CliError> {
        match (theta, cf) {
            (Some(_), Some(_)) => Err(CliError::Config("give either --theta or --cf, not both".into())),
            (None, None) => Err(CliError::Config("one of --theta or --cf is required".into())),
            (None, Some(list)) => {
                let period = list
                    .split(',')
                    .map(|t| t.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Config(format!("bad --cf list {list:?}")))?;
                if period.is_empty() || period.contains(&0) {
                    return Err(CliError::Config("--cf needs positive partial quotients".into()));
                }
                Ok(Self::Cf(period))
            }
            (Some(t), None) => match t.trim().to_ascii_lowercase().as_str() {
                "golden" | "silver" => Ok(Self::Named(t.trim().to_ascii_lowercase())),
                _ => Ok(Self::Decimal(t.trim().to_string())),
            },
        }
    }

    pub fn frequency(&self, n_terms: usize, bits: u32) -> Result<Frequency, CliError> {
        Ok(match self {
            Self::Named(n) if n == "golden" => Frequency::golden(n_terms),
            Self::Named(n) if n == "silver" => Frequency::silver(n_terms),
            Self::Named(n) => return Err(CliError::Config(format!("unknown frequency {n:?}"))),
            Self::Decimal(s) => {
                let theta = Real::parse(s, bits)?;
                Frequency::new(theta, n_terms)?
            }
            Self::Cf(period) => Frequency::periodic(period, n_terms)?,
        })
    }
}

/// `re,im` or a bare real part.
pub fn parse_complex(s: &str) -> Result<[f64; 2], CliError> {
    let bad = || CliError::Config(format!("bad complex number {s:?}; expected re,im"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok([re, im])
}

/// `a:b`, inclusive on both ends.
pub fn parse_range(s: &str) -> Result<(i64, i64), CliError> {
    let bad = || CliError::Config(format!("bad range {s:?}; expected a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn c64(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub scan: Option<PathBuf>,
    pub certificates: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Everything a scan run depends on; echoed into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    pub theta: ThetaSpec,
    /// Phase of the coding, decimal or ratio; `None` means `φ = θ`.
    pub phi: Option<String>,
    pub grid: usize,
    pub budget: usize,
    pub refine: usize,
    pub escape_threshold: f64,
    pub k_range: (usize, usize),
    pub seed: u64,
    /// Allows `β = γ`.
    pub degenerate: bool,
    pub precision_bits: u32,
    pub outputs: OutputPaths,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let (b, g) = (c64(self.beta), c64(self.gamma));
        for (name, v) in [("beta", b), ("gamma", g)] {
            if !(v.norm() < 1.0) {
                return Err(CliError::Config(format!("|{name}| = {} must be < 1", v.norm())));
            }
        }
        if b == g && !self.degenerate {
            return Err(CliError::Config("beta = gamma gives a periodic model; pass --degenerate to allow it".into()));
        }
        if self.grid < 64 || !self.grid.is_power_of_two() {
            return Err(CliError::Config(format!("grid {} must be a power of two >= 64", self.grid)));
        }
        if self.budget < 5 {
            return Err(CliError::Config(format!("budget {} must be >= 5", self.budget)));
        }
        if self.refine > 40 {
            return Err(CliError::Config(format!("refine depth {} exceeds 40", self.refine)));
        }
        if !(self.escape_threshold >= 1.0) || !self.escape_threshold.is_finite() {
            return Err(CliError::Config("escape threshold must be a finite number >= 1".into()));
        }
        let (lo, hi) = self.k_range;
        if lo < 3 || lo > hi {
            return Err(CliError::Config(format!("scale range {lo}:{hi} must satisfy 3 <= a <= b")));
        }
        Ok(())
    }

    /// Partial quotients needed by the scan and by certificates up to `k_range.1`.
    pub fn n_terms(&self) -> usize {
        self.budget.max(self.k_range.1 + 2) + 2
    }

    pub fn frequency(&self) -> Result<Frequency, CliError> {
        self.theta.frequency(self.n_terms(), self.precision_bits)
    }
}
