//! Run settings: defaults, the `key = value` config file, and validation.
//!
//! The file is line oriented. `[section]` headers open a section, `#` or
//! `;` start a comment, and every key must belong to a known section.
//! Unknown sections and keys are rejected.

use btcert::report::fmt_real;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown config key {0}")]
    UnknownKey(String),
    #[error("bad value for {key}: {msg}")]
    BadValue { key: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub k: f64,
    pub phi: f64,
    pub c1_delta: f64,

    pub w: f64,
    pub u0: f64,
    pub u1: f64,
    pub v: f64,
    pub x0: f64,
    pub x1: f64,
    pub lambda_min: f64,

    pub tol: f64,
    pub lambda_max: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,

    pub lambda_start: f64,
    pub lambda_end: f64,

    pub assembly_m: f64,
    pub rhs_tolerance: f64,
    /// `proof` or `statement`.
    pub c2_form: String,
    /// Fixed `C2` instead of the computed one.
    pub c2: Option<f64>,

    pub siegel_m: f64,
    pub siegel_b: f64,
    pub siegel_delta: f64,

    pub psi_m: f64,
    pub eta: f64,

    pub moduli: Vec<u64>,
    /// Upper limit for the prime counts; `q^8` per modulus when absent.
    pub prime_x: Option<u64>,

    pub g2_max: f64,

    pub format: Format,
    pub out: Option<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            k: 0.66,
            phi: 1.0 / 3.0,
            c1_delta: 0.0,
            w: 0.115,
            u0: 0.564,
            u1: 0.620,
            v: 0.964,
            x0: 1.413,
            x1: 1.623,
            lambda_min: 0.35,
            tol: 1e-8,
            lambda_max: 10.0,
            gamma_min: 1.0,
            gamma_max: 1.6,
            lambda_start: 0.74,
            lambda_end: 1.45,
            assembly_m: 7.999,
            rhs_tolerance: 0.01,
            c2_form: "proof".into(),
            c2: None,
            siegel_m: 7.5,
            siegel_b: 1.0,
            siegel_delta: 0.01,
            psi_m: 7.0,
            eta: 0.1,
            moduli: vec![3, 5, 7],
            prime_x: None,
            g2_max: 0.652,
            format: Format::Csv,
            out: None,
        }
    }
}

fn real(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::BadValue { key: key.into(), msg: format!("{v:?} is not a number") })?;
    if !x.is_finite() {
        return Err(ConfigError::BadValue { key: key.into(), msg: "must be finite".into() });
    }
    Ok(x)
}

fn integer(key: &str, v: &str) -> Result<u64, ConfigError> {
    v.parse().map_err(|_| ConfigError::BadValue { key: key.into(), msg: format!("{v:?} is not an integer") })
}

/// Parses `1/3`-style fractions as well as plain decimals.
fn fraction(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.split_once('/') {
        Some((a, b)) => Ok(real(key, a.trim())? / real(key, b.trim())?),
        None => real(key, v),
    }
}

impl Settings {
    /// Sets `section.key` from its textual value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
        let full = format!("{section}.{key}");
        let v = value.trim();
        match (section, key) {
            ("kernel", "K") => self.k = real(&full, v)?,
            ("kernel", "phi") => self.phi = fraction(&full, v)?,
            ("kernel", "c1_delta") => self.c1_delta = real(&full, v)?,
            ("weights", "w") => self.w = real(&full, v)?,
            ("weights", "u0") => self.u0 = real(&full, v)?,
            ("weights", "u1") => self.u1 = real(&full, v)?,
            ("weights", "v") => self.v = real(&full, v)?,
            ("weights", "x0") => self.x0 = real(&full, v)?,
            ("weights", "x1") => self.x1 = real(&full, v)?,
            ("weights", "lambda_min") => self.lambda_min = real(&full, v)?,
            ("search", "tol") => self.tol = real(&full, v)?,
            ("search", "lambda_max") => self.lambda_max = real(&full, v)?,
            ("search", "gamma_min") => self.gamma_min = real(&full, v)?,
            ("search", "gamma_max") => self.gamma_max = real(&full, v)?,
            ("table1", "lambda_start") => self.lambda_start = real(&full, v)?,
            ("table1", "lambda_end") => self.lambda_end = real(&full, v)?,
            ("assembly", "M") => self.assembly_m = real(&full, v)?,
            ("assembly", "rhs_tolerance") => self.rhs_tolerance = real(&full, v)?,
            ("assembly", "c2_form") => match v {
                "proof" | "statement" => self.c2_form = v.into(),
                _ => return Err(ConfigError::BadValue { key: full, msg: "expected proof or statement".into() }),
            },
            ("assembly", "c2") => self.c2 = Some(real(&full, v)?),
            ("siegel", "M") => self.siegel_m = real(&full, v)?,
            ("siegel", "B") => self.siegel_b = real(&full, v)?,
            ("siegel", "delta") => self.siegel_delta = real(&full, v)?,
            ("psi", "M") => self.psi_m = real(&full, v)?,
            ("psi", "eta") => self.eta = real(&full, v)?,
            ("primes", "q") => {
                self.moduli = v.split(',').map(|s| integer(&full, s.trim())).collect::<Result<_, _>>()?;
            }
            ("primes", "x") => self.prime_x = Some(integer(&full, v)?),
            ("claims", "g2_max") => self.g2_max = real(&full, v)?,
            ("output", "format") => {
                self.format = Format::parse(v)
                    .ok_or_else(|| ConfigError::BadValue { key: full.clone(), msg: "expected csv or json".into() })?
            }
            ("output", "out") => self.out = Some(v.into()),
            _ => return Err(ConfigError::UnknownKey(full)),
        }
        Ok(())
    }

    /// Applies a config file's text on top of the current settings.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: "unterminated section header".into() })?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::Syntax { line: line_no, msg: format!("unknown section [{name}]") });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: "expected key = value".into() })?;
            let sec = section
                .as_deref()
                .ok_or_else(|| ConfigError::Syntax { line: line_no, msg: "key outside any section".into() })?;
            self.set(sec, key.trim(), value).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Syntax { line: line_no, msg: format!("unknown key {k}") },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Effective configuration as ordered `key = value` pairs, including the
    /// fixed numerical conventions.
    pub fn entries(&self) -> Vec<(String, String)> {
        let r = |x: f64| fmt_real(x);
        let mut v: Vec<(String, String)> = vec![
            ("kernel.K".into(), r(self.k)),
            ("kernel.phi".into(), r(self.phi)),
            ("kernel.c1_delta".into(), r(self.c1_delta)),
            ("weights.w".into(), r(self.w)),
            ("weights.u0".into(), r(self.u0)),
            ("weights.u1".into(), r(self.u1)),
            ("weights.v".into(), r(self.v)),
            ("weights.x0".into(), r(self.x0)),
            ("weights.x1".into(), r(self.x1)),
            ("weights.lambda_min".into(), r(self.lambda_min)),
            ("search.tol".into(), r(self.tol)),
            ("search.lambda_max".into(), r(self.lambda_max)),
            ("search.gamma_min".into(), r(self.gamma_min)),
            ("search.gamma_max".into(), r(self.gamma_max)),
            ("table1.lambda_start".into(), r(self.lambda_start)),
            ("table1.lambda_end".into(), r(self.lambda_end)),
            ("assembly.M".into(), r(self.assembly_m)),
            ("assembly.rhs_tolerance".into(), r(self.rhs_tolerance)),
            ("assembly.c2_form".into(), self.c2_form.clone()),
            ("assembly.c2".into(), self.c2.map_or("computed".into(), r)),
            ("siegel.M".into(), r(self.siegel_m)),
            ("siegel.B".into(), r(self.siegel_b)),
            ("siegel.delta".into(), r(self.siegel_delta)),
            ("psi.M".into(), r(self.psi_m)),
            ("psi.eta".into(), r(self.eta)),
            (
                "primes.q".into(),
                self.moduli.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            ),
            ("primes.x".into(), self.prime_x.map_or("q^8".into(), |x| x.to_string())),
            ("claims.g2_max".into(), r(self.g2_max)),
            ("output.format".into(), self.format.ext().into()),
        ];
        for (k, val) in CONVENTIONS {
            v.push(((*k).into(), (*val).into()));
        }
        v
    }

    /// The `λ` grid bounds of the density table in hundredths.
    pub fn lambda_hundredths(&self) -> Result<(u32, u32), ConfigError> {
        hundredths("table1.lambda_start", self.lambda_start)
            .and_then(|a| Ok((a, hundredths("table1.lambda_end", self.lambda_end)?)))
    }

    pub fn gamma_hundredths(&self) -> Result<(u32, u32), ConfigError> {
        hundredths("search.gamma_min", self.gamma_min)
            .and_then(|a| Ok((a, hundredths("search.gamma_max", self.gamma_max)?)))
    }
}

fn hundredths(key: &str, x: f64) -> Result<u32, ConfigError> {
    let h = (x * 100.0).round();
    if !(x >= 0.0) || (h - x * 100.0).abs() > 1e-6 {
        return Err(ConfigError::BadValue { key: key.into(), msg: format!("{x} is not a non-negative multiple of 0.01") });
    }
    Ok(h as u32)
}

pub const SECTIONS: &[&str] =
    &["kernel", "weights", "search", "table1", "assembly", "siegel", "psi", "primes", "claims", "output"];

/// Numerical conventions that are not configurable but are recorded in
/// every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("convention.suprema", "grid then golden refinement; value inflated by +tol"),
    ("convention.c1_slack", "0 in N* and C1 unless kernel.c1_delta is set"),
    ("convention.nstar_rounding", "floor(quotient + 1e-9)"),
    ("convention.gamma_choice", "per cell, smallest gamma wins ties"),
    ("convention.table1_column_start", "threshold + 0.01"),
    ("convention.table2_column", "largest threshold <= lambda11"),
    ("convention.reference_rhs_M", "7.8"),
    ("convention.li", "integral from 2 to x of dt/log t"),
    ("convention.prime_scale", "empirical illustration"),
];
