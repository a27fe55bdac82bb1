//! Run configuration shared by the command-line front end and the
//! verification suites.
//!
//! A configuration file holds one `key = value` pair per line; blank lines
//! and lines starting with `#` are ignored. Keys match the long command-line
//! flags with `-` replaced by `_`:
//!
//! ```text
//! alphas = 1, 2
//! shifts = 0, 0.5
//! n_max = 20
//! quad_order = 80
//! grid = -10:10:401
//! z = 0.7+0.2i
//! t = 0
//! state = phi
//! rep = position
//! format = json
//! out = report.json
//! tol_measure = 1e-8
//! tol_functional = 1e-3
//! tol_darboux = 1e-6
//! ```

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::basis::Representation;
use crate::error::{invalid, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub measure: f64,
    pub functional: f64,
    pub darboux: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            measure: 1e-8,
            functional: 1e-3,
            darboux: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(invalid(format!("unknown format '{other}'"))),
        }
    }
}

pub fn parse_representation(s: &str) -> Result<Representation> {
    match s.trim().to_ascii_lowercase().as_str() {
        "position" | "x" => Ok(Representation::Position),
        "momentum" | "p" => Ok(Representation::Momentum),
        other => Err(invalid(format!("unknown representation '{other}'"))),
    }
}

/// Comma-separated reals.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(format!("'{v}' is not a finite number")))
        })
        .collect()
}

/// Complex literal such as `0.7+0.2i`, `-1.5i`, `2`, `1e-3-4e-1i`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("'{s}' is not a complex literal of the form re+imi"));
    if t.is_empty() {
        return Err(bad());
    }
    let num = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let imag = |v: &str| match v {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => num(v),
    };
    match split {
        Some(j) => Ok(Complex64::new(num(&body[..j])?, imag(&body[j..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alphas: Vec<f64>,
    pub shifts: Option<Vec<f64>>,
    pub n_max: usize,
    pub quad_order: usize,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub z: Complex64,
    pub t: f64,
    pub state: Option<String>,
    pub rep: Representation,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alphas: vec![1.0],
            shifts: None,
            n_max: 20,
            quad_order: 80,
            grid: GridSpec {
                min: -10.0,
                max: 10.0,
                points: 401,
            },
            tolerances: Tolerances::default(),
            z: Complex64::new(0.7, 0.2),
            t: 0.0,
            state: None,
            rep: Representation::Position,
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(format!("{key}: '{v}' is not a finite number")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>()
                .map_err(|_| invalid(format!("{key}: '{v}' is not a non-negative integer")))
        };
        match key.trim().replace('-', "_").as_str() {
            "alphas" => self.alphas = parse_list(value)?,
            "shifts" => self.shifts = Some(parse_list(value)?),
            "n_max" => self.n_max = int(value)?,
            "quad_order" => self.quad_order = int(value)?,
            "grid" => self.grid = value.parse()?,
            "z" => self.z = parse_complex(value)?,
            "t" => self.t = num(value)?,
            "state" => self.state = Some(value.to_string()),
            "rep" => self.rep = parse_representation(value)?,
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "tol_measure" => self.tolerances.measure = num(value)?,
            "tol_functional" => self.tolerances.functional = num(value)?,
            "tol_darboux" => self.tolerances.darboux = num(value)?,
            other => return Err(invalid(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)
                .map_err(|e| invalid(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alphas.iter().find(|a| **a <= 0.0) {
            return Err(invalid(format!("alpha must be positive, got {a}")));
        }
        if let Some(s) = &self.shifts {
            if s.len() != self.alphas.len() {
                return Err(invalid("shifts and alphas must have the same length"));
            }
        }
        self.grid.validate()?;
        let t = &self.tolerances;
        if [t.measure, t.functional, t.darboux].iter().any(|v| !(*v > 0.0)) {
            return Err(invalid("tolerances must be positive"));
        }
        if !(self.t.is_finite()) {
            return Err(invalid("t must be finite"));
        }
        Ok(())
    }

    /// Every parameter as text, for embedding in reports.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("alphas".into(), join(&self.alphas));
        m.insert(
            "shifts".into(),
            self.shifts.as_deref().map(join).unwrap_or_default(),
        );
        m.insert("n_max".into(), self.n_max.to_string());
        m.insert("quad_order".into(), self.quad_order.to_string());
        m.insert("grid".into(), self.grid.to_string());
        m.insert("tol_measure".into(), format!("{:e}", self.tolerances.measure));
        m.insert("tol_functional".into(), format!("{:e}", self.tolerances.functional));
        m.insert("tol_darboux".into(), format!("{:e}", self.tolerances.darboux));
        m.insert("z".into(), format_complex(self.z));
        m.insert("t".into(), self.t.to_string());
        m
    }
}
