//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid
//! parameters, 3 numerical failure. Outputs go to `--out` (written through a
//! temporary file and renamed into place) or to standard output.

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::basis::Representation;
use crate::coherent::{eta_z_at, phi_z_at, psi_z, rho_z, xi_z_free};
use crate::config::{format_complex, OutputFormat, RunConfig};
use crate::darboux::{default_grid, Darboux, SolitonSpec};
use crate::error::{invalid, Error, Result};
use crate::report::{fmt_num, table_csv, write_atomic};
use crate::resolution::{build_rho_density, solve_omega_xi, DensitySign};
use crate::symmetry::{poly_from_alphas, s_inverse_block, s_matrix};
use crate::verify::{run_suite, validate_for_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Convergence tolerance for `sinverse` blocks.
pub const SINVERSE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "cohres", version, about = "Coherent states for free particles and multisoliton potentials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Soliton parameters, comma separated; an empty list means f = 1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Seed shifts, one per alpha.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub shifts: Option<String>,
    #[arg(long, global = true)]
    pub n_max: Option<String>,
    #[arg(long, global = true)]
    pub quad_order: Option<String>,
    /// Sampling grid as min:max:points.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Coherent-state label as re+imi.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// One of psi, xi, rho, phi, eta.
    #[arg(long, global = true)]
    pub state: Option<String>,
    /// position or momentum.
    #[arg(long, global = true)]
    pub rep: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key = value configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol_measure: Option<String>,
    #[arg(long, global = true)]
    pub tol_functional: Option<String>,
    #[arg(long, global = true)]
    pub tol_darboux: Option<String>,
    /// xi, rho, darboux, coherent or all.
    #[arg(long, global = true)]
    pub suite: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density of the measure for the xi states on the grid.
    DensityXi,
    /// Fourier-side density of the functional for the rho states on the grid.
    DensityRho,
    /// Leading (n_max+1) x (n_max+1) block of S = f(p).
    Smatrix,
    /// Leading block of S^-1 with its convergence certificate.
    Sinverse,
    /// Multisoliton potential on the grid.
    Potential,
    /// Normalized bound states of the multisoliton Hamiltonian on the grid.
    BoundStates,
    /// Samples of a coherent state on the grid.
    Coherent,
    /// Run a verification suite and write its report.
    Verify,
}

impl CommonArgs {
    /// Defaults, then the configuration file, then flags.
    pub fn resolve(&self) -> Result<(RunConfig, bool)> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        let mut format_given = c.format != OutputFormat::Csv;
        let pairs: [(&str, &Option<String>); 13] = [
            ("alphas", &self.alphas),
            ("shifts", &self.shifts),
            ("n_max", &self.n_max),
            ("quad_order", &self.quad_order),
            ("grid", &self.grid),
            ("z", &self.z),
            ("state", &self.state),
            ("rep", &self.rep),
            ("t", &self.t),
            ("format", &self.format),
            ("tol_measure", &self.tol_measure),
            ("tol_functional", &self.tol_functional),
            ("tol_darboux", &self.tol_darboux),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        format_given |= self.format.is_some();
        if let Some(out) = &self.out {
            c.out = Some(out.clone());
        }
        c.validate()?;
        Ok((c, format_given))
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_INVALID
    }
}

/// Parses `args` and runs the command; diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cohres: {e}");
            exit_code(&e)
        }
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn nums(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| fmt_num(*v)).collect()
}

fn echo(config: &RunConfig) -> BTreeMap<String, String> {
    config.echo()
}

/// Runs a parsed command and returns its exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    let (config, format_given) = cli.common.resolve()?;
    let format = config.format;
    match cli.command {
        Command::DensityXi => {
            let f = poly_from_alphas(&config.alphas)?;
            let omega = solve_omega_xi(&f)?;
            let xs = config.grid.linspace()?.points().to_vec();
            let ws = omega.sample(&xs);
            let text = match format {
                OutputFormat::Csv => table_csv(&["x", "omega_xi"], &rows2(&xs, &ws)),
                OutputFormat::Json => json_text(&json!({
                    "quantity": "omega_xi",
                    "config_echo": echo(&config),
                    "polynomial_coefficients": nums(omega.poly().coeffs()),
                    "sign": sign_name(omega.sign()),
                    "x": nums(&xs),
                    "omega_xi": nums(&ws),
                }))?,
            };
            emit(&config, &text)?;
        }
        Command::DensityRho => {
            if config.alphas.is_empty() {
                return Err(invalid("density-rho needs at least one alpha"));
            }
            let density = build_rho_density(&config.alphas)?;
            let ts = config.grid.linspace()?.points().to_vec();
            let values = density.sample(&ts);
            let damped: Vec<f64> = ts.iter().map(|&t| density.damped(t)).collect();
            let text = match format {
                OutputFormat::Csv => {
                    let rows = ts
                        .iter()
                        .zip(&values)
                        .zip(&damped)
                        .map(|((t, v), d)| vec![*t, *v, *d])
                        .collect::<Vec<_>>();
                    table_csv(&["t", "omega_rho", "omega_rho_damped"], &rows)
                }
                OutputFormat::Json => json_text(&json!({
                    "quantity": "omega_rho",
                    "config_echo": echo(&config),
                    "alphas": nums(density.fractions().alphas()),
                    "residues": nums(density.fractions().residues()),
                    "t": nums(&ts),
                    "omega_rho": nums(&values),
                    "omega_rho_damped": nums(&damped),
                }))?,
            };
            emit(&config, &text)?;
        }
        Command::Smatrix => {
            let f = poly_from_alphas(&config.alphas)?;
            if config.n_max < f.degree() {
                return Err(invalid(format!(
                    "n_max = {} is below the degree {} of f",
                    config.n_max,
                    f.degree()
                )));
            }
            let s = s_matrix(&f, config.n_max)?.to_dense();
            emit(&config, &matrix_output(&config, "s_matrix", &s, None)?)?;
        }
        Command::Sinverse => {
            let inv = s_inverse_block(&config.alphas, config.n_max + 1, SINVERSE_TOLERANCE)?;
            let cert = serde_json::to_value(&inv.certificate)?;
            emit(&config, &matrix_output(&config, "s_inverse", &inv.block, Some(cert))?)?;
        }
        Command::Potential => {
            let d = Darboux::new(SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?)?;
            let xs = config.grid.linspace()?.points().to_vec();
            let v = d.potential(&xs, config.t)?;
            let text = match format {
                OutputFormat::Csv => table_csv(&["x", "V"], &rows2(&xs, &v)),
                OutputFormat::Json => json_text(&json!({
                    "quantity": "potential",
                    "config_echo": echo(&config),
                    "x": nums(&xs),
                    "V": nums(&v),
                }))?,
            };
            emit(&config, &text)?;
        }
        Command::BoundStates => {
            let spec = SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?;
            let d = Darboux::new(spec.clone())?;
            let fine = default_grid(&spec)?;
            let xs = config.grid.linspace()?.points().to_vec();
            let mut columns = Vec::new();
            for (i, a) in spec.alphas().iter().enumerate() {
                // normalize on the fine periodic grid, where the state has decayed
                let on_fine = fine
                    .points()
                    .iter()
                    .map(|&x| d.kernel_function(i, x).map(|v| Complex64::new(v, 0.0)))
                    .collect::<Result<Vec<_>>>()?;
                let norm = fine.norm(&on_fine);
                let phase = Complex64::from_polar(1.0 / norm, a * a * config.t);
                let col = xs
                    .iter()
                    .map(|&x| d.kernel_function(i, x).map(|v| phase * v))
                    .collect::<Result<Vec<_>>>()?;
                columns.push(col);
            }
            let energies: Vec<f64> = spec.alphas().iter().map(|a| -a * a).collect();
            let text = match format {
                OutputFormat::Csv => {
                    let mut headers = vec!["x".to_string()];
                    for i in 1..=columns.len() {
                        headers.push(format!("phi_{i}_re"));
                        headers.push(format!("phi_{i}_im"));
                    }
                    let rows = xs
                        .iter()
                        .enumerate()
                        .map(|(j, &x)| {
                            let mut row = vec![x];
                            for c in &columns {
                                row.push(c[j].re);
                                row.push(c[j].im);
                            }
                            row
                        })
                        .collect::<Vec<_>>();
                    let h: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
                    table_csv(&h, &rows)
                }
                OutputFormat::Json => json_text(&json!({
                    "quantity": "bound_states",
                    "config_echo": echo(&config),
                    "energies": nums(&energies),
                    "x": nums(&xs),
                    "states": columns.iter().map(|c| complex_json(c)).collect::<Vec<_>>(),
                }))?,
            };
            emit(&config, &text)?;
        }
        Command::Coherent => {
            let state = config.state.clone().unwrap_or_else(|| "psi".into());
            let xs = config.grid.linspace()?.points().to_vec();
            let samples = coherent_samples(&config, &state, &xs)?;
            let axis = match config.rep {
                Representation::Position => "x",
                Representation::Momentum => "p",
            };
            let text = match format {
                OutputFormat::Csv => {
                    let rows = xs
                        .iter()
                        .zip(&samples)
                        .map(|(x, v)| vec![*x, v.re, v.im])
                        .collect::<Vec<_>>();
                    table_csv(&[axis, "re", "im"], &rows)
                }
                OutputFormat::Json => json_text(&json!({
                    "quantity": state,
                    "config_echo": echo(&config),
                    "representation": axis,
                    "z": format_complex(config.z),
                    axis: nums(&xs),
                    "values": complex_json(&samples),
                }))?,
            };
            emit(&config, &text)?;
        }
        Command::Verify => {
            let suite: Suite = cli.common.suite.as_deref().unwrap_or("all").parse()?;
            validate_for_suite(&config, suite)?;
            let report = run_suite(&config, suite)?;
            let text = if format_given && format == OutputFormat::Csv {
                report.to_csv()
            } else {
                let mut s = report.to_json()?;
                s.push('\n');
                s
            };
            emit(&config, &text)?;
            if !report.overall_pass {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!(
                        "cohres: check failed: {} (residual {}, tolerance {})",
                        c.name,
                        fmt_num(c.max_residual),
                        fmt_num(c.tolerance)
                    );
                }
                return Ok(EXIT_CHECK_FAILED);
            }
        }
    }
    Ok(EXIT_OK)
}

fn rows2(a: &[f64], b: &[f64]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(x, y)| vec![*x, *y]).collect()
}

fn sign_name(s: DensitySign) -> &'static str {
    match s {
        DensitySign::Positive => "positive",
        DensitySign::NonNegative => "non-negative",
        DensitySign::Signed => "signed",
    }
}

fn complex_json(values: &[Complex64]) -> Value {
    json!({
        "re": values.iter().map(|v| fmt_num(v.re)).collect::<Vec<_>>(),
        "im": values.iter().map(|v| fmt_num(v.im)).collect::<Vec<_>>(),
    })
}

fn matrix_output(
    config: &RunConfig,
    name: &str,
    m: &nalgebra::DMatrix<f64>,
    certificate: Option<Value>,
) -> Result<String> {
    match config.format {
        OutputFormat::Csv => {
            let headers: Vec<String> = (0..m.ncols()).map(|j| format!("col_{j}")).collect();
            let h: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<f64>> = (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect();
            Ok(table_csv(&h, &rows))
        }
        OutputFormat::Json => {
            let rows: Vec<Vec<String>> = (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| fmt_num(m[(i, j)])).collect())
                .collect();
            let mut v = json!({
                "quantity": name,
                "config_echo": echo(config),
                "matrix": rows,
            });
            if let Some(c) = certificate {
                v["certificate"] = c;
            }
            json_text(&v)
        }
    }
}

fn coherent_samples(config: &RunConfig, state: &str, xs: &[f64]) -> Result<Vec<Complex64>> {
    let z = config.z;
    let needs = |rep: Representation| -> Result<()> {
        if config.rep != rep {
            return Err(invalid(format!(
                "state '{state}' is available in the {} representation only",
                match rep {
                    Representation::Position => "position",
                    Representation::Momentum => "momentum",
                }
            )));
        }
        Ok(())
    };
    let at_zero = || -> Result<()> {
        if config.t != 0.0 {
            return Err(invalid(format!("state '{state}' is evaluated at t = 0 only")));
        }
        Ok(())
    };
    match state {
        "psi" => Ok(psi_z(z, xs, config.rep, config.t)),
        "xi" => {
            needs(Representation::Momentum)?;
            at_zero()?;
            xi_z_free(&config.alphas, z, xs)
        }
        "rho" => {
            needs(Representation::Momentum)?;
            at_zero()?;
            rho_z(&config.alphas, z, xs)
        }
        "phi" | "eta" => {
            needs(Representation::Position)?;
            let d = Darboux::new(SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?)?;
            if state == "phi" {
                phi_z_at(&d, z, xs, config.t)
            } else {
                at_zero()?;
                eta_z_at(&d, z, xs)
            }
        }
        other => Err(invalid(format!("unknown state '{other}'; expected psi, xi, rho, phi or eta"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("cohres").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "alphas = 1, 2\nn_max = 6\n").unwrap();
        let cli = parse(&["smatrix", "--config", path.to_str().unwrap(), "--n-max", "4"]);
        let (c, _) = cli.common.resolve().unwrap();
        assert_eq!(c.alphas, vec![1.0, 2.0]);
        assert_eq!(c.n_max, 4);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["cohres", "smatrix", "--alphas", "1", "--n-max", "1"]), EXIT_INVALID);
        assert_eq!(run(["cohres", "smatrix", "--alphas", "-1"]), EXIT_INVALID);
        assert_eq!(run(["cohres", "frobnicate"]), EXIT_INVALID);
        assert_eq!(run(["cohres", "verify", "--suite", "all", "--alphas", "1", "--n-max", "0"]), EXIT_INVALID);
        assert_eq!(run(["cohres", "coherent", "--state", "xi", "--rep", "position"]), EXIT_INVALID);
    }

    #[test]
    fn smatrix_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("s.csv");
        let code = run([
            "cohres",
            "smatrix",
            "--alphas",
            "1",
            "--n-max",
            "4",
            "--format",
            "csv",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let text = std::fs::read_to_string(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        let first: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(first, 1.25);
    }
}
