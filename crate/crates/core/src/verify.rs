//! Verification suites behind `cohres verify`.
//!
//! Each suite runs a fixed list of checks on the configured parameters and
//! returns a [`SuiteReport`]. Moment orders are clamped per suite so that the
//! run stays at desk scale; the clamped values are echoed into the report.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::coherent::{
    classify, eta_z, eta_z_series, ground_inverse_quadrature, phi_z, phi_z_series,
    rho_z_norm_sq, rho_z_norm_sq_series, xi_z_norm_sq, xi_z_norm_sq_series, CoherentExpansion, StateFamily,
    CLASSIFY_DARBOUX_CAP, CLASSIFY_FUNCTIONAL_CAP, SOLITON_Z_MAX,
};
use crate::config::RunConfig;
use crate::darboux::{phi_p_residual, DarbouxGrid, SolitonSpec};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::report::{Check, SuiteReport};
use crate::resolution::{
    build_rho_density, eval_functional_rho, moment_check_rho, moment_check_xi, solve_omega_xi,
    verify_ff, DensitySign, TestFunction, XI_MOMENT_MAX,
};
use crate::state::MomentumSynthesis;
use crate::symmetry::{poly_from_alphas, s_inverse_block, s_matrix};

/// Moment order caps per suite.
pub const XI_SUITE_CAP: usize = XI_MOMENT_MAX;
pub const RHO_SUITE_CAP: usize = 8;
pub const FACTORIZATION_CAP: usize = 10;
pub const DARBOUX_GRAM_CAP: usize = 8;

/// Relative tolerance for the pointwise smoothing identity of `omega_xi`.
pub const SMOOTHING_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance for the Fourier reconstruction of `1/f`.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-8;
/// Pairwise agreement of the three routes to `(S^-1)_00`.
pub const TRIANGLE_TOLERANCE: f64 = 1e-4;
/// Slack allowed on the strict bound `||eta_n|| <= prod 1/alpha_k`.
pub const NORM_BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Xi,
    Rho,
    Darboux,
    Coherent,
    All,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xi" => Ok(Suite::Xi),
            "rho" => Ok(Suite::Rho),
            "darboux" => Ok(Suite::Darboux),
            "coherent" => Ok(Suite::Coherent),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!("unknown suite '{other}'"))),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Xi => "xi",
            Suite::Rho => "rho",
            Suite::Darboux => "darboux",
            Suite::Coherent => "coherent",
            Suite::All => "all",
        }
    }
}

/// Validates the configuration for a suite: the symbol must be built from
/// admissible alphas and `n_max` must reach its degree.
pub fn validate_for_suite(config: &RunConfig, suite: Suite) -> Result<()> {
    config.validate()?;
    let f = poly_from_alphas(&config.alphas)?;
    if config.n_max < f.degree() {
        return Err(invalid(format!(
            "n_max = {} is below the degree {} of f",
            config.n_max,
            f.degree()
        )));
    }
    if matches!(suite, Suite::Darboux | Suite::Coherent | Suite::All) {
        SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?;
    }
    Ok(())
}

fn echo(config: &RunConfig, caps: &[(&str, usize)]) -> std::collections::BTreeMap<String, String> {
    let mut m = config.echo();
    for (k, v) in caps {
        m.insert(format!("n_max_{k}"), v.to_string());
    }
    m
}

pub fn run_suite(config: &RunConfig, suite: Suite) -> Result<SuiteReport> {
    validate_for_suite(config, suite)?;
    match suite {
        Suite::Xi => xi_suite(config),
        Suite::Rho => rho_suite(config),
        Suite::Darboux => darboux_suite(config),
        Suite::Coherent => coherent_suite(config),
        Suite::All => {
            let parts = [
                xi_suite(config)?,
                rho_suite(config)?,
                darboux_suite(config)?,
                coherent_suite(config)?,
            ];
            let mut echo = config.echo();
            for p in &parts {
                for (k, v) in &p.config_echo {
                    echo.insert(k.clone(), v.clone());
                }
            }
            let mut all = SuiteReport::new("all", echo);
            for p in parts {
                let prefix = p.suite.clone();
                for mut c in p.checks {
                    c.name = format!("{prefix}: {}", c.name);
                    all.push(c);
                }
                all.notes.extend(p.notes);
            }
            Ok(all)
        }
    }
}

fn even_points(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count)
        .map(|j| lo + (hi - lo) * j as f64 / (count - 1) as f64)
        .collect()
}

fn xi_suite(config: &RunConfig) -> Result<SuiteReport> {
    let n_max = config.n_max.min(XI_SUITE_CAP);
    let mut r = SuiteReport::new("xi", echo(config, &[("xi", n_max)]));
    let f = poly_from_alphas(&config.alphas)?;
    let omega = solve_omega_xi(&f)?;
    let res = omega.smoothing_residuals(&f, &even_points(20, -4.0, 4.0))?;
    r.push(Check::new(
        "smoothing identity for omega_xi at 20 momenta (relative)",
        "∫ omega_xi(x) exp(-2 (x - p)^2) dx = (2 pi)^-1/2 f(p)",
        res.into_iter().fold(0.0, f64::max),
        SMOOTHING_TOLERANCE,
    ));
    let m = moment_check_xi(&config.alphas, n_max)?;
    r.push(Check::new(
        "xi moments against S",
        "a_n a_k ∫ dmu_xi |Phi|^2 conj(z)^n z^k = S_nk",
        m.max_residual,
        config.tolerances.measure,
    ));
    r.notes.push(format!(
        "omega_xi sign on the real line: {}",
        match omega.sign() {
            DensitySign::Positive => "positive",
            DensitySign::NonNegative => "non-negative",
            DensitySign::Signed => "signed (a signed measure; the moment identities still hold)",
        }
    ));
    r.notes.push(format!(
        "moment identities are certified for n, k <= {n_max} only, a finite witness"
    ));
    Ok(r)
}

fn rho_suite(config: &RunConfig) -> Result<SuiteReport> {
    let n_max = config.n_max.min(RHO_SUITE_CAP);
    let mut r = SuiteReport::new("rho", echo(config, &[("rho", n_max)]));
    let tol = &config.tolerances;
    if config.alphas.is_empty() {
        r.notes.push("f = 1: the functional reduces to the free measure".into());
        let m = moment_check_xi(&[], n_max)?;
        r.push(Check::new(
            "free moments against the identity",
            "measure dx dy / pi resolves the free coherent states",
            m.max_residual,
            tol.measure,
        ));
        return Ok(r);
    }
    let density = build_rho_density(&config.alphas)?;
    let ff = verify_ff(&density, &even_points(101, -5.0, 5.0))?;
    r.push(Check::new(
        "Fourier reconstruction of 1/f at 101 momenta in [-5, 5]",
        "pi ∫ omega_rho~(t) exp(-t^2/8 + i p t) dt = 1/f(p)",
        ff.max_residual,
        RECONSTRUCTION_TOLERANCE,
    ));

    // three routes to (S^-1)_00
    let certified = s_inverse_block(&config.alphas, 1, 1e-12)?.block[(0, 0)];
    let functional = eval_functional_rho(&density, &TestFunction::HermiteGaussian { n: 0, k: 0 })?.re;
    let quadrature = ground_inverse_quadrature(&config.alphas)?;
    let spread = [
        (certified - functional).abs(),
        (certified - quadrature).abs(),
        (functional - quadrature).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    r.push(Check::new(
        "three routes to (S^-1)_00 agree pairwise",
        "certified inverse = omega_rho(F_00) = ∫ |psi_0(p)|^2 / f(p) dp",
        spread,
        TRIANGLE_TOLERANCE,
    ));
    if config.alphas == [1.0] {
        let target = (2.0 * std::f64::consts::PI).sqrt() * 2f64.exp() * erfc(2f64.sqrt());
        r.push(Check::new(
            "(S^-1)_00 against its closed form for alpha = 1",
            "(S^-1)_00 = sqrt(2 pi) e^2 erfc(sqrt 2)",
            (certified - target).abs(),
            TRIANGLE_TOLERANCE,
        ));
    }
    let m = moment_check_rho(&config.alphas, n_max)?;
    r.push(Check::new(
        "rho functional moments against S^-1",
        "a_n a_k omega_rho(Phi z^n, Phi z^k) = (S^-1)_nk",
        m.max_residual,
        tol.functional,
    ));
    if let Some(c) = m.certificates.first() {
        r.push(Check::new(
            "truncated inverse of S converged under size doubling",
            "leading block of S^-1 is independent of the truncation",
            c.difference,
            c.tolerance,
        ));
    }
    Ok(r)
}

fn max_gram_residual(
    g: &DarbouxGrid,
    left: &[Vec<Complex64>],
    right: &[Vec<Complex64>],
    target: impl Fn(usize, usize) -> f64,
) -> f64 {
    let mut worst = 0.0f64;
    for (k, a) in left.iter().enumerate() {
        for (n, b) in right.iter().enumerate() {
            worst = worst.max((g.inner(a, b) - target(k, n)).norm());
        }
    }
    worst
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn darboux_suite(config: &RunConfig) -> Result<SuiteReport> {
    let nf = config.n_max.min(FACTORIZATION_CAP);
    let ng = config.n_max.min(DARBOUX_GRAM_CAP);
    let mut r = SuiteReport::new("darboux", echo(config, &[("factorization", nf), ("darboux_gram", ng)]));
    let tol = config.tolerances.darboux;
    let spec = SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?;
    let g = DarbouxGrid::with_defaults(spec.clone())?;
    let alphas = spec.alphas().to_vec();

    let integral: f64 = g.grid().inner(
        &vec![Complex64::new(1.0, 0.0); g.grid().len()],
        &g.potential().iter().map(|v| Complex64::new(*v, 0.0)).collect::<Vec<_>>(),
    )
    .re;
    r.push(Check::new(
        "potential area of a reflectionless well",
        "∫ V dx = -4 sum alpha_i",
        (integral + 4.0 * alphas.iter().sum::<f64>()).abs(),
        tol,
    ));

    let fact = g.check_factorization(nf)?;
    r.push(Check::new(
        "L^+ L = f(h0) on psi_n",
        "L^+ L = f(h0)",
        fact.max_lplus_l(),
        tol,
    ));
    r.push(Check::new(
        "L L^+ = f(h1) on phi_n",
        "L L^+ = f(h1) on the range of L",
        fact.max_l_lplus(),
        tol,
    ));
    r.push(Check::new(
        "intertwining L h0 = h1 L on psi_n",
        "L h0 = h1 L",
        fact.max_intertwining(),
        tol,
    ));

    let bound = g.bound_states(0.0)?;
    let mut rayleigh = 0.0f64;
    let mut kernel = 0.0f64;
    for (b, a) in bound.iter().zip(&alphas) {
        rayleigh = rayleigh.max((g.rayleigh_quotient(b)? + a * a).abs());
        kernel = kernel.max(g.apply_l_plus(b, 0.0)?.norm());
    }
    r.push(Check::new(
        "bound-state energies by Rayleigh quotient",
        "h1 has bound levels -alpha_i^2",
        rayleigh,
        tol,
    ));
    r.push(Check::new(
        "bound states are annihilated by L^+",
        "ker L^+ is spanned by the bound states of h1",
        kernel,
        tol,
    ));

    let phis: Vec<_> = (0..=ng).map(|n| g.phi_n(n, 0.0)).collect();
    r.push(Check::new(
        "phi_n orthogonal to the bound states",
        "range of L is orthogonal to ker L^+",
        max_gram_residual(&g, &bound, &phis, |_, _| 0.0),
        tol,
    ));
    let f = g.darboux().symbol().clone();
    let s = s_matrix(&f, ng + f.degree())?;
    r.push(Check::new(
        "Gram matrix of phi_n equals S",
        "<phi_n|phi_k>_1 = <psi_n|f(h0)|psi_k>_0 = S_nk",
        max_gram_residual(&g, &phis, &phis, |k, n| s.get(k, n)),
        tol,
    ));
    let fphis = phis.iter().map(|p| g.f_h1(p)).collect::<Result<Vec<_>>>()?;
    let s2 = s.to_dense() * s.to_dense();
    r.push(Check::new(
        "f(h1) matrix elements on phi_n equal S^2",
        "<phi_n|f(h1)|phi_k>_1 = (S^2)_nk",
        max_gram_residual(&g, &phis, &fphis, |k, n| s2[(k, n)]) / s2[(ng, ng)].max(1.0),
        tol,
    ));

    let etas = (0..=ng).map(|n| g.eta_n(n)).collect::<Result<Vec<_>>>()?;
    let xis = (0..=ng).map(|n| g.xi1_n(n)).collect::<Result<Vec<_>>>()?;
    r.push(Check::new(
        "biorthogonality <eta_k|phi_n>_1 = delta_kn",
        "eta_n = L f(p)^-1 psi_n is dual to phi_n",
        max_gram_residual(&g, &etas, &phis, delta),
        tol,
    ));
    r.push(Check::new(
        "orthonormality <xi_n|xi_k>_1 = delta_nk",
        "xi_n = L f(p)^-1/2 psi_n is orthonormal",
        max_gram_residual(&g, &xis, &xis, delta),
        tol,
    ));
    let inv = s_inverse_block(&alphas, ng + 1, 1e-12)?;
    r.push(Check::new(
        "Gram matrix of eta_n equals S^-1",
        "<eta_n|eta_k>_1 = (S^-1)_nk",
        max_gram_residual(&g, &etas, &etas, |k, n| inv.block[(k, n)]),
        tol,
    ));
    let bound_norm: f64 = alphas.iter().map(|a| 1.0 / a).product();
    let worst = etas.iter().map(|e| g.norm(e)).fold(0.0, f64::max);
    r.push(Check::new(
        "eta_n norms below prod 1/alpha_k",
        "||eta_n||_1 <= prod alpha_k^-1",
        (worst - bound_norm).max(0.0),
        NORM_BOUND_SLACK,
    ));

    let d = g.darboux();
    let line = Grid::linspace(-10.0, 10.0, 2001)?;
    let mut cont = 0.0f64;
    for p in [0.0, 0.5, 1.0, 2.5] {
        cont = cont.max(phi_p_residual(d, p, &line)?);
    }
    r.push(Check::new(
        "continuum eigenfunctions phi_p solve h1 phi_p = p^2 phi_p",
        "phi_p = N_p^-1 L psi_p, N_p^2 = f(p)",
        cont,
        tol,
    ));
    r.push(Check::new(
        "smeared continuum normalization (relative)",
        "<phi_p|phi_q>_1 = delta(p - q), tested on a wave packet",
        smeared_normalization(&g),
        tol,
    ));
    r.notes.push(
        "continuum orthonormality is checked on a wave packet only; a smeared check is evidence, not proof"
            .into(),
    );
    Ok(r)
}

/// `| ||∫ g(p) phi_p dp||^2 - ∫ |g|^2 dp | / ∫ |g|^2 dp` for a Gaussian packet at `p0 = 1`.
fn smeared_normalization(g: &DarbouxGrid) -> f64 {
    let (p0, sigma) = (1.0, 0.5);
    let m = g.momenta();
    let gp: Vec<f64> = m
        .nodes
        .iter()
        .map(|p| (-(p - p0) * (p - p0) / (2.0 * sigma * sigma)).exp())
        .collect();
    let packet = MomentumSynthesis {
        nodes: m.nodes.clone(),
        weights: m.weights.clone(),
        coeffs: gp
            .iter()
            .zip(&m.nodes)
            .map(|(v, &p)| Complex64::new(v / g.darboux().n_p(p), 0.0))
            .collect(),
        t: 0.0,
    };
    let samples = g.apply_l(&packet);
    let lhs = g.inner(&samples, &samples).re;
    let rhs: f64 = gp.iter().zip(&m.weights).map(|(v, w)| w * v * v).sum();
    (lhs - rhs).abs() / rhs
}

fn coherent_suite(config: &RunConfig) -> Result<SuiteReport> {
    let tol = config.tolerances;
    let nm = config.n_max.min(XI_SUITE_CAP);
    let nf = config.n_max.min(CLASSIFY_FUNCTIONAL_CAP);
    let nd = config.n_max.min(CLASSIFY_DARBOUX_CAP);
    let mut r = SuiteReport::new(
        "coherent",
        echo(config, &[("coherent_measure", nm), ("coherent_functional", nf), ("coherent_darboux", nd)]),
    );
    let z = config.z;

    let e = CoherentExpansion::with_n_max(z, 60);
    if z.norm() <= 3.0 {
        r.push(Check::new(
            "lowering eigenrelation on the truncated expansion",
            "a psi_z = z psi_z",
            e.lowering_residual(),
            1e-10,
        ));
    }
    let q = xi_z_norm_sq(&config.alphas, z, config.quad_order.max(80))?;
    let long = CoherentExpansion::with_n_max(z, CoherentExpansion::new(z)?.n_max().max(60));
    let s = xi_z_norm_sq_series(&config.alphas, &long)?;
    r.push(Check::new(
        "||xi_z||^2 by quadrature and by the S^-1 quadratic form",
        "||xi_z||^2 = Phi^2 sum a_n a_k conj(z)^n z^k (S^-1)_nk",
        (q - s).abs(),
        tol.measure,
    ));
    let q = rho_z_norm_sq(&config.alphas, z, config.quad_order.max(80))?;
    let s = rho_z_norm_sq_series(&config.alphas, &long)?;
    r.push(Check::new(
        "||rho_z||^2 by quadrature and by the S quadratic form (relative)",
        "||rho_z||^2 = Phi^2 sum a_n a_k conj(z)^n z^k S_nk",
        (q - s).abs() / s,
        tol.measure,
    ));

    let spec = SolitonSpec::new(config.alphas.clone(), config.shifts.clone())?;
    if z.norm() <= SOLITON_Z_MAX {
        let g = DarbouxGrid::with_defaults(spec.clone())?;
        let a = phi_z(&g, z, 0.0)?;
        let b = phi_z_series(&g, &long, 0.0)?;
        r.push(Check::new(
            "phi_z directly and as a series over phi_n",
            "phi_z = L psi_z = Phi sum a_n z^n phi_n",
            max_diff(&a, &b),
            tol.darboux,
        ));
        if let Ok(b) = eta_z_series(&g, z) {
            let a = eta_z(&g, z)?;
            r.push(Check::new(
                "eta_z spectrally and as a series over eta_n",
                "eta_z = M psi_z = Phi sum a_n z^n eta_n",
                max_diff(&a, &b),
                tol.darboux,
            ));
        }
    }

    let families = [
        (StateFamily::Psi, nm),
        (StateFamily::XiFree { alphas: config.alphas.clone() }, nm),
        (StateFamily::Rho { alphas: config.alphas.clone() }, nf),
        (StateFamily::Eta { spec: spec.clone() }, nd),
        (StateFamily::Phi { spec }, nd),
    ];
    for (family, n) in families {
        let c = classify(&family, &tol, n)?;
        for check in &c.checks {
            r.push(Check {
                name: format!("{}: {}", c.family, check.name),
                ..check.clone()
            });
        }
        r.push(Check::flag(
            &format!("{}: classified as claimed ({:?})", c.family, c.claimed),
            "the family is a coherent-state system of the claimed kind",
            c.outcome == c.claimed,
        ));
    }
    r.notes.push(
        "classification certifies moment matrices up to the echoed n_max only, a finite witness".into(),
    );
    Ok(r)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_short_truncation() {
        let mut c = RunConfig::default();
        c.n_max = 0;
        assert!(run_suite(&c, Suite::All).is_err());
        c.n_max = 4;
        c.alphas = vec![2.0, 1.0];
        assert!(validate_for_suite(&c, Suite::Xi).is_ok());
        assert!(validate_for_suite(&c, Suite::Darboux).is_err());
    }

    #[test]
    fn xi_suite_passes() {
        let r = run_suite(&RunConfig::default(), Suite::Xi).unwrap();
        assert!(r.overall_pass, "{r:#?}");
    }

    #[test]
    fn all_suites_one_and_two_solitons() {
        for alphas in [vec![1.0], vec![1.0, 2.0]] {
            let c = RunConfig { alphas, ..RunConfig::default() };
            let start = std::time::Instant::now();
            let r = run_suite(&c, Suite::All).unwrap();
            for check in &r.checks {
                eprintln!("{} {:e} {:e} {}", check.name, check.max_residual, check.tolerance, check.pass);
            }
            eprintln!("elapsed {:?}", start.elapsed());
            assert!(r.overall_pass);
        }
    }
}
