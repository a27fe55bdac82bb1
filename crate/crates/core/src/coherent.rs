//! The five coherent-state families and the harness that decides which kind
//! of identity resolution each one admits.
//!
//! All families are built from `|psi_z> = Phi sum_n a_n z^n |psi_n>` with
//! `Phi = exp(-|z|^2/2)`, `a_n = (n!)^{-1/2}`:
//!
//! - `xi_z = f(p)^{-1/2} psi_z` and `rho_z = f(p)^{1/2} psi_z` on the free side,
//! - `phi_z = L psi_z` and `eta_z = L f(p)^{-1} psi_z` on the soliton side.
//!
//! A family passes as a measure-type resolution when `a_n a_k ∫ dmu |Phi|^2
//! conj(z)^n z^k` reproduces its Gram matrix, and as a functional-type
//! resolution when the same moments taken with the Fourier-side functional do.
//! Only finitely many moments are checked, so a pass is a finite witness.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{ground_peak, Ladder, Representation};
use crate::config::Tolerances;
use crate::darboux::{default_momenta, Darboux, DarbouxGrid, SolitonSpec, TRANSFORMED_INDEX_MAX};
use crate::error::{invalid, Error, Result};
use crate::report::Check;
use crate::resolution::{
    build_rho_density, eval_functional_rho, moment_check_rho, moment_check_xi, TestFunction,
};
use crate::state::{AnalyticState, BasisExpansion, ExpQuadraticSum, MomentumSynthesis};
use crate::poly::Polynomial;
use crate::quadrature::QuadratureRule;
use crate::symmetry::poly_from_alphas;

/// Largest truncation chosen by [`CoherentExpansion::new`].
pub const EXPANSION_CAP: usize = 120;
/// Target for the discarded probability mass.
pub const EXPANSION_TAIL: f64 = 1e-12;
/// Largest `|z|` accepted for the soliton-side families.
pub const SOLITON_Z_MAX: f64 = 6.0;

/// Largest moment order used by [`classify`] for each kind of family.
pub const CLASSIFY_MEASURE_CAP: usize = 30;
pub const CLASSIFY_FUNCTIONAL_CAP: usize = 8;
pub const CLASSIFY_DARBOUX_CAP: usize = 8;

/// Time slice used for the temporal-stability comparison.
pub const STABILITY_TIME: f64 = 0.4;

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentExpansion {
    z: Complex64,
    n_max: usize,
    tail_bound: f64,
}

/// `sum_{n > n_max} exp(-|z|^2) |z|^{2n} / n!`, summed until the terms are negligible.
fn poisson_tail(r2: f64, n_max: usize) -> f64 {
    // log of the first discarded term, to stay finite for large |z|
    let mut log_term = -r2 + (n_max + 1) as f64 * r2.max(f64::MIN_POSITIVE).ln()
        - (1..=n_max + 1).map(|j| (j as f64).ln()).sum::<f64>();
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = log_term.exp();
        tail += term;
        n += 1;
        log_term += r2.max(f64::MIN_POSITIVE).ln() - (n as f64).ln();
        if (n as f64) > r2 && term <= 1e-18 * tail.max(1e-300) || n > n_max + 2000 {
            break;
        }
        if r2 == 0.0 {
            break;
        }
    }
    if r2 == 0.0 {
        0.0
    } else {
        tail
    }
}

impl CoherentExpansion {
    /// Smallest truncation with tail mass at most `1e-12`, capped at 120.
    pub fn new(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(invalid("z must be finite"));
        }
        let r2 = z.norm_sqr();
        for n_max in 0..=EXPANSION_CAP {
            let tail = poisson_tail(r2, n_max);
            if tail <= EXPANSION_TAIL {
                return Ok(CoherentExpansion { z, n_max, tail_bound: tail });
            }
        }
        Err(Error::Convergence(format!(
            "|z| = {} needs more than {EXPANSION_CAP} terms",
            z.norm()
        )))
    }

    pub fn with_n_max(z: Complex64, n_max: usize) -> Self {
        CoherentExpansion {
            z,
            n_max,
            tail_bound: poisson_tail(z.norm_sqr(), n_max),
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `Phi = exp(-|z|^2 / 2)`.
    pub fn weight(&self) -> f64 {
        (-0.5 * self.z.norm_sqr()).exp()
    }

    /// `Phi a_n z^n` for `n <= n_max`.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.n_max + 1);
        let mut c = Complex64::new(self.weight(), 0.0);
        for n in 0..=self.n_max {
            if n > 0 {
                c *= self.z / (n as f64).sqrt();
            }
            out.push(c);
        }
        out
    }

    /// `|| a c - z c || / || c ||` on the truncated coefficient vector.
    pub fn lowering_residual(&self) -> f64 {
        let c = self.coefficients();
        let ac = crate::basis::ladder_apply(Ladder::Lower, &c);
        let num: f64 = ac.iter().zip(&c).map(|(a, c)| (a - self.z * c).norm_sqr()).sum();
        let den: f64 = c.iter().map(|c| c.norm_sqr()).sum();
        (num / den).sqrt()
    }
}

/// `<p | psi_z>` at time `t`.
pub fn psi_z_momentum(z: Complex64, p: f64, t: f64) -> Complex64 {
    let phi = (-0.5 * z.norm_sqr()).exp();
    let exponent = -p * p + 2.0 * z * p - 0.5 * z * z + Complex64::new(0.0, -p * p * t);
    ground_peak() * phi * exponent.exp()
}

/// `psi_z` sampled in either representation.
pub fn psi_z(z: Complex64, grid: &[f64], rep: Representation, t: f64) -> Vec<Complex64> {
    match rep {
        Representation::Momentum => grid.iter().map(|&p| psi_z_momentum(z, p, t)).collect(),
        Representation::Position => ExpQuadraticSum::coherent(z, t).sample(grid),
    }
}

fn weighted_free(alphas: &[f64], z: Complex64, p_grid: &[f64], power: f64) -> Result<Vec<Complex64>> {
    let f = poly_from_alphas(alphas)?;
    Ok(p_grid
        .iter()
        .map(|&p| psi_z_momentum(z, p, 0.0) * f.eval(p).powf(power))
        .collect())
}

/// `xi_z(p) = f(p)^{-1/2} psi_z(p)` at `t = 0`.
pub fn xi_z_free(alphas: &[f64], z: Complex64, p_grid: &[f64]) -> Result<Vec<Complex64>> {
    weighted_free(alphas, z, p_grid, -0.5)
}

/// `rho_z(p) = f(p)^{1/2} psi_z(p)` at `t = 0`.
pub fn rho_z(alphas: &[f64], z: Complex64, p_grid: &[f64]) -> Result<Vec<Complex64>> {
    weighted_free(alphas, z, p_grid, 0.5)
}

fn check_soliton_z(z: Complex64) -> Result<()> {
    if z.norm() > SOLITON_Z_MAX || !z.re.is_finite() || !z.im.is_finite() {
        return Err(invalid(format!("|z| must be at most {SOLITON_Z_MAX}")));
    }
    Ok(())
}

/// `phi_z = L psi_z`, with `psi_z` differentiated in closed form.
pub fn phi_z(dg: &DarbouxGrid, z: Complex64, t: f64) -> Result<Vec<Complex64>> {
    check_soliton_z(z)?;
    Ok(dg.apply_l(&ExpQuadraticSum::coherent(z, t)))
}

/// `Phi sum_n a_n z^n phi_n` over the terms kept by `expansion`. The default
/// truncation bounds the discarded mass by `1e-12`, i.e. the amplitude by
/// `1e-6`, and `L` amplifies the tail further; pass a longer expansion when
/// comparing against [`phi_z`] at that level.
pub fn phi_z_series(dg: &DarbouxGrid, expansion: &CoherentExpansion, t: f64) -> Result<Vec<Complex64>> {
    check_soliton_z(expansion.z())?;
    Ok(dg.apply_l(&BasisExpansion::new(expansion.coefficients(), t)))
}

/// The momentum synthesis `∫ dp psi_p <psi_p | psi_z> / f(p)` on a fixed rule;
/// `L` applied to it is `eta_z`.
pub fn eta_z_synthesis(f: &Polynomial, momenta: &QuadratureRule, z: Complex64) -> MomentumSynthesis {
    let coeffs = momenta
        .nodes
        .iter()
        .map(|&p| psi_z_momentum(z, p, 0.0) / f.eval(p))
        .collect();
    MomentumSynthesis {
        nodes: momenta.nodes.clone(),
        weights: momenta.weights.clone(),
        coeffs,
        t: 0.0,
    }
}

/// `eta_z = ∫ dp N_p^{-1} phi_p <psi_p | psi_z>` at `t = 0`.
pub fn eta_z(dg: &DarbouxGrid, z: Complex64) -> Result<Vec<Complex64>> {
    check_soliton_z(z)?;
    Ok(dg.apply_l(&eta_z_synthesis(dg.darboux().symbol(), dg.momenta(), z)))
}

/// `phi_z` on arbitrary points, without a periodic grid.
pub fn phi_z_at(darboux: &Darboux, z: Complex64, xs: &[f64], t: f64) -> Result<Vec<Complex64>> {
    check_soliton_z(z)?;
    darboux.apply_l(&ExpQuadraticSum::coherent(z, t), xs)
}

/// `eta_z` on arbitrary points, with the default momentum rule.
pub fn eta_z_at(darboux: &Darboux, z: Complex64, xs: &[f64]) -> Result<Vec<Complex64>> {
    check_soliton_z(z)?;
    darboux.apply_l(&eta_z_synthesis(darboux.symbol(), &default_momenta(), z), xs)
}

/// `Phi sum_n a_n z^n eta_n`; needs the expansion to fit in the index range of `eta_n`.
pub fn eta_z_series(dg: &DarbouxGrid, z: Complex64) -> Result<Vec<Complex64>> {
    check_soliton_z(z)?;
    let e = CoherentExpansion::new(z)?;
    if e.n_max() > TRANSFORMED_INDEX_MAX {
        return Err(Error::Convergence(format!(
            "eta series for |z| = {} needs {} terms",
            z.norm(),
            e.n_max() + 1
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); dg.grid().len()];
    for (n, c) in e.coefficients().iter().enumerate() {
        for (o, v) in out.iter_mut().zip(dg.eta_n(n)?) {
            *o += c * v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateFamily {
    Psi,
    XiFree { alphas: Vec<f64> },
    Rho { alphas: Vec<f64> },
    Phi { spec: SolitonSpec },
    Eta { spec: SolitonSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Definition1,
    Definition2,
    Neither,
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::Psi => "psi",
            StateFamily::XiFree { .. } => "xi_free",
            StateFamily::Rho { .. } => "rho",
            StateFamily::Phi { .. } => "phi",
            StateFamily::Eta { .. } => "eta",
        }
    }

    /// The class the construction is expected to fall in.
    pub fn claimed(&self) -> Classification {
        match self {
            StateFamily::Psi | StateFamily::XiFree { .. } | StateFamily::Eta { .. } => {
                Classification::Definition1
            }
            StateFamily::Rho { .. } | StateFamily::Phi { .. } => Classification::Definition2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub family: String,
    pub claimed: Classification,
    pub outcome: Classification,
    pub n_max: usize,
    pub checks: Vec<Check>,
}

fn max_abs_diff(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn gram(dg: &DarbouxGrid, states: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    states
        .iter()
        .map(|a| states.iter().map(|b| dg.inner(a, b)).collect())
        .collect()
}

fn biorthogonality(dg: &DarbouxGrid, etas: &[Vec<Complex64>], phis: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for (k, e) in etas.iter().enumerate() {
        for (n, p) in phis.iter().enumerate() {
            let delta = if n == k { 1.0 } else { 0.0 };
            worst = worst.max((dg.inner(e, p) - delta).norm());
        }
    }
    worst
}

fn moments_matrix(entries: impl Iterator<Item = (usize, usize, f64)>, dim: usize) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (n, k, v) in entries {
        m[n][k] = Complex64::new(v, 0.0);
    }
    m
}

/// Functional moments `a_n a_k omega_rho(F_nk)` for `n, k <= n_max`.
fn functional_moments(alphas: &[f64], n_max: usize) -> Result<Vec<Vec<Complex64>>> {
    let density = build_rho_density(alphas)?;
    let mut a = vec![1.0];
    for j in 1..=n_max {
        a.push(a[j - 1] / (j as f64).sqrt());
    }
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n_max + 1]; n_max + 1];
    for n in 0..=n_max {
        for k in 0..=n_max {
            let v = eval_functional_rho(&density, &TestFunction::HermiteGaussian { n, k })?;
            m[n][k] = v * (a[n] * a[k]);
        }
    }
    Ok(m)
}

/// Runs the moment suite appropriate to the family and reports whether the
/// claimed kind of resolution holds. `n_max` is clamped to the family's cap.
pub fn classify(family: &StateFamily, tol: &Tolerances, n_max: usize) -> Result<ClassificationReport> {
    let mut checks = Vec::new();
    let cap = match family {
        StateFamily::Psi | StateFamily::XiFree { .. } => CLASSIFY_MEASURE_CAP,
        StateFamily::Rho { .. } => CLASSIFY_FUNCTIONAL_CAP,
        StateFamily::Phi { .. } | StateFamily::Eta { .. } => CLASSIFY_DARBOUX_CAP,
    };
    let n_max = n_max.min(cap);
    match family {
        StateFamily::Psi => {
            let r = moment_check_xi(&[], n_max)?;
            checks.push(Check::new(
                "psi moments against the identity",
                "measure dx dy / pi resolves the free coherent states",
                r.max_residual,
                tol.measure,
            ));
        }
        StateFamily::XiFree { alphas } => {
            let r = moment_check_xi(alphas, n_max)?;
            checks.push(Check::new(
                "xi moments against S",
                "a_n a_k ∫ dmu_xi |Phi|^2 conj(z)^n z^k = S_nk",
                r.max_residual,
                tol.measure,
            ));
        }
        StateFamily::Rho { alphas } => {
            let r = moment_check_rho(alphas, n_max)?;
            checks.push(Check::new(
                "rho functional moments against S^-1",
                "a_n a_k omega_rho(Phi z^n, Phi z^k) = (S^-1)_nk",
                r.max_residual,
                tol.functional,
            ));
        }
        StateFamily::Eta { spec } | StateFamily::Phi { spec } => {
            let dg = DarbouxGrid::with_defaults(spec.clone())?;
            let is_eta = matches!(family, StateFamily::Eta { .. });
            let lhs = if is_eta {
                let r = moment_check_xi(spec.alphas(), n_max)?;
                moments_matrix(r.entries.iter().map(|e| (e.n, e.k, e.lhs)), n_max + 1)
            } else {
                functional_moments(spec.alphas(), n_max)?
            };
            let tolerance = if is_eta { tol.darboux } else { tol.functional };
            let mut residuals = Vec::new();
            for t in [0.0, STABILITY_TIME] {
                let states: Vec<Vec<Complex64>> = if is_eta {
                    (0..=n_max).map(|n| dg.phi_n(n, t)).collect()
                } else {
                    (0..=n_max).map(|n| dg.eta_n_at(n, t)).collect::<Result<_>>()?
                };
                residuals.push(max_abs_diff(&lhs, &gram(&dg, &states)));
            }
            let (name, anchor) = if is_eta {
                (
                    "eta moments with dmu_xi against <phi_n|phi_k>",
                    "dmu_eta = dmu_xi: a_n a_k ∫ dmu_xi |Phi|^2 z^n conj(z)^k = <phi_n|phi_k>",
                )
            } else {
                (
                    "phi functional moments with omega_rho against <eta_n|eta_k>",
                    "omega_phi = omega_rho: a_n a_k omega_rho(Phi z^n, Phi z^k) = <eta_n|eta_k>",
                )
            };
            checks.push(Check::new(name, anchor, residuals[0], tolerance));
            checks.push(Check::new(
                &format!("{name} at t = {STABILITY_TIME}"),
                anchor,
                residuals[1],
                tolerance,
            ));
            checks.push(Check::new(
                "temporal stability of the moment residual",
                "unitary evolution leaves the resolution unchanged",
                (residuals[0] - residuals[1]).abs(),
                tol.darboux,
            ));
            let etas: Vec<_> = (0..=n_max).map(|n| dg.eta_n(n)).collect::<Result<_>>()?;
            let phis: Vec<_> = (0..=n_max).map(|n| dg.phi_n(n, 0.0)).collect();
            checks.push(Check::new(
                "biorthogonality <eta_k|phi_n> = delta",
                "eta_n = M psi_n is the dual basis of phi_n = L psi_n",
                biorthogonality(&dg, &etas, &phis),
                tol.darboux,
            ));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let outcome = if pass { family.claimed() } else { Classification::Neither };
    Ok(ClassificationReport {
        family: family.name().into(),
        claimed: family.claimed(),
        outcome,
        n_max,
        checks,
    })
}

/// `|| psi_z ||` by Gauss–Hermite quadrature in momentum space.
pub fn psi_z_norm(z: Complex64, order: usize) -> Result<f64> {
    let rule = crate::quadrature::gauss_hermite(order)?;
    // |psi_z(p)|^2 carries exp(-2 (p - Re z)^2); substitute p = Re z + u / sqrt 2
    let shift = z.re;
    let v = rule.integrate(|u| {
        let p = shift + u / 2f64.sqrt();
        psi_z_momentum(z, p, 0.0).norm_sqr() * (u * u).exp()
    }) / 2f64.sqrt();
    Ok(v.sqrt())
}

fn weighted_norm_sq(alphas: &[f64], z: Complex64, order: usize, power: i32) -> Result<f64> {
    let f = poly_from_alphas(alphas)?;
    let rule = crate::quadrature::gauss_hermite(order)?;
    let shift = z.re;
    Ok(rule.integrate(|u| {
        let p = shift + u / 2f64.sqrt();
        psi_z_momentum(z, p, 0.0).norm_sqr() * (u * u).exp() * f.eval(p).powi(power)
    }) / 2f64.sqrt())
}

/// `|| xi_z ||^2` by momentum quadrature.
pub fn xi_z_norm_sq(alphas: &[f64], z: Complex64, order: usize) -> Result<f64> {
    weighted_norm_sq(alphas, z, order, -1)
}

/// `|| rho_z ||^2` by momentum quadrature.
pub fn rho_z_norm_sq(alphas: &[f64], z: Complex64, order: usize) -> Result<f64> {
    weighted_norm_sq(alphas, z, order, 1)
}

/// `Phi^2 sum_{n,k} a_n a_k conj(z)^n z^k (S^-1)_nk` on a certified inverse block.
pub fn xi_z_norm_sq_series(alphas: &[f64], expansion: &CoherentExpansion) -> Result<f64> {
    let c = expansion.coefficients();
    let inv = crate::symmetry::s_inverse_block(alphas, c.len(), 1e-12)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..c.len() {
        for k in 0..c.len() {
            acc += c[n].conj() * c[k] * inv.block[(n, k)];
        }
    }
    Ok(acc.re)
}

/// `|| rho_z ||^2 = Phi^2 sum_{n,k} a_n a_k conj(z)^n z^k S_nk`.
pub fn rho_z_norm_sq_series(alphas: &[f64], expansion: &CoherentExpansion) -> Result<f64> {
    let f = poly_from_alphas(alphas)?;
    let c = expansion.coefficients();
    let s = crate::symmetry::s_matrix(&f, (c.len() - 1).max(f.degree()))?;
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..c.len() {
        for k in 0..c.len() {
            acc += c[n].conj() * c[k] * s.get(n, k);
        }
    }
    Ok(acc.re)
}

/// `∫ |psi_0(p)|^2 / f(p) dp`, the third route to `(S^-1)_00`.
pub fn ground_inverse_quadrature(alphas: &[f64]) -> Result<f64> {
    let f = poly_from_alphas(alphas)?;
    let g2 = ground_peak() * ground_peak();
    let v = crate::quadrature::integrate_panels(
        |p| g2 * (-2.0 * p * p).exp() / f.eval(p),
        10.0,
        1e-14,
        1e-18,
    )?;
    Ok(2.0 * v)
}
