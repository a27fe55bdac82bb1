//! Crum–Darboux transformation of the free particle to a reflectionless
//! `N`-soliton potential.
//!
//! Seeds are `u_j = cosh(alpha_j x + c_j)` for odd `j` and `sinh` for even `j`
//! (1-based), with `alpha` strictly increasing, which keeps the Wronskian
//! nodeless. The intertwiner is `L psi = W(u_1..u_N, psi) / W(u_1..u_N)`,
//! expanded as `sum_m c_m(x) psi^(m)` with `c_N = 1`; it satisfies
//! `L^+ L = f(h0)` and `L L^+ = f(h1)` with `f(p) = prod (p^2 + alpha_j^2)`.
//!
//! Every Wronskian column is divided by `cosh(alpha_j x + c_j)` before taking
//! determinants. Ratios of Wronskians are unchanged and the entries stay of
//! order `alpha^r`, so nothing overflows on wide grids.
//!
//! The seed time phases `exp(i alpha_j^2 t)` are constant in `x` and cancel
//! from `L` and from the potential, so both are time independent.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{momentum_amplitudes, BasisElement, Representation};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::poly::Polynomial;
use crate::quadrature::{trapezoid_decaying, QuadratureRule};
use crate::state::{AnalyticState, BasisExpansion, ExpQuadraticSum, MomentumSynthesis};
use crate::symmetry::poly_from_alphas;

/// Largest basis index accepted by the transformed-basis constructors.
pub const TRANSFORMED_INDEX_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonSpec {
    alphas: Vec<f64>,
    shifts: Vec<f64>,
}

impl SolitonSpec {
    /// `alphas` must be positive and strictly increasing; `shifts` default to 0.
    pub fn new(alphas: Vec<f64>, shifts: Option<Vec<f64>>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("a soliton spec needs at least one alpha"));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(invalid("alphas must be positive and finite"));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("alphas must be strictly increasing"));
        }
        let shifts = shifts.unwrap_or_else(|| vec![0.0; alphas.len()]);
        if shifts.len() != alphas.len() {
            return Err(invalid(format!(
                "{} shifts given for {} alphas",
                shifts.len(),
                alphas.len()
            )));
        }
        if shifts.iter().any(|c| !c.is_finite()) {
            return Err(invalid("shifts must be finite"));
        }
        Ok(SolitonSpec { alphas, shifts })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    /// Seed `u_{j+1}` at `t = 0`.
    pub fn seed(&self, j: usize) -> ExpQuadraticSum {
        ExpQuadraticSum::hyperbolic(self.alphas[j], self.shifts[j], j % 2 == 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Darboux {
    spec: SolitonSpec,
    symbol: Polynomial,
}

impl Darboux {
    pub fn new(spec: SolitonSpec) -> Result<Self> {
        let symbol = poly_from_alphas(spec.alphas())?;
        Ok(Darboux { spec, symbol })
    }

    pub fn spec(&self) -> &SolitonSpec {
        &self.spec
    }

    /// `f(p) = prod (p^2 + alpha_j^2)`.
    pub fn symbol(&self) -> &Polynomial {
        &self.symbol
    }

    pub fn order(&self) -> usize {
        self.spec.order()
    }

    /// `N_p = f(p)^{1/2}`.
    pub fn n_p(&self, p: f64) -> f64 {
        self.symbol.eval(p).sqrt()
    }

    /// Row `r` (derivative order) of normalized column `j`.
    fn entry(&self, r: usize, j: usize, x: f64) -> f64 {
        let a = self.spec.alphas[j];
        let th = (a * x + self.spec.shifts[j]).tanh();
        let cosh_seed = j % 2 == 0;
        let scale = a.powi(r as i32);
        if (r % 2 == 0) == cosh_seed {
            scale
        } else {
            scale * th
        }
    }

    fn det(&self, rows: &[usize], cols: &[usize], x: f64) -> f64 {
        if rows.is_empty() {
            return 1.0;
        }
        let m = DMatrix::from_fn(rows.len(), cols.len(), |i, k| self.entry(rows[i], cols[k], x));
        m.determinant()
    }

    fn all_cols(&self) -> Vec<usize> {
        (0..self.order()).collect()
    }

    fn wronskian(&self, x: f64) -> Result<f64> {
        let n = self.order();
        let rows: Vec<usize> = (0..n).collect();
        let w = self.det(&rows, &self.all_cols(), x);
        let floor = 1e-13 * self.spec.alphas.iter().map(|a| a.max(1.0).powi(n as i32)).product::<f64>();
        if !w.is_finite() || w.abs() <= floor {
            return Err(Error::Construction(format!(
                "Wronskian of the seeds vanishes near x = {x}"
            )));
        }
        Ok(w)
    }

    /// `c_0(x), ..., c_N(x)` with `L psi = sum_m c_m psi^(m)`.
    pub fn coefficients(&self, x: f64) -> Result<Vec<f64>> {
        let n = self.order();
        let w = self.wronskian(x)?;
        let cols = self.all_cols();
        Ok((0..=n)
            .map(|m| {
                if m == n {
                    return 1.0;
                }
                let rows: Vec<usize> = (0..=n).filter(|&r| r != m).collect();
                let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.det(&rows, &cols, x) / w
            })
            .collect())
    }

    /// `V(x) = -2 d^2/dx^2 ln W(x)`.
    pub fn potential_at(&self, x: f64) -> Result<f64> {
        let n = self.order();
        let w = self.wronskian(x)?;
        let cols = self.all_cols();
        let mut rows: Vec<usize> = (0..n - 1).collect();
        rows.push(n);
        let d1 = self.det(&rows, &cols, x) / w;
        *rows.last_mut().unwrap() = n + 1;
        let mut d2 = self.det(&rows, &cols, x);
        if n >= 2 {
            let mut rows: Vec<usize> = (0..n - 2).collect();
            rows.push(n - 1);
            rows.push(n);
            d2 += self.det(&rows, &cols, x);
        }
        d2 /= w;
        Ok(-2.0 * (d2 - d1 * d1))
    }

    /// Potential samples. The time argument is accepted for symmetry with the
    /// state constructors; the potential does not depend on it.
    pub fn potential(&self, xs: &[f64], _t: f64) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.potential_at(x)).collect()
    }

    /// Unnormalized `W(u without u_i) / W(u)` at `t = 0`.
    pub fn kernel_function(&self, i: usize, x: f64) -> Result<f64> {
        let n = self.order();
        let w = self.wronskian(x)?;
        let cols: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let rows: Vec<usize> = (0..n - 1).collect();
        let cosh = (self.spec.alphas[i] * x + self.spec.shifts[i]).cosh();
        Ok(self.det(&rows, &cols, x) / (w * cosh))
    }

    /// `L psi` at each point, with exact derivatives of `psi`.
    pub fn apply_l<S: AnalyticState + ?Sized>(&self, state: &S, xs: &[f64]) -> Result<Vec<Complex64>> {
        let n = self.order();
        xs.iter()
            .map(|&x| {
                let c = self.coefficients(x)?;
                let d = state.derivatives(x, n);
                Ok(c.iter().zip(&d).map(|(c, d)| d * *c).sum())
            })
            .collect()
    }
}

/// Default spatial grid for a spec: bound states decay to about `1e-10`
/// inside the box and the spacing stays below `0.02`.
pub fn default_grid(spec: &SolitonSpec) -> Result<Grid> {
    let half = (23.0 / spec.alphas()[0]).max(20.0);
    let points = ((2.0 * half / 0.0196).ceil() as usize).next_power_of_two();
    Grid::periodic(-half, half, points)
}

/// Default momentum rule: trapezoid on `[-10, 10]` with step `0.04`.
pub fn default_momenta() -> QuadratureRule {
    trapezoid_decaying(-10.0, 10.0, 501).expect("fixed rule parameters are valid")
}

/// A transformation sampled on a spatial grid together with a momentum rule
/// for the spectral representation of `L^+`.
#[derive(Debug, Clone)]
pub struct DarbouxGrid {
    darboux: Darboux,
    grid: Grid,
    momenta: QuadratureRule,
    coeffs: Vec<Vec<f64>>,
    potential: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    /// `|| (L^+ L - f(h0)) psi_n || / || psi_n ||`, evaluated in momentum space.
    pub lplus_l: Vec<f64>,
    /// `|| (L L^+ - f(h1)) phi_n || / || phi_n ||`.
    pub l_lplus: Vec<f64>,
    /// `|| (L h0 - h1 L) psi_n ||`.
    pub intertwining: Vec<f64>,
}

impl FactorizationReport {
    pub fn max_lplus_l(&self) -> f64 {
        self.lplus_l.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_l_lplus(&self) -> f64 {
        self.l_lplus.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_intertwining(&self) -> f64 {
        self.intertwining.iter().copied().fold(0.0, f64::max)
    }
}

impl DarbouxGrid {
    pub fn new(darboux: Darboux, grid: Grid, momenta: QuadratureRule) -> Result<Self> {
        let coeffs = grid
            .points()
            .iter()
            .map(|&x| darboux.coefficients(x))
            .collect::<Result<Vec<_>>>()?;
        let potential = darboux.potential(grid.points(), 0.0)?;
        Ok(DarbouxGrid {
            darboux,
            grid,
            momenta,
            coeffs,
            potential,
        })
    }

    pub fn with_defaults(spec: SolitonSpec) -> Result<Self> {
        let grid = default_grid(&spec)?;
        DarbouxGrid::new(Darboux::new(spec)?, grid, default_momenta())
    }

    pub fn darboux(&self) -> &Darboux {
        &self.darboux
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn momenta(&self) -> &QuadratureRule {
        &self.momenta
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        self.grid.inner(a, b)
    }

    pub fn norm(&self, a: &[Complex64]) -> f64 {
        self.grid.norm(a)
    }

    pub fn apply_l<S: AnalyticState + ?Sized>(&self, state: &S) -> Vec<Complex64> {
        let n = self.darboux.order();
        self.grid
            .points()
            .iter()
            .zip(&self.coeffs)
            .map(|(&x, c)| {
                let d = state.derivatives(x, n);
                c.iter().zip(&d).map(|(c, d)| d * *c).sum()
            })
            .collect()
    }

    /// `L` on grid samples, derivatives by FFT.
    pub fn apply_l_sampled(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.darboux.order();
        let mut out = vec![Complex64::new(0.0, 0.0); samples.len()];
        for m in 0..=n {
            let d = self.grid.spectral_derivative(samples, m)?;
            for ((o, c), v) in out.iter_mut().zip(&self.coeffs).zip(&d) {
                *o += v * c[m];
            }
        }
        Ok(out)
    }

    /// `h1 = -d^2/dx^2 + V` on samples, derivatives by FFT.
    pub fn h1(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let d2 = self.grid.spectral_derivative(samples, 2)?;
        Ok(d2
            .iter()
            .zip(samples)
            .zip(&self.potential)
            .map(|((d, s), v)| -d + s * *v)
            .collect())
    }

    /// `f(h1) = prod (h1 + alpha_j^2)` on samples.
    pub fn f_h1(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut cur = samples.to_vec();
        for a in self.darboux.spec.alphas() {
            let h = self.h1(&cur)?;
            cur = h.iter().zip(&cur).map(|(h, c)| h + c * (a * a)).collect();
        }
        Ok(cur)
    }

    /// `<phi | h1 phi> / <phi | phi>`.
    pub fn rayleigh_quotient(&self, samples: &[Complex64]) -> Result<f64> {
        let h = self.h1(samples)?;
        Ok(self.inner(samples, &h).re / self.inner(samples, samples).re)
    }

    /// Continuum eigenfunction `phi_p = N_p^{-1} L psi_p`.
    pub fn phi_p(&self, p: f64, t: f64) -> Vec<Complex64> {
        let scale = 1.0 / self.darboux.n_p(p);
        self.apply_l(&ExpQuadraticSum::plane_wave(p, t))
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }

    /// `phi_n = L psi_n`.
    pub fn phi_n(&self, n: usize, t: f64) -> Vec<Complex64> {
        self.apply_l(&BasisExpansion::basis(n, t))
    }

    /// `L^+ phi = ∫ dp N_p psi_p <phi_p | phi>`, the projections by
    /// trapezoid quadrature on the spatial grid.
    pub fn apply_l_plus(&self, samples: &[Complex64], t: f64) -> Result<MomentumSynthesis> {
        if samples.len() != self.grid.len() {
            return Err(invalid("sample count does not match the grid"));
        }
        if !self.grid.is_periodic() {
            return Err(invalid("L^+ needs a periodic spatial grid"));
        }
        let n = self.darboux.order();
        let norm = (2.0 * std::f64::consts::PI).powf(-0.5);
        let dx = self.grid.dx();
        let mut coeffs = Vec::with_capacity(self.momenta.len());
        for &p in &self.momenta.nodes {
            // conj(L psi_p) = sum_m c_m (-i p)^m conj(psi_p)
            let powers: Vec<Complex64> = (0..=n)
                .map(|m| Complex64::new(0.0, -p).powu(m as u32))
                .collect();
            let terms: Vec<Complex64> = self
                .grid
                .points()
                .iter()
                .zip(&self.coeffs)
                .zip(samples)
                .map(|((&x, c), s)| {
                    let poly: Complex64 = c.iter().zip(&powers).map(|(c, w)| w * *c).sum();
                    let wave = Complex64::from_polar(norm, -(p * x - p * p * t));
                    poly * wave * s * dx
                })
                .collect();
            // N_p <phi_p | phi> = <L psi_p | phi>
            coeffs.push(crate::quadrature::pairwise_sum_complex(&terms));
        }
        Ok(MomentumSynthesis {
            nodes: self.momenta.nodes.clone(),
            weights: self.momenta.weights.clone(),
            coeffs,
            t,
        })
    }

    /// Normalized kernel functions of `L^+`, the bound states of `h1` with
    /// energies `-alpha_i^2`, carrying their phases `exp(i alpha_i^2 t)`.
    pub fn bound_states(&self, t: f64) -> Result<Vec<Vec<Complex64>>> {
        let mut out = Vec::new();
        for (i, a) in self.darboux.spec.alphas().iter().enumerate() {
            let phase = Complex64::from_polar(1.0, a * a * t);
            let raw = self
                .grid
                .points()
                .iter()
                .map(|&x| self.darboux.kernel_function(i, x).map(|v| phase * v))
                .collect::<Result<Vec<_>>>()?;
            let nrm = self.norm(&raw);
            let edge = raw[0].norm().max(raw[raw.len() - 1].norm());
            if !(nrm > 0.0) || edge > 1e-6 * nrm {
                return Err(Error::Construction(format!(
                    "bound state {} has not decayed at the grid ends; widen the grid",
                    i + 1
                )));
            }
            out.push(raw.into_iter().map(|v| v / nrm).collect());
        }
        Ok(out)
    }

    fn weighted_synthesis(&self, n: usize, power: f64, t: f64) -> MomentumSynthesis {
        let coeffs = self
            .momenta
            .nodes
            .iter()
            .map(|&p| {
                let psi = momentum_amplitudes(n, p)[n];
                Complex64::new(psi * self.darboux.symbol.eval(p).powf(power), 0.0)
            })
            .collect();
        MomentumSynthesis {
            nodes: self.momenta.nodes.clone(),
            weights: self.momenta.weights.clone(),
            coeffs,
            t,
        }
    }

    /// `eta_n = ∫ dp N_p^{-1} phi_p <psi_p | psi_n> = L f(p)^{-1} psi_n` at `t = 0`.
    pub fn eta_n(&self, n: usize) -> Result<Vec<Complex64>> {
        self.eta_n_at(n, 0.0)
    }

    /// `eta_n` evolved to time `t` under `h1`.
    pub fn eta_n_at(&self, n: usize, t: f64) -> Result<Vec<Complex64>> {
        check_index(n)?;
        Ok(self.apply_l(&self.weighted_synthesis(n, -1.0, t)))
    }

    /// `xi_n = ∫ dp phi_p <psi_p | psi_n> = L f(p)^{-1/2} psi_n` at `t = 0`.
    pub fn xi1_n(&self, n: usize) -> Result<Vec<Complex64>> {
        check_index(n)?;
        Ok(self.apply_l(&self.weighted_synthesis(n, -0.5, 0.0)))
    }

    /// Residuals of `L^+ L = f(h0)`, `L L^+ = f(h1)` and `L h0 = h1 L` on
    /// `psi_n`, `n <= n_max`, at `t = 0`.
    pub fn check_factorization(&self, n_max: usize) -> Result<FactorizationReport> {
        if n_max > 12 {
            return Err(invalid(format!("factorization check takes n_max <= 12, got {n_max}")));
        }
        let mut report = FactorizationReport {
            lplus_l: Vec::new(),
            l_lplus: Vec::new(),
            intertwining: Vec::new(),
        };
        let f = &self.darboux.symbol;
        for n in 0..=n_max {
            let phi = self.phi_n(n, 0.0);
            let lpl = self.apply_l_plus(&phi, 0.0)?;
            let target = BasisElement {
                n,
                representation: Representation::Momentum,
                time: 0.0,
            }
            .sample(&lpl.nodes);
            let r2: f64 = lpl
                .coeffs
                .iter()
                .zip(&target)
                .zip(&lpl.nodes)
                .zip(&lpl.weights)
                .map(|(((d, psi), &p), w)| w * (d - psi * f.eval(p)).norm_sqr())
                .sum();
            report.lplus_l.push(r2.sqrt());

            let llp = self.apply_l(&lpl);
            let fh1 = self.f_h1(&phi)?;
            let diff: Vec<Complex64> = llp.iter().zip(&fh1).map(|(a, b)| a - b).collect();
            report.l_lplus.push(self.norm(&diff) / self.norm(&phi));

            let left = self.apply_l(&BasisExpansion::basis(n, 0.0).free_hamiltonian());
            let right = self.h1(&phi)?;
            let diff: Vec<Complex64> = left.iter().zip(&right).map(|(a, b)| a - b).collect();
            report.intertwining.push(self.norm(&diff));
        }
        Ok(report)
    }
}

fn check_index(n: usize) -> Result<()> {
    if n > TRANSFORMED_INDEX_MAX {
        return Err(invalid(format!(
            "transformed basis index must be at most {TRANSFORMED_INDEX_MAX}, got {n}"
        )));
    }
    Ok(())
}

/// `max |(-d^2/dx^2 + V - p^2) phi_p|` over interior points, second
/// derivative by the 8th-order stencil on a linspace grid.
pub fn phi_p_residual(darboux: &Darboux, p: f64, grid: &Grid) -> Result<f64> {
    let xs = grid.points();
    let phi: Vec<Complex64> = darboux
        .apply_l(&ExpQuadraticSum::plane_wave(p, 0.0), xs)?
        .into_iter()
        .map(|v| v / darboux.n_p(p))
        .collect();
    let v = darboux.potential(xs, 0.0)?;
    let d2 = grid.fd_second_derivative(&phi);
    Ok(d2
        .iter()
        .zip(&phi)
        .zip(&v)
        .filter(|((d, _), _)| !d.re.is_nan())
        .map(|((d, f), v)| (-d + f * (v - p * p)).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::s_matrix;

    fn one() -> DarbouxGrid {
        DarbouxGrid::with_defaults(SolitonSpec::new(vec![1.0], None).unwrap()).unwrap()
    }

    fn two() -> DarbouxGrid {
        DarbouxGrid::with_defaults(SolitonSpec::new(vec![1.0, 2.0], None).unwrap()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SolitonSpec::new(vec![], None).is_err());
        assert!(SolitonSpec::new(vec![2.0, 1.0], None).is_err());
        assert!(SolitonSpec::new(vec![1.0, 1.0], None).is_err());
        assert!(SolitonSpec::new(vec![1.0], Some(vec![0.0, 1.0])).is_err());
        assert!(SolitonSpec::new(vec![-1.0], None).is_err());
    }

    #[test]
    fn one_soliton_potential() {
        let d = Darboux::new(SolitonSpec::new(vec![1.0], None).unwrap()).unwrap();
        assert!((d.potential_at(0.0).unwrap() + 2.0).abs() < 1e-14);
        for x in [-10.0f64, -3.0, 0.5, 10.0] {
            let exact = -2.0 / x.cosh().powi(2);
            assert!((d.potential_at(x).unwrap() - exact).abs() < 1e-14);
        }
        // sech^2 tail at |x| = 12 / alpha_1 is below 1e-8
        assert!(d.potential_at(12.0).unwrap().abs() < 1e-8);
        assert_eq!(d.potential(&[0.3], 0.0).unwrap(), d.potential(&[0.3], 0.3).unwrap());
    }

    #[test]
    fn two_soliton_potential() {
        let d = Darboux::new(SolitonSpec::new(vec![1.0, 2.0], None).unwrap()).unwrap();
        for x in [0.0f64, 0.7, -2.5] {
            let exact = -6.0 / x.cosh().powi(2);
            assert!((d.potential_at(x).unwrap() - exact).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn shifted_seeds_stay_nodeless() {
        let spec = SolitonSpec::new(vec![0.7, 1.3, 2.1], Some(vec![0.5, -1.0, 2.0])).unwrap();
        let d = Darboux::new(spec).unwrap();
        for j in 0..400 {
            let x = -20.0 + 0.1 * j as f64;
            let v = d.potential_at(x).unwrap();
            assert!(v.is_finite() && v <= 1e-12);
        }
    }

    #[test]
    fn one_soliton_intertwiner() {
        let d = Darboux::new(SolitonSpec::new(vec![1.0], None).unwrap()).unwrap();
        let xs = [-2.0, 0.0, 0.9, 3.0];
        let out = d.apply_l(&BasisExpansion::basis(0, 0.0), &xs).unwrap();
        for (x, v) in xs.iter().zip(&out) {
            let g = (2.0 * std::f64::consts::PI).powf(-0.25) * (-x * x / 4.0).exp();
            let exact = (-x / 2.0 - x.tanh()) * g;
            assert!((v.re - exact).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn seeds_are_annihilated() {
        let d = Darboux::new(SolitonSpec::new(vec![1.0, 2.0], Some(vec![0.3, -0.4])).unwrap()).unwrap();
        let xs = [-3.0, 0.0, 1.0, 4.0];
        for j in 0..2 {
            let u = d.spec().seed(j);
            let out = d.apply_l(&u, &xs).unwrap();
            for (x, v) in xs.iter().zip(&out) {
                let scale = u.derivatives(*x, 2).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(v.norm() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn norm_of_phi_n_is_s_entry() {
        for g in [one(), two()] {
            let s = s_matrix(g.darboux().symbol(), 6 + g.darboux().symbol().degree()).unwrap();
            for n in 0..=6 {
                let phi = g.phi_n(n, 0.0);
                for k in 0..=6 {
                    let phik = g.phi_n(k, 0.0);
                    let v = g.inner(&phik, &phi);
                    assert!((v.re - s.get(k, n)).abs() < 1e-10 && v.im.abs() < 1e-10, "({k},{n})");
                }
            }
        }
        let g = one();
        assert!((g.norm(&g.phi_n(0, 0.0)).powi(2) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn bound_states_one_soliton() {
        let g = one();
        let b = g.bound_states(0.0).unwrap();
        for (x, v) in g.grid().points().iter().zip(&b[0]) {
            assert!((v.re - 1.0 / (x.cosh() * 2f64.sqrt())).abs() < 1e-9);
        }
        assert!((g.rayleigh_quotient(&b[0]).unwrap() + 1.0).abs() < 1e-6);
        let lp = g.apply_l_plus(&b[0], 0.0).unwrap();
        assert!(lp.norm() < 1e-6);
    }

    #[test]
    fn bound_states_two_soliton() {
        let g = two();
        let b = g.bound_states(0.0).unwrap();
        assert!(g.inner(&b[0], &b[1]).norm() < 1e-10);
        assert!((g.rayleigh_quotient(&b[0]).unwrap() + 1.0).abs() < 1e-6);
        assert!((g.rayleigh_quotient(&b[1]).unwrap() + 4.0).abs() < 1e-6);
        for s in &b {
            assert!(g.apply_l_plus(s, 0.0).unwrap().norm() < 1e-6);
            for n in 0..=10 {
                assert!(g.inner(s, &g.phi_n(n, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn l_plus_linear_and_reproduces_s_column() {
        let g = one();
        let a = g.phi_n(0, 0.0);
        let b = g.phi_n(3, 0.0);
        let (ca, cb) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let comb: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| ca * x + cb * y).collect();
        let lc = g.apply_l_plus(&comb, 0.0).unwrap();
        let la = g.apply_l_plus(&a, 0.0).unwrap();
        let lb = g.apply_l_plus(&b, 0.0).unwrap();
        for j in 0..lc.coeffs.len() {
            assert!((lc.coeffs[j] - (ca * la.coeffs[j] + cb * lb.coeffs[j])).norm() < 1e-10);
        }
        // L^+ L psi_0 = sum_k S_k0 psi_k
        let s = s_matrix(g.darboux().symbol(), 4).unwrap();
        let xs = [-1.0, 0.0, 0.5, 2.0];
        for &x in &xs {
            let got = la.derivatives(x, 0)[0];
            let want: Complex64 = (0..=2)
                .map(|k| BasisExpansion::basis(k, 0.0).derivatives(x, 0)[0] * s.get(k, 0))
                .sum();
            assert!((got - want).norm() < 1e-6);
        }
    }

    #[test]
    fn factorization_small() {
        for g in [one(), two()] {
            let r = g.check_factorization(4).unwrap();
            assert!(r.max_lplus_l() <= 1e-6, "{r:?}");
            assert!(r.max_l_lplus() <= 1e-6, "{r:?}");
            assert!(r.max_intertwining() <= 1e-5, "{r:?}");
        }
    }

    #[test]
    fn continuum_states() {
        let d = Darboux::new(SolitonSpec::new(vec![1.0], None).unwrap()).unwrap();
        assert!((d.n_p(1.0) - 2f64.sqrt()).abs() < 1e-15);
        let far = d.apply_l(&ExpQuadraticSum::plane_wave(1.0, 0.0), &[30.0]).unwrap()[0] / d.n_p(1.0);
        assert!((far.norm() - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
        let grid = Grid::linspace(-10.0, 10.0, 2001).unwrap();
        for p in [0.0, 1.0, 2.5] {
            assert!(phi_p_residual(&d, p, &grid).unwrap() <= 1e-6);
        }
        for spec in [SolitonSpec::new(vec![1.0, 2.0], None).unwrap()] {
            let d = Darboux::new(spec).unwrap();
            assert!(phi_p_residual(&d, 1.5, &grid).unwrap() <= 1e-6);
        }
        // parity for a symmetric spec: |phi_{-p}(x)| = |phi_p(-x)|
        let a = d.apply_l(&ExpQuadraticSum::plane_wave(-1.3, 0.0), &[0.8]).unwrap()[0];
        let b = d.apply_l(&ExpQuadraticSum::plane_wave(1.3, 0.0), &[-0.8]).unwrap()[0];
        assert!((a.norm() - b.norm()).abs() < 1e-14);
    }

    #[test]
    fn smeared_orthonormality() {
        // || ∫ g(p) phi_p dp ||^2 = ∫ |g|^2 dp for a Gaussian packet g
        let g = one();
        let (p0, sigma) = (1.0, 0.5);
        let m = g.momenta();
        let gp: Vec<f64> = m.nodes.iter().map(|p| (-(p - p0) * (p - p0) / (2.0 * sigma * sigma)).exp()).collect();
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
        assert!((lhs - rhs).abs() <= 1e-4 * rhs);
    }

    #[test]
    fn transformed_bases() {
        let g = one();
        let etas: Vec<_> = (0..=4).map(|n| g.eta_n(n).unwrap()).collect();
        let xis: Vec<_> = (0..=4).map(|n| g.xi1_n(n).unwrap()).collect();
        let phis: Vec<_> = (0..=4).map(|n| g.phi_n(n, 0.0)).collect();
        for n in 0..=4 {
            for k in 0..=4 {
                let delta = if n == k { 1.0 } else { 0.0 };
                assert!((g.inner(&etas[k], &phis[n]) - delta).norm() < 1e-6, "eta/phi ({k},{n})");
                assert!((g.inner(&xis[k], &xis[n]) - delta).norm() < 1e-6, "xi ({k},{n})");
            }
            assert!(g.norm(&etas[n]) <= 1.0);
        }
        assert!((g.norm(&etas[0]).powi(2) - 0.842_738_458_576_108_4).abs() < 1e-3);
        assert!(g.eta_n(21).is_err());
    }
}
