//! Densities for the two kinds of identity resolution and their moment checks.
//!
//! For `g0 = f(p)` the states `xi_z` admit an ordinary measure
//! `d mu = omega_xi(x) dx dy` with a polynomial `omega_xi`. The states `rho_z`
//! only admit a functional, defined through the Fourier transform of its
//! argument against `omega_rho~(t) = (2 pi)^-1 sum_k (A_k / alpha_k) exp(-alpha_k |t| + t^2 / 8)`.
//! The `exp(t^2 / 8)` growth is always combined with the Gaussian decay of the
//! test function before evaluation.

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{invalid, Error, Result};
use crate::poly::Polynomial;
use crate::quadrature::{gauss_hermite, integrate_panels};
use crate::symmetry::{
    partial_fractions, poly_from_alphas, s_inverse_block, s_matrix, InverseCertificate,
    PartialFractions,
};

/// Largest `n_max` accepted by [`moment_check_xi`].
pub const XI_MOMENT_MAX: usize = 30;
/// Largest `n_max` accepted by [`moment_check_rho`].
pub const RHO_MOMENT_MAX: usize = 12;
/// Minimum fitted Gaussian decay rate of a sampled test function's transform.
pub const ADMISSIBLE_DECAY: f64 = 0.125 + 1e-3;

/// Polynomial density `omega_xi` with `d mu_xi = omega_xi(x) dx dy`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiDensity {
    poly: Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DensitySign {
    Positive,
    /// Vanishes somewhere on the real line but never goes negative.
    NonNegative,
    Signed,
}

impl XiDensity {
    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(x)
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// Sign behaviour on the real line, read off from the roots of `g` with
    /// `omega(x) = g(x^2)`.
    pub fn sign(&self) -> DensitySign {
        let g = self.poly.even_part_in_square();
        if g.degree() == 0 {
            return if g.coeff(0) > 0.0 { DensitySign::Positive } else { DensitySign::Signed };
        }
        let scale = g.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut real_roots: Vec<f64> = g
            .roots()
            .iter()
            .filter(|r| r.im.abs() <= 1e-9 * (1.0 + r.re.abs()) * scale.max(1.0) && r.re >= 0.0)
            .map(|r| r.re)
            .collect();
        real_roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut probes = vec![0.0];
        for w in real_roots.windows(2) {
            probes.push(0.5 * (w[0] + w[1]));
        }
        if let Some(last) = real_roots.last() {
            probes.push(last + 1.0);
        }
        if probes.iter().any(|&y| g.eval(y) < 0.0) {
            DensitySign::Signed
        } else if real_roots.is_empty() {
            DensitySign::Positive
        } else {
            DensitySign::NonNegative
        }
    }

    /// Relative residuals of `∫ omega(x) exp(-2 (x - p)^2) dx = (2 pi)^-1/2 f(p)`
    /// at each `p`, with the left side by Gauss–Hermite quadrature.
    pub fn smoothing_residuals(&self, f: &Polynomial, ps: &[f64]) -> Result<Vec<f64>> {
        let rule = gauss_hermite(self.poly.degree() / 2 + 2)?;
        Ok(ps
            .iter()
            .map(|&p| {
                let lhs = rule.integrate(|u| self.eval(p + u / SQRT_2)) / SQRT_2;
                let rhs = f.eval(p) / (2.0 * PI).sqrt();
                (lhs - rhs).abs() / rhs.abs()
            })
            .collect())
    }
}

/// `E[Z^i]` for a standard normal `Z`.
fn normal_moment(i: usize) -> f64 {
    if i % 2 == 1 {
        return 0.0;
    }
    (1..i).step_by(2).map(|j| j as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Solves for `omega_xi` by matching moments of the normalized smoothing
/// kernel `N(p, 1/4)`: find `g` with `E[g(p + Z/2)] = f(p)`, then `omega = g / pi`.
/// The system is upper triangular with unit diagonal in the monomial basis.
pub fn solve_omega_xi(f: &Polynomial) -> Result<XiDensity> {
    if !f.is_even() || !f.is_strictly_positive_even() {
        return Err(invalid(format!("symbol {f} is not an even positive polynomial")));
    }
    let d = f.degree();
    let sigma: f64 = 0.5;
    let mut b = vec![0.0; d + 1];
    for r in (0..=d).rev() {
        let mut v = f.coeff(r);
        for (j, bj) in b.iter().enumerate().skip(r + 1) {
            let i = j - r;
            v -= bj * binomial(j, i) * sigma.powi(i as i32) * normal_moment(i);
        }
        b[r] = v;
    }
    Ok(XiDensity {
        poly: Polynomial::new(b).scale(1.0 / PI),
    })
}

/// Fourier-domain density of the functional for `1/f`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoDensity {
    fractions: PartialFractions,
}

impl RhoDensity {
    pub fn fractions(&self) -> &PartialFractions {
        &self.fractions
    }

    /// `omega_rho~(t) exp(-t^2 / 8)`, the part that never overflows.
    pub fn damped(&self, t: f64) -> f64 {
        let at = t.abs();
        self.fractions
            .alphas()
            .iter()
            .zip(self.fractions.residues())
            .map(|(a, r)| r / a * (-a * at).exp())
            .sum::<f64>()
            / (2.0 * PI)
    }

    /// `omega_rho~(t)`; overflows to infinity for `|t|` beyond about 75.
    pub fn eval(&self, t: f64) -> f64 {
        self.damped(t) * (t * t / 8.0).exp()
    }

    pub fn sample(&self, ts: &[f64]) -> Vec<f64> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    fn min_alpha(&self) -> f64 {
        self.fractions.alphas().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn build_rho_density(alphas: &[f64]) -> Result<RhoDensity> {
    Ok(RhoDensity {
        fractions: partial_fractions(alphas)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FfEntry {
    #[serde(serialize_with = "as_string")]
    pub p: f64,
    #[serde(serialize_with = "as_string")]
    pub value: f64,
    #[serde(serialize_with = "as_string")]
    pub target: f64,
    #[serde(serialize_with = "as_string")]
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FfReport {
    pub entries: Vec<FfEntry>,
    #[serde(serialize_with = "as_string")]
    pub max_residual: f64,
}

fn as_string<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&crate::report::fmt_num(*x))
}

/// Checks `pi ∫ omega_rho~(t) exp(-t^2/8 + i p t) dt = 1/f(p)` on each `p`.
pub fn verify_ff(density: &RhoDensity, ps: &[f64]) -> Result<FfReport> {
    if ps.iter().any(|p| !p.is_finite()) {
        return Err(invalid("p values must be finite"));
    }
    let length = 40.0 / density.min_alpha();
    let terms: Vec<(f64, f64)> = density
        .fractions
        .alphas()
        .iter()
        .zip(density.fractions.residues())
        .map(|(a, r)| (*a, r / a))
        .collect();
    let mut entries = Vec::with_capacity(ps.len());
    for &p in ps {
        let value = integrate_panels(
            |t| terms.iter().map(|(a, c)| c * (-a * t).exp()).sum::<f64>() * (p * t).cos(),
            length,
            1e-14,
            1e-17,
        )?;
        let target = 1.0 / density.fractions.alphas().iter().map(|a| p * p + a * a).product::<f64>();
        entries.push(FfEntry {
            p,
            value,
            target,
            residual: (value - target).abs(),
        });
    }
    let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
    Ok(FfReport { entries, max_residual })
}

/// `P_nk` with `∫ dy exp(-x^2 - y^2) conj(z)^n z^k = exp(-x^2) P_nk(x)`, `z = x + i y`.
/// Real for all `n, k` and symmetric in them.
pub fn reduced_polynomial(n: usize, k: usize) -> Polynomial {
    let mut coeffs = vec![0.0; n + k + 1];
    for a in 0..=n {
        for b in 0..=k {
            if (a + b) % 2 == 1 {
                continue;
            }
            let m = (a + b) / 2;
            // conj(z)^n contributes (-i y)^a, z^k contributes (i y)^b
            let sign = if (a + m) % 2 == 0 { 1.0 } else { -1.0 };
            // Γ(m + 1/2) = (2m - 1)!! sqrt(pi) / 2^m
            let gamma = (1..2 * m).step_by(2).map(|j| j as f64 / 2.0).product::<f64>() * PI.sqrt();
            coeffs[n - a + k - b] += sign * binomial(n, a) * binomial(k, b) * gamma;
        }
    }
    Polynomial::new(coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Satisfied,
    Unknown,
}

/// Argument of the functional.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// `F_nk(x) = exp(-x^2) P_nk(x)`.
    HermiteGaussian { n: usize, k: usize },
    /// Samples on a uniform grid; the transform is computed numerically.
    GridSamples { x: Vec<f64>, values: Vec<Complex64> },
}

impl TestFunction {
    /// Whether the pointwise lower bound `|F(x)| >= exp(-2x^2 - A x)` is known
    /// to hold. For `F_nk` it fails exactly when `P_nk` has a real zero.
    pub fn membership(&self) -> Membership {
        match self {
            TestFunction::HermiteGaussian { n, k } => {
                let p = reduced_polynomial(*n, *k);
                let scale = p.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let has_real_zero = p
                    .roots()
                    .iter()
                    .any(|r| r.im.abs() <= 1e-9 * (1.0 + r.re.abs()) * scale.max(1.0));
                if p.degree() > 0 && has_real_zero || p.coeff(0) == 0.0 && p.degree() == 0 {
                    Membership::Unknown
                } else {
                    Membership::Satisfied
                }
            }
            TestFunction::GridSamples { .. } => Membership::Unknown,
        }
    }
}

/// Even part of the transform of `exp(-x^2) P(x)` times `exp(t^2 / 4)`:
/// `sum_{m even} c_m (-1)^{m/2} 2^-m H_m(t/2)`, with `H_m` the physicists' polynomials.
fn transform_even_part(p: &Polynomial, t: f64) -> f64 {
    let u = 0.5 * t;
    let mut h_prev = 1.0;
    let mut h = 2.0 * u;
    let mut acc = p.coeff(0);
    let mut scale = 1.0;
    for m in 1..=p.degree() {
        if m >= 2 {
            let next = 2.0 * u * h - 2.0 * (m - 1) as f64 * h_prev;
            h_prev = h;
            h = next;
        }
        scale *= 0.5;
        if m % 2 == 0 {
            let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
            acc += p.coeff(m) * sign * scale * h;
        }
    }
    acc
}

/// `∫ omega_rho~(t) F~(t) dt` with `F~(t) = ∫ F(x) exp(i x t) dx`.
pub fn eval_functional_rho(density: &RhoDensity, f: &TestFunction) -> Result<Complex64> {
    match f {
        TestFunction::HermiteGaussian { n, k } => {
            let p = reduced_polynomial(*n, *k);
            if (n + k) % 2 == 1 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            // F~(t) + F~(-t) = 2 sqrt(pi) exp(-t^2/4) E(t); fold t < 0 onto t > 0.
            let length = 30.0 + 2.0 * p.degree() as f64;
            let v = integrate_panels(
                |t| {
                    density.damped(t) * 2.0 * PI.sqrt() * (-t * t / 8.0).exp()
                        * transform_even_part(&p, t)
                },
                length,
                1e-13,
                1e-16,
            )?;
            Ok(Complex64::new(v, 0.0))
        }
        TestFunction::GridSamples { x, values } => eval_sampled(density, x, values),
    }
}

/// Result of the Gaussian-decay fit of a sampled transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted `beta` in `|F~(t)| ~ t^gamma exp(-beta t^2)`; infinite when the
    /// transform reaches the noise floor before a tail can be fitted.
    pub beta: f64,
    pub cutoff: f64,
}

fn check_uniform(x: &[f64], values: &[Complex64]) -> Result<f64> {
    if x.len() != values.len() || x.len() < 8 {
        return Err(invalid("grid samples need matching lengths and at least 8 points"));
    }
    if x.iter().any(|v| !v.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(invalid("grid samples must be finite"));
    }
    let dx = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    if !(dx > 0.0) || x.windows(2).any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx) {
        return Err(invalid("grid samples must lie on an increasing uniform grid"));
    }
    Ok(dx)
}

/// Trapezoid transform of sampled data at `±t`, returning `(F~(t), F~(-t))`.
fn sampled_transform(x: &[f64], values: &[Complex64], dx: f64, t: f64) -> (Complex64, Complex64) {
    let last = x.len() - 1;
    let mut c = Complex64::new(0.0, 0.0);
    let mut s = Complex64::new(0.0, 0.0);
    for (j, (&xj, &fj)) in x.iter().zip(values).enumerate() {
        let w = if j == 0 || j == last { 0.5 * dx } else { dx };
        let (sin, cos) = (xj * t).sin_cos();
        c += fj * (w * cos);
        s += fj * (w * sin);
    }
    let i = Complex64::new(0.0, 1.0);
    (c + i * s, c - i * s)
}

const SAMPLED_DT: f64 = 0.01;

fn sampled_table(x: &[f64], values: &[Complex64], dx: f64) -> (Vec<f64>, Vec<(Complex64, Complex64)>) {
    let t_max = (PI / dx).min(40.0);
    let steps = (t_max / SAMPLED_DT).floor() as usize;
    let ts: Vec<f64> = (0..=steps).map(|j| j as f64 * SAMPLED_DT).collect();
    let vals = ts.iter().map(|&t| sampled_transform(x, values, dx, t)).collect();
    (ts, vals)
}

/// Fits `ln |F~| = c + gamma ln t - beta t^2` over the upper half of the
/// range where the transform stands clear of the rounding floor.
pub fn fit_decay(x: &[f64], values: &[Complex64]) -> Result<DecayFit> {
    let dx = check_uniform(x, values)?;
    let (ts, vals) = sampled_table(x, values, dx);
    Ok(fit_table(x, values, dx, &ts, &vals))
}

fn fit_table(
    _x: &[f64],
    values: &[Complex64],
    dx: f64,
    ts: &[f64],
    vals: &[(Complex64, Complex64)],
) -> DecayFit {
    let floor = 1e-13 * values.iter().map(|v| v.norm()).sum::<f64>() * dx;
    let mags: Vec<f64> = vals.iter().map(|(a, b)| a.norm().max(b.norm())).collect();
    let last = mags.iter().rposition(|&m| m > 1e3 * floor);
    let Some(last) = last else {
        return DecayFit { beta: f64::INFINITY, cutoff: 0.0 };
    };
    let cutoff = ts[last];
    let first = last / 2;
    let idx: Vec<usize> = (first.max(1)..=last).filter(|&j| mags[j] > 0.0).collect();
    if idx.len() < 10 || last + 1 == ts.len() && cutoff < 4.0 {
        return DecayFit {
            beta: if last + 1 == ts.len() { 0.0 } else { f64::INFINITY },
            cutoff,
        };
    }
    // least squares on columns [1, ln t, -t^2]
    let rows = idx.len();
    let a = nalgebra::DMatrix::from_fn(rows, 3, |r, c| {
        let t = ts[idx[r]];
        match c {
            0 => 1.0,
            1 => t.ln(),
            _ => -t * t,
        }
    });
    let b = nalgebra::DVector::from_fn(rows, |r, _| mags[idx[r]].ln());
    let beta = match a.clone().svd(true, true).solve(&b, 1e-12) {
        Ok(sol) => sol[2],
        Err(_) => 0.0,
    };
    DecayFit { beta, cutoff }
}

fn eval_sampled(density: &RhoDensity, x: &[f64], values: &[Complex64]) -> Result<Complex64> {
    let dx = check_uniform(x, values)?;
    let (ts, vals) = sampled_table(x, values, dx);
    let fit = fit_table(x, values, dx, &ts, &vals);
    if fit.beta < ADMISSIBLE_DECAY {
        return Err(Error::Inadmissible(format!(
            "transform decays like exp(-{:.4} t^2), slower than the required exp(-{ADMISSIBLE_DECAY} t^2)",
            fit.beta
        )));
    }
    // Simpson on [0, cutoff] over an even number of intervals
    let mut n = ((fit.cutoff / SAMPLED_DT).round() as usize).min(ts.len() - 1);
    if n % 2 == 1 {
        n += if n < ts.len() - 1 { 1 } else { 0 };
        if n % 2 == 1 {
            n -= 1;
        }
    }
    if n < 2 {
        n = 2.min(ts.len() - 1);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=n {
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let t = ts[j];
        let (fp, fm) = vals[j];
        acc += (fp + fm) * (w * density.eval(t));
    }
    Ok(acc * (SAMPLED_DT / 3.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub n: usize,
    pub k: usize,
    #[serde(serialize_with = "as_string")]
    pub lhs: f64,
    #[serde(serialize_with = "as_string")]
    pub rhs: f64,
    #[serde(serialize_with = "as_string")]
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub suite: String,
    pub alphas: Vec<f64>,
    pub n_max: usize,
    #[serde(serialize_with = "as_string")]
    pub max_residual: f64,
    pub entries: Vec<MomentEntry>,
    pub certificates: Vec<InverseCertificate>,
}

impl MomentReport {
    fn new(suite: &str, alphas: &[f64], n_max: usize, entries: Vec<MomentEntry>) -> Self {
        let max_residual = entries.iter().map(|e| e.residual).fold(0.0, f64::max);
        MomentReport {
            suite: suite.into(),
            alphas: alphas.to_vec(),
            n_max,
            max_residual,
            entries,
            certificates: Vec::new(),
        }
    }

    pub fn entry(&self, n: usize, k: usize) -> Option<&MomentEntry> {
        self.entries.iter().find(|e| e.n == n && e.k == k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Compares `a_n a_k ∫ omega_xi(x) exp(-|z|^2) conj(z)^n z^k dx dy` with `S_nk`
/// for `n, k <= n_max`, the integral by a tensor Gauss–Hermite rule that is
/// exact for the polynomial integrand.
pub fn moment_check_xi(alphas: &[f64], n_max: usize) -> Result<MomentReport> {
    if n_max > XI_MOMENT_MAX {
        return Err(invalid(format!("n_max must be at most {XI_MOMENT_MAX}, got {n_max}")));
    }
    let f = poly_from_alphas(alphas)?;
    let omega = solve_omega_xi(&f)?;
    let deg = f.degree();
    let s = s_matrix(&f, n_max.max(deg))?;
    let rule = gauss_hermite(n_max + deg / 2 + 8)?;
    let dim = n_max + 1;
    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut zp = vec![Complex64::new(0.0, 0.0); dim];
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        let wox = wx * omega.eval(x);
        for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let z = Complex64::new(x, y);
            // a_k z^k built incrementally
            zp[0] = Complex64::new(1.0, 0.0);
            for j in 1..dim {
                zp[j] = zp[j - 1] * z / (j as f64).sqrt();
            }
            let w = wox * wy;
            for n in 0..dim {
                let left = zp[n].conj() * w;
                for k in 0..dim {
                    acc[n * dim + k] += left * zp[k];
                }
            }
        }
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for n in 0..dim {
        for k in 0..dim {
            let lhs = acc[n * dim + k];
            let rhs = s.get(n, k);
            entries.push(MomentEntry {
                n,
                k,
                lhs: lhs.re,
                rhs,
                residual: (lhs - rhs).norm(),
            });
        }
    }
    Ok(MomentReport::new("moment-xi", alphas, n_max, entries))
}

/// Compares `a_n a_k omega_rho(F_nk)` with the certified block of `S^-1`.
pub fn moment_check_rho(alphas: &[f64], n_max: usize) -> Result<MomentReport> {
    if n_max > RHO_MOMENT_MAX {
        return Err(invalid(format!("n_max must be at most {RHO_MOMENT_MAX}, got {n_max}")));
    }
    let density = build_rho_density(alphas)?;
    let inverse = s_inverse_block(alphas, n_max + 1, 1e-6)?;
    let a: Vec<f64> = (0..=n_max)
        .scan(1.0, |acc, j| {
            if j > 0 {
                *acc /= (j as f64).sqrt();
            }
            Some(*acc)
        })
        .collect();
    let mut entries = Vec::new();
    for n in 0..=n_max {
        for k in 0..=n_max {
            let value = eval_functional_rho(&density, &TestFunction::HermiteGaussian { n, k })?;
            let lhs = a[n] * a[k] * value.re;
            let rhs = inverse.block[(n, k)];
            entries.push(MomentEntry {
                n,
                k,
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            });
        }
    }
    let mut report = MomentReport::new("moment-rho", alphas, n_max, entries);
    report.certificates.push(inverse.certificate);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// `sqrt(2 pi) e^2 erfc(sqrt 2)`.
    const RHO_00_ALPHA_1: f64 = 0.842_738_458_576_108_4;

    /// Inverse heat flow: `g = sum_j (-1/8)^j D^{2j} f / j!`.
    fn heat_inverse(f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::constant(0.0);
        let mut d = f.clone();
        let mut c = 1.0;
        let mut j = 0;
        loop {
            out = out.add(&d.scale(c));
            d = d.derivative().derivative();
            j += 1;
            c *= -0.125 / j as f64;
            if d.degree() == 0 && d.coeff(0) == 0.0 {
                break;
            }
        }
        out
    }

    #[test]
    fn omega_xi_examples() {
        let w = solve_omega_xi(&Polynomial::constant(1.0)).unwrap();
        assert_relative_eq!(w.poly().coeff(0), 1.0 / PI, max_relative = 1e-15);
        assert_eq!(w.poly().degree(), 0);

        let w = solve_omega_xi(&poly_from_alphas(&[1.0]).unwrap()).unwrap();
        let expect = [0.75 / PI, 0.0, 1.0 / PI];
        for (c, e) in w.poly().coeffs().iter().zip(expect) {
            assert!((c - e).abs() < 1e-15);
        }

        let w = solve_omega_xi(&poly_from_alphas(&[1.0, 2.0]).unwrap()).unwrap();
        let expect = [47.0 / 16.0 / PI, 0.0, 3.5 / PI, 0.0, 1.0 / PI];
        for (c, e) in w.poly().coeffs().iter().zip(expect) {
            assert!((c - e).abs() < 1e-14);
        }
    }

    #[test]
    fn omega_xi_matches_heat_inverse() {
        for alphas in [vec![0.7, 1.3, 2.1], vec![0.3, 0.9, 1.1, 4.0]] {
            let f = poly_from_alphas(&alphas).unwrap();
            let w = solve_omega_xi(&f).unwrap();
            let oracle = heat_inverse(&f).scale(1.0 / PI);
            for k in 0..=f.degree() {
                let scale = oracle.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
                assert!((w.poly().coeff(k) - oracle.coeff(k)).abs() <= 1e-13 * scale);
            }
            assert!(w.poly().is_even());
            assert_relative_eq!(w.poly().leading(), 1.0 / PI, max_relative = 1e-15);
            let ps: Vec<f64> = (0..20).map(|j| -3.0 + 0.3 * j as f64).collect();
            let res = w.smoothing_residuals(&f, &ps).unwrap();
            assert!(res.iter().all(|r| *r <= 1e-10), "{res:?}");
        }
    }

    #[test]
    fn omega_xi_sign() {
        let w = solve_omega_xi(&poly_from_alphas(&[1.0]).unwrap()).unwrap();
        assert_eq!(w.sign(), DensitySign::Positive);
        // small alphas push omega_xi negative near zero: x^2 + 0.01 gives x^2 - 0.24
        let w = solve_omega_xi(&poly_from_alphas(&[0.1]).unwrap()).unwrap();
        assert_eq!(w.sign(), DensitySign::Signed);
        assert!(solve_omega_xi(&Polynomial::new(vec![1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn rho_density_examples() {
        let d = build_rho_density(&[1.0]).unwrap();
        assert_relative_eq!(d.eval(0.0), 1.0 / (2.0 * PI), max_relative = 1e-15);
        let t = 1.7f64;
        assert_relative_eq!(
            d.eval(t),
            (-t + t * t / 8.0).exp() / (2.0 * PI),
            max_relative = 1e-14
        );
        let d = build_rho_density(&[1.0, 2.0]).unwrap();
        assert_relative_eq!(d.fractions().residues()[0], 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn ff_examples() {
        let d = build_rho_density(&[1.0]).unwrap();
        let r = verify_ff(&d, &[0.0]).unwrap();
        assert!((r.entries[0].value - 1.0).abs() <= 1e-12);
        let d = build_rho_density(&[1.0, 2.0]).unwrap();
        let r = verify_ff(&d, &[0.0]).unwrap();
        assert!((r.entries[0].value - 0.25).abs() <= 1e-12);
        let ps: Vec<f64> = (0..=100).map(|j| -5.0 + 0.1 * j as f64).collect();
        for alphas in [vec![1.0], vec![1.0, 2.0], vec![0.7, 1.3, 2.1]] {
            let r = verify_ff(&build_rho_density(&alphas).unwrap(), &ps).unwrap();
            assert!(r.max_residual <= 1e-10, "{alphas:?}: {}", r.max_residual);
        }
        let r = verify_ff(&d, &[50.0]).unwrap();
        assert!(r.entries[0].value <= r.entries[0].target + 1e-10);
    }

    #[test]
    fn reduced_polynomial_matches_quadrature() {
        let rule = gauss_hermite(40).unwrap();
        for n in 0..=10usize {
            for k in 0..=10usize {
                let p = reduced_polynomial(n, k);
                for x in [-1.5, 0.0, 0.4, 2.0] {
                    let direct = rule.integrate_complex(|y| {
                        let z = Complex64::new(x, y);
                        z.conj().powu(n as u32) * z.powu(k as u32)
                    });
                    let v = p.eval(x);
                    let scale = 1.0 + direct.norm();
                    assert!((direct - v).norm() <= 1e-10 * scale, "({n},{k}) at {x}");
                }
            }
        }
        let (a, b) = (reduced_polynomial(2, 3), reduced_polynomial(3, 2));
        for j in 0..=5 {
            assert!((a.coeff(j) - b.coeff(j)).abs() <= 1e-15);
        }
    }

    #[test]
    fn functional_examples() {
        let d = build_rho_density(&[1.0]).unwrap();
        let v = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n: 0, k: 0 }).unwrap();
        assert!((v.re - RHO_00_ALPHA_1).abs() <= 1e-12);
        assert_eq!(v.im, 0.0);
        let v = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n: 0, k: 1 }).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn functional_properties() {
        let d = build_rho_density(&[1.0, 2.0]).unwrap();
        for n in 0..=8 {
            for k in 0..=8 {
                let a = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n, k }).unwrap();
                let b = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n: k, k: n }).unwrap();
                assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
            }
            let v = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n, k: n }).unwrap();
            assert!(v.re > 0.0);
        }
    }

    #[test]
    fn sampled_functional_matches_closed_form() {
        let d = build_rho_density(&[1.0]).unwrap();
        let x: Vec<f64> = (0..1001).map(|j| -10.0 + 0.02 * j as f64).collect();
        for (n, k) in [(0usize, 0usize), (1, 1), (2, 0)] {
            let p = reduced_polynomial(n, k);
            let values: Vec<Complex64> = x
                .iter()
                .map(|&x| Complex64::new((-x * x).exp() * p.eval(x), 0.0))
                .collect();
            let sampled = eval_functional_rho(&d, &TestFunction::GridSamples { x: x.clone(), values }).unwrap();
            let exact = eval_functional_rho(&d, &TestFunction::HermiteGaussian { n, k }).unwrap();
            assert!((sampled - exact).norm() <= 1e-7, "({n},{k}) {sampled} vs {exact}");
        }
    }

    #[test]
    fn slow_decay_is_inadmissible() {
        let d = build_rho_density(&[1.0]).unwrap();
        let x: Vec<f64> = (0..2001).map(|j| -20.0 + 0.02 * j as f64).collect();
        // transform exp(-t^2 / 20) decays slower than exp(-t^2 / 8)
        let values: Vec<Complex64> = x.iter().map(|&x| Complex64::new((-5.0 * x * x).exp(), 0.0)).collect();
        let fit = fit_decay(&x, &values).unwrap();
        assert!((fit.beta - 0.05).abs() < 0.01, "{fit:?}");
        assert!(matches!(
            eval_functional_rho(&d, &TestFunction::GridSamples { x, values }),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn membership_flags() {
        assert_eq!(TestFunction::HermiteGaussian { n: 0, k: 0 }.membership(), Membership::Satisfied);
        // P_11 = x^2 + 1/2 times sqrt(pi) has no real zero
        assert_eq!(TestFunction::HermiteGaussian { n: 1, k: 1 }.membership(), Membership::Satisfied);
        // P_01 = sqrt(pi) x vanishes at 0
        assert_eq!(TestFunction::HermiteGaussian { n: 0, k: 1 }.membership(), Membership::Unknown);
    }

    #[test]
    fn moment_xi_examples() {
        let r = moment_check_xi(&[1.0], 4).unwrap();
        assert!((r.entry(0, 0).unwrap().lhs - 1.25).abs() <= 1e-13);
        assert!(r.entry(0, 1).unwrap().lhs.abs() <= 1e-14);
        let r = moment_check_xi(&[1.0, 2.0], 10).unwrap();
        assert!(r.max_residual <= 1e-9, "{}", r.max_residual);
        assert!(moment_check_xi(&[1.0], 31).is_err());
    }

    #[test]
    fn moment_rho_examples() {
        let r = moment_check_rho(&[1.0], 2).unwrap();
        let e = r.entry(0, 0).unwrap();
        assert!((e.lhs - RHO_00_ALPHA_1).abs() <= 1e-12);
        assert!(e.residual <= 1e-4);
        assert_eq!(r.entry(0, 1).unwrap().lhs, 0.0);
        assert!(r.entry(1, 1).unwrap().residual <= 1e-4);
        assert_eq!(r.certificates.len(), 1);
        assert!(moment_check_rho(&[1.0], 13).is_err());
    }
}
