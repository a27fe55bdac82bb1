//! Free-particle Hermite–Gaussian basis.
//!
//! The basis is fixed by the coherent-state kernel
//!
//! ```text
//! <p|psi_z> = (2/pi)^{1/4} Phi exp(-p^2 + 2 z p - z^2/2),   Phi = exp(-|z|^2/2)
//! ```
//!
//! with `|psi_z> = Phi sum_n a_n z^n |psi_n>` and `a_n = (n!)^{-1/2}`. Reading off
//! the Taylor coefficients in `z` gives
//! `psi_n(p) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) p) exp(-p^2)`, which is real.
//! The position representation is `psi(x) = (2 pi)^{-1/2} ∫ e^{ipx} psi(p) dp`, so
//! `p = -i d/dx`. Time evolution under `h0 = p^2` multiplies by `exp(-i p^2 t)`.
//!
//! With this phase choice `p psi_n = (sqrt(n+1) psi_{n+1} + sqrt(n) psi_{n-1}) / 2`,
//! i.e. the momentum Jacobi matrix has positive off-diagonal entries.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::banded::BandedSymmetricMatrix;
use crate::error::{invalid, Error, Result};

/// `(2/pi)^{1/4}`, the value of `psi_0(p = 0)`.
pub fn ground_peak() -> f64 {
    (2.0 / PI).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

/// One basis function `psi_n` in a given representation at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisElement {
    pub n: usize,
    pub representation: Representation,
    pub time: f64,
}

impl BasisElement {
    pub fn sample(&self, grid: &[f64]) -> Vec<Complex64> {
        match self.representation {
            Representation::Momentum => basis_momentum(self.n, grid, self.time),
            Representation::Position => basis_position(self.n, grid, self.time),
        }
    }
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite_eval(n: usize, u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::Range(format!("Hermite argument {u} is not finite")));
    }
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = 2.0 * u * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    if !cur.is_finite() {
        return Err(Error::Range(format!(
            "H_{n}({u}) overflows double precision"
        )));
    }
    Ok(cur)
}

/// `psi_0(p), ..., psi_{n_max}(p)` at `t = 0`, via the normalized recurrence
/// `psi_{n+1} = (2 p psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1)`.
pub fn momentum_amplitudes(n_max: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(ground_peak() * (-p * p).exp());
    if n_max >= 1 {
        out.push(2.0 * p * out[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 * p * out[n] - nf.sqrt() * out[n - 1]) / (nf + 1.0).sqrt();
        out.push(next);
    }
    out
}

/// Same recurrence without the Gaussian factor: `psi_n(p) = exp(-p^2) * parts[n]`.
#[cfg(test)]
pub(crate) fn momentum_polynomial_parts(n_max: usize, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(ground_peak());
    if n_max >= 1 {
        out.push(2.0 * p * out[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        out.push((2.0 * p * out[n] - nf.sqrt() * out[n - 1]) / (nf + 1.0).sqrt());
    }
    out
}

/// `psi_0(x, t), ..., psi_{n_max}(x, t)` in closed form.
///
/// Fourier-transforming the kernel gives, with `s = 1 + i t`,
/// `sum_n a_n z^n psi_n(x,t) = (2pi)^{-1/2} (2/pi)^{1/4} sqrt(pi/s)
///   exp(z^2 (1/s - 1/2) + i z x / s - x^2 / (4 s))`;
/// expanding in `z` yields a Hermite-type recurrence that only involves
/// `kappa^2 = (i t - 1) / (2 s)`, so no branch choice is needed.
pub fn position_amplitudes(n_max: usize, x: f64, t: f64) -> Vec<Complex64> {
    let s = Complex64::new(1.0, t);
    let kappa2 = Complex64::new(-1.0, t) / (2.0 * s);
    let ixs = Complex64::new(0.0, x) / s;
    let pref = (2.0 * PI).powf(-0.5) * ground_peak() * (PI / s).sqrt() * (-(x * x) / (4.0 * s)).exp();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(pref);
    if n_max >= 1 {
        out.push(ixs * pref);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (ixs * out[n] - 2.0 * nf.sqrt() * kappa2 * out[n - 1]) / (nf + 1.0).sqrt();
        out.push(next);
    }
    out
}

pub fn basis_momentum(n: usize, p_grid: &[f64], t: f64) -> Vec<Complex64> {
    p_grid
        .iter()
        .map(|&p| {
            let v = momentum_amplitudes(n, p)[n];
            Complex64::from_polar(v, -p * p * t)
        })
        .collect()
}

pub fn basis_position(n: usize, x_grid: &[f64], t: f64) -> Vec<Complex64> {
    x_grid
        .iter()
        .map(|&x| position_amplitudes(n, x, t)[n])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

/// Apply `a` or `a^+` to Fourier coefficients in the `psi_n` basis.
///
/// Raising returns one extra coefficient so nothing is truncated.
pub fn ladder_apply(direction: Ladder, coeffs: &[Complex64]) -> Vec<Complex64> {
    match direction {
        Ladder::Lower => {
            let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
            for n in 1..coeffs.len() {
                out[n - 1] = coeffs[n] * (n as f64).sqrt();
            }
            out
        }
        Ladder::Raise => {
            let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (n, c) in coeffs.iter().enumerate() {
                out[n + 1] = c * ((n + 1) as f64).sqrt();
            }
            out
        }
    }
}

/// Tridiagonal matrix of the momentum operator in the `psi_n` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiMatrix {
    off_diagonal: Vec<f64>,
}

impl JacobiMatrix {
    pub fn dim(&self) -> usize {
        self.off_diagonal.len() + 1
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi == lo + 1 && lo < self.off_diagonal.len() {
            self.off_diagonal[lo]
        } else {
            0.0
        }
    }

    /// The same operator under `p -> -p`.
    pub fn negated(&self) -> JacobiMatrix {
        JacobiMatrix {
            off_diagonal: self.off_diagonal.iter().map(|v| -v).collect(),
        }
    }

    /// Matrix-vector product; the input may be shorter than the dimension.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (n, c) in v.iter().enumerate().take(dim) {
            if n + 1 < dim {
                out[n + 1] += c * self.off_diagonal[n];
            }
            if n >= 1 {
                out[n - 1] += c * self.off_diagonal[n - 1];
            }
        }
        out
    }

    pub fn to_banded(&self) -> BandedSymmetricMatrix {
        let mut m = BandedSymmetricMatrix::zeros(self.dim(), 1);
        for (n, v) in self.off_diagonal.iter().enumerate() {
            m.set(n, n + 1, *v);
        }
        m
    }
}

/// `(n_max + 1) x (n_max + 1)` momentum matrix with entries `sqrt(n+1)/2`.
pub fn momentum_jacobi(n_max: usize) -> Result<JacobiMatrix> {
    if n_max < 1 {
        return Err(invalid("momentum_jacobi needs n_max >= 1"));
    }
    Ok(JacobiMatrix {
        off_diagonal: (0..n_max).map(|n| ((n + 1) as f64).sqrt() / 2.0).collect(),
    })
}

/// Nodes and weights for `∫ g(p) dp` when `g` carries a factor `exp(-2 p^2)`:
/// the returned weights multiply `g(p) * exp(2 p^2)`.
#[cfg(test)]
pub(crate) fn momentum_product_rule(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let gh = crate::quadrature::gauss_hermite(order)?;
    let r = std::f64::consts::SQRT_2;
    let nodes = gh.nodes.iter().map(|u| u / r).collect();
    let weights = gh.weights.iter().map(|w| w / r).collect();
    Ok((nodes, weights))
}
