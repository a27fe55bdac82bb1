//! Free-particle states that can be differentiated exactly in `x`.
//!
//! Differential operators such as the Crum intertwiner need `psi, psi', ...,
//! psi^(N)` pointwise. Every state here knows its own derivatives, so no
//! numerical differentiation is involved when they are fed through those
//! operators.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::basis::{ground_peak, position_amplitudes};

pub trait AnalyticState {
    /// `out[m]` is the `m`-th `x`-derivative at `x`, for `m = 0..=order`.
    fn derivatives(&self, x: f64, order: usize) -> Vec<Complex64>;

    fn sample(&self, xs: &[f64]) -> Vec<Complex64> {
        xs.iter().map(|&x| self.derivatives(x, 0)[0]).collect()
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `sum_n c_n psi_n(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisExpansion {
    coeffs: Vec<Complex64>,
    t: f64,
}

impl BasisExpansion {
    pub fn new(coeffs: Vec<Complex64>, t: f64) -> Self {
        BasisExpansion { coeffs, t }
    }

    pub fn basis(n: usize, t: f64) -> Self {
        let mut coeffs = vec![zero(); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        BasisExpansion { coeffs, t }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Coefficients of `-d^2/dx^2` applied to this state, i.e. of `P^2 c`.
    pub fn free_hamiltonian(&self) -> BasisExpansion {
        let d2 = times_ip(&times_ip(&self.coeffs));
        BasisExpansion {
            coeffs: d2.into_iter().map(|c| -c).collect(),
            t: self.t,
        }
    }
}

/// `d/dx` on coefficients: multiplication by `i P`, one entry longer.
fn times_ip(c: &[Complex64]) -> Vec<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let mut out = vec![zero(); c.len() + 1];
    for (n, v) in c.iter().enumerate() {
        out[n + 1] += v * (0.5 * ((n + 1) as f64).sqrt()) * i;
        if n >= 1 {
            out[n - 1] += v * (0.5 * (n as f64).sqrt()) * i;
        }
    }
    out
}

impl AnalyticState for BasisExpansion {
    fn derivatives(&self, x: f64, order: usize) -> Vec<Complex64> {
        let amps = position_amplitudes(self.coeffs.len() + order, x, self.t);
        let mut current = self.coeffs.clone();
        let mut out = Vec::with_capacity(order + 1);
        for m in 0..=order {
            if m > 0 {
                current = times_ip(&current);
            }
            out.push(current.iter().zip(&amps).map(|(c, a)| c * a).sum());
        }
        out
    }
}

/// `amp * exp(q2 x^2 + q1 x + q0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpQuadratic {
    pub amp: Complex64,
    pub q2: Complex64,
    pub q1: Complex64,
    pub q0: Complex64,
}

impl ExpQuadratic {
    fn derivatives_into(&self, x: f64, out: &mut [Complex64]) {
        let g = self.amp * (self.q2 * x * x + self.q1 * x + self.q0).exp();
        let slope = self.q2 * (2.0 * x) + self.q1;
        let curv = self.q2 * 2.0;
        let mut prev = zero();
        let mut cur = g;
        for (m, slot) in out.iter_mut().enumerate() {
            *slot += cur;
            // g^(m+1) = Q' g^(m) + m Q'' g^(m-1)
            let next = slope * cur + curv * (m as f64) * prev;
            prev = cur;
            cur = next;
        }
    }
}

/// Finite sum of [`ExpQuadratic`] terms: displaced Gaussians, plane waves,
/// hyperbolic functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpQuadraticSum {
    pub terms: Vec<ExpQuadratic>,
}

impl ExpQuadraticSum {
    /// Free coherent state `psi_z(x, t)`.
    pub fn coherent(z: Complex64, t: f64) -> Self {
        let s = Complex64::new(1.0, t);
        let phi = (-0.5 * z.norm_sqr()).exp();
        let amp = (2.0 * PI).powf(-0.5) * ground_peak() * phi * (PI / s).sqrt();
        let i = Complex64::new(0.0, 1.0);
        ExpQuadraticSum {
            terms: vec![ExpQuadratic {
                amp,
                q2: -1.0 / (4.0 * s),
                q1: i * z / s,
                q0: z * z * (1.0 / s - 0.5),
            }],
        }
    }

    /// `(2 pi)^{-1/2} exp(i p x - i p^2 t)`, delta-normalized in `p`.
    pub fn plane_wave(p: f64, t: f64) -> Self {
        ExpQuadraticSum {
            terms: vec![ExpQuadratic {
                amp: Complex64::new((2.0 * PI).powf(-0.5), 0.0),
                q2: zero(),
                q1: Complex64::new(0.0, p),
                q0: Complex64::new(0.0, -p * p * t),
            }],
        }
    }

    /// `cosh(a x + c)` or `sinh(a x + c)`.
    pub fn hyperbolic(a: f64, c: f64, odd: bool) -> Self {
        let sign = if odd { -1.0 } else { 1.0 };
        let term = |amp: f64, slope: f64, shift: f64| ExpQuadratic {
            amp: Complex64::new(amp, 0.0),
            q2: zero(),
            q1: Complex64::new(slope, 0.0),
            q0: Complex64::new(shift, 0.0),
        };
        ExpQuadraticSum {
            terms: vec![term(0.5, a, c), term(0.5 * sign, -a, -c)],
        }
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        for t in &mut self.terms {
            t.amp *= s;
        }
        self
    }
}

impl AnalyticState for ExpQuadraticSum {
    fn derivatives(&self, x: f64, order: usize) -> Vec<Complex64> {
        let mut out = vec![zero(); order + 1];
        for term in &self.terms {
            term.derivatives_into(x, &mut out);
        }
        out
    }
}

/// `∫ c(p) psi_p(x, t) dp` discretized on a fixed momentum rule, with
/// `psi_p(x, t) = (2 pi)^{-1/2} exp(i p x - i p^2 t)`. The momentum
/// wavefunction at time `t` is `c(p) exp(-i p^2 t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumSynthesis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    pub t: f64,
}

impl MomentumSynthesis {
    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.coeffs)
            .map(|(w, c)| w * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl AnalyticState for MomentumSynthesis {
    fn derivatives(&self, x: f64, order: usize) -> Vec<Complex64> {
        let norm = (2.0 * PI).powf(-0.5);
        let mut out = vec![zero(); order + 1];
        for ((&p, &w), &c) in self.nodes.iter().zip(&self.weights).zip(&self.coeffs) {
            let mut v = c * w * norm * Complex64::from_polar(1.0, p * x - p * p * self.t);
            let ip = Complex64::new(0.0, p);
            for slot in out.iter_mut() {
                *slot += v;
                v *= ip;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{basis_momentum, basis_position};
    use crate::quadrature::trapezoid_decaying;

    #[test]
    fn basis_derivative_matches_closed_form() {
        // psi_0(x) = (2 pi)^{-1/4} exp(-x^2/4): psi_0' = -x/2 psi_0
        let s = BasisExpansion::basis(0, 0.0);
        for x in [-1.0, 0.3, 2.0] {
            let d = s.derivatives(x, 2);
            let g = (2.0 * PI).powf(-0.25) * (-x * x / 4.0).exp();
            assert!((d[0].re - g).abs() < 1e-15);
            assert!((d[1].re + 0.5 * x * g).abs() < 1e-15);
            assert!((d[2].re - (0.25 * x * x - 0.5) * g).abs() < 1e-15);
        }
    }

    #[test]
    fn basis_derivative_matches_finite_difference_in_time() {
        let s = BasisExpansion::basis(3, 0.7);
        let h = 1e-4;
        for x in [-1.2, 0.4] {
            let d = s.derivatives(x, 1);
            let fd = (basis_position(3, &[x + h], 0.7)[0] - basis_position(3, &[x - h], 0.7)[0]) / (2.0 * h);
            assert!((d[1] - fd).norm() < 1e-7);
        }
    }

    #[test]
    fn coherent_matches_series() {
        let z = Complex64::new(0.7, -0.4);
        let t = 0.3;
        let psi = ExpQuadraticSum::coherent(z, t);
        let phi = (-0.5 * z.norm_sqr()).exp();
        let mut coeffs = Vec::new();
        let mut a = Complex64::new(phi, 0.0);
        for n in 0..40 {
            if n > 0 {
                a *= z / (n as f64).sqrt();
            }
            coeffs.push(a);
        }
        let series = BasisExpansion::new(coeffs, t);
        for x in [-2.0, 0.0, 1.5] {
            let a = psi.derivatives(x, 3);
            let b = series.derivatives(x, 3);
            for m in 0..=3 {
                assert!((a[m] - b[m]).norm() < 1e-13, "m={m} x={x}");
            }
        }
    }

    #[test]
    fn hyperbolic_derivatives() {
        let u = ExpQuadraticSum::hyperbolic(2.0, 0.5, true);
        let x = 0.3;
        let d = u.derivatives(x, 2);
        let arg = 2.0 * x + 0.5;
        assert!((d[0].re - arg.sinh()).abs() < 1e-14);
        assert!((d[1].re - 2.0 * arg.cosh()).abs() < 1e-14);
        assert!((d[2].re - 4.0 * arg.sinh()).abs() < 1e-13);
    }

    #[test]
    fn synthesis_reproduces_basis_function() {
        let rule = trapezoid_decaying(-10.0, 10.0, 501).unwrap();
        let coeffs = basis_momentum(2, &rule.nodes, 0.0);
        let s = MomentumSynthesis {
            nodes: rule.nodes.clone(),
            weights: rule.weights.clone(),
            coeffs,
            t: 0.2,
        };
        assert!((s.norm() - 1.0).abs() < 1e-13);
        let exact = BasisExpansion::basis(2, 0.2);
        for x in [-3.0, 0.0, 0.8] {
            let a = s.derivatives(x, 2);
            let b = exact.derivatives(x, 2);
            for m in 0..=2 {
                assert!((a[m] - b[m]).norm() < 1e-13);
            }
        }
    }
}
