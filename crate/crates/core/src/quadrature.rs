//! Quadrature rules and summation helpers shared by every numerical module.
//!
//! Gauss–Hermite nodes are Jacobi-matrix eigenvalues polished by Newton
//! iteration on the orthonormal Hermite recurrence, which stays finite for
//! orders up to a few hundred.
//! Sums go through [`pairwise_sum`] so results do not depend on evaluation
//! order beyond the fixed binary split.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

pub const MAX_GAUSS_HERMITE_ORDER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Weight `exp(-x^2)` on the real line.
    GaussHermite,
    /// Unit weight on a finite interval.
    GaussLegendre,
    /// Uniform trapezoid for integrands that vanish at both ends.
    TrapezoidDecaying,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_i w_i f(x_i)`. For Gauss–Hermite the weight function is implied.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let terms: Vec<Complex64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .collect();
        pairwise_sum_complex(&terms)
    }
}

/// Gauss–Hermite rule of the given order for `∫ f(x) exp(-x^2) dx`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_GAUSS_HERMITE_ORDER {
        return Err(invalid(format!(
            "Gauss-Hermite order must lie in 1..={MAX_GAUSS_HERMITE_ORDER}, got {order}"
        )));
    }
    if order == 1 {
        return Ok(QuadratureRule {
            nodes: vec![0.0],
            weights: vec![PI.sqrt()],
            kind: QuadratureKind::GaussHermite,
        });
    }

    let n = order;
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    // Eigenvalues of the Hermite Jacobi matrix seed Newton on each root.
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = guesses[i];
        let mut converged = false;
        for _ in 0..100 {
            let (pn, pn1) = orthonormal_hermite_pair(n, z, pim4);
            let step = pn / ((2.0 * nf).sqrt() * pn1);
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(format!(
                "Gauss-Hermite root {i} of order {n} did not converge"
            )));
        }
        let (_, pn1) = orthonormal_hermite_pair(n, z, pim4);
        let deriv = (2.0 * nf).sqrt() * pn1;
        nodes[i] = z;
        weights[i] = 2.0 / (deriv * deriv);
        nodes[n - 1 - i] = -z;
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[m - 1] = 0.0;
    }
    // ascending order
    nodes.reverse();
    weights.reverse();
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::GaussHermite,
    })
}

/// Values of the orthonormal Hermite polynomials of degree `n` and `n-1` at `x`.
fn orthonormal_hermite_pair(n: usize, x: f64, pim4: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = pim4;
    for j in 1..=n {
        let jf = j as f64;
        let next = x * (2.0 / jf).sqrt() * p - ((jf - 1.0) / jf).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(order: usize, a: f64, b: f64) -> QuadratureRule {
    let n = order.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let step = p1 / pp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = 2.0 * half / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::GaussLegendre,
    }
}

/// Uniform trapezoid on `[a, b]` with `points` nodes including both ends.
pub fn trapezoid_decaying(a: f64, b: f64, points: usize) -> Result<QuadratureRule> {
    if points < 2 || !(b > a) {
        return Err(invalid("trapezoid rule needs b > a and at least two points"));
    }
    let h = (b - a) / (points - 1) as f64;
    let nodes: Vec<f64> = (0..points).map(|j| a + h * j as f64).collect();
    let mut weights = vec![h; points];
    weights[0] *= 0.5;
    weights[points - 1] *= 0.5;
    Ok(QuadratureRule {
        nodes,
        weights,
        kind: QuadratureKind::TrapezoidDecaying,
    })
}

/// Integrate `f` over `[0, length]` with composite Gauss–Legendre panels,
/// halving the panel width until two successive estimates agree to
/// `rel_tol` relative or `abs_tol` absolute.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    length: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const ORDER: usize = 16;
    let base = gauss_legendre(ORDER, 0.0, 1.0);
    let estimate = |panels: usize| -> f64 {
        let width = length / panels as f64;
        let mut terms = Vec::with_capacity(panels * ORDER);
        for k in 0..panels {
            let start = width * k as f64;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                terms.push(w * width * f(start + width * x));
            }
        }
        pairwise_sum(&terms)
    };
    let mut panels = (length.ceil() as usize).max(4);
    let mut previous = estimate(panels);
    for _ in 0..8 {
        panels *= 2;
        let current = estimate(panels);
        let diff = (current - previous).abs();
        if diff <= rel_tol * current.abs() || diff <= abs_tol {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Convergence(format!(
        "panel quadrature on [0, {length}] did not settle"
    )))
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Gaussian moments ∫ x^k e^{-x²} dx, zero for odd k.
    fn gaussian_moment(k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        // Γ((k+1)/2) = (k-1)!! √π / 2^{k/2}
        let mut v = PI.sqrt();
        let mut j = 1;
        while j < k {
            v *= j as f64 / 2.0;
            j += 2;
        }
        v
    }

    #[test]
    fn order_one_and_two() {
        let r = gauss_hermite(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_relative_eq!(r.weights[0], PI.sqrt(), max_relative = 1e-15);
        let r = gauss_hermite(2).unwrap();
        assert_relative_eq!(r.nodes[1], 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(r.nodes[0], -(0.5f64.sqrt()), max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], PI.sqrt() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn fourth_moment_order_three() {
        let r = gauss_hermite(3).unwrap();
        let v = r.integrate(|x| x.powi(4));
        assert!((v - 3.0 * PI.sqrt() / 4.0).abs() <= 1e-14);
    }

    #[test]
    fn exactness_up_to_twice_order() {
        for order in [5, 20, 40, 80] {
            let r = gauss_hermite(order).unwrap();
            for k in (0..2 * order).step_by(2) {
                let exact = gaussian_moment(k);
                // scale by the moment of |x|^k, which bounds roundoff
                let v = r.integrate(|x| x.powi(k as i32));
                assert!(
                    ((v - exact) / exact).abs() <= 1e-12,
                    "order {order} k {k}: {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn large_order_is_finite_and_sums_to_sqrt_pi() {
        let r = gauss_hermite(200).unwrap();
        assert!(r.nodes.iter().all(|x| x.is_finite()));
        assert!(r.weights.iter().all(|w| *w > 0.0));
        assert_relative_eq!(r.integrate(|_| 1.0), PI.sqrt(), max_relative = 1e-13);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn order_out_of_range() {
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_hermite(201).is_err());
    }

    #[test]
    fn legendre_polynomial_exactness() {
        let r = gauss_legendre(8, 0.0, 2.0);
        let v = r.integrate(|x| x.powi(15));
        assert_relative_eq!(v, 2f64.powi(16) / 16.0, max_relative = 1e-13);
    }

    #[test]
    fn panels_integrate_exponential() {
        let v = integrate_panels(|t| (-t).exp() * (3.0 * t).cos(), 40.0, 1e-14, 0.0).unwrap();
        assert_relative_eq!(v, 1.0 / 10.0, max_relative = 1e-12);
    }
}
