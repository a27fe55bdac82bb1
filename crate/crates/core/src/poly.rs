use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Real polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// True when every odd-degree coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// For an even polynomial `f(x) = g(x^2)`, returns `g`.
    pub fn even_part_in_square(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().step_by(2).copied().collect())
    }

    /// Complex roots from the companion-matrix eigenvalues.
    pub fn roots(&self) -> Vec<Complex64> {
        let d = self.degree();
        if d == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }

    /// Strict positivity on the whole real line for an even polynomial,
    /// decided through the roots of `g` with `f(x) = g(x^2)`.
    pub fn is_strictly_positive_even(&self) -> bool {
        if !self.is_even() || self.leading() <= 0.0 || self.coeff(0) <= 0.0 {
            return false;
        }
        let g = self.even_part_in_square();
        let scale = g.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        g.roots().iter().all(|r| {
            let real_nonneg = r.re >= 0.0;
            let on_axis = r.im.abs() <= 1e-9 * (1.0 + r.re.abs()) * scale.max(1.0);
            !(real_nonneg && on_axis)
        })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}
