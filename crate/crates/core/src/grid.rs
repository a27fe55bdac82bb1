//! Uniform spatial grids, trapezoid inner products, and differentiation of
//! sampled functions.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::quadrature::pairwise_sum_complex;

/// Fourier modes below this fraction of the largest one are treated as
/// rounding noise and dropped before differentiating.
pub const SPECTRAL_NOISE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    dx: f64,
    periodic: bool,
}

/// `min:max:points` as written on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid(format!("grid '{s}' is not of the form min:max:points")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad number '{p}' in grid '{s}'")))
        };
        let min = num(parts[0])?;
        let max = num(parts[1])?;
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("bad point count in grid '{s}'")))?;
        let spec = GridSpec { min, max, points };
        spec.validate()?;
        Ok(spec)
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() || !(self.max > self.min) {
            return Err(invalid("grid needs finite bounds with max > min"));
        }
        if self.points < 2 {
            return Err(invalid("grid needs at least two points"));
        }
        Ok(())
    }

    /// Points including both ends.
    pub fn linspace(&self) -> Result<Grid> {
        Grid::linspace(self.min, self.max, self.points)
    }

    /// Points on `[min, max)`; the right end is identified with the left.
    pub fn periodic(&self) -> Result<Grid> {
        Grid::periodic(self.min, self.max, self.points)
    }
}

impl Grid {
    pub fn linspace(min: f64, max: f64, points: usize) -> Result<Grid> {
        GridSpec { min, max, points }.validate()?;
        let last = (points - 1) as f64;
        let dx = (max - min) / last;
        // interpolate rather than accumulate so the ends and the midpoint are exact
        let points = (0..points)
            .map(|j| min + (max - min) * (j as f64 / last))
            .collect();
        Ok(Grid { points, dx, periodic: false })
    }

    pub fn periodic(min: f64, max: f64, points: usize) -> Result<Grid> {
        GridSpec { min, max, points }.validate()?;
        let dx = (max - min) / points as f64;
        let points = (0..points).map(|j| min + dx * j as f64).collect();
        Ok(Grid { points, dx, periodic: true })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    fn weight(&self, j: usize) -> f64 {
        if !self.periodic && (j == 0 || j + 1 == self.points.len()) {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    /// `∫ conj(a) b dx` by the trapezoid rule.
    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let terms: Vec<Complex64> = a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(j, (x, y))| x.conj() * y * self.weight(j))
            .collect();
        pairwise_sum_complex(&terms)
    }

    pub fn norm(&self, a: &[Complex64]) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// `m`-th derivative by FFT. Only meaningful on periodic grids, or for
    /// functions that have decayed to rounding level at both ends.
    pub fn spectral_derivative(&self, samples: &[Complex64], order: usize) -> Result<Vec<Complex64>> {
        let n = self.points.len();
        if samples.len() != n {
            return Err(invalid("sample count does not match the grid"));
        }
        if order == 0 {
            return Ok(samples.to_vec());
        }
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut buf = samples.to_vec();
        forward.process(&mut buf);
        let peak = buf.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let length = self.dx * n as f64;
        for (j, c) in buf.iter_mut().enumerate() {
            // signed mode index; the Nyquist mode of an even grid has no
            // well-defined derivative and is dropped
            let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            if (n % 2 == 0 && j == n / 2) || c.norm() < SPECTRAL_NOISE_FLOOR * peak {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, 2.0 * PI * k / length);
            *c *= ik.powu(order as u32);
        }
        inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        Ok(buf.into_iter().map(|c| c * scale).collect())
    }

    /// Second derivative by the 8th-order central stencil. The four points at
    /// each end are left as NaN.
    pub fn fd_second_derivative(&self, samples: &[Complex64]) -> Vec<Complex64> {
        const C: [f64; 5] = [
            -205.0 / 72.0,
            8.0 / 5.0,
            -1.0 / 5.0,
            8.0 / 315.0,
            -1.0 / 560.0,
        ];
        let n = samples.len();
        let h2 = self.dx * self.dx;
        let nan = Complex64::new(f64::NAN, f64::NAN);
        (0..n)
            .map(|j| {
                if j < 4 || j + 4 >= n {
                    return nan;
                }
                let mut acc = samples[j] * C[0];
                for (s, c) in C.iter().enumerate().skip(1) {
                    acc += (samples[j - s] + samples[j + s]) * *c;
                }
                acc / h2
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn parse_grid() {
        let g: GridSpec = "-10:10:401".parse().unwrap();
        assert_eq!(g, GridSpec { min: -10.0, max: 10.0, points: 401 });
        let grid = g.linspace().unwrap();
        assert_eq!(grid.points()[200], 0.0);
        assert!("1:0:5".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("0:1:1".parse::<GridSpec>().is_err());
        assert_eq!(g.to_string(), "-10:10:401");
    }

    #[test]
    fn trapezoid_gaussian_norm() {
        let grid = Grid::periodic(-20.0, 20.0, 1024).unwrap();
        let f: Vec<Complex64> = grid.points().iter().map(|&x| c((-x * x / 2.0).exp())).collect();
        assert!((grid.inner(&f, &f).re - PI.sqrt()).abs() < 1e-13);
        let grid = Grid::linspace(-20.0, 20.0, 1025).unwrap();
        let f: Vec<Complex64> = grid.points().iter().map(|&x| c((-x * x / 2.0).exp())).collect();
        assert!((grid.inner(&f, &f).re - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn spectral_derivatives_of_gaussian() {
        let grid = Grid::periodic(-20.0, 20.0, 512).unwrap();
        let f: Vec<Complex64> = grid.points().iter().map(|&x| c((-x * x).exp())).collect();
        let d2 = grid.spectral_derivative(&f, 2).unwrap();
        for (x, v) in grid.points().iter().zip(&d2) {
            let exact = (4.0 * x * x - 2.0) * (-x * x).exp();
            assert!((v.re - exact).abs() < 1e-11, "{x}");
        }
        let d4 = grid.spectral_derivative(&f, 4).unwrap();
        for (x, v) in grid.points().iter().zip(&d4) {
            let x2 = x * x;
            let exact = (16.0 * x2 * x2 - 48.0 * x2 + 12.0) * (-x2).exp();
            assert!((v.re - exact).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn finite_difference_of_plane_wave() {
        let grid = Grid::linspace(-5.0, 5.0, 1001).unwrap();
        let p = 2.0;
        let f: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| Complex64::from_polar(1.0, p * x))
            .collect();
        let d2 = grid.fd_second_derivative(&f);
        assert!(d2[0].re.is_nan());
        for j in 4..997 {
            assert!((d2[j] + f[j] * (p * p)).norm() < 1e-9);
        }
    }
}
