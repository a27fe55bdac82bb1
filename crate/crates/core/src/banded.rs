//! Symmetric banded storage and a band Cholesky factorization.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Symmetric real matrix stored by diagonals: `diags[d][i] = A[i][i + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix {
    dim: usize,
    diags: Vec<Vec<f64>>,
}

impl BandedSymmetricMatrix {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bandwidth = bandwidth.min(dim.saturating_sub(1));
        let diags = (0..=bandwidth).map(|d| vec![0.0; dim - d]).collect();
        BandedSymmetricMatrix { dim, diags }
    }

    pub fn identity(dim: usize) -> Self {
        BandedSymmetricMatrix {
            dim,
            diags: vec![vec![1.0; dim]],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.diags.len() - 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d >= self.diags.len() || hi >= self.dim {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    /// Sets `A[i][j]` and `A[j][i]`. Panics when `|i - j|` exceeds the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.diags[hi - lo][lo] = value;
    }

    pub fn diagonal(&self, d: usize) -> &[f64] {
        &self.diags[d]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Leading `size x size` sub-matrix.
    pub fn leading(&self, size: usize) -> BandedSymmetricMatrix {
        let size = size.min(self.dim);
        let bw = self.bandwidth().min(size.saturating_sub(1));
        let diags = (0..=bw).map(|d| self.diags[d][..size - d].to_vec()).collect();
        BandedSymmetricMatrix { dim: size, diags }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let bw = self.bandwidth();
        (0..self.dim)
            .map(|i| {
                let lo = i.saturating_sub(bw);
                let hi = (i + bw).min(self.dim - 1);
                (lo..=hi).map(|j| self.get(i, j) * v[j]).sum()
            })
            .collect()
    }

    /// `self * other` for two symmetric banded matrices that commute, so the
    /// product is again symmetric (true for polynomials in one matrix).
    pub fn mul_commuting(&self, other: &BandedSymmetricMatrix) -> BandedSymmetricMatrix {
        assert_eq!(self.dim, other.dim);
        let (ba, bb) = (self.bandwidth(), other.bandwidth());
        let mut out = BandedSymmetricMatrix::zeros(self.dim, ba + bb);
        for d in 0..=out.bandwidth() {
            for i in 0..self.dim - d {
                let j = i + d;
                let lo = i.saturating_sub(ba).max(j.saturating_sub(bb));
                let hi = (i + ba).min(j + bb).min(self.dim - 1);
                let mut acc = 0.0;
                for k in lo..=hi {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.diags[d][i] = acc;
            }
        }
        out
    }

    pub fn add_scaled_identity(&mut self, c: f64) {
        for v in self.diags[0].iter_mut() {
            *v += c;
        }
    }

    pub fn band_cholesky(&self) -> Result<BandCholesky> {
        BandCholesky::factor(self)
    }
}

/// Lower band factor `L` with `A = L L^T`; `rows[i][d] = L[i][i - d]`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    dim: usize,
    bandwidth: usize,
    rows: Vec<Vec<f64>>,
}

impl BandCholesky {
    fn factor(a: &BandedSymmetricMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let mut rows = vec![vec![0.0; bw + 1]; n];
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let mut s = a.get(i, j);
                let klo = jlo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= rows[i][i - k] * rows[j][j - k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Conditioning(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    rows[i][0] = s.sqrt();
                } else {
                    rows[i][i - j] = s / rows[j][0];
                }
            }
        }
        Ok(BandCholesky {
            dim: n,
            bandwidth: bw,
            rows,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim {
            return Err(invalid("right-hand side length mismatch"));
        }
        let n = self.dim;
        let bw = self.bandwidth;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.rows[i][i - k] * y[k];
            }
            y[i] = s / self.rows[i][0];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.rows[k][k - i] * y[k];
            }
            y[i] = s / self.rows[i][0];
        }
        Ok(y)
    }
}
