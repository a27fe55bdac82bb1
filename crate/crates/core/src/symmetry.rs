//! The symmetry operator `g0 = f(p)` for `f(x) = prod_k (x^2 + alpha_k^2)`.
//!
//! In the `psi_n` basis `g0` is the banded matrix `S = f(P)` with `P` the
//! momentum Jacobi matrix. Its inverse is an infinite-matrix object; we take it
//! as the limit of inverses of leading sections, doubling the section size until
//! the requested block stops moving.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::banded::BandedSymmetricMatrix;
use crate::basis::{momentum_jacobi, JacobiMatrix};
use crate::error::{invalid, Error, Result};
use crate::poly::Polynomial;

/// Largest section size tried by [`s_inverse_block`].
pub const INVERSE_SIZE_CAP: usize = 4096;

/// Minimum separation between soliton parameters for the partial fractions.
pub const ALPHA_SEPARATION: f64 = 1e-6;

/// Checks positivity and finiteness, rejects exact duplicates, returns the
/// parameters in increasing order.
pub fn validate_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    if let Some(a) = alphas.iter().find(|a| !a.is_finite() || **a <= 0.0) {
        return Err(invalid(format!("alpha must be positive and finite, got {a}")));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("alphas must be pairwise distinct"));
    }
    Ok(sorted)
}

/// Expanded `prod_k (x^2 + alpha_k^2)`; the empty product is `1`.
pub fn poly_from_alphas(alphas: &[f64]) -> Result<Polynomial> {
    let alphas = validate_alphas(alphas)?;
    Ok(alphas.iter().fold(Polynomial::constant(1.0), |acc, a| {
        acc.mul(&Polynomial::new(vec![a * a, 0.0, 1.0]))
    }))
}

/// `1/f(x) = sum_k A_k / (x^2 + alpha_k^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractions {
    alphas: Vec<f64>,
    residues: Vec<f64>,
}

impl PartialFractions {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn residues(&self) -> &[f64] {
        &self.residues
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.alphas
            .iter()
            .zip(&self.residues)
            .map(|(a, r)| r / (x * x + a * a))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Residues of `1/f` as a function of `y = x^2`:
/// `A_k = 1 / prod_{j != k} (alpha_j^2 - alpha_k^2)`.
pub fn partial_fractions(alphas: &[f64]) -> Result<PartialFractions> {
    let alphas = validate_alphas(alphas)?;
    if let Some(w) = alphas.windows(2).find(|w| w[1] - w[0] < ALPHA_SEPARATION) {
        return Err(Error::Conditioning(format!(
            "alphas {} and {} are closer than {ALPHA_SEPARATION:e}",
            w[0], w[1]
        )));
    }
    let residues = alphas
        .iter()
        .enumerate()
        .map(|(k, ak)| {
            let denom: f64 = alphas
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, aj)| aj * aj - ak * ak)
                .product();
            1.0 / denom
        })
        .collect();
    Ok(PartialFractions { alphas, residues })
}

/// `f(J)` for a banded symmetric `J` by Horner's scheme.
pub(crate) fn poly_of_jacobi(f: &Polynomial, jacobi: &JacobiMatrix) -> BandedSymmetricMatrix {
    let p = jacobi.to_banded();
    let coeffs = f.coeffs();
    let mut q = BandedSymmetricMatrix::zeros(jacobi.dim(), 0);
    q.add_scaled_identity(f.leading());
    for &c in coeffs.iter().rev().skip(1) {
        q = q.mul_commuting(&p);
        q.add_scaled_identity(c);
    }
    q
}

fn check_symbol(f: &Polynomial) -> Result<()> {
    if !f.is_even() {
        return Err(invalid(format!("symbol {f} is not even")));
    }
    if !f.is_strictly_positive_even() {
        return Err(invalid(format!("symbol {f} is not strictly positive")));
    }
    Ok(())
}

/// Leading `(n_max + 1)` section of `S = f(P)`.
///
/// `P` is built `deg f` rows larger than the section, so every returned entry
/// equals the corresponding entry of the infinite matrix.
pub fn s_matrix(f: &Polynomial, n_max: usize) -> Result<BandedSymmetricMatrix> {
    check_symbol(f)?;
    let deg = f.degree();
    if n_max < deg {
        return Err(invalid(format!(
            "n_max = {n_max} is below the degree {deg} of the symbol"
        )));
    }
    let jacobi = momentum_jacobi((n_max + deg).max(1))?;
    Ok(poly_of_jacobi(f, &jacobi).leading(n_max + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseCertificate {
    /// Section sizes that were inverted, in order.
    pub sizes: Vec<usize>,
    /// Max-norm difference between the blocks from the last two sizes.
    pub difference: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone)]
pub struct InverseBlock {
    pub block: DMatrix<f64>,
    pub certificate: InverseCertificate,
}

fn leading_inverse_block(s: &BandedSymmetricMatrix, block: usize) -> Result<DMatrix<f64>> {
    let chol = s.band_cholesky()?;
    let dim = s.dim();
    let mut out = DMatrix::zeros(block, block);
    for j in 0..block {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        let col = chol.solve(&e)?;
        for i in 0..block {
            out[(i, j)] = col[i];
        }
    }
    // symmetrize against solve roundoff
    Ok((&out + out.transpose()) * 0.5)
}

/// Leading `block x block` part of `S^{-1}` with a doubling-size certificate.
pub fn s_inverse_block(alphas: &[f64], block: usize, tolerance: f64) -> Result<InverseBlock> {
    if block == 0 {
        return Err(invalid("inverse block size must be at least 1"));
    }
    if !(tolerance > 0.0) {
        return Err(invalid("inverse tolerance must be positive"));
    }
    let f = poly_from_alphas(alphas)?;
    let deg = f.degree();
    let mut size = (4 * block).max(32).max(deg + 1).next_power_of_two();
    if size > INVERSE_SIZE_CAP {
        return Err(invalid(format!(
            "block {block} needs sections beyond the cap {INVERSE_SIZE_CAP}"
        )));
    }
    let mut sizes = vec![size];
    let mut previous = leading_inverse_block(&s_matrix(&f, size - 1)?, block)?;
    loop {
        let next = size * 2;
        if next > INVERSE_SIZE_CAP {
            // recompute the last difference for the error report
            let last_size = size;
            let prior = leading_inverse_block(&s_matrix(&f, last_size / 2 - 1)?, block)?;
            let difference = (&previous - &prior).amax();
            return Err(Error::InverseNotConverged {
                size: last_size,
                difference,
                last: previous,
                previous: prior,
            });
        }
        size = next;
        sizes.push(size);
        let current = leading_inverse_block(&s_matrix(&f, size - 1)?, block)?;
        let difference = (&current - &previous).amax();
        if difference <= tolerance {
            return Ok(InverseBlock {
                block: current,
                certificate: InverseCertificate {
                    sizes,
                    difference,
                    tolerance,
                },
            });
        }
        previous = current;
    }
}

/// Row-major CSV with 17 significant digits, no header.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| crate::report::fmt_num(m[(i, j)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
