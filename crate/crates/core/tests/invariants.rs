use cohres::coherent::{psi_z_norm, xi_z_norm_sq, CoherentExpansion};
use cohres::config::{format_complex, parse_complex};
use cohres::symmetry::{partial_fractions, poly_from_alphas, s_matrix};
use num_complex::Complex64;
use proptest::prelude::*;

/// Up to three parameters with gaps of at least 0.2.
fn alphas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..1.5, 1..=3).prop_map(|gaps| {
        let mut acc = 0.0;
        gaps.iter()
            .map(|g| {
                acc += g;
                acc
            })
            .collect()
    })
}

fn small_z() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_fractions_reconstruct_reciprocal(a in alphas(), x in -5.0f64..5.0) {
        let f = poly_from_alphas(&a).unwrap();
        let pf = partial_fractions(&a).unwrap();
        let direct = 1.0 / f.eval(x);
        prop_assert!((pf.eval(x) - direct).abs() <= 1e-9 * direct, "{} vs {}", pf.eval(x), direct);
    }

    #[test]
    fn s_matrix_is_symmetric_positive_and_stable(a in alphas(), extra in 0usize..6) {
        let f = poly_from_alphas(&a).unwrap();
        let n = f.degree() + 3;
        let s = s_matrix(&f, n).unwrap();
        let big = s_matrix(&f, n + extra).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                prop_assert_eq!(s.get(i, j), s.get(j, i));
                prop_assert_eq!(s.get(i, j), big.get(i, j));
            }
        }
        // f >= f(0) > 0 pointwise, so S >= f(0) I
        prop_assert!(s.band_cholesky().is_ok());
        for i in 0..=n {
            prop_assert!(s.get(i, i) >= f.eval(0.0) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn coherent_expansion_mass_and_eigenvalue(z in small_z()) {
        let e = CoherentExpansion::new(z).unwrap();
        let mass: f64 = e.coefficients().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((mass + e.tail_bound() - 1.0).abs() < 1e-12);
        prop_assert!(e.tail_bound() <= 1e-12);
        prop_assert!(e.lowering_residual() < 1e-5);
    }

    #[test]
    fn psi_z_is_normalized(z in small_z()) {
        prop_assert!((psi_z_norm(z, 64).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xi_z_norm_is_bounded_by_symbol_minimum(a in alphas(), z in small_z()) {
        let f = poly_from_alphas(&a).unwrap();
        let n = xi_z_norm_sq(&a, z, 96).unwrap();
        prop_assert!(n > 0.0);
        prop_assert!(n <= (1.0 + 1e-12) / f.eval(0.0));
    }

    #[test]
    fn complex_literals_roundtrip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let z = Complex64::new(re, im);
        prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }
}

#[test]
fn complex_literal_forms() {
    assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
    assert_eq!(parse_complex("-1.5i").unwrap(), Complex64::new(0.0, -1.5));
    assert_eq!(parse_complex("1e-3-4e-1i").unwrap(), Complex64::new(1e-3, -0.4));
    assert_eq!(parse_complex("0.7 + i").unwrap(), Complex64::new(0.7, 1.0));
    assert!(parse_complex("1+2j").is_err());
    assert!(parse_complex("").is_err());
}
