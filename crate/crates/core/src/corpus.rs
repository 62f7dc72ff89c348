//! Built-in algebras used by the CLI and the test suites.

use nalgebra::DMatrix;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::realify::{self, ComplexLieAlgebra};

pub const NAMES: [&str; 10] = [
    "abelian2",
    "solvable2",
    "heisenberg",
    "sl2R",
    "su2",
    "so3",
    "sl2C",
    "sl3R",
    "su3",
    "sl2R+sl2R",
];

/// Look up a corpus algebra by name. `sl2C` is returned realified (dim 6,
/// with its complex structure attached).
pub fn algebra(name: &str) -> Result<LieAlgebra> {
    match name {
        "abelian2" => {
            let c = vec![DMatrix::zeros(2, 2); 2];
            LieAlgebra::from_structure_constants(c, Some(vec!["x".into(), "y".into()]))
        }
        "solvable2" => {
            // [x, y] = y
            let mut c = vec![DMatrix::zeros(2, 2); 2];
            set(&mut c, 1, 0, 1, 1.0);
            LieAlgebra::from_structure_constants(c, Some(vec!["x".into(), "y".into()]))
        }
        "heisenberg" => {
            // [x, y] = z
            let mut c = vec![DMatrix::zeros(3, 3); 3];
            set(&mut c, 2, 0, 1, 1.0);
            LieAlgebra::from_structure_constants(
                c,
                Some(vec!["x".into(), "y".into(), "z".into()]),
            )
        }
        "sl2R" => {
            // [h, e] = 2e, [h, f] = -2f, [e, f] = h
            let mut c = vec![DMatrix::zeros(3, 3); 3];
            set(&mut c, 1, 0, 1, 2.0);
            set(&mut c, 2, 0, 2, -2.0);
            set(&mut c, 0, 1, 2, 1.0);
            LieAlgebra::from_structure_constants(
                c,
                Some(vec!["h".into(), "e".into(), "f".into()]),
            )
        }
        "su2" => {
            // [e_i, e_j] = Σ ε_{ijk} e_k
            let mut c = vec![DMatrix::zeros(3, 3); 3];
            set(&mut c, 2, 0, 1, 1.0);
            set(&mut c, 0, 1, 2, 1.0);
            set(&mut c, 1, 2, 0, 1.0);
            LieAlgebra::from_structure_constants(
                c,
                Some(vec!["e1".into(), "e2".into(), "e3".into()]),
            )
        }
        "so3" => {
            // cross-product algebra in the stretched basis (x, y, 2z):
            // [e1,e2] = e3/2, [e2,e3] = 2e1, [e3,e1] = 2e2.
            // The optimal metric is then not the identity, so the flow has
            // genuine work to do on a compact algebra.
            let mut c = vec![DMatrix::zeros(3, 3); 3];
            set(&mut c, 2, 0, 1, 0.5);
            set(&mut c, 0, 1, 2, 2.0);
            set(&mut c, 1, 2, 0, 2.0);
            LieAlgebra::from_structure_constants(
                c,
                Some(vec!["x".into(), "y".into(), "zz".into()]),
            )
        }
        "sl2C" => {
            let calg = complex_algebra("sl2C")?;
            let (alg, _) = realify::realify(&calg)?;
            Ok(alg)
        }
        "sl3R" => {
            // elementary-matrix basis of traceless 3x3 reals
            let mut basis = Vec::new();
            let mut labels = Vec::new();
            let e = |i: usize, j: usize| {
                let mut m = DMatrix::zeros(3, 3);
                m[(i, j)] = 1.0;
                m
            };
            basis.push(e(0, 0) - e(1, 1));
            labels.push("h1".to_string());
            basis.push(e(1, 1) - e(2, 2));
            labels.push("h2".to_string());
            for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)] {
                basis.push(e(i, j));
                labels.push(format!("E{}{}", i + 1, j + 1));
            }
            LieAlgebra::from_matrix_basis(&basis, Some(labels))
        }
        "su3" => {
            // [T_a, T_b] = Σ f_abc T_c with the standard totally antisymmetric
            // su(3) constants (1-based indices)
            let f: [(usize, usize, usize, f64); 9] = [
                (1, 2, 3, 1.0),
                (1, 4, 7, 0.5),
                (1, 5, 6, -0.5),
                (2, 4, 6, 0.5),
                (2, 5, 7, 0.5),
                (3, 4, 5, 0.5),
                (3, 6, 7, -0.5),
                (4, 5, 8, 3f64.sqrt() / 2.0),
                (6, 7, 8, 3f64.sqrt() / 2.0),
            ];
            let mut c = vec![DMatrix::zeros(8, 8); 8];
            for &(a, b, k, v) in &f {
                // total antisymmetry in (a, b, k)
                set(&mut c, k - 1, a - 1, b - 1, v);
                set(&mut c, a - 1, b - 1, k - 1, v);
                set(&mut c, b - 1, k - 1, a - 1, v);
            }
            let labels = (1..=8).map(|i| format!("T{i}")).collect();
            LieAlgebra::from_structure_constants(c, Some(labels))
        }
        "sl2R+sl2R" => {
            let a = algebra("sl2R")?;
            let b = algebra("sl2R")?;
            Ok(LieAlgebra::direct_sum(&a, &b))
        }
        other => Err(Error::UnknownCorpus(other.to_string())),
    }
}

/// Complex corpus members (currently sl2C and sl3C, the latter for tests).
pub fn complex_algebra(name: &str) -> Result<ComplexLieAlgebra> {
    match name {
        "sl2C" => {
            let mut re = vec![DMatrix::zeros(3, 3); 3];
            let im = vec![DMatrix::zeros(3, 3); 3];
            set(&mut re, 1, 0, 1, 2.0);
            set(&mut re, 2, 0, 2, -2.0);
            set(&mut re, 0, 1, 2, 1.0);
            ComplexLieAlgebra::from_structure_constants(
                re,
                im,
                Some(vec!["h".into(), "e".into(), "f".into()]),
            )
        }
        "sl3C" => {
            // complexification of sl3R: same real constants, zero imaginary part
            let real = algebra("sl3R")?;
            let re = real.structure_slices().to_vec();
            let im = vec![DMatrix::zeros(8, 8); 8];
            ComplexLieAlgebra::from_structure_constants(re, im, Some(real.labels().to_vec()))
        }
        other => Err(Error::UnknownCorpus(other.to_string())),
    }
}

fn set(c: &mut [DMatrix<f64>], k: usize, i: usize, j: usize, v: f64) {
    c[k][(i, j)] = v;
    c[k][(j, i)] = -v;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_corpus_algebras_validate() {
        for name in NAMES {
            let alg = algebra(name).unwrap();
            let report = alg.validate(1e-12);
            assert!(
                report.passed(),
                "{name}: anti {:.2e} jacobi {:.2e}",
                report.antisymmetry_residual,
                report.jacobi_residual
            );
        }
    }

    #[test]
    fn su2_brackets_are_epsilon() {
        let alg = algebra("su2").unwrap();
        assert_eq!(alg.structure_constant(2, 0, 1), 1.0);
        assert_eq!(alg.structure_constant(0, 1, 2), 1.0);
        assert_eq!(alg.structure_constant(1, 2, 0), 1.0);
        assert_eq!(alg.structure_constant(1, 0, 2), -1.0);
    }

    #[test]
    fn heisenberg_single_bracket() {
        let alg = algebra("heisenberg").unwrap();
        let mut nonzero = 0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    if alg.structure_constant(k, i, j) != 0.0 {
                        nonzero += 1;
                    }
                }
            }
        }
        assert_eq!(nonzero, 2); // c[2][(0,1)] and its mirror
    }

    #[test]
    fn direct_sum_is_block_diagonal() {
        let alg = algebra("sl2R+sl2R").unwrap();
        assert_eq!(alg.dim(), 6);
        for k in 0..6 {
            for i in 0..3 {
                for j in 3..6 {
                    assert_eq!(alg.structure_constant(k, i, j), 0.0);
                }
            }
        }
        // first factor mirrors sl2R
        assert_eq!(alg.structure_constant(1, 0, 1), 2.0);
        assert_eq!(alg.structure_constant(4, 3, 4), 2.0);
    }

    #[test]
    fn sl3r_dimension_and_simplicity_ingredients() {
        let alg = algebra("sl3R").unwrap();
        assert_eq!(alg.dim(), 8);
        assert_eq!(alg.center(1e-10).dim(), 0);
        // sl(3,R) Killing signature: dim so(3) = 3 negative, 5 positive
        assert_eq!(alg.killing_form().signature(1e-9), (5, 3, 0));
    }

    #[test]
    fn su3_killing_is_minus_three_identity() {
        let alg = algebra("su3").unwrap();
        let k = alg.killing_form();
        approx::assert_relative_eq!(
            k.matrix,
            DMatrix::identity(8, 8) * -3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sl2c_realified_is_dim_6_with_j() {
        let alg = algebra("sl2C").unwrap();
        assert_eq!(alg.dim(), 6);
        assert!(alg.complex_structure().is_some());
    }
}
