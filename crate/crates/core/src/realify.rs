//! Complex Lie algebras and their underlying real algebras.
//!
//! Complex scalars are carried as (re, im) matrix pairs; nothing complex
//! leaks past this module. A realified algebra has basis
//! (e_1, …, e_n, i·e_1, …, i·e_n), so multiplication by i is the block matrix
//! J = [[0, −I], [I, 0]].

use nalgebra::DMatrix;

use crate::algebra::LieAlgebra;
use crate::cartan::CartanSplit;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ComplexLieAlgebra {
    dim_c: usize,
    re: Vec<DMatrix<f64>>,
    im: Vec<DMatrix<f64>>,
    labels: Vec<String>,
}

impl ComplexLieAlgebra {
    pub fn from_structure_constants(
        re: Vec<DMatrix<f64>>,
        im: Vec<DMatrix<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let dim_c = re.len();
        if dim_c == 0 || im.len() != dim_c {
            return Err(Error::Structure(
                "re/im slice counts must match and be positive".into(),
            ));
        }
        for slice in re.iter().chain(im.iter()) {
            if slice.nrows() != dim_c || slice.ncols() != dim_c {
                return Err(Error::Structure("structure slice has wrong shape".into()));
            }
        }
        let labels = match labels {
            Some(l) if l.len() == dim_c => l,
            Some(_) => return Err(Error::Structure("label count mismatch".into())),
            None => (0..dim_c).map(|i| format!("e{}", i + 1)).collect(),
        };
        Ok(Self {
            dim_c,
            re,
            im,
            labels,
        })
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn re_slices(&self) -> &[DMatrix<f64>] {
        &self.re
    }

    pub fn im_slices(&self) -> &[DMatrix<f64>] {
        &self.im
    }

    /// Complex antisymmetry and Jacobi residuals.
    pub fn validate(&self, tol: f64) -> Result<(f64, f64)> {
        let n = self.dim_c;
        let mut anti = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let re = self.re[k][(i, j)] + self.re[k][(j, i)];
                    let im = self.im[k][(i, j)] + self.im[k][(j, i)];
                    anti = anti.max(re.hypot(im));
                }
            }
        }
        if anti > tol {
            return Err(Error::Antisymmetry {
                residual: anti,
                tol,
            });
        }
        // Σ_m c^m_{ij} c^l_{mk} + cyclic = 0, over complex scalars
        let mut jac = 0.0f64;
        for l in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let mut sre = 0.0;
                        let mut sim = 0.0;
                        let mut acc = |a_re: f64, a_im: f64, b_re: f64, b_im: f64| {
                            sre += a_re * b_re - a_im * b_im;
                            sim += a_re * b_im + a_im * b_re;
                        };
                        for m in 0..n {
                            acc(
                                self.re[m][(i, j)],
                                self.im[m][(i, j)],
                                self.re[l][(m, k)],
                                self.im[l][(m, k)],
                            );
                            acc(
                                self.re[m][(j, k)],
                                self.im[m][(j, k)],
                                self.re[l][(m, i)],
                                self.im[l][(m, i)],
                            );
                            acc(
                                self.re[m][(k, i)],
                                self.im[m][(k, i)],
                                self.re[l][(m, j)],
                                self.im[l][(m, j)],
                            );
                        }
                        jac = jac.max(sre.hypot(sim));
                    }
                }
            }
        }
        if jac > tol {
            return Err(Error::Jacobi { residual: jac, tol });
        }
        Ok((anti, jac))
    }

    /// Complex Killing form, returned as (re, im) matrices.
    pub fn killing_form_complex(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dim_c;
        // (ad_i)_{kj} = c^k_{ij}
        let ad_re: Vec<DMatrix<f64>> = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |k, j| self.re[k][(i, j)]))
            .collect();
        let ad_im: Vec<DMatrix<f64>> = (0..n)
            .map(|i| DMatrix::from_fn(n, n, |k, j| self.im[k][(i, j)]))
            .collect();
        let mut kre = DMatrix::zeros(n, n);
        let mut kim = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                // Tr((A + iB)(C + iD)) = Tr(AC − BD) + i·Tr(AD + BC)
                kre[(i, j)] = (&ad_re[i] * &ad_re[j]).trace() - (&ad_im[i] * &ad_im[j]).trace();
                kim[(i, j)] = (&ad_re[i] * &ad_im[j]).trace() + (&ad_im[i] * &ad_re[j]).trace();
            }
        }
        (kre, kim)
    }
}

/// Multiplication by i on the realified algebra.
#[derive(Debug, Clone)]
pub struct JOperator {
    matrix: DMatrix<f64>,
}

impl JOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// ‖J² + I‖, zero by construction.
    pub fn square_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix * &self.matrix + DMatrix::identity(n, n)).amax()
    }

    /// Largest ‖J∘ad_x − ad_x∘J‖ over the basis: complex-linearity of the
    /// bracket.
    pub fn commutation_residual(&self, alg: &LieAlgebra) -> f64 {
        (0..alg.dim())
            .map(|i| {
                let ad = alg.ad_matrix(&alg.basis_vector(i));
                (&self.matrix * &ad - &ad * &self.matrix).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// Underlying real algebra on the basis (e_1, …, e_n, i·e_1, …, i·e_n),
/// together with the multiplication-by-i operator.
pub fn realify(calg: &ComplexLieAlgebra) -> Result<(LieAlgebra, JOperator)> {
    calg.validate(1e-9)?;
    let n = calg.dim_c;
    let m = 2 * n;
    let mut c = vec![DMatrix::zeros(m, m); m];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let re = calg.re[k][(i, j)];
                let im = calg.im[k][(i, j)];
                // [e_i, e_j] = Σ re e_k + im (ie_k)
                c[k][(i, j)] = re;
                c[n + k][(i, j)] = im;
                // [e_i, ie_j] = i[e_i, e_j] = Σ −im e_k + re (ie_k)
                c[k][(i, n + j)] = -im;
                c[n + k][(i, n + j)] = re;
                // [ie_i, e_j] = i[e_i, e_j]
                c[k][(n + i, j)] = -im;
                c[n + k][(n + i, j)] = re;
                // [ie_i, ie_j] = −[e_i, e_j]
                c[k][(n + i, n + j)] = -re;
                c[n + k][(n + i, n + j)] = -im;
            }
        }
    }
    let labels = calg
        .labels
        .iter()
        .cloned()
        .chain(calg.labels.iter().map(|l| format!("i{l}")))
        .collect();
    let mut alg = LieAlgebra::from_structure_constants(c, Some(labels))?;
    alg.validate(1e-9).into_result()?;

    let mut j = DMatrix::zeros(m, m);
    for a in 0..n {
        j[(n + a, a)] = 1.0;
        j[(a, n + a)] = -1.0;
    }
    alg.set_complex_structure(j.clone());
    Ok((alg, JOperator { matrix: j }))
}

#[derive(Debug, Clone)]
pub struct CompactFormReport {
    pub jk_to_p_residual: f64,
    pub jp_to_k_residual: f64,
    pub dim_k: usize,
    pub dim_p: usize,
    pub tol: f64,
}

impl CompactFormReport {
    pub fn passed(&self) -> bool {
        self.jk_to_p_residual <= self.tol && self.jp_to_k_residual <= self.tol
    }
}

/// Verify J(k) = p and J(p) = k for a split of a realified algebra, i.e.
/// g = k ⊕ i·k, so k is a compact real form of the original complex algebra.
pub fn check_compact_form(
    alg: &LieAlgebra,
    split: &CartanSplit,
    tol: f64,
) -> Result<CompactFormReport> {
    let j = alg.complex_structure().ok_or_else(|| {
        Error::Precondition("algebra carries no complex structure (not realified)".into())
    })?;
    let k = split.k_basis();
    let p = split.p_basis();
    let jk_to_p = k
        .basis()
        .iter()
        .map(|v| p.residual_of(&(j * v)))
        .fold(0.0, f64::max);
    let jp_to_k = p
        .basis()
        .iter()
        .map(|v| k.residual_of(&(j * v)))
        .fold(0.0, f64::max);
    let report = CompactFormReport {
        jk_to_p_residual: jk_to_p,
        jp_to_k_residual: jp_to_k,
        dim_k: k.dim(),
        dim_p: p.dim(),
        tol,
    };
    if !report.passed() {
        let side = if jk_to_p > tol { "J(k) ⊄ p" } else { "J(p) ⊄ k" };
        return Err(Error::InvariantBreach(format!(
            "{side}: residuals J(k)→p {jk_to_p:.3e}, J(p)→k {jp_to_k:.3e} exceed {tol:.1e}"
        )));
    }
    Ok(report)
}

/// Convenience wrapper that surfaces the report even when it fails.
pub fn compact_form_report(alg: &LieAlgebra, split: &CartanSplit, tol: f64) -> Result<CompactFormReport> {
    match check_compact_form(alg, split, tol) {
        Ok(r) => Ok(r),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use approx::assert_relative_eq;

    #[test]
    fn complex_abelian_realifies_to_r2() {
        let calg = ComplexLieAlgebra::from_structure_constants(
            vec![DMatrix::zeros(1, 1)],
            vec![DMatrix::zeros(1, 1)],
            None,
        )
        .unwrap();
        let (alg, j) = realify(&calg).unwrap();
        assert_eq!(alg.dim(), 2);
        for k in 0..2 {
            assert!(alg.structure_slices()[k].norm() == 0.0);
        }
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_relative_eq!(*j.matrix(), expected, epsilon = 1e-15);
    }

    #[test]
    fn sl2c_realification_validates_and_is_simple() {
        let calg = corpus::complex_algebra("sl2C").unwrap();
        let (alg, _) = realify(&calg).unwrap();
        assert_eq!(alg.dim(), 6);
        assert!(alg.validate(1e-12).passed());
        // Lemma: a simple complex algebra stays simple over the reals
        assert!(alg.classify_simplicity(1e-9, 20, 7).is_simple());
    }

    #[test]
    fn sl3c_realification_is_simple() {
        let calg = corpus::complex_algebra("sl3C").unwrap();
        let (alg, _) = realify(&calg).unwrap();
        assert_eq!(alg.dim(), 16);
        assert!(alg.validate(1e-9).passed());
        assert!(alg.classify_simplicity(1e-9, 20, 11).is_simple());
    }

    #[test]
    fn j_squares_to_minus_identity_and_commutes_with_ad() {
        let calg = corpus::complex_algebra("sl2C").unwrap();
        let (alg, j) = realify(&calg).unwrap();
        assert_eq!(j.square_residual(), 0.0);
        assert!(j.commutation_residual(&alg) <= 1e-12);
    }

    #[test]
    fn killing_of_realification_is_twice_real_part() {
        // oracle: both sides computed independently
        let calg = corpus::complex_algebra("sl2C").unwrap();
        let (alg, _) = realify(&calg).unwrap();
        let k_real = alg.killing_form().matrix;
        let (kre, kim) = calg.killing_form_complex();
        let n = calg.dim_c();
        for i in 0..n {
            for j in 0..n {
                assert_relative_eq!(k_real[(i, j)], 2.0 * kre[(i, j)], epsilon = 1e-12);
                assert_relative_eq!(k_real[(i, n + j)], -2.0 * kim[(i, j)], epsilon = 1e-12);
                assert_relative_eq!(
                    k_real[(n + i, n + j)],
                    -2.0 * kre[(i, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn check_compact_form_requires_complex_structure() {
        // su2 treated as already-real has no J; build a dummy split via the
        // cartan module on the identity metric
        let su2 = corpus::algebra("su2").unwrap();
        let h = crate::hspace::MetricPoint::identity(3);
        let split = crate::cartan::split(&su2, &h, 1e-8).unwrap();
        let err = check_compact_form(&su2, &split, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
