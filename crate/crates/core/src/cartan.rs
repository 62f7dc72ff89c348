//! Post-processing of an optimal metric into the Cartan involution, the
//! k ⊕ p decomposition, the bracket inclusions and the compactness
//! classification.
//!
//! At a critical metric H* the adjoint image is closed under the
//! H*-transpose X ↦ H*⁻¹XᵀH*, which pulls back along the injective adjoint
//! map to the involution θ with ad_{θx} = −(ad_x)ᵀ_{H*}. Then k and p are
//! the ±1 eigenspaces of θ.

use nalgebra::{DMatrix, DVector};

use crate::algebra::{LieAlgebra, LinearSubspace};
use crate::error::{Error, Result};
use crate::hspace::MetricPoint;
use crate::kempfness;
use crate::linalg;

#[derive(Debug, Clone)]
pub struct SplitResiduals {
    /// Gradient norm at H* (certification of the critical point).
    pub grad_norm: f64,
    /// Largest projection residual of a transposed ad onto the ad image.
    pub ad_image_closure: f64,
    /// ‖θ² − I‖.
    pub involution: f64,
    /// Largest ‖θ[x,y] − [θx, θy]‖ over basis pairs.
    pub algebra_involution: f64,
}

#[derive(Debug, Clone)]
pub struct CartanSplit {
    h_star: MetricPoint,
    theta: DMatrix<f64>,
    k_basis: LinearSubspace,
    p_basis: LinearSubspace,
    killing_signature: (usize, usize, usize),
    residuals: SplitResiduals,
}

impl CartanSplit {
    pub fn h_star(&self) -> &MetricPoint {
        &self.h_star
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn k_basis(&self) -> &LinearSubspace {
        &self.k_basis
    }

    pub fn p_basis(&self) -> &LinearSubspace {
        &self.p_basis
    }

    pub fn dim_k(&self) -> usize {
        self.k_basis.dim()
    }

    pub fn dim_p(&self) -> usize {
        self.p_basis.dim()
    }

    /// (positive, negative, zero) counts of the Killing form.
    pub fn killing_signature(&self) -> (usize, usize, usize) {
        self.killing_signature
    }

    pub fn residuals(&self) -> &SplitResiduals {
        &self.residuals
    }
}

/// H*-adjoint of an operator: X ↦ H*⁻¹·Xᵀ·H*.
fn metric_adjoint(h: &MetricPoint, x: &DMatrix<f64>) -> DMatrix<f64> {
    h.inverse() * x.transpose() * h.matrix()
}

/// Compute the Cartan split at a certified critical metric.
pub fn split(alg: &LieAlgebra, h_star: &MetricPoint, tol: f64) -> Result<CartanSplit> {
    let n = alg.dim();
    if h_star.dim() != n {
        return Err(Error::Precondition(
            "metric dimension does not match the algebra".into(),
        ));
    }
    let grad_norm = kempfness::gradient(alg, h_star).norm();
    if grad_norm > 10.0 * tol {
        return Err(Error::NotACriticalPoint(format!(
            "gradient norm {grad_norm:.3e} exceeds 10·tol = {:.1e}",
            10.0 * tol
        )));
    }

    // stack the adjoint operators as columns of an n²×n matrix
    let ads = alg.ad_basis();
    let stacked = DMatrix::from_fn(n * n, n, |r, j| ads[j][(r % n, r / n)]);
    let svd = stacked.clone().svd(true, true);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * svd.singular_values.max())
        .count();
    if rank < n {
        return Err(Error::NotACriticalPoint(
            "adjoint map is not injective (nontrivial center); θ cannot be pulled back".into(),
        ));
    }

    // θ columns: solve ad_{θe_i} = −(ad_{e_i})ᵀ_{H*} in the ad image
    let mut theta = DMatrix::zeros(n, n);
    let mut closure_residual = 0.0f64;
    for i in 0..n {
        let target = -metric_adjoint(h_star, &ads[i]);
        let rhs = DVector::from_fn(n * n, |r, _| target[(r % n, r / n)]);
        let coeffs = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::NotACriticalPoint(format!("projection solve failed: {e}")))?;
        let resid = (&stacked * &coeffs - &rhs).norm() / rhs.norm().max(1e-300);
        closure_residual = closure_residual.max(resid);
        for j in 0..n {
            theta[(j, i)] = coeffs[j];
        }
    }
    if closure_residual > 10.0 * tol {
        return Err(Error::NotACriticalPoint(format!(
            "adjoint image is not closed under the H*-transpose (residual {closure_residual:.3e})"
        )));
    }

    let involution_residual = (&theta * &theta - DMatrix::identity(n, n)).norm();
    if involution_residual > 1e-8 {
        return Err(Error::DegenerateInvolution {
            eigenvalue: f64::NAN,
            tol: 1e-8,
        });
    }
    let mut algebra_involution = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = alg.basis_vector(i);
            let y = alg.basis_vector(j);
            let lhs = &theta * alg.bracket(&x, &y);
            let rhs = alg.bracket(&(&theta * x), &(&theta * y));
            algebra_involution = algebra_involution.max((lhs - rhs).norm());
        }
    }

    // θ is H*-self-adjoint at a critical point; symmetrize in the H* inner
    // product and extract eigenspaces from the symmetric conjugate
    let conj = h_star.sqrt() * &theta * h_star.inv_sqrt();
    let asym = (&conj - conj.transpose()).norm();
    if asym > 1e-6 {
        return Err(Error::DegenerateInvolution {
            eigenvalue: f64::NAN,
            tol: 1e-6,
        });
    }
    let (vals, vecs) = linalg::sym_eigen_sorted(&linalg::symmetrize(&conj));
    let mut k_vecs: Vec<DVector<f64>> = Vec::new();
    let mut p_vecs: Vec<DVector<f64>> = Vec::new();
    for (idx, &lam) in vals.iter().enumerate() {
        if (lam - 1.0).abs() > tol.max(1e-8) && (lam + 1.0).abs() > tol.max(1e-8) {
            return Err(Error::DegenerateInvolution {
                eigenvalue: lam,
                tol: tol.max(1e-8),
            });
        }
        let x = h_star.inv_sqrt() * vecs.column(idx);
        if lam > 0.0 {
            k_vecs.push(x);
        } else {
            p_vecs.push(x);
        }
    }
    let k_basis = LinearSubspace::from_spanning(&k_vecs, n, 1e-12);
    let p_basis = LinearSubspace::from_spanning(&p_vecs, n, 1e-12);

    let max_c = alg
        .structure_slices()
        .iter()
        .map(|c| c.amax())
        .fold(0.0f64, f64::max);
    if k_basis.dim() == 0 && max_c > tol {
        return Err(Error::InvariantBreach(
            "k is trivial for a non-abelian algebra".into(),
        ));
    }

    let killing_signature = alg.killing_form().signature(1e-9);

    Ok(CartanSplit {
        h_star: h_star.clone(),
        theta,
        k_basis,
        p_basis,
        killing_signature,
        residuals: SplitResiduals {
            grad_norm,
            ad_image_closure: closure_residual,
            involution: involution_residual,
            algebra_involution,
        },
    })
}

#[derive(Debug, Clone)]
pub struct InclusionReport {
    pub kk_residual: f64,
    pub kp_residual: f64,
    pub pp_residual: f64,
    pub tol: f64,
}

impl InclusionReport {
    pub fn passed(&self) -> bool {
        self.kk_residual <= self.tol && self.kp_residual <= self.tol && self.pp_residual <= self.tol
    }

    pub fn max_residual(&self) -> f64 {
        self.kk_residual.max(self.kp_residual).max(self.pp_residual)
    }
}

/// Check [k,k] ⊂ k, [k,p] ⊂ p, [p,p] ⊂ k by projecting each basis bracket
/// onto the complementary subspace.
pub fn check_inclusions(
    alg: &LieAlgebra,
    split: &CartanSplit,
    tol: f64,
) -> Result<InclusionReport> {
    let k = split.k_basis();
    let p = split.p_basis();
    let pair_residual = |a: &LinearSubspace, b: &LinearSubspace, target: &LinearSubspace| -> f64 {
        let mut worst = 0.0f64;
        for x in a.basis() {
            for y in b.basis() {
                let w = alg.bracket(x, y);
                worst = worst.max(target.residual_of(&w));
            }
        }
        worst
    };
    let report = InclusionReport {
        kk_residual: pair_residual(k, k, k),
        kp_residual: pair_residual(k, p, p),
        pp_residual: pair_residual(p, p, k),
        tol,
    };
    if !report.passed() {
        let pair = if report.kk_residual > tol {
            "[k,k] ⊄ k"
        } else if report.kp_residual > tol {
            "[k,p] ⊄ p"
        } else {
            "[p,p] ⊄ k"
        };
        return Err(Error::InvariantBreach(format!(
            "inclusion failure {pair}: residuals kk {:.3e}, kp {:.3e}, pp {:.3e}",
            report.kk_residual, report.kp_residual, report.pp_residual
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompactnessKind {
    Compact,
    Noncompact { dim_k: usize, dim_p: usize },
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub kind: CompactnessKind,
    /// (min, max) eigenvalues of the Killing form restricted to k.
    pub killing_on_k: (f64, f64),
    /// (min, max) eigenvalues of the Killing form restricted to p; (0, 0)
    /// when p is trivial.
    pub killing_on_p: (f64, f64),
}

/// Compact iff p = 0; asserts the Killing sign pattern (negative definite
/// on k, positive definite on p).
pub fn classify(alg: &LieAlgebra, split: &CartanSplit) -> Result<Classification> {
    let killing = alg.killing_form();
    let restrict = |sub: &LinearSubspace| -> (f64, f64) {
        let d = sub.dim();
        if d == 0 {
            return (0.0, 0.0);
        }
        let m = DMatrix::from_fn(d, d, |i, j| {
            killing.evaluate(&sub.basis()[i], &sub.basis()[j])
        });
        let (vals, _) = linalg::sym_eigen_sorted(&m);
        (vals[d - 1], vals[0])
    };
    let killing_on_k = restrict(split.k_basis());
    let killing_on_p = restrict(split.p_basis());
    if split.dim_k() > 0 && killing_on_k.1 >= 0.0 {
        return Err(Error::InvariantBreach(format!(
            "Killing form not negative definite on k (max eigenvalue {:.3e})",
            killing_on_k.1
        )));
    }
    if split.dim_p() > 0 && killing_on_p.0 <= 0.0 {
        return Err(Error::InvariantBreach(format!(
            "Killing form not positive definite on p (min eigenvalue {:.3e})",
            killing_on_p.0
        )));
    }
    let kind = if split.dim_p() == 0 {
        CompactnessKind::Compact
    } else {
        CompactnessKind::Noncompact {
            dim_k: split.dim_k(),
            dim_p: split.dim_p(),
        }
    };
    Ok(Classification {
        kind,
        killing_on_k,
        killing_on_p,
    })
}
