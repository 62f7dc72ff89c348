//! Dense linear algebra helpers on top of nalgebra.
//!
//! Everything here works at desk scale (n ≤ 30, dense). Symmetric matrix
//! functions go through the eigendecomposition; general matrix exponentials
//! use scaling-and-squaring with a Taylor core.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
/// The input is symmetrized first; columns of the returned matrix are the
/// corresponding orthonormal eigenvectors.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let vecs = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Apply a scalar function to a symmetric matrix through its spectrum.
pub fn sym_func(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_sorted(m);
    let d = DMatrix::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

pub fn sym_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_func(m, f64::exp)
}

/// Logarithm of a symmetric positive definite matrix.
pub fn sym_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen_sorted(m);
    let min = vals[vals.len() - 1];
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let d = DMatrix::from_diagonal(&vals.map(f64::ln));
    Ok(&vecs * d * vecs.transpose())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Exponential of a general square matrix (scaling and squaring, Taylor core).
pub fn mat_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.norm();
    // scale so the Taylor series converges quickly
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / k as f64;
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Orthonormal basis of the null space of `a`, using the singular value
/// cutoff `rel_tol · σ_max`. Returns the right singular vectors whose
/// singular values fall below the cutoff.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let ncols = a.ncols();
    if a.nrows() == 0 {
        return (0..ncols)
            .map(|i| DVector::from_fn(ncols, |j, _| if i == j { 1.0 } else { 0.0 }))
            .collect();
    }
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * sigma_max.max(1e-300);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            basis.push(v_t.row(i).transpose());
        }
    }
    // wide systems: v_t only holds min(m,n) rows, the rest of the right
    // factor is null space as well
    if v_t.nrows() < ncols {
        let mut full = DMatrix::zeros(ncols, ncols);
        full.view_mut((0, 0), (v_t.nrows(), ncols))
            .copy_from(&v_t);
        let q = full.transpose().qr().q();
        for i in v_t.nrows()..ncols {
            basis.push(q.column(i).into());
        }
    }
    basis
}

/// Orthonormalize a spanning set, dropping directions with singular value
/// below `rel_tol · σ_max`. Returns an orthonormal basis of the span.
pub fn orthonormalize(vectors: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    let a = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let svd = a.svd(true, false);
    let u = svd.u.expect("svd requested u");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Vec::new();
    }
    let cutoff = rel_tol * sigma_max;
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| u.column(i).into())
        .collect()
}

/// Norm of the component of `v` orthogonal to the span of the orthonormal
/// basis `basis`.
pub fn residual_against_span(v: &DVector<f64>, basis: &[DVector<f64>]) -> f64 {
    let mut rem = v.clone();
    for b in basis {
        let c = b.dot(&rem);
        rem -= b * c;
    }
    rem.norm()
}

pub fn random_gaussian_matrix(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    symmetrize(&random_gaussian_matrix(n, rng))
}

/// Random symmetric trace-free matrix of unit Frobenius norm.
pub fn random_unit_traceless_symmetric(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let mut s = random_symmetric(n, rng);
        let tr = s.trace() / n as f64;
        for i in 0..n {
            s[(i, i)] -= tr;
        }
        let norm = s.norm();
        if norm > 1e-8 {
            return s / norm;
        }
    }
}

/// Random element of SL(n): Gaussian matrix rescaled to determinant one
/// (a column is flipped when the determinant is negative).
pub fn random_sl(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    loop {
        let mut a = random_gaussian_matrix(n, rng);
        let det = a.determinant();
        if det.abs() < 1e-6 {
            continue;
        }
        if det < 0.0 {
            for i in 0..n {
                a[(i, 0)] = -a[(i, 0)];
            }
        }
        let scale = det.abs().powf(1.0 / n as f64);
        return a / scale;
    }
}

/// Random orthogonal matrix (Q factor of a Gaussian matrix).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = random_gaussian_matrix(n, rng);
    a.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sym_exp_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_symmetric(4, &mut rng);
            let e = sym_exp(&s);
            let back = sym_log(&e).unwrap();
            assert_relative_eq!(back, s, epsilon = 1e-10);
        }
    }

    #[test]
    fn mat_exp_matches_sym_exp_on_symmetric_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let s = random_symmetric(5, &mut rng);
            assert_relative_eq!(mat_exp(&s), sym_exp(&s), epsilon = 1e-11);
        }
    }

    #[test]
    fn mat_exp_one_parameter_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_gaussian_matrix(4, &mut rng);
        let e1 = mat_exp(&a);
        let e2 = mat_exp(&(&a * 2.0));
        assert_relative_eq!(&e1 * &e1, e2, epsilon = 1e-9);
    }

    #[test]
    fn nullspace_of_rank_deficient_matrix() {
        // rows span a 2-dim space inside R^3
        let a = DMatrix::from_row_slice(4, 3, &[
            1.0, 0.0, 1.0, //
            0.0, 1.0, 1.0, //
            1.0, 1.0, 2.0, //
            2.0, -1.0, 1.0,
        ]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        assert!((&a * v).norm() < 1e-12);
        assert_relative_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthonormalize_drops_dependent_vectors() {
        let v1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let v2 = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let v3 = DVector::from_vec(vec![2.0, 1.0, 0.0]); // dependent
        let basis = orthonormalize(&[v1, v2, v3], 1e-10);
        assert_eq!(basis.len(), 2);
        for a in &basis {
            assert_relative_eq!(a.norm(), 1.0, epsilon = 1e-12);
        }
        assert!(basis[0].dot(&basis[1]).abs() < 1e-12);
    }

    #[test]
    fn random_sl_has_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = random_sl(3, &mut rng);
            assert_relative_eq!(g.determinant(), 1.0, epsilon = 1e-10);
        }
    }
}
