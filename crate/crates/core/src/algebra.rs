//! Lie algebras given by structure constants: bracket, adjoint operators,
//! derivations, Killing form, ideals and a randomized simplicity test.
//!
//! A Lie algebra of dimension n is stored as the dense rank-3 tensor
//! c[k][(i,j)] with [e_i, e_j] = Σ_k c[k][(i,j)] e_k; each slice c[k] is an
//! antisymmetric n×n matrix, so `bracket(x, y)_k = xᵀ C_k y` and row k of
//! `ad_x` is `xᵀ C_k`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// How the algebra was obtained; a realified complex algebra carries the
/// multiplication-by-i operator on its underlying real space.
#[derive(Debug, Clone)]
pub enum FieldTag {
    Real,
    ComplexRealified { j: DMatrix<f64> },
}

#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    /// c[k] is the antisymmetric matrix of k-th output coefficients.
    c: Vec<DMatrix<f64>>,
    labels: Vec<String>,
    field: FieldTag,
}

impl LieAlgebra {
    /// Build from the rank-3 tensor; enforces antisymmetry up to `1e-12`
    /// (exact inputs) but leaves Jacobi to [`LieAlgebra::validate`].
    pub fn from_structure_constants(
        c: Vec<DMatrix<f64>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let dim = c.len();
        if dim == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        for (k, ck) in c.iter().enumerate() {
            if ck.nrows() != dim || ck.ncols() != dim {
                return Err(Error::Structure(format!(
                    "slice {} of the structure tensor is {}x{}, expected {}x{}",
                    k,
                    ck.nrows(),
                    ck.ncols(),
                    dim,
                    dim
                )));
            }
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != dim {
                    return Err(Error::Structure(format!(
                        "{} labels for dimension {}",
                        l.len(),
                        dim
                    )));
                }
                l
            }
            None => (0..dim).map(|i| format!("e{}", i + 1)).collect(),
        };
        Ok(Self {
            dim,
            c,
            labels,
            field: FieldTag::Real,
        })
    }

    /// Expand the pairwise commutators of a matrix basis in that basis.
    /// The basis must be linearly independent and closed under commutators.
    pub fn from_matrix_basis(basis: &[DMatrix<f64>], labels: Option<Vec<String>>) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::Structure("empty matrix basis".into()));
        }
        let m = basis[0].nrows();
        let flat = DMatrix::from_fn(m * m, dim, |r, j| basis[j][(r % m, r / m)]);
        let svd = flat.clone().svd(true, true);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * svd.singular_values[0])
            .count();
        if rank < dim {
            return Err(Error::Structure(
                "matrix basis is not linearly independent".into(),
            ));
        }
        let mut c = vec![DMatrix::zeros(dim, dim); dim];
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    continue;
                }
                let comm = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let rhs = DVector::from_fn(m * m, |r, _| comm[(r % m, r / m)]);
                let coeffs = svd
                    .solve(&rhs, 1e-12)
                    .map_err(|e| Error::Structure(format!("expansion failed: {e}")))?;
                let resid = (&flat * &coeffs - &rhs).norm();
                if resid > 1e-8 * (1.0 + rhs.norm()) {
                    return Err(Error::Structure(format!(
                        "commutator [{i},{j}] is not in the span of the basis (residual {resid:.3e})"
                    )));
                }
                for k in 0..dim {
                    c[k][(i, j)] = coeffs[k];
                }
            }
        }
        // clean antisymmetry against round-off
        for ck in &mut c {
            let anti = (ck.clone() - ck.transpose()) * 0.5;
            *ck = anti;
        }
        Self::from_structure_constants(c, labels)
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(a: &LieAlgebra, b: &LieAlgebra) -> LieAlgebra {
        let n = a.dim + b.dim;
        let mut c = vec![DMatrix::zeros(n, n); n];
        for k in 0..a.dim {
            for i in 0..a.dim {
                for j in 0..a.dim {
                    c[k][(i, j)] = a.c[k][(i, j)];
                }
            }
        }
        for k in 0..b.dim {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    c[a.dim + k][(a.dim + i, a.dim + j)] = b.c[k][(i, j)];
                }
            }
        }
        let labels = a
            .labels
            .iter()
            .map(|l| format!("{l}'"))
            .chain(b.labels.iter().map(|l| format!("{l}''")))
            .collect();
        LieAlgebra {
            dim: n,
            c,
            labels,
            field: FieldTag::Real,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure_constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][(i, j)]
    }

    pub fn structure_slices(&self) -> &[DMatrix<f64>] {
        &self.c
    }

    pub fn field(&self) -> &FieldTag {
        &self.field
    }

    /// The multiplication-by-i operator, when this algebra is a realified
    /// complex algebra.
    pub fn complex_structure(&self) -> Option<&DMatrix<f64>> {
        match &self.field {
            FieldTag::Real => None,
            FieldTag::ComplexRealified { j } => Some(j),
        }
    }

    pub(crate) fn set_complex_structure(&mut self, j: DMatrix<f64>) {
        self.field = FieldTag::ComplexRealified { j };
    }

    /// Check antisymmetry and the Jacobi identity; residuals are reported,
    /// never clipped.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let n = self.dim;
        let mut anti = 0.0f64;
        for ck in &self.c {
            for i in 0..n {
                for j in 0..n {
                    anti = anti.max((ck[(i, j)] + ck[(j, i)]).abs());
                }
            }
        }
        // Jacobi: Σ_m c[m][(i,j)] c[l][(m,k)] + cyclic = 0
        let mut jac = 0.0f64;
        for l in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c[m][(i, j)] * self.c[l][(m, k)]
                                + self.c[m][(j, k)] * self.c[l][(m, i)]
                                + self.c[m][(k, i)] * self.c[l][(m, j)];
                        }
                        jac = jac.max(s.abs());
                    }
                }
            }
        }
        ValidationReport {
            antisymmetry_residual: anti,
            jacobi_residual: jac,
            tol,
        }
    }

    /// `[x, y]` from the structure tensor.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |k, _| (x.transpose() * &self.c[k] * y)[(0, 0)])
    }

    /// Matrix of `y ↦ [x, y]`.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for k in 0..self.dim {
            let row = x.transpose() * &self.c[k];
            for j in 0..self.dim {
                m[(k, j)] = row[(0, j)];
            }
        }
        m
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        DVector::from_fn(self.dim, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    pub fn ad_basis(&self) -> Vec<DMatrix<f64>> {
        (0..self.dim)
            .map(|i| self.ad_matrix(&self.basis_vector(i)))
            .collect()
    }

    /// Center = kernel of ad, computed as the nullspace of the stacked map
    /// x ↦ ([x, e_1], …, [x, e_n]).
    pub fn center(&self, tol: f64) -> LinearSubspace {
        let n = self.dim;
        // rows indexed by (j, k): coefficient of x_i in [x, e_j]_k is c[k][(i,j)]
        let mut m = DMatrix::zeros(n * n, n);
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    m[(j * n + k, i)] = self.c[k][(i, j)];
                }
            }
        }
        LinearSubspace::from_orthonormal(linalg::nullspace(&m, tol), n)
    }

    /// Orthonormal basis (Frobenius) of the derivation algebra: the nullspace
    /// of the linear system δ[e_i,e_j] − [δe_i, e_j] − [e_i, δe_j] = 0 over
    /// all pairs i < j.
    pub fn derivations(&self, tol: f64) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let rows = pairs.len() * n;
        // unknown δ flattened column-major: δ[(p,q)] at index q*n + p
        let mut a = DMatrix::zeros(rows.max(1), n * n);
        for (pi, &(i, j)) in pairs.iter().enumerate() {
            for l in 0..n {
                let r = pi * n + l;
                // δ [e_i, e_j]: Σ_m c[m][(i,j)] δ_{l,m}
                for m in 0..n {
                    a[(r, m * n + l)] += self.c[m][(i, j)];
                }
                // −[δ e_i, e_j]: −Σ_s δ_{s,i} c[l][(s,j)]
                for s in 0..n {
                    a[(r, i * n + s)] -= self.c[l][(s, j)];
                }
                // −[e_i, δ e_j]: −Σ_s δ_{s,j} c[l][(i,s)]
                for s in 0..n {
                    a[(r, j * n + s)] -= self.c[l][(i, s)];
                }
            }
        }
        linalg::nullspace(&a, tol)
            .into_iter()
            .map(|v| DMatrix::from_fn(n, n, |p, q| v[q * n + p]))
            .collect()
    }

    /// Killing form K(x, y) = Tr(ad_x ad_y).
    pub fn killing_form(&self) -> BilinearForm {
        let ads = self.ad_basis();
        let n = self.dim;
        let m = DMatrix::from_fn(n, n, |i, j| (&ads[i] * &ads[j]).trace());
        BilinearForm {
            matrix: linalg::symmetrize(&m),
            kind: FormKind::Killing,
        }
    }

    /// Is `[U, g] ⊆ U`? Returns the verdict and the largest projection of a
    /// bracket onto the orthogonal complement of U.
    pub fn ideal_check(&self, u: &LinearSubspace, tol: f64) -> IdealCheck {
        let mut residual = 0.0f64;
        for b in u.basis() {
            for j in 0..self.dim {
                let w = self.bracket(b, &self.basis_vector(j));
                residual = residual.max(linalg::residual_against_span(&w, u.basis()));
            }
        }
        IdealCheck {
            is_ideal: residual <= tol,
            residual,
        }
    }

    /// Smallest ideal containing `seed`: iterate U ← U + [g, U] until the
    /// dimension stabilizes, re-orthonormalizing after every step.
    pub fn ideal_closure(&self, seed: &[DVector<f64>], tol: f64) -> LinearSubspace {
        let mut basis = linalg::orthonormalize(seed, tol);
        loop {
            let mut extended = basis.clone();
            for b in &basis {
                for j in 0..self.dim {
                    extended.push(self.bracket(&self.basis_vector(j), b));
                }
            }
            let next = linalg::orthonormalize(&extended, tol);
            if next.len() == basis.len() {
                return LinearSubspace::from_orthonormal(next, self.dim);
            }
            basis = next;
        }
    }

    /// Randomized simplicity test: look for a proper invariant subspace of
    /// the adjoint representation by closing eigen-structure candidates of
    /// ad_x for random x. A returned witness is always certified by
    /// [`LieAlgebra::ideal_check`]; "simple" verdicts are probabilistic.
    pub fn classify_simplicity(&self, tol: f64, trials: usize, seed: u64) -> SimplicityReport {
        let n = self.dim;
        let max_c = self
            .c
            .iter()
            .map(|ck| ck.amax())
            .fold(0.0f64, f64::max);
        if max_c <= tol {
            return SimplicityReport {
                verdict: SimplicityVerdict::Abelian,
                trials: 0,
            };
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut witness_candidates: Vec<LinearSubspace> = Vec::new();
        let mut consider = |cand: LinearSubspace, alg: &LieAlgebra| -> Option<LinearSubspace> {
            if cand.dim() == 0 || cand.dim() >= n {
                return None;
            }
            let closed = alg.ideal_closure(cand.basis(), 1e-10);
            if closed.dim() == 0 || closed.dim() >= n {
                return None;
            }
            let check = alg.ideal_check(&closed, tol.max(1e-8));
            if check.is_ideal {
                Some(closed)
            } else {
                None
            }
        };

        // the center is an ideal whenever it is proper and nonzero
        let center = self.center(1e-10);
        if let Some(w) = consider(center, self) {
            witness_candidates.push(w);
        }

        for _ in 0..trials {
            let x = DVector::from_fn(n, |_, _| {
                rand::Rng::sample(&mut rng, rand_distr::StandardNormal)
            });
            let ad = self.ad_matrix(&x);

            let mut cands: Vec<LinearSubspace> = Vec::new();
            // image and kernel of ad_x
            let cols: Vec<DVector<f64>> = (0..n).map(|j| ad.column(j).into()).collect();
            cands.push(LinearSubspace::from_spanning(&cols, n, 1e-10));
            cands.push(LinearSubspace::from_orthonormal(
                linalg::nullspace(&ad, 1e-10),
                n,
            ));
            // real invariant subspaces from the eigenstructure of ad_x
            for sub in real_eigen_subspaces(&ad) {
                cands.push(sub);
            }
            cands.sort_by_key(|c| c.dim());
            for cand in cands {
                if let Some(w) = consider(cand, self) {
                    witness_candidates.push(w);
                }
            }
            if !witness_candidates.is_empty() {
                break;
            }
        }

        match witness_candidates.into_iter().min_by_key(|w| w.dim()) {
            Some(w) => SimplicityReport {
                verdict: SimplicityVerdict::HasIdeal(w),
                trials,
            },
            None => SimplicityReport {
                verdict: SimplicityVerdict::Simple,
                trials,
            },
        }
    }
}

/// Real invariant subspaces of a real operator: eigenspaces for real
/// eigenvalues, (Re v, Im v) planes for complex pairs.
fn real_eigen_subspaces(m: &DMatrix<f64>) -> Vec<LinearSubspace> {
    let n = m.nrows();
    let eig = m.clone().complex_eigenvalues();
    let mut spaces = Vec::new();
    let mut seen: Vec<nalgebra::Complex<f64>> = Vec::new();
    let scale = 1.0 + m.amax();
    for lam in eig.iter() {
        if seen.iter().any(|s| (s - lam).norm() < 1e-8 * scale) {
            continue;
        }
        seen.push(*lam);
        if lam.im.abs() < 1e-10 * scale {
            let shifted = m - DMatrix::identity(n, n) * lam.re;
            spaces.push(LinearSubspace::from_orthonormal(
                linalg::nullspace(&shifted, 1e-8),
                n,
            ));
        } else {
            // kernel of (M−λ)(M−λ̄) = M² − 2Re(λ)M + |λ|² I is the real
            // 2r-dim invariant subspace of the conjugate pair
            let quad = m * m - m * (2.0 * lam.re) + DMatrix::identity(n, n) * lam.norm_sqr();
            spaces.push(LinearSubspace::from_orthonormal(
                linalg::nullspace(&quad, 1e-8),
                n,
            ));
        }
    }
    spaces
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
    pub tol: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.antisymmetry_residual <= self.tol && self.jacobi_residual <= self.tol
    }

    pub fn into_result(self) -> Result<Self> {
        if self.antisymmetry_residual > self.tol {
            return Err(Error::Antisymmetry {
                residual: self.antisymmetry_residual,
                tol: self.tol,
            });
        }
        if self.jacobi_residual > self.tol {
            return Err(Error::Jacobi {
                residual: self.jacobi_residual,
                tol: self.tol,
            });
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    TraceForm,
    Killing,
}

/// Symmetric bilinear form in the algebra basis.
#[derive(Debug, Clone)]
pub struct BilinearForm {
    pub matrix: DMatrix<f64>,
    pub kind: FormKind,
}

impl BilinearForm {
    pub fn evaluate(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.matrix * y)[(0, 0)]
    }

    /// (positive, negative, zero) eigenvalue counts, with |λ| ≤ tol·max|λ|
    /// counted as zero.
    pub fn signature(&self, tol: f64) -> (usize, usize, usize) {
        let (vals, _) = linalg::sym_eigen_sorted(&self.matrix);
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let mut pos = 0;
        let mut neg = 0;
        let mut zero = 0;
        for &v in vals.iter() {
            if v.abs() <= tol * scale {
                zero += 1;
            } else if v > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        (pos, neg, zero)
    }
}

/// Subspace of R^n stored with an orthonormal basis.
#[derive(Debug, Clone)]
pub struct LinearSubspace {
    ambient_dim: usize,
    basis: Vec<DVector<f64>>,
}

impl LinearSubspace {
    pub fn from_spanning(vectors: &[DVector<f64>], ambient_dim: usize, tol: f64) -> Self {
        Self {
            ambient_dim,
            basis: linalg::orthonormalize(vectors, tol),
        }
    }

    pub fn from_orthonormal(basis: Vec<DVector<f64>>, ambient_dim: usize) -> Self {
        Self { ambient_dim, basis }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| DVector::from_fn(ambient_dim, |r, _| if r == i { 1.0 } else { 0.0 }))
            .collect();
        Self { ambient_dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Distance of `v` from this subspace.
    pub fn residual_of(&self, v: &DVector<f64>) -> f64 {
        linalg::residual_against_span(v, &self.basis)
    }

    /// Largest residual of the other basis against this span; zero iff
    /// `other ⊆ self` up to round-off.
    pub fn containment_residual(&self, other: &LinearSubspace) -> f64 {
        other
            .basis
            .iter()
            .map(|v| self.residual_of(v))
            .fold(0.0, f64::max)
    }

    /// Direct sum, assuming the two subspaces intersect trivially.
    pub fn sum(&self, other: &LinearSubspace) -> LinearSubspace {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        LinearSubspace::from_spanning(&all, self.ambient_dim, 1e-12)
    }
}

#[derive(Debug, Clone)]
pub struct IdealCheck {
    pub is_ideal: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub enum SimplicityVerdict {
    Simple,
    Abelian,
    HasIdeal(LinearSubspace),
}

/// Outcome of the randomized ideal search. A `Simple` verdict is
/// probabilistic (the search can in principle miss an ideal); witnesses are
/// certified.
#[derive(Debug, Clone)]
pub struct SimplicityReport {
    pub verdict: SimplicityVerdict,
    pub trials: usize,
}

impl SimplicityReport {
    pub fn is_simple(&self) -> bool {
        matches!(self.verdict, SimplicityVerdict::Simple)
    }
}
