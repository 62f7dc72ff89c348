//! Geometry of the space of determinant-one Euclidean metrics on R^n,
//! identified with positive definite symmetric matrices of determinant 1.
//!
//! The Riemannian norm is ‖δH‖²_H = Tr(δH·H⁻¹)², geodesics through a point
//! with square root P are t ↦ P·exp(tΣ)·P with Σ symmetric trace-free, and
//! the boundary at infinity is handled concretely through weighted flags of
//! unit directions at the identity.

use nalgebra::{DMatrix, DVector};

use crate::algebra::LinearSubspace;
use crate::error::{Error, Result};
use crate::linalg;

const DET_TOL: f64 = 1e-10;

/// Positive definite symmetric matrix of determinant one. The symmetric
/// square root and its inverse are cached at construction.
#[derive(Debug, Clone)]
pub struct MetricPoint {
    h: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl MetricPoint {
    /// Symmetrizes, checks positivity, and renormalizes the determinant
    /// multiplicatively (H ← H / det(H)^{1/n}).
    pub fn new(h: DMatrix<f64>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::Structure("metric must be a square matrix".into()));
        }
        let (vals, vecs) = linalg::sym_eigen_sorted(&h);
        let min = vals[n - 1];
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            });
        }
        // renormalize in log space for accuracy
        let log_det: f64 = vals.iter().map(|v| v.ln()).sum();
        let shift = log_det / n as f64;
        let adjusted: Vec<f64> = vals.iter().map(|v| (v.ln() - shift).exp()).collect();
        let diag = |f: &dyn Fn(f64) -> f64| -> DMatrix<f64> {
            let d = DVector::from_fn(n, |i, _| f(adjusted[i]));
            &vecs * DMatrix::from_diagonal(&d) * vecs.transpose()
        };
        Ok(Self {
            h: diag(&|x| x),
            sqrt: diag(&|x| x.sqrt()),
            inv_sqrt: diag(&|x| 1.0 / x.sqrt()),
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            h: DMatrix::identity(n, n),
            sqrt: DMatrix::identity(n, n),
            inv_sqrt: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Symmetric square root P with P² = H.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        &self.inv_sqrt * &self.inv_sqrt
    }

    pub fn det_drift(&self) -> f64 {
        (self.h.determinant() - 1.0).abs()
    }

    /// ‖δH‖_H = sqrt(Tr(δH·H⁻¹)²) for a symmetric displacement δH.
    pub fn riemannian_norm(&self, delta: &DMatrix<f64>) -> f64 {
        let m = delta * self.inverse();
        (&m * &m).trace().max(0.0).sqrt()
    }

    /// Pullback of `g ∈ SL(n)`: H ↦ gᵀ H g.
    pub fn pullback(&self, g: &DMatrix<f64>) -> Result<MetricPoint> {
        MetricPoint::new(g.transpose() * &self.h * g)
    }

    /// Geodesic through this point: P·exp(tΣ)·P with Σ the normal form of
    /// `dir`. At t = 0 this returns the base point.
    pub fn geodesic(&self, dir: &TangentDirection, t: f64) -> MetricPoint {
        let inner = linalg::sym_exp(&(dir.sigma() * t));
        let h = &self.sqrt * inner * &self.sqrt;
        MetricPoint::new(h).expect("geodesic stays positive definite")
    }

    /// Geodesic distance ‖log(H₁^{-1/2} H₂ H₁^{-1/2})‖_F.
    pub fn distance(&self, other: &MetricPoint) -> f64 {
        let m = &self.inv_sqrt * &other.h * &self.inv_sqrt;
        linalg::sym_log(&m)
            .expect("congruence of SPD matrices is SPD")
            .norm()
    }

    /// Inverse of the geodesic map: the direction S with
    /// `self.geodesic(S, 1) = z`. Its norm equals the distance.
    pub fn log_map(&self, z: &MetricPoint) -> TangentDirection {
        let m = &self.inv_sqrt * &z.h * &self.inv_sqrt;
        let sigma = linalg::sym_log(&m).expect("congruence of SPD matrices is SPD");
        TangentDirection::from_sigma(self, &sigma)
    }

    /// Unit direction from this point towards `z` (the normalized log map);
    /// errors when the points coincide.
    pub fn unit_direction_to(&self, z: &MetricPoint) -> Result<TangentDirection> {
        let dir = self.log_map(z);
        dir.normalized()
    }
}

/// Tangent vector at a metric point, stored as the ambient symmetric
/// displacement S = P·Σ·P with Σ symmetric and trace-free (the normal form
/// at the identity after transport).
#[derive(Debug, Clone)]
pub struct TangentDirection {
    s: DMatrix<f64>,
    sigma: DMatrix<f64>,
    base: MetricPoint,
}

impl TangentDirection {
    /// Projects onto the tangent space at `base`: Σ is symmetrized and made
    /// trace-free, and S rebuilt as P·Σ·P.
    pub fn new(base: &MetricPoint, s: &DMatrix<f64>) -> Self {
        let sigma = linalg::symmetrize(&(base.inv_sqrt() * s * base.inv_sqrt()));
        Self::from_sigma(base, &sigma)
    }

    /// Builds from the transported normal form at the identity.
    pub fn from_sigma(base: &MetricPoint, sigma: &DMatrix<f64>) -> Self {
        let n = sigma.nrows();
        let mut sym = linalg::symmetrize(sigma);
        let shift = sym.trace() / n as f64;
        for i in 0..n {
            sym[(i, i)] -= shift;
        }
        let s = base.sqrt() * &sym * base.sqrt();
        Self {
            s,
            sigma: sym,
            base: base.clone(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    /// Normal form Σ = P⁻¹·S·P⁻¹ at the identity.
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn base(&self) -> &MetricPoint {
        &self.base
    }

    pub fn norm(&self) -> f64 {
        self.sigma.norm()
    }

    pub fn scale(&self, t: f64) -> TangentDirection {
        Self {
            s: &self.s * t,
            sigma: &self.sigma * t,
            base: self.base.clone(),
        }
    }

    pub fn normalized(&self) -> Result<TangentDirection> {
        let n = self.norm();
        if n < 1e-13 {
            return Err(Error::ZeroDirection);
        }
        Ok(self.scale(1.0 / n))
    }

    /// Riemannian inner product at the common base point.
    pub fn inner(&self, other: &TangentDirection) -> f64 {
        (&self.sigma * &other.sigma).trace()
    }

    /// Angle in [0, π] between two directions at the same base point.
    pub fn angle_to(&self, other: &TangentDirection) -> f64 {
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        (self.inner(other) / denom).clamp(-1.0, 1.0).acos()
    }
}

/// Strictly increasing chain of subspaces with strictly decreasing weights,
/// normalized so that Σ nᵢμᵢ = 0 and Σ nᵢμᵢ² = 1.
#[derive(Debug, Clone)]
pub struct WeightedFlag {
    subspaces: Vec<LinearSubspace>,
    weights: Vec<f64>,
    multiplicities: Vec<usize>,
}

impl WeightedFlag {
    pub fn subspaces(&self) -> &[LinearSubspace] {
        &self.subspaces
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn ambient_dim(&self) -> usize {
        self.subspaces.last().map_or(0, |s| s.ambient_dim())
    }

    /// (Σ nᵢμᵢ, Σ nᵢμᵢ² − 1); both are ≤ 1e−10 in magnitude by construction.
    pub fn weight_identity_residuals(&self) -> (f64, f64) {
        let s1: f64 = self
            .weights
            .iter()
            .zip(&self.multiplicities)
            .map(|(w, &n)| w * n as f64)
            .sum();
        let s2: f64 = self
            .weights
            .iter()
            .zip(&self.multiplicities)
            .map(|(w, &n)| w * w * n as f64)
            .sum();
        (s1, s2 - 1.0)
    }
}

/// Weighted flag of a unit trace-free symmetric direction at the identity:
/// eigenvalues clustered at relative gap `gap_tol` become the weights, the
/// subspaces are cumulative eigenspace sums in decreasing-weight order.
pub fn flag_of_direction(dir: &TangentDirection, gap_tol: f64) -> Result<WeightedFlag> {
    let sigma = dir.sigma();
    let n = sigma.nrows();
    let (vals, vecs) = linalg::sym_eigen_sorted(sigma);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    // cluster eigenvalues separated by less than gap_tol (relative)
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for i in 0..n {
        match clusters.last_mut() {
            Some((w, idxs)) if (*w - vals[i]).abs() <= gap_tol * scale => {
                // running mean keeps the cluster weight centered
                let m = idxs.len() as f64;
                *w = (*w * m + vals[i]) / (m + 1.0);
                idxs.push(i);
            }
            _ => clusters.push((vals[i], vec![i])),
        }
    }
    if clusters.len() < 2 {
        return Err(Error::DegenerateDirection { gap_tol });
    }

    // renormalize weights to satisfy the flag identities exactly
    let total: f64 = clusters.iter().map(|(w, ix)| w * ix.len() as f64).sum();
    let mean = total / n as f64;
    let mut weights: Vec<f64> = clusters.iter().map(|(w, _)| w - mean).collect();
    let norm: f64 = clusters
        .iter()
        .zip(&weights)
        .map(|((_, ix), w)| w * w * ix.len() as f64)
        .sum::<f64>()
        .sqrt();
    if norm < 1e-13 {
        return Err(Error::DegenerateDirection { gap_tol });
    }
    for w in &mut weights {
        *w /= norm;
    }

    let mut subspaces = Vec::new();
    let mut multiplicities = Vec::new();
    let mut acc: Vec<DVector<f64>> = Vec::new();
    for (_, idxs) in &clusters {
        for &i in idxs {
            acc.push(vecs.column(i).into());
        }
        subspaces.push(LinearSubspace::from_orthonormal(acc.clone(), n));
        multiplicities.push(idxs.len());
    }
    Ok(WeightedFlag {
        subspaces,
        weights,
        multiplicities,
    })
}

/// Outcome of the boundary-limit estimate: the direction at the largest
/// schedule entry together with the Cauchy-increment certificate against the
/// integrated contraction bound.
#[derive(Debug, Clone)]
pub struct BoundaryLimit {
    pub direction: TangentDirection,
    /// Angular increments between successive schedule entries.
    pub increments: Vec<f64>,
    /// Integrated bounds log((R'−d)·R / ((R−d)·R')) for those increments.
    pub bounds: Vec<f64>,
    /// All increments within 10% of the bound.
    pub within_tolerance: bool,
}

/// Estimate lim_R Θ_x(exp_y(R·ν)) over an increasing schedule of radii.
/// Errors when an observed increment exceeds twice the integrated bound
/// (a geometry violation), or when the schedule is unusable.
pub fn boundary_limit(
    x: &MetricPoint,
    y: &MetricPoint,
    nu: &TangentDirection,
    schedule: &[f64],
) -> Result<BoundaryLimit> {
    let d = x.distance(y);
    if schedule.len() < 2 {
        return Err(Error::Precondition("schedule needs at least two radii".into()));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("schedule must be increasing".into()));
    }
    if schedule[0] <= 2.0 * d {
        return Err(Error::Precondition(format!(
            "schedule must start above 2·d(x,y) = {:.3e}",
            2.0 * d
        )));
    }

    let mut directions = Vec::with_capacity(schedule.len());
    for &r in schedule {
        let far = y.geodesic(nu, r);
        directions.push(x.unit_direction_to(&far)?);
    }
    let mut increments = Vec::new();
    let mut bounds = Vec::new();
    let mut within = true;
    for i in 1..directions.len() {
        let inc = directions[i - 1].angle_to(&directions[i]);
        let (r0, r1) = (schedule[i - 1], schedule[i]);
        let bound = (((r1 - d) * r0) / ((r0 - d) * r1)).ln();
        if inc > 2.0 * bound + 1e-9 {
            return Err(Error::GeometryViolation(format!(
                "boundary increment {inc:.3e} exceeds twice the integrated bound {bound:.3e} on [{r0}, {r1}]"
            )));
        }
        if inc > 1.1 * bound + 1e-12 {
            within = false;
        }
        increments.push(inc);
        bounds.push(bound);
    }
    Ok(BoundaryLimit {
        direction: directions.pop().expect("nonempty schedule"),
        increments,
        bounds,
        within_tolerance: within,
    })
}

/// Geometric radius schedule for [`boundary_limit`], starting above 2.5·d.
pub fn default_schedule(d: f64, r_max: f64) -> Vec<f64> {
    let mut r = (2.5 * d).max(1.0);
    let mut schedule = Vec::new();
    while r < r_max {
        schedule.push(r);
        r *= 1.5;
    }
    schedule.push(r_max.max(r));
    schedule
}

/// Does `h ∈ SL(n)` fix the boundary point of the ray through `dir`?
/// Tracks δ_R = ‖log(M_R·M_Rᵀ)‖² for M_R = exp(−R·S/2)·h·exp(R·S/2) on an
/// R-grid and decides boundedness by the tail slope of δ_R^{1/2}, whose
/// asymptotic growth rate for a non-fixing h is at least the smallest
/// weight gap of the flag.
pub fn boundary_action_fixes(
    h: &DMatrix<f64>,
    dir: &TangentDirection,
    r_max: f64,
) -> Result<bool> {
    let sigma = dir.sigma();
    let flag = flag_of_direction(dir, 1e-6)?;
    let min_gap = flag
        .weights()
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);

    // keep exp() well inside f64 range
    let lam_max = flag
        .weights()
        .iter()
        .fold(0.0f64, |m, w| m.max(w.abs()))
        .max(1e-6);
    let r_cap = (500.0 / lam_max).min(r_max);

    let grid: Vec<f64> = (0..=16).map(|i| r_cap * (i as f64) / 16.0).collect();
    let mut delta_sqrt = Vec::with_capacity(grid.len());
    for &r in &grid {
        let e_plus = linalg::sym_exp(&(sigma * (r / 2.0)));
        let e_minus = linalg::sym_exp(&(sigma * (-r / 2.0)));
        let m = &e_minus * h * &e_plus;
        let mmt = linalg::symmetrize(&(&m * m.transpose()));
        let log = linalg::sym_log(&mmt).map_err(|_| {
            Error::GeometryViolation("M_R·M_Rᵀ lost positive definiteness".into())
        })?;
        delta_sqrt.push(log.norm());
    }
    // slope over the last quarter of the grid: ~0 when bounded, ≥ √2·gap
    // when some entry blows up
    let quarter = grid.len() / 4;
    let i1 = grid.len() - 1;
    let i0 = i1 - quarter;
    let slope = (delta_sqrt[i1] - delta_sqrt[i0]) / (grid[i1] - grid[i0]);
    Ok(slope < 0.5 * min_gap)
}

/// Block-triangularity of `h` with respect to the flag of a direction:
/// the predicted criterion for [`boundary_action_fixes`].
pub fn preserves_flag(h: &DMatrix<f64>, flag: &WeightedFlag, tol: f64) -> bool {
    flag.subspaces()
        .iter()
        .take(flag.subspaces().len().saturating_sub(1))
        .all(|f| {
            f.basis()
                .iter()
                .all(|v| f.residual_of(&(h * v)) <= tol * (1.0 + h.amax()))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_metric(n: usize, rng: &mut impl rand::Rng) -> MetricPoint {
        let g = linalg::random_sl(n, rng);
        MetricPoint::new(g.transpose() * g).unwrap()
    }

    fn random_direction(base: &MetricPoint, rng: &mut impl rand::Rng) -> TangentDirection {
        let sigma = linalg::random_unit_traceless_symmetric(base.dim(), rng);
        TangentDirection::from_sigma(base, &sigma)
    }

    #[test]
    fn riemannian_norm_examples() {
        let id = MetricPoint::identity(2);
        let delta = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_relative_eq!(id.riemannian_norm(&delta), 2f64.sqrt(), epsilon = 1e-14);

        // homogeneity
        assert_relative_eq!(
            id.riemannian_norm(&(&delta * -3.5)),
            3.5 * 2f64.sqrt(),
            epsilon = 1e-13
        );

        let base = MetricPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 0.25])))
            .unwrap();
        let delta = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, -0.25]));
        assert_relative_eq!(base.riemannian_norm(&delta), 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn geodesic_diagonal_case_and_t_zero() {
        let id = MetricPoint::identity(2);
        let s = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        let dir = TangentDirection::new(&id, &s);
        for &t in &[0.25, 1.0, 2.0] {
            let p = id.geodesic(&dir, t);
            assert_relative_eq!(p.matrix()[(0, 0)], t.exp(), epsilon = 1e-12);
            assert_relative_eq!(p.matrix()[(1, 1)], (-t).exp(), epsilon = 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = random_metric(3, &mut rng);
        let dir = random_direction(&base, &mut rng);
        let back = base.geodesic(&dir, 0.0);
        assert_relative_eq!(back.matrix(), base.matrix(), epsilon = 1e-12);
    }

    #[test]
    fn geodesic_group_translation_equivariance() {
        // geodesic(gᵀg, gᵀSg, t) = gᵀ·geodesic(I, S, t)·g
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = MetricPoint::identity(3);
        for _ in 0..20 {
            let g = linalg::random_sl(3, &mut rng);
            let sigma = linalg::random_unit_traceless_symmetric(3, &mut rng);
            let dir_id = TangentDirection::from_sigma(&id, &sigma);
            let base = MetricPoint::new(g.transpose() * &g).unwrap();
            let dir_base = TangentDirection::new(&base, &(g.transpose() * &sigma * &g));
            let lhs = base.geodesic(&dir_base, 0.7);
            let rhs = g.transpose() * id.geodesic(&dir_id, 0.7).matrix() * &g;
            assert_relative_eq!(lhs.matrix(), &rhs, epsilon = 1e-9);
        }
    }

    #[test]
    fn distance_examples_and_properties() {
        let id = MetricPoint::identity(3);
        let z = MetricPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            2f64.exp(),
            (-1f64).exp(),
            (-1f64).exp(),
        ])))
        .unwrap();
        assert_relative_eq!(id.distance(&z), 6f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(z.distance(&z), 0.0, epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = random_metric(3, &mut rng);
            let b = random_metric(3, &mut rng);
            let c = random_metric(3, &mut rng);
            let ab = a.distance(&b);
            assert_relative_eq!(ab, b.distance(&a), epsilon = 1e-10);
            assert!(ab <= a.distance(&c) + c.distance(&b) + 1e-10);
        }
    }

    #[test]
    fn distance_is_sl_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_metric(3, &mut rng);
            let b = random_metric(3, &mut rng);
            let g = linalg::random_sl(3, &mut rng);
            let ga = a.pullback(&g).unwrap();
            let gb = b.pullback(&g).unwrap();
            assert_relative_eq!(a.distance(&b), ga.distance(&gb), epsilon = 1e-8);
        }
    }

    #[test]
    fn log_map_roundtrip_and_norm() {
        let id = MetricPoint::identity(2);
        let z = MetricPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1f64.exp(),
            (-1f64).exp(),
        ])))
        .unwrap();
        let dir = id.log_map(&z);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0]));
        assert_relative_eq!(dir.matrix(), &expected, epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let x = random_metric(3, &mut rng);
            let z = random_metric(3, &mut rng);
            let dir = x.log_map(&z);
            let back = x.geodesic(&dir, 1.0);
            assert!((back.matrix() - z.matrix()).norm() <= 1e-8);
            assert_relative_eq!(dir.norm(), x.distance(&z), epsilon = 1e-10);
        }
    }

    #[test]
    fn unit_direction_is_normalized_and_errors_at_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_metric(3, &mut rng);
        let z = random_metric(3, &mut rng);
        let dir = x.unit_direction_to(&z).unwrap();
        assert_relative_eq!(dir.norm(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            x.unit_direction_to(&x),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn exponential_map_is_distance_increasing() {
        // Property (*) on random pairs of directions at random base points
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let base = random_metric(3, &mut rng);
            let s1 = random_direction(&base, &mut rng).scale(1.5);
            let s2 = random_direction(&base, &mut rng).scale(0.8);
            let p1 = base.geodesic(&s1, 1.0);
            let p2 = base.geodesic(&s2, 1.0);
            let diff = (s1.sigma() - s2.sigma()).norm();
            assert!(p1.distance(&p2) >= diff - 1e-8);
        }
    }

    #[test]
    fn geodesics_are_unit_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = random_metric(3, &mut rng);
        let dir = random_direction(&base, &mut rng);
        for &t in &[0.1, 1.0, 5.0, 10.0] {
            let p = base.geodesic(&dir, t);
            assert_relative_eq!(base.distance(&p), t * dir.norm(), epsilon = 1e-8);
        }
    }

    #[test]
    fn boundary_limit_identity_at_same_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_metric(3, &mut rng);
        let nu = random_direction(&x, &mut rng);
        let out = boundary_limit(&x, &x, &nu, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(out.direction.angle_to(&nu) <= 1e-9);
        assert!(out.within_tolerance);
    }

    #[test]
    fn boundary_limit_along_common_geodesic() {
        // x and y on the same geodesic: the limit direction at x is the
        // same diagonal direction (closed-form diagonal computation)
        let id = MetricPoint::identity(2);
        let y = MetricPoint::new(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1f64.exp(),
            (-1f64).exp(),
        ])))
        .unwrap();
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])) / 2f64.sqrt();
        let nu = TangentDirection::from_sigma(&y, &sigma);
        let schedule = default_schedule(id.distance(&y), 60.0);
        let out = boundary_limit(&id, &y, &nu, &schedule).unwrap();
        let expected = TangentDirection::from_sigma(&id, &sigma);
        assert!(out.direction.angle_to(&expected) <= 1e-9);
        assert!(out.within_tolerance);
    }

    #[test]
    fn boundary_maps_satisfy_cocycle_at_finite_radius() {
        // F_{R,x,z} = F_{R',x,y} ∘ F_{R,y,z} with R' = d(y, exp_z(Rν)) is an
        // exact identity; both paths are computed numerically
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let x = random_metric(3, &mut rng);
            let y = random_metric(3, &mut rng);
            let z = random_metric(3, &mut rng);
            let nu = random_direction(&z, &mut rng);
            let r = 40.0;
            let far = z.geodesic(&nu, r);
            let direct = x.unit_direction_to(&far).unwrap();
            let via_y = y.unit_direction_to(&far).unwrap();
            let r_prime = y.distance(&far);
            let composed = x
                .unit_direction_to(&y.geodesic(&via_y, r_prime))
                .unwrap();
            assert!(direct.angle_to(&composed) <= 1e-6);
        }
    }

    #[test]
    fn boundary_limit_certificate_respects_lemma3_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let x = random_metric(3, &mut rng);
            let y = random_metric(3, &mut rng);
            let nu = random_direction(&y, &mut rng);
            let schedule = default_schedule(x.distance(&y), 80.0);
            let out = boundary_limit(&x, &y, &nu, &schedule).unwrap();
            assert!(
                out.within_tolerance,
                "increments {:?} vs bounds {:?}",
                out.increments, out.bounds
            );
        }
    }

    #[test]
    fn flag_of_direction_examples() {
        let id = MetricPoint::identity(3);
        let sigma =
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -2.0])) / 6f64.sqrt();
        let dir = TangentDirection::from_sigma(&id, &sigma);
        let flag = flag_of_direction(&dir, 1e-6).unwrap();
        assert_eq!(flag.multiplicities(), &[2, 1]);
        assert_relative_eq!(flag.weights()[0], 1.0 / 6f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(flag.weights()[1], -2.0 / 6f64.sqrt(), epsilon = 1e-12);
        // F_1 = span(e1, e2)
        let f1 = &flag.subspaces()[0];
        assert_eq!(f1.dim(), 2);
        assert!(f1.residual_of(&DVector::from_vec(vec![1.0, 0.0, 0.0])) < 1e-12);
        assert!(f1.residual_of(&DVector::from_vec(vec![0.0, 1.0, 0.0])) < 1e-12);
        let (r1, r2) = flag.weight_identity_residuals();
        assert!(r1.abs() <= 1e-10 && r2.abs() <= 1e-10);

        // n = 2 full flag
        let id2 = MetricPoint::identity(2);
        let sigma2 = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])) / 2f64.sqrt();
        let dir2 = TangentDirection::from_sigma(&id2, &sigma2);
        let flag2 = flag_of_direction(&dir2, 1e-6).unwrap();
        assert_eq!(flag2.multiplicities(), &[1, 1]);

        // negation reverses the chain
        let neg = flag_of_direction(&dir.scale(-1.0), 1e-6).unwrap();
        assert_eq!(neg.multiplicities(), &[1, 2]);
        assert_relative_eq!(neg.weights()[0], 2.0 / 6f64.sqrt(), epsilon = 1e-12);

        // all eigenvalues clustered: degenerate
        let tiny = TangentDirection {
            s: DMatrix::zeros(3, 3),
            sigma: DMatrix::zeros(3, 3),
            base: MetricPoint::identity(3),
        };
        assert!(matches!(
            flag_of_direction(&tiny, 1e-6),
            Err(Error::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn boundary_action_regression_pair() {
        let id = MetricPoint::identity(3);
        let sigma =
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -2.0])) / 6f64.sqrt();
        let dir = TangentDirection::from_sigma(&id, &sigma);

        let mut h = DMatrix::identity(3, 3);
        h[(2, 0)] = 1.0; // e1 ↦ e1 + e3: violates the flag
        assert!(!boundary_action_fixes(&h, &dir, 40.0).unwrap());
        assert!(boundary_action_fixes(&h.transpose(), &dir, 40.0).unwrap());
        assert!(boundary_action_fixes(&DMatrix::identity(3, 3), &dir, 40.0).unwrap());

        let flag = flag_of_direction(&dir, 1e-6).unwrap();
        assert!(!preserves_flag(&h, &flag, 1e-9));
        assert!(preserves_flag(&h.transpose(), &flag, 1e-9));
    }

    #[test]
    fn metric_point_determinant_is_renormalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let a = linalg::random_gaussian_matrix(4, &mut rng);
            let spd = a.transpose() * &a + DMatrix::identity(4, 4) * 0.1;
            let p = MetricPoint::new(spd).unwrap();
            assert!(p.det_drift() <= DET_TOL);
        }
    }
}
