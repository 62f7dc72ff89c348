//! Standalone verification of the scalar/ODE ingredients behind the
//! distance-increasing property, plus the Property (*) sampling suite.
//! Violations here are theorems failing, so they are hard errors.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::hspace::{MetricPoint, TangentDirection};
use crate::linalg;

/// dV/dt = [S, V] + α with V(0) = 0 for symmetric S, α.
#[derive(Debug, Clone)]
pub struct OdeProblem {
    pub s: DMatrix<f64>,
    pub alpha: DMatrix<f64>,
    pub t_max: f64,
    pub steps: usize,
}

impl OdeProblem {
    pub fn new(s: DMatrix<f64>, alpha: DMatrix<f64>, t_max: f64, steps: usize) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n || alpha.nrows() != n || alpha.ncols() != n {
            return Err(Error::Structure("S and α must be square of equal size".into()));
        }
        if (s.clone() - s.transpose()).amax() > 1e-12 || (alpha.clone() - alpha.transpose()).amax() > 1e-12
        {
            return Err(Error::Structure("S and α must be symmetric".into()));
        }
        if steps == 0 || t_max <= 0.0 {
            return Err(Error::Structure("need t_max > 0 and steps ≥ 1".into()));
        }
        Ok(Self {
            s,
            alpha,
            t_max,
            steps,
        })
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    /// Largest relative deviation between the closed form and the RK4
    /// integrator over the sample times.
    pub integrator_deviation: f64,
}

/// Closed-form solution in the eigenbasis of S:
/// Ṽ_ij(t) = ((e^{λ_ij t} − 1)/λ_ij)·α̃_ij with λ_ij = λ_i − λ_j,
/// cross-checked against a classical RK4 integrator.
pub fn solve_ode(p: &OdeProblem) -> Result<OdeSolution> {
    let (vals, vecs) = linalg::sym_eigen_sorted(&p.s);
    let n = vals.len();
    let alpha_tilde = vecs.transpose() * &p.alpha * &vecs;

    let times: Vec<f64> = (0..=p.steps)
        .map(|k| p.t_max * k as f64 / p.steps as f64)
        .collect();
    let closed: Vec<DMatrix<f64>> = times
        .iter()
        .map(|&t| {
            let vt = DMatrix::from_fn(n, n, |i, j| {
                let lam = vals[i] - vals[j];
                phi(lam * t) * t * alpha_tilde[(i, j)]
            });
            &vecs * vt * vecs.transpose()
        })
        .collect();

    // RK4 on the matrix ODE with enough substeps for a 1e−6 relative match
    let scale = p.s.norm().max(1.0);
    let substeps = ((p.t_max * scale * 50.0).ceil() as usize).clamp(200, 20_000);
    let dt = p.t_max / substeps as f64;
    let rhs = |v: &DMatrix<f64>| &p.s * v - v * &p.s + &p.alpha;
    let mut v = DMatrix::zeros(n, n);
    let mut deviation = 0.0f64;
    let mut next_sample = 0usize;
    let mut check = |step: usize, v: &DMatrix<f64>, deviation: &mut f64, next_sample: &mut usize| {
        let t = step as f64 * dt;
        while *next_sample < times.len() && times[*next_sample] <= t + 1e-12 {
            let reference = &closed[*next_sample];
            let diff = (v - reference).norm() / reference.norm().max(1.0);
            *deviation = deviation.max(diff);
            *next_sample += 1;
        }
    };
    check(0, &v, &mut deviation, &mut next_sample);
    for step in 1..=substeps {
        let k1 = rhs(&v);
        let k2 = rhs(&(&v + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&v + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&v + &k3 * dt));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        check(step, &v, &mut deviation, &mut next_sample);
    }
    if deviation > 1e-6 {
        return Err(Error::InternalConsistency(format!(
            "closed form and RK4 integrator disagree (relative {deviation:.3e})"
        )));
    }
    Ok(OdeSolution {
        times,
        values: closed,
        integrator_deviation: deviation,
    })
}

/// (e^x − 1)/x with the removable singularity at 0.
fn phi(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        // series: 1 + x/2 + x²/6 + x³/24
        1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        x.exp_m1() / x
    }
}

/// Q(x) = 2(cosh x − 1)/x², even, ≥ 1, with Q(0) = 1.
pub fn q_factor(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 12.0 + x2 * x2 / 360.0
    } else {
        2.0 * (x.cosh() - 1.0) / (x * x)
    }
}

#[derive(Debug, Clone)]
pub struct Lemma7Report {
    pub margins: Vec<(f64, f64)>,
    /// min over the grid of Tr V(t)² − t²·Tr α².
    pub min_margin: f64,
}

/// Check Tr V(t)² ≥ t²·Tr α² on a time grid.
pub fn lemma7_check(p: &OdeProblem, t_grid: &[f64]) -> Result<Lemma7Report> {
    let (vals, vecs) = linalg::sym_eigen_sorted(&p.s);
    let n = vals.len();
    let alpha_tilde = vecs.transpose() * &p.alpha * &vecs;
    let tr_alpha_sq = p.alpha.norm_squared();
    let mut margins = Vec::with_capacity(t_grid.len());
    let mut min_margin = f64::INFINITY;
    for &t in t_grid {
        let vt = DMatrix::from_fn(n, n, |i, j| {
            let lam = vals[i] - vals[j];
            phi(lam * t) * t * alpha_tilde[(i, j)]
        });
        // Tr V² for the (generally non-symmetric) V
        let tr_v_sq = (&vt * &vt).trace();
        let margin = tr_v_sq - t * t * tr_alpha_sq;
        min_margin = min_margin.min(margin);
        margins.push((t, margin));
        if margin < -1e-10 * (1.0 + t * t * tr_alpha_sq) {
            return Err(Error::InvariantBreach(format!(
                "Tr V(t)² ≥ t²·Tr α² violated at t = {t} (margin {margin:.3e})"
            )));
        }
    }
    Ok(Lemma7Report {
        margins,
        min_margin,
    })
}

#[derive(Debug, Clone)]
pub struct PropertyStarReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub violations: usize,
    /// min over samples of distance(exp S1, exp S2) − ‖S1 − S2‖.
    pub min_gap: f64,
    /// min over samples of Tr v² − Tr α² (the infinitesimal form at t = 1).
    pub min_infinitesimal_margin: f64,
}

/// Sample the distance-increasing property of the exponential map at random
/// base points, together with its infinitesimal form through the ODE bound
/// at t = 1. Violations beyond the 1e−8 slack are hard errors.
pub fn property_star_suite(
    n: usize,
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<PropertyStarReport> {
    if n < 2 {
        return Err(Error::Precondition("need n ≥ 2".into()));
    }
    struct Sample {
        gap: f64,
        infinitesimal_margin: f64,
    }
    let results = exec::map_samples(mode, samples, |i| -> Result<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(exec::sample_seed(seed, i));
        let g = linalg::random_sl(n, &mut rng);
        let base = MetricPoint::new(g.transpose() * g)
            .expect("gᵀg is positive definite");
        let s1 = TangentDirection::from_sigma(
            &base,
            &(linalg::random_unit_traceless_symmetric(n, &mut rng) * 1.5),
        );
        let s2 = TangentDirection::from_sigma(
            &base,
            &(linalg::random_unit_traceless_symmetric(n, &mut rng) * 0.8),
        );
        let p1 = base.geodesic(&s1, 1.0);
        let p2 = base.geodesic(&s2, 1.0);
        let gap = p1.distance(&p2) - (s1.sigma() - s2.sigma()).norm();

        // infinitesimal form: dV/dt = [S, V] + α at t = 1 with S = Σ1 and
        // α the difference of the transported directions
        let alpha = linalg::symmetrize(&(s2.sigma() - s1.sigma()));
        let problem = OdeProblem::new(s1.sigma().clone(), alpha.clone(), 1.0, 1)?;
        let report = lemma7_check(&problem, &[1.0])?;
        Ok(Sample {
            gap,
            infinitesimal_margin: report.min_margin,
        })
    });

    let mut min_gap = f64::INFINITY;
    let mut min_inf = f64::INFINITY;
    let mut violations = 0;
    for r in results {
        let r = r?;
        if r.gap < -1e-8 {
            violations += 1;
        }
        min_gap = min_gap.min(r.gap);
        min_inf = min_inf.min(r.infinitesimal_margin);
    }
    let report = PropertyStarReport {
        n,
        samples,
        seed,
        violations,
        min_gap,
        min_infinitesimal_margin: min_inf,
    };
    if violations > 0 {
        return Err(Error::InvariantBreach(format!(
            "distance-increasing property violated on {violations} samples (min gap {min_gap:.3e})"
        )));
    }
    Ok(report)
}

/// Batch of seeded random Lemma-7 problems; used by the acceptance suite and
/// the benches.
pub fn lemma7_batch(
    n: usize,
    count: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<(f64, f64)> {
    let margins = exec::map_samples(mode, count, |i| -> Result<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(exec::sample_seed(seed, i));
        let s = linalg::random_symmetric(n, &mut rng);
        let alpha = linalg::random_symmetric(n, &mut rng);
        let t_grid: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
        let problem = OdeProblem::new(s, alpha, 3.0, 12)?;
        let report = lemma7_check(&problem, &t_grid)?;

        // commuting companion: α a polynomial in S gives exact equality
        let mut rng2 = ChaCha8Rng::seed_from_u64(exec::sample_seed(seed ^ 0xABCD, i));
        let s2 = linalg::random_symmetric(n, &mut rng2);
        let alpha2 = &s2 * &s2 * 0.3 + &s2 * 0.5;
        let problem2 = OdeProblem::new(s2, linalg::symmetrize(&alpha2), 2.0, 8)?;
        let report2 = lemma7_check(&problem2, &[0.5, 1.0, 2.0])?;
        let worst_equality = report2
            .margins
            .iter()
            .map(|(t, m)| m.abs() / (1.0 + t * t))
            .fold(0.0, f64::max);
        Ok((report.min_margin, worst_equality))
    });
    let mut min_margin = f64::INFINITY;
    let mut max_equality_error = 0.0f64;
    for m in margins {
        let (margin, eq) = m?;
        min_margin = min_margin.min(margin);
        max_equality_error = max_equality_error.max(eq);
    }
    Ok((min_margin, max_equality_error))
}
