//! The squared bracket norm as a function of the metric, its moment-map
//! gradient, the geodesic gradient flow with its convergence/divergence
//! dichotomy, and destabilizing-flag extraction for divergent flows.
//!
//! For a metric H with symmetric square root P, the bracket tensor
//! transported to the base point is b(x, y) = P·[P⁻¹x, P⁻¹y], and
//! F(H) = Σ_{a<b} |b(e_a, e_b)|². The gradient direction at H is P·m·P where
//! m is the trace-free symmetric matrix dual to ξ ↦ d/dt F(P·exp(tξ)·P)|₀.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::algebra::{LieAlgebra, LinearSubspace};
use crate::error::{Error, Result};
use crate::hspace::{self, MetricPoint, TangentDirection, WeightedFlag};

/// Slices of the transported bracket tensor: B_k = Σ_l P_{kl}·P⁻¹·C_l·P⁻¹.
fn transported_slices(alg: &LieAlgebra, h: &MetricPoint) -> Vec<DMatrix<f64>> {
    let n = alg.dim();
    let p = h.sqrt();
    let p_inv = h.inv_sqrt();
    let conjugated: Vec<DMatrix<f64>> = alg
        .structure_slices()
        .iter()
        .map(|c| p_inv * c * p_inv)
        .collect();
    (0..n)
        .map(|k| {
            let mut b = DMatrix::zeros(n, n);
            for (l, d) in conjugated.iter().enumerate() {
                let w = p[(k, l)];
                if w != 0.0 {
                    b += d * w;
                }
            }
            b
        })
        .collect()
}

/// F(H): squared norm of the bracket measured in the metric H.
pub fn functional_f(alg: &LieAlgebra, h: &MetricPoint) -> f64 {
    transported_slices(alg, h)
        .iter()
        .map(|b| b.norm_squared())
        .sum::<f64>()
        * 0.5
}

/// Moment-map gradient of F at H, as a tangent direction at H. Satisfies
/// d/dt F(geodesic(H, ξ, t))|₀ = ⟨gradient, ξ⟩_H.
pub fn gradient(alg: &LieAlgebra, h: &MetricPoint) -> TangentDirection {
    let slices = transported_slices(alg, h);
    let n = alg.dim();
    // output Gram: A_{lk} = ⟨B_l, B_k⟩_F
    let mut gram_out = DMatrix::zeros(n, n);
    for l in 0..n {
        for k in l..n {
            let v = slices[l].dot(&slices[k]);
            gram_out[(l, k)] = v;
            gram_out[(k, l)] = v;
        }
    }
    // input Gram: G = Σ_k B_k·B_kᵀ
    let mut gram_in = DMatrix::zeros(n, n);
    for b in &slices {
        gram_in += b * b.transpose();
    }
    let m = gram_out * 0.5 - gram_in;
    TangentDirection::from_sigma(h, &m)
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// Smallest discrete second difference over the grid.
    pub min_second_difference: f64,
    /// Largest |F| over the grid, the scale for the convexity slack.
    pub scale: f64,
}

impl ConvexityReport {
    pub fn is_convex(&self, slack: f64) -> bool {
        self.min_second_difference >= -slack * self.scale.max(1e-300)
    }
}

/// Sample F along the geodesic through `h` in direction `dir` and report the
/// discrete second differences.
pub fn convexity_check(
    alg: &LieAlgebra,
    h: &MetricPoint,
    dir: &TangentDirection,
    t_grid: &[f64],
) -> Result<ConvexityReport> {
    if t_grid.len() < 3 {
        return Err(Error::Precondition("need at least three grid points".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("t grid must be increasing".into()));
    }
    let values: Vec<f64> = t_grid
        .iter()
        .map(|&t| functional_f(alg, &h.geodesic(dir, t)))
        .collect();
    let mut min_dd = f64::INFINITY;
    for w in values.windows(3) {
        min_dd = min_dd.min(w[0] - 2.0 * w[1] + w[2]);
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(ConvexityReport {
        ts: t_grid.to_vec(),
        values,
        min_second_difference: min_dd,
        scale,
    })
}

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub max_steps: usize,
    /// Absolute gradient-norm threshold for the minimum verdict.
    pub grad_tol: f64,
    /// Scale-relative gate: a minimum additionally requires
    /// ‖m‖ ≤ rel_grad_tol·F. Along a divergent ray ‖m‖/F tends to a positive
    /// constant, so this separates flat minima from escape to infinity.
    pub rel_grad_tol: f64,
    pub divergence_radius: f64,
    /// Number of trailing iterates whose limit directions must agree.
    pub window: usize,
    /// Angular tolerance for the direction Cauchy test.
    pub dir_tol: f64,
    pub init_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub armijo: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            max_steps: 2000,
            grad_tol: 1e-8,
            rel_grad_tol: 1e-3,
            divergence_radius: 25.0,
            window: 10,
            dir_tol: 1e-3,
            init_step: 0.25,
            max_step: 5.0,
            min_step: 1e-14,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowStep {
    /// Continuous flow time (steps carry Δt = δ/‖m‖).
    pub t: f64,
    pub h: MetricPoint,
    pub f_value: f64,
    pub grad_norm: f64,
    pub dist_to_start: f64,
}

#[derive(Debug, Clone)]
pub enum FlowVerdict {
    Minimum(MetricPoint),
    /// Unit limit direction at the identity base point.
    Divergent(TangentDirection),
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub steps: Vec<FlowStep>,
    pub verdict: FlowVerdict,
}

impl FlowTrace {
    pub fn final_step(&self) -> &FlowStep {
        self.steps.last().expect("trace has at least one step")
    }
}

/// Geodesic gradient descent with Armijo backtracking. Produces a
/// monotonically non-increasing F trace ending in one of three verdicts:
/// a certified minimum, divergence with a Cauchy limit direction, or
/// inconclusive when the step budget runs out first.
pub fn minimize(alg: &LieAlgebra, h0: &MetricPoint, opts: &FlowOptions) -> Result<FlowTrace> {
    if h0.dim() != alg.dim() {
        return Err(Error::Precondition(format!(
            "metric dimension {} does not match algebra dimension {}",
            h0.dim(),
            alg.dim()
        )));
    }
    let identity = MetricPoint::identity(alg.dim());
    let mut h = h0.clone();
    let mut t = 0.0;
    let mut step = opts.init_step;
    let mut steps: Vec<FlowStep> = Vec::new();
    let mut recent: VecDeque<TangentDirection> = VecDeque::new();
    let mut verdict = FlowVerdict::Inconclusive;

    for k in 0..opts.max_steps {
        let m = gradient(alg, &h);
        let gn = m.norm();
        let f = functional_f(alg, &h);
        let dist = h0.distance(&h);
        steps.push(FlowStep {
            t,
            h: h.clone(),
            f_value: f,
            grad_norm: gn,
            dist_to_start: dist,
        });

        // track the direction seen from the identity base point
        if identity.distance(&h) > 1.0 {
            if let Ok(d) = identity.unit_direction_to(&h) {
                recent.push_back(d);
                if recent.len() > opts.window {
                    recent.pop_front();
                }
            }
        }

        if dist > opts.divergence_radius && recent.len() == opts.window {
            let last = recent.back().expect("window nonempty");
            let cauchy = recent.iter().all(|d| d.angle_to(last) <= opts.dir_tol);
            if cauchy {
                verdict = FlowVerdict::Divergent(last.clone());
                break;
            }
        }

        if dist <= opts.divergence_radius && gn <= opts.grad_tol && gn <= opts.rel_grad_tol * f {
            verdict = FlowVerdict::Minimum(h.clone());
            break;
        }

        // descent step with backtracking
        let dir = m.scale(-1.0 / gn);
        loop {
            let cand = h.geodesic(&dir, step);
            let f_new = functional_f(alg, &cand);
            if f_new <= f - opts.armijo * step * gn {
                h = cand;
                t += step / gn;
                step = (step * 2.0).min(opts.max_step);
                break;
            }
            step *= 0.5;
            if step < opts.min_step {
                return Err(Error::StalledFlow {
                    step: k,
                    grad_norm: gn,
                    step_size: step,
                });
            }
        }
    }

    if matches!(verdict, FlowVerdict::Inconclusive) && steps.len() == opts.max_steps {
        // record the state the last step produced
        let f = functional_f(alg, &h);
        let gn = gradient(alg, &h).norm();
        steps.push(FlowStep {
            t,
            h: h.clone(),
            f_value: f,
            grad_norm: gn,
            dist_to_start: h0.distance(&h),
        });
    }

    Ok(FlowTrace { steps, verdict })
}

/// Largest ‖g[x,y] − [gx, gy]‖ over basis pairs: zero iff `g` is an
/// automorphism.
pub fn automorphism_residual(alg: &LieAlgebra, g: &DMatrix<f64>) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = alg.basis_vector(i);
            let y = alg.basis_vector(j);
            let lhs = g * alg.bracket(&x, &y);
            let rhs = alg.bracket(&(g * x), &(g * y));
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}

#[derive(Debug, Clone)]
pub struct ContractionOptions {
    pub dt: f64,
    pub steps: usize,
    /// Discretization allowance per unit of flow time.
    pub slack_per_time: f64,
    pub automorphism_tol: f64,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            dt: 0.005,
            steps: 400,
            slack_per_time: 1e-6,
            automorphism_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub initial_distance: f64,
    /// max over k of d(t_k) − d(0) − slack·t_k; ≤ 0 when the profile is
    /// within the contraction bound.
    pub max_violation: f64,
}

impl ContractionReport {
    pub fn contracts(&self) -> bool {
        self.max_violation <= 0.0
    }
}

/// Run two synchronized flows from H₀ and gᵀH₀g (g an automorphism) with a
/// shared uniform time step and report the distance profile, which must stay
/// below its initial value up to the discretization slack.
pub fn equivariance_contraction_test(
    alg: &LieAlgebra,
    h0: &MetricPoint,
    g: &DMatrix<f64>,
    opts: &ContractionOptions,
) -> Result<ContractionReport> {
    let resid = automorphism_residual(alg, g);
    if resid > opts.automorphism_tol {
        return Err(Error::Precondition(format!(
            "g is not an automorphism (bracket residual {resid:.3e})"
        )));
    }
    let mut ha = h0.clone();
    let mut hb = h0.pullback(g)?;
    let initial = ha.distance(&hb);
    let mut times = vec![0.0];
    let mut distances = vec![initial];
    let mut max_violation = 0.0f64;
    for k in 1..=opts.steps {
        for h in [&mut ha, &mut hb] {
            let m = gradient(alg, h);
            let gn = m.norm();
            if gn > 1e-14 {
                let dir = m.scale(-1.0 / gn);
                *h = h.geodesic(&dir, gn * opts.dt);
            }
        }
        let t = k as f64 * opts.dt;
        let d = ha.distance(&hb);
        max_violation = max_violation.max(d - initial - opts.slack_per_time * t);
        times.push(t);
        distances.push(d);
    }
    Ok(ContractionReport {
        times,
        distances,
        initial_distance: initial,
        max_violation,
    })
}

#[derive(Debug, Clone)]
pub struct Destabilization {
    pub flag: WeightedFlag,
    /// Candidates certified by the ideal check; may be empty, in which case
    /// the destabilization is inconclusive.
    pub ideals: Vec<LinearSubspace>,
    pub certification_tol: f64,
}

impl Destabilization {
    pub fn is_conclusive(&self) -> bool {
        !self.ideals.is_empty()
    }
}

/// Extract the weighted flag of the limit direction of a divergent flow and
/// certify candidate invariant subspaces as ideals. The metric action is
/// H ↦ gᵀHg, so automorphism-invariant subspaces come from the reversed
/// (increasing-weight) chain; both chains are certified and only certified
/// ideals are returned.
pub fn destabilize(
    alg: &LieAlgebra,
    trace: &FlowTrace,
    gap_tol: f64,
) -> Result<Destabilization> {
    let dir = match &trace.verdict {
        FlowVerdict::Divergent(d) => d,
        _ => {
            return Err(Error::Precondition(
                "destabilize requires a divergent flow trace".into(),
            ))
        }
    };
    let flag = hspace::flag_of_direction(dir, gap_tol)?;
    let reversed = hspace::flag_of_direction(&dir.scale(-1.0), gap_tol)?;
    let tol = 1e-8;

    let mut ideals: Vec<LinearSubspace> = Vec::new();
    let mut push_certified = |u: &LinearSubspace| {
        if u.dim() == 0 || u.dim() >= alg.dim() {
            return;
        }
        if !alg.ideal_check(u, tol).is_ideal {
            return;
        }
        let duplicate = ideals.iter().any(|v| {
            v.dim() == u.dim()
                && v.containment_residual(u) < 1e-8
        });
        if !duplicate {
            ideals.push(u.clone());
        }
    };
    for u in reversed.subspaces() {
        push_certified(u);
    }
    for u in flag.subspaces() {
        push_certified(u);
    }
    Ok(Destabilization {
        flag,
        ideals,
        certification_tol: tol,
    })
}
