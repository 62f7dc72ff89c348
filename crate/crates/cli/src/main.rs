//! Command-line frontend: load or generate an algebra, analyze it, run the
//! metric flow, decompose at the optimum or extract destabilizing ideals,
//! and run the geometry self-checks.
//!
//! Exit codes: 0 success/minimum, 2 divergent-with-certified-ideal,
//! 3 inconclusive, 1 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bracketmin::algebra::{LieAlgebra, LinearSubspace, SimplicityVerdict};
use bracketmin::cartan::{self, CartanSplit, CompactnessKind};
use bracketmin::corpus;
use bracketmin::error::Error;
use bracketmin::exec::ExecMode;
use bracketmin::format;
use bracketmin::hspace::MetricPoint;
use bracketmin::kempfness::{self, FlowOptions, FlowTrace, FlowVerdict};
use bracketmin::nalgebra::DMatrix;
use bracketmin::realify;
use bracketmin::verify;

#[derive(Parser)]
#[command(name = "bracketmin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Path to an algebra JSON file.
    #[arg(long, conflicts_with = "corpus")]
    input: Option<PathBuf>,
    /// Name of a built-in algebra.
    #[arg(long)]
    corpus: Option<String>,
    /// Treat the input file as a complex algebra and realify it on load.
    #[arg(long)]
    complex: bool,
}

#[derive(Args, Clone)]
struct NumericsArgs {
    /// Structural tolerance (validation, ideals, residual checks).
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Gradient-norm threshold for the minimum verdict.
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    /// Eigenvalue clustering gap for weighted flags.
    #[arg(long, default_value_t = 1e-6)]
    gap_tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_steps: usize,
    #[arg(long, default_value_t = 25.0)]
    divergence_radius: f64,
    /// Direction-Cauchy window for the divergence verdict.
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Validation residuals, center, derivations, Killing form, simplicity.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        /// Write the report JSON here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the metric gradient flow; emits the trace as JSON lines.
    Minimize {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        /// Write the JSONL flow trace (one step per line, then the verdict).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize, then split into k ⊕ p, check inclusions and classify;
    /// reports destabilization instead when the flow diverges.
    Decompose {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        numerics: NumericsArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometry self-checks: the ODE bound suite and the
    /// distance-increasing property of the exponential map.
    VerifyGeometry {
        /// Ambient dimensions to sample (repeatable).
        #[arg(long = "n", default_values_t = vec![3usize, 5])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Run the sweeps sequentially instead of on the thread pool.
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in algebras, or dump one as JSON.
    Corpus {
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Analyze {
            input,
            numerics,
            out,
        } => cmd_analyze(&input, &numerics, out.as_deref()),
        Command::Minimize {
            input,
            numerics,
            out,
        } => cmd_minimize(&input, &numerics, out.as_deref()),
        Command::Decompose {
            input,
            numerics,
            out,
        } => cmd_decompose(&input, &numerics, out.as_deref()),
        Command::VerifyGeometry {
            dims,
            samples,
            seed,
            sequential,
            out,
        } => cmd_verify_geometry(&dims, samples, seed, sequential, out.as_deref()),
        Command::Corpus { name, out } => cmd_corpus(name.as_deref(), out.as_deref()),
    }
}

fn load_input(input: &InputArgs) -> anyhow::Result<(LieAlgebra, String)> {
    match (&input.input, &input.corpus) {
        (Some(path), None) => {
            if input.complex {
                let calg = format::load_complex_algebra(path)
                    .with_context(|| format!("loading complex algebra from {}", path.display()))?;
                let (alg, _) = realify::realify(&calg)?;
                Ok((alg, format!("{} (realified)", path.display())))
            } else {
                let alg = format::load_algebra(path)
                    .with_context(|| format!("loading algebra from {}", path.display()))?;
                Ok((alg, path.display().to_string()))
            }
        }
        (None, Some(name)) => {
            let alg = corpus::algebra(name)?;
            Ok((alg, format!("corpus:{name}")))
        }
        _ => bail!("exactly one of --input or --corpus is required"),
    }
}

fn flow_options(numerics: &NumericsArgs) -> FlowOptions {
    FlowOptions {
        max_steps: numerics.max_steps,
        grad_tol: numerics.grad_tol,
        divergence_radius: numerics.divergence_radius,
        window: numerics.window,
        ..FlowOptions::default()
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    json!(rows)
}

fn subspace_json(s: &LinearSubspace) -> Value {
    let basis: Vec<Vec<f64>> = s
        .basis()
        .iter()
        .map(|v| v.iter().cloned().collect())
        .collect();
    json!({ "dim": s.dim(), "basis": basis })
}

fn emit(report: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    Ok(())
}

/// Write via a temporary sibling then rename, so readers never observe a
/// half-written file.
fn write_atomic(path: &Path, text: &str) -> anyhow::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn algebra_summary(alg: &LieAlgebra, numerics: &NumericsArgs) -> anyhow::Result<Value> {
    let validation = alg.validate(numerics.tol);
    let center = alg.center(numerics.tol.max(1e-10));
    let ders = alg.derivations(numerics.tol.max(1e-9));
    let killing = alg.killing_form();
    let (pos, neg, zero) = killing.signature(1e-9);
    let simplicity = alg.classify_simplicity(numerics.tol.max(1e-8), 20, numerics.seed);
    let simplicity_json = match &simplicity.verdict {
        SimplicityVerdict::Simple => json!({
            "verdict": "simple",
            "probabilistic": true,
            "trials": simplicity.trials,
        }),
        SimplicityVerdict::Abelian => json!({ "verdict": "abelian" }),
        SimplicityVerdict::HasIdeal(w) => json!({
            "verdict": "has-ideal",
            "witness": subspace_json(w),
            "witness_residual": alg.ideal_check(w, numerics.tol.max(1e-8)).residual,
        }),
    };
    Ok(json!({
        "dim": alg.dim(),
        "basis": alg.labels(),
        "realified": alg.complex_structure().is_some(),
        "validation": {
            "antisymmetry_residual": validation.antisymmetry_residual,
            "jacobi_residual": validation.jacobi_residual,
            "tol": validation.tol,
            "passed": validation.passed(),
        },
        "center_dim": center.dim(),
        "derivation_dim": ders.len(),
        "killing_signature": [pos, neg, zero],
        "simplicity": simplicity_json,
    }))
}

fn cmd_analyze(
    input: &InputArgs,
    numerics: &NumericsArgs,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let started = Instant::now();
    let (alg, source) = load_input(input)?;
    let validation = alg.validate(numerics.tol);
    let summary = algebra_summary(&alg, numerics)?;
    let report = json!({
        "command": "analyze",
        "input": source,
        "algebra": summary,
        "timing_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    emit(&report, out)?;
    if !validation.passed() {
        bail!(
            "validation failed: antisymmetry {:.3e}, jacobi {:.3e} (tol {:.1e})",
            validation.antisymmetry_residual,
            validation.jacobi_residual,
            numerics.tol
        );
    }
    Ok(0)
}

fn trace_jsonl(trace: &FlowTrace, alg: &LieAlgebra, gap_tol: f64) -> anyhow::Result<String> {
    let mut lines = Vec::with_capacity(trace.steps.len() + 1);
    for s in &trace.steps {
        lines.push(serde_json::to_string(&json!({
            "t": s.t,
            "F": s.f_value,
            "gradnorm": s.grad_norm,
            "dist": s.dist_to_start,
        }))?);
    }
    lines.push(serde_json::to_string(&verdict_json(trace, alg, gap_tol)?)?);
    Ok(lines.join("\n") + "\n")
}

fn verdict_json(trace: &FlowTrace, alg: &LieAlgebra, gap_tol: f64) -> anyhow::Result<Value> {
    Ok(match &trace.verdict {
        FlowVerdict::Minimum(h) => json!({
            "verdict": "minimum",
            "H_star": matrix_rows(h.matrix()),
            "F": trace.final_step().f_value,
            "gradnorm": trace.final_step().grad_norm,
        }),
        FlowVerdict::Divergent(dir) => {
            let destab = kempfness::destabilize(alg, trace, gap_tol)?;
            let ideals: Vec<Value> = destab
                .ideals
                .iter()
                .map(|u| {
                    json!({
                        "subspace": subspace_json(u),
                        "ideal_residual": alg.ideal_check(u, destab.certification_tol).residual,
                    })
                })
                .collect();
            json!({
                "verdict": "divergent",
                "limit_direction": matrix_rows(dir.sigma()),
                "flag": {
                    "weights": destab.flag.weights(),
                    "multiplicities": destab.flag.multiplicities(),
                    "subspaces": destab.flag.subspaces().iter().map(subspace_json).collect::<Vec<_>>(),
                },
                "certified_ideals": ideals,
                "conclusive": destab.is_conclusive(),
            })
        }
        FlowVerdict::Inconclusive => json!({ "verdict": "inconclusive" }),
    })
}

fn verdict_exit_code(trace: &FlowTrace, alg: &LieAlgebra, gap_tol: f64) -> u8 {
    match &trace.verdict {
        FlowVerdict::Minimum(_) => 0,
        FlowVerdict::Divergent(_) => match kempfness::destabilize(alg, trace, gap_tol) {
            Ok(d) if d.is_conclusive() => 2,
            _ => 3,
        },
        FlowVerdict::Inconclusive => 3,
    }
}

fn run_flow(
    alg: &LieAlgebra,
    numerics: &NumericsArgs,
) -> anyhow::Result<FlowTrace> {
    let h0 = MetricPoint::identity(alg.dim());
    match kempfness::minimize(alg, &h0, &flow_options(numerics)) {
        Ok(trace) => Ok(trace),
        Err(Error::StalledFlow {
            step,
            grad_norm,
            step_size,
        }) => bail!(
            "flow stalled at step {step}: grad norm {grad_norm:.3e}, step size {step_size:.3e}"
        ),
        Err(e) => Err(e.into()),
    }
}

fn cmd_minimize(
    input: &InputArgs,
    numerics: &NumericsArgs,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let started = Instant::now();
    let (alg, source) = load_input(input)?;
    alg.validate(numerics.tol).into_result()?;
    let trace = run_flow(&alg, numerics)?;
    let final_step = trace.final_step();
    let report = json!({
        "command": "minimize",
        "input": source,
        "steps": trace.steps.len(),
        "final": {
            "t": final_step.t,
            "F": final_step.f_value,
            "gradnorm": final_step.grad_norm,
            "dist": final_step.dist_to_start,
        },
        "verdict": verdict_json(&trace, &alg, numerics.gap_tol)?,
        "timing_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(path) = out {
        write_atomic(path, &trace_jsonl(&trace, &alg, numerics.gap_tol)?)?;
    }
    Ok(verdict_exit_code(&trace, &alg, numerics.gap_tol))
}

fn split_json(alg: &LieAlgebra, split: &CartanSplit) -> anyhow::Result<Value> {
    let inclusions = cartan::check_inclusions(alg, split, 1e-6)?;
    let classification = cartan::classify(alg, split)?;
    let (pos, neg, zero) = split.killing_signature();
    Ok(json!({
        "H_star": matrix_rows(split.h_star().matrix()),
        "theta": matrix_rows(split.theta()),
        "k": subspace_json(split.k_basis()),
        "p": subspace_json(split.p_basis()),
        "killing_signature": [pos, neg, zero],
        "residuals": {
            "grad_norm": split.residuals().grad_norm,
            "ad_image_closure": split.residuals().ad_image_closure,
            "involution": split.residuals().involution,
            "algebra_involution": split.residuals().algebra_involution,
            "inclusions": {
                "kk": inclusions.kk_residual,
                "kp": inclusions.kp_residual,
                "pp": inclusions.pp_residual,
            },
        },
        "classification": match classification.kind {
            CompactnessKind::Compact => json!({ "kind": "compact" }),
            CompactnessKind::Noncompact { dim_k, dim_p } =>
                json!({ "kind": "noncompact", "dim_k": dim_k, "dim_p": dim_p }),
        },
        "killing_on_k": classification.killing_on_k,
        "killing_on_p": classification.killing_on_p,
    }))
}

fn cmd_decompose(
    input: &InputArgs,
    numerics: &NumericsArgs,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let started = Instant::now();
    let (alg, source) = load_input(input)?;
    alg.validate(numerics.tol).into_result()?;
    let trace = run_flow(&alg, numerics)?;
    let (payload, code) = match &trace.verdict {
        FlowVerdict::Minimum(h) => {
            let split = cartan::split(&alg, h, numerics.grad_tol.max(1e-7))?;
            let mut payload = split_json(&alg, &split)?;
            if alg.complex_structure().is_some() {
                let compact = realify::check_compact_form(&alg, &split, 1e-6)?;
                payload["compact_form"] = json!({
                    "jk_to_p_residual": compact.jk_to_p_residual,
                    "jp_to_k_residual": compact.jp_to_k_residual,
                    "dim_k": compact.dim_k,
                    "dim_p": compact.dim_p,
                    "passed": compact.passed(),
                });
            }
            (json!({ "kind": "cartan_split", "split": payload }), 0u8)
        }
        FlowVerdict::Divergent(_) => {
            let verdict = verdict_json(&trace, &alg, numerics.gap_tol)?;
            let code = verdict_exit_code(&trace, &alg, numerics.gap_tol);
            (json!({ "kind": "destabilization", "detail": verdict }), code)
        }
        FlowVerdict::Inconclusive => (json!({ "kind": "inconclusive" }), 3u8),
    };
    let report = json!({
        "command": "decompose",
        "input": source,
        "flow": {
            "steps": trace.steps.len(),
            "final_gradnorm": trace.final_step().grad_norm,
            "final_F": trace.final_step().f_value,
        },
        "result": payload,
        "timing_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    emit(&report, out)?;
    Ok(code)
}

fn cmd_verify_geometry(
    dims: &[usize],
    samples: usize,
    seed: u64,
    sequential: bool,
    out: Option<&Path>,
) -> anyhow::Result<u8> {
    let started = Instant::now();
    let mode = if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    let mut suites = Vec::new();
    let mut all_passed = true;

    let (min_margin, max_eq) = verify::lemma7_batch(6, 100, seed, mode)?;
    let ode_ok = min_margin >= -1e-10 && max_eq <= 1e-10;
    all_passed &= ode_ok;
    suites.push(json!({
        "suite": "ode_bound",
        "problems": 100,
        "min_margin": min_margin,
        "max_commuting_equality_error": max_eq,
        "passed": ode_ok,
    }));

    let q_ok = {
        let grid: Vec<f64> = (0..100)
            .map(|i| 1e-8 * 10f64.powf(i as f64 * 9.5 / 99.0))
            .filter(|&x| x <= 30.0)
            .collect();
        grid.iter().all(|&x| verify::q_factor(x) >= 1.0)
    };
    all_passed &= q_ok;
    suites.push(json!({ "suite": "q_factor_grid", "passed": q_ok }));

    for &n in dims {
        let report = verify::property_star_suite(n, samples, seed, mode)?;
        let passed = report.violations == 0;
        all_passed &= passed;
        suites.push(json!({
            "suite": "property_star",
            "n": n,
            "samples": report.samples,
            "seed": report.seed,
            "violations": report.violations,
            "min_gap": report.min_gap,
            "min_infinitesimal_margin": report.min_infinitesimal_margin,
            "passed": passed,
        }));
    }

    let report = json!({
        "command": "verify-geometry",
        "suites": suites,
        "passed": all_passed,
        "timing_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    emit(&report, out)?;
    Ok(if all_passed { 0 } else { 3 })
}

fn cmd_corpus(name: Option<&str>, out: Option<&Path>) -> anyhow::Result<u8> {
    match name {
        None => {
            let report = json!({
                "command": "corpus",
                "names": corpus::NAMES,
            });
            emit(&report, out)?;
            Ok(0)
        }
        Some("sl2C") => {
            // the complex original, in the complex file format
            let calg = corpus::complex_algebra("sl2C")?;
            let file = format::ComplexAlgebraFile::from_algebra(&calg);
            let value = serde_json::to_value(&file)?;
            emit(&value, out)?;
            Ok(0)
        }
        Some(n) => {
            let alg = corpus::algebra(n)?;
            let value = format::algebra_to_json(&alg);
            emit(&value, out)?;
            Ok(0)
        }
    }
}
