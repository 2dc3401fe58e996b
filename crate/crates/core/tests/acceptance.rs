//! Acceptance gate. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cstar_frames::builtin::{example1_default, example2, example2_tight_bound};
use cstar_frames::frames::{
    derive_tight_star_bound, is_controlled_frame, reconstruct, verify_star_bounds,
    ExponentConvention,
};
use cstar_frames::random::{module_element, rng_for, Caps};
use cstar_frames::suite::{run_property_suite, SuiteReport};
use cstar_frames::{ModuleOperator, DEFAULT_TOL};
use serde_json::Value;

const SUITE_SEED: u64 = 20_240_601;
const SUITE_CASES: usize = 200;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn cframe(args: &[&str]) -> Result<(Vec<u8>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_cframe"))
        .args(args)
        .env_remove("CFRAME_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(out.status.success(), || {
        format!("cframe {args:?} exited {}: {}", out.status, String::from_utf8_lossy(&out.stderr))
    })?;
    Ok((out.stdout, elapsed))
}

/// `analyze example1` reproduces `S_C = diag(α/3, α/12)` and the optimal
/// bounds `(α/12, α/3)`.
fn ac1() -> Outcome {
    let mut slowest = Duration::ZERO;
    for alpha in [0.5, 1.0, 3.0] {
        let a = alpha.to_string();
        let (stdout, elapsed) = cframe(&["analyze", "example1", "--alpha", &a, "--format", "json"])?;
        slowest = slowest.max(elapsed);
        check(elapsed < Duration::from_secs(1), || format!("α={alpha}: took {elapsed:?}"))?;
        let v: Value = serde_json::from_slice(&stdout).map_err(|e| e.to_string())?;
        let inst = &v["instance"];
        let diag = inst["frame_operator"][0][0]["diagonal"]
            .as_array()
            .ok_or("frame operator is not a diagonal table")?;
        for (z, want) in diag.iter().zip([alpha / 3.0, alpha / 12.0]) {
            let (re, im) = (z[0].as_f64().unwrap(), z[1].as_f64().unwrap());
            check((re - want).abs() <= 1e-12 && im.abs() <= 1e-12, || {
                format!("α={alpha}: S_C entry {re}+{im}i, want {want}")
            })?;
        }
        let lower = inst["lower_bound"].as_f64().ok_or("no lower bound")?;
        let upper = inst["upper_bound"].as_f64().ok_or("no upper bound")?;
        for (got, want) in [(lower, alpha / 12.0), (upper, alpha / 3.0)] {
            check((got - want).abs() <= 1e-10 * want, || format!("α={alpha}: bound {got}, want {want}"))?;
        }
    }
    Ok(format!("α ∈ {{0.5, 1, 3}}, slowest run {slowest:.2?}"))
}

/// Example 2 at N = 100: tight `*`-bound `√α·diag(1/(n+1))` with both
/// Loewner gaps vanishing over 200 samples.
fn ac2() -> Outcome {
    let start = Instant::now();
    let mut worst_gap: f64 = 0.0;
    for alpha in [1.0, 4.0] {
        let (frame, c) = example2(alpha, 100).map_err(|e| e.to_string())?;
        let bounds = derive_tight_star_bound(&frame, &c, DEFAULT_TOL).map_err(|e| e.to_string())?;
        let want = example2_tight_bound(alpha, 100);
        for b in [bounds.lower(), bounds.upper()] {
            let d = b.distance(&want).map_err(|e| e.to_string())?;
            check(d <= 1e-12, || format!("α={alpha}: bound off by {d:e}"))?;
        }
        let v = verify_star_bounds(&frame, &c, &bounds, DEFAULT_TOL, 200, 7).map_err(|e| e.to_string())?;
        let limit = 1e-10 * v.max_scale.max(1.0);
        check(v.holds && v.samples == 200, || format!("α={alpha}: verification failed"))?;
        check(v.max_lower_gap <= limit && v.max_upper_gap <= limit, || {
            format!("α={alpha}: gaps ({:e}, {:e}) above {limit:e}", v.max_lower_gap, v.max_upper_gap)
        })?;
        worst_gap = worst_gap.max(v.max_lower_gap.max(v.max_upper_gap) / v.max_scale.max(1.0));
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("worst relative gap {worst_gap:.1e}, {elapsed:.2?}"))
}

/// Contraction `‖I − B⁻¹S_C‖ = 0.75` on Example 1 and Neumann reconstruction
/// to `1e-10‖x‖` in at most 120 steps.
fn ac3() -> Outcome {
    let (frame, c) = example1_default(1.0).map_err(|e| e.to_string())?;
    let report = is_controlled_frame(&frame, &c, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let bounds = report.bounds.ok_or("example1 is not a frame")?;
    let id = ModuleOperator::identity(frame.module());
    let measured = id
        .try_sub(&report.operator.scale_real(1.0 / bounds.upper()))
        .map_err(|e| e.to_string())?
        .op_norm();
    check((measured - 0.75).abs() <= 1e-10, || format!("measured contraction {measured}"))?;

    let x = module_element(&mut rng_for(3, 0), frame.module());
    let rec = reconstruct(&frame, &c, &x, 1e-10).map_err(|e| e.to_string())?;
    let worst_ratio = rec
        .residuals
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(0.0_f64, f64::max);
    check(worst_ratio <= 0.75 + 1e-10, || format!("residual ratio {worst_ratio}"))?;
    let err = rec.estimate.distance(&x).map_err(|e| e.to_string())?;
    check(err <= 1e-10 * x.module_norm(), || format!("error {err:e} for ‖x‖ = {}", x.module_norm()))?;
    check(rec.iterations <= 120, || format!("{} iterations", rec.iterations))?;
    Ok(format!(
        "contraction {measured}, worst ratio {worst_ratio:.6}, {} iterations, error {:.1e}",
        rec.iterations,
        err / x.module_norm()
    ))
}

/// 200 randomized instances, zero failures.
fn ac4(proof: &SuiteReport, elapsed: Duration) -> Outcome {
    check(proof.cases == SUITE_CASES, || format!("{} cases", proof.cases))?;
    if let Some(f) = proof.failures.first() {
        return Err(format!(
            "{} failures, first: case {} {}: {}",
            proof.total_failures(),
            f.case,
            f.property,
            f.detail
        ));
    }
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} properties × {SUITE_CASES} cases, {elapsed:.2?}", proof.tallies.len()))
}

/// The alternative exponent yields counterexamples on instances with
/// `‖C^{-1/2}‖ > 1`; the implemented exponent yields none on the same cases.
fn ac5(proof: &SuiteReport) -> Outcome {
    let statement = run_property_suite(SUITE_SEED, SUITE_CASES, Caps::default(), ExponentConvention::Statement)
        .map_err(|e| e.to_string())?;
    let counterexamples: Vec<_> = statement
        .failures_of("scalar_conversion_soundness")
        .filter(|f| f.controller_inv_sqrt_norm > 1.0)
        .collect();
    check(!counterexamples.is_empty(), || "no counterexample recorded".into())?;
    let proof_failures = proof.failures_of("scalar_conversion_soundness").count();
    check(proof_failures == 0, || format!("implemented exponent failed {proof_failures} times"))?;
    let f = counterexamples[0];
    Ok(format!(
        "{} counterexamples, first seed {} case {} (‖C^-1/2‖ = {:.3})",
        counterexamples.len(),
        f.seed,
        f.case,
        f.controller_inv_sqrt_norm
    ))
}

/// Two `analyze example1 --format json` runs are byte-identical.
fn ac6() -> Outcome {
    let args = ["analyze", "example1", "--format", "json", "--seed", "42"];
    let (a, _) = cframe(&args)?;
    let (b, _) = cframe(&args)?;
    check(!a.is_empty() && a == b, || "outputs differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let proof = run_property_suite(SUITE_SEED, SUITE_CASES, Caps::default(), ExponentConvention::Proof);
    let suite_time = start.elapsed();

    let results: Vec<(&str, &str, Outcome)> = match proof {
        Ok(proof) => vec![
            ("AC1", "example1 reproduction", ac1()),
            ("AC2", "example2 tight *-bound", ac2()),
            ("AC3", "contraction and inversion", ac3()),
            ("AC4", "property suite", ac4(&proof, suite_time)),
            ("AC5", "exponent adjudication", ac5(&proof)),
            ("AC6", "json determinism", ac6()),
        ],
        Err(e) => {
            eprintln!("property suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
