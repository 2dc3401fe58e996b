//! Randomized property suite over planted instances.
//!
//! Each case is rebuilt from `(seed, case)` by [`random_instance`]; sampling
//! inside a property uses a second stream keyed by the same pair, so a
//! reported failure can be replayed exactly.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::frames::{
    controlled_frame_operator, controlled_synthesis, convert_controlled_to_plain,
    convert_plain_to_controlled, convert_plain_to_controlled_with, convert_star_bounds,
    frame_operator, is_controlled_frame, is_extremal, optimal_scalar_bounds, reconstruct,
    sandwich_holds, synthesis, transform_frame, verify_star_bounds, analysis,
    ExponentConvention, ScalarBounds, StarBounds, StarConversion,
};
use crate::module::{GlPlusCertificate, ModuleElement, ModuleOperator};
use crate::random::{self, random_instance, rng_for, Caps, RandomInstance, GENERATOR};

/// XOR-ed into the seed for the sampling stream of a case.
const SAMPLING_KEY: u64 = 0x5eed_5a4d_91e5_0001;
const SAMPLES: usize = 200;
const FEW: usize = 8;

pub const PROPERTIES: [&str; 15] = [
    "inner_product_axioms",
    "operator_norm_domination",
    "surjective_gram_bounds",
    "integral_operator_exchange",
    "flattening_consistency",
    "adjoint_involution",
    "planted_spectrum",
    "controlled_factorization",
    "frame_operator_diagnostics",
    "sandwich_optimality",
    "contraction_bound",
    "scalar_conversion_soundness",
    "star_conversion_soundness",
    "kf_operator_identity",
    "identity_reduction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyTally {
    pub passed: usize,
    pub failed: usize,
}

/// Everything needed to rebuild and re-check a failing case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub seed: u64,
    pub case: u64,
    pub property: String,
    pub detail: String,
    pub algebra: String,
    pub rank: usize,
    pub nodes: usize,
    pub adversarial: bool,
    /// `‖C^{-1/2}‖` of the case's controller.
    pub controller_inv_sqrt_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub generator: String,
    pub seed: u64,
    pub cases: usize,
    pub caps: Caps,
    pub convention: ExponentConvention,
    pub tallies: BTreeMap<String, PropertyTally>,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn total_failures(&self) -> usize {
        self.failures.len()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures_of(&self, property: &str) -> impl Iterator<Item = &SuiteFailure> {
        let property = property.to_string();
        self.failures.iter().filter(move |f| f.property == property)
    }
}

type Check = std::result::Result<(), String>;

fn fail(detail: impl Into<String>) -> Check {
    Err(detail.into())
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> Check {
    if ok { Ok(()) } else { Err(detail()) }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| format!("unexpected error: {e}"))
}

/// Run every property on `cases` instances.
pub fn run_property_suite(
    seed: u64,
    cases: usize,
    caps: Caps,
    convention: ExponentConvention,
) -> Result<SuiteReport> {
    if cases == 0 {
        return Err(Error::validation("cases", "must be at least 1"));
    }
    caps.validate()?;
    let mut tallies: BTreeMap<String, PropertyTally> = PROPERTIES
        .iter()
        .map(|p| (p.to_string(), PropertyTally { passed: 0, failed: 0 }))
        .collect();
    let mut failures = Vec::new();
    for case in 0..cases as u64 {
        let inst = random_instance(seed, case, caps)?;
        for (property, outcome) in check_instance(&inst, convention) {
            let tally = tallies.get_mut(property).expect("known property");
            match outcome {
                Ok(()) => tally.passed += 1,
                Err(detail) => {
                    tally.failed += 1;
                    failures.push(SuiteFailure {
                        seed,
                        case,
                        property: property.to_string(),
                        detail,
                        algebra: inst.module.algebra().to_string(),
                        rank: inst.module.rank(),
                        nodes: inst.frame.len(),
                        adversarial: inst.adversarial,
                        controller_inv_sqrt_norm: inst.controller.inv_sqrt_norm(),
                    });
                }
            }
        }
    }
    Ok(SuiteReport {
        generator: GENERATOR.to_string(),
        seed,
        cases,
        caps,
        convention,
        tallies,
        failures,
    })
}

/// Run every property on one instance.
pub fn check_instance(
    inst: &RandomInstance,
    convention: ExponentConvention,
) -> Vec<(&'static str, Check)> {
    let mut rng = rng_for(inst.seed ^ SAMPLING_KEY, inst.case);
    let rng = &mut rng;
    vec![
        ("inner_product_axioms", inner_product_axioms(inst, rng)),
        ("operator_norm_domination", operator_norm_domination(inst, rng)),
        ("surjective_gram_bounds", surjective_gram_bounds(inst, rng)),
        ("integral_operator_exchange", integral_operator_exchange(inst, rng)),
        ("flattening_consistency", flattening_consistency(inst, rng)),
        ("adjoint_involution", adjoint_involution(inst, rng)),
        ("planted_spectrum", planted_spectrum(inst)),
        ("controlled_factorization", controlled_factorization(inst)),
        ("frame_operator_diagnostics", frame_operator_diagnostics(inst)),
        ("sandwich_optimality", sandwich_optimality(inst)),
        ("contraction_bound", contraction_bound(inst, rng)),
        ("scalar_conversion_soundness", scalar_conversion_soundness(inst, convention)),
        ("star_conversion_soundness", star_conversion_soundness(inst)),
        ("kf_operator_identity", kf_operator_identity(inst)),
        ("identity_reduction", identity_reduction(inst, rng)),
    ]
}

fn inner_product_axioms(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let m = inst.module;
    for _ in 0..FEW {
        let (x, y, z) = (
            random::module_element(rng, m),
            random::module_element(rng, m),
            random::module_element(rng, m),
        );
        let a = random::algebra_element(rng, m.algebra());
        let lhs = lib(lib(x.left_mul(&a))?.try_add(&y).and_then(|v| v.inner_product(&z)))?;
        let rhs = &(&a * &lib(x.inner_product(&z))?) + &lib(y.inner_product(&z))?;
        let scale = x.module_norm() * z.module_norm() * a.operator_norm() + y.module_norm() * z.module_norm();
        let gap = lib(lhs.distance(&rhs))?;
        ensure(gap <= 1e-12 * scale.max(1.0), || format!("linearity gap {gap:e}"))?;
        let gap = lib(lib(x.inner_product(&y))?.distance(&lib(y.inner_product(&x))?.adjoint()))?;
        ensure(gap <= 1e-12 * (x.module_norm() * y.module_norm()).max(1.0), || {
            format!("conjugate symmetry gap {gap:e}")
        })?;
        let xx = lib(x.inner_product(&x))?;
        ensure(xx.is_positive(DEFAULT_TOL), || "<x,x> not positive".into())?;
        ensure(xx.operator_norm() > 0.0, || "nonzero x with <x,x> = 0".into())?;
    }
    let zero = ModuleElement::zero(m);
    ensure(lib(zero.inner_product(&zero))?.operator_norm() == 0.0, || "<0,0> != 0".into())
}

fn operator_norm_domination(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let t = random::operator(rng, inst.module);
    let norm_sq = t.op_norm().powi(2);
    for x in random::sample_elements(rng, inst.module, FEW) {
        let tx = lib(t.apply(&x))?;
        let lhs = lib(tx.inner_product(&tx))?;
        let rhs = lib(x.inner_product(&x))?.scale_real(norm_sq);
        ensure(lib(lhs.loewner_leq(&rhs, DEFAULT_TOL))?, || {
            "<Tx,Tx> exceeds |T|^2 <x,x>".into()
        })?;
    }
    Ok(())
}

fn surjective_gram_bounds(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let t = random::operator(rng, inst.module);
    if !t.is_surjective(DEFAULT_TOL) {
        return fail("sampled operator not surjective");
    }
    let tt = lib(t.compose(&t.adjoint()))?;
    let lower = 1.0 / lib(tt.invert(DEFAULT_TOL))?.op_norm();
    let upper = t.op_norm().powi(2);
    let bounds = lib(ScalarBounds::new(lower, upper))?;
    ensure(sandwich_holds(&tt, &bounds, DEFAULT_TOL), || {
        format!("TT* outside [{lower:e}, {upper:e}]")
    })
}

fn integral_operator_exchange(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let t = random::operator(rng, inst.module);
    let space = inst.frame.space();
    let values = random::sample_elements(rng, inst.module, space.len());
    let integral = lib(space.integrate_module_valued(|i, _| values[i].clone()))?;
    let after = lib(t.apply(&integral))?;
    let mapped: Vec<ModuleElement> = values.iter().map(|v| t.apply(v)).collect::<Result<_>>().map_err(|e| e.to_string())?;
    let before = lib(space.integrate_module_valued(|i, _| mapped[i].clone()))?;
    let scale = t.op_norm() * values.iter().map(ModuleElement::module_norm).sum::<f64>() * space.total_mass();
    let gap = lib(after.distance(&before))?;
    ensure(gap <= 1e-12 * scale.max(1.0), || format!("exchange gap {gap:e}"))
}

fn flattening_consistency(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let eig = s_c.eigenvalues();
    let mid = 0.5 * (eig[0] + eig[eig.len() - 1]);
    let shifted = lib(s_c.try_sub(&ModuleOperator::scalar(inst.module, mid)))?;
    for (t, name) in [(&s_c, "S_C"), (&shifted, "S_C - mid")] {
        let flat_positive = t.is_positive_operator(DEFAULT_TOL);
        let sampled_positive = random::sample_elements(rng, inst.module, SAMPLES)
            .iter()
            .map(|x| t.apply(x).and_then(|tx| tx.inner_product(x)))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.to_string())?
            .iter()
            .all(|v| v.is_positive(DEFAULT_TOL));
        ensure(flat_positive == sampled_positive, || {
            format!("{name}: flattened PSD = {flat_positive}, sampled PSD = {sampled_positive}")
        })?;
    }
    Ok(())
}

fn adjoint_involution(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let t = random::operator(rng, inst.module);
    let u = random::operator(rng, inst.module);
    let scale = t.op_norm() * u.op_norm();
    let gap = lib(t.adjoint().adjoint().distance(&t))?;
    ensure(gap == 0.0, || format!("T** != T by {gap:e}"))?;
    let lhs = lib(t.compose(&u))?.adjoint();
    let rhs = lib(u.adjoint().compose(&t.adjoint()))?;
    let gap = lib(lhs.distance(&rhs))?;
    ensure(gap <= 1e-10 * scale, || format!("(TU)* != U*T* by {gap:e}"))?;
    let (x, y) = (random::module_element(rng, inst.module), random::module_element(rng, inst.module));
    let lhs = lib(lib(t.apply(&x))?.inner_product(&y))?;
    let rhs = lib(x.inner_product(&lib(t.adjoint().apply(&y))?))?;
    let gap = lib(lhs.distance(&rhs))?;
    ensure(gap <= 1e-10 * (t.op_norm() * x.module_norm() * y.module_norm()).max(1.0), || {
        format!("adjoint identity gap {gap:e}")
    })
}

fn planted_spectrum(inst: &RandomInstance) -> Check {
    let s = lib(frame_operator(&inst.frame))?;
    let b = lib(optimal_scalar_bounds(&s, DEFAULT_TOL))?;
    let want = (inst.planted_spectrum[0], inst.planted_spectrum[inst.planted_spectrum.len() - 1]);
    let ok = (b.lower() - want.0).abs() <= 1e-10 * want.0 && (b.upper() - want.1).abs() <= 1e-10 * want.1;
    ensure(ok, || format!("recovered ({}, {}) vs planted {want:?}", b.lower(), b.upper()))
}

fn controlled_factorization(inst: &RandomInstance) -> Check {
    let s = lib(frame_operator(&inst.frame))?;
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let composed = lib(inst.controller.operator().compose(&s))?;
    let gap = lib(s_c.distance(&composed))?;
    ensure(gap <= 1e-12 * composed.op_norm().max(1.0), || format!("S_C - C S = {gap:e}"))
}

fn frame_operator_diagnostics(inst: &RandomInstance) -> Check {
    let report = lib(is_controlled_frame(&inst.frame, &inst.controller, DEFAULT_TOL))?;
    let norm = report.operator.op_norm();
    ensure(report.diagnostics.asymmetry <= 1e-10 * norm, || {
        format!("asymmetry {:e}", report.diagnostics.asymmetry)
    })?;
    ensure(report.is_frame, || format!("diagnostics {:?}", report.diagnostics))
}

fn sandwich_optimality(inst: &RandomInstance) -> Check {
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let b = lib(optimal_scalar_bounds(&s_c, DEFAULT_TOL))?;
    ensure(sandwich_holds(&s_c, &b, DEFAULT_TOL), || "sandwich fails".into())?;
    ensure(is_extremal(&s_c, &b, 1e-6 * b.upper(), DEFAULT_TOL), || {
        "bounds are not extremal at eps = 1e-6 B".into()
    })
}

fn contraction_bound(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let b = lib(optimal_scalar_bounds(&s_c, DEFAULT_TOL))?;
    let id = ModuleOperator::identity(inst.module);
    let residual_op = lib(id.try_sub(&s_c.scale_real(1.0 / b.upper())))?;
    let measured = residual_op.op_norm();
    ensure(measured <= b.contraction_factor() + 1e-10, || {
        format!("|I - S_C/B| = {measured} > {}", b.contraction_factor())
    })?;
    let x = random::module_element(rng, inst.module);
    let tol = 1e-10;
    let rec = lib(reconstruct(&inst.frame, &inst.controller, &x, tol))?;
    let err = lib(rec.estimate.distance(&x))?;
    ensure(err <= 10.0 * tol * x.module_norm(), || format!("reconstruction error {err:e}"))
}

fn scalar_conversion_soundness(inst: &RandomInstance, convention: ExponentConvention) -> Check {
    let s = lib(frame_operator(&inst.frame))?;
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let plain = lib(optimal_scalar_bounds(&s, DEFAULT_TOL))?;
    let controlled = lib(optimal_scalar_bounds(&s_c, DEFAULT_TOL))?;
    let to_plain = lib(convert_controlled_to_plain(&controlled, &inst.controller))?;
    ensure(sandwich_holds(&s, &to_plain, DEFAULT_TOL), || {
        format!("controlled->plain ({}, {}) invalid for S", to_plain.lower(), to_plain.upper())
    })?;
    match convert_plain_to_controlled_with(&plain, &inst.controller, convention) {
        Ok(to_c) => ensure(sandwich_holds(&s_c, &to_c, DEFAULT_TOL), || {
            format!(
                "plain->controlled ({}, {}) invalid for S_C with spectrum [{}, {}]",
                to_c.lower(),
                to_c.upper(),
                controlled.lower(),
                controlled.upper()
            )
        }),
        Err(e) => fail(format!("plain->controlled produced no valid pair: {e}")),
    }
}

fn star_conversion_soundness(inst: &RandomInstance) -> Check {
    let algebra = inst.module.algebra();
    let s = lib(frame_operator(&inst.frame))?;
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let plain = StarBounds::from_scalar(lib(optimal_scalar_bounds(&s, DEFAULT_TOL))?, algebra);
    let controlled = StarBounds::from_scalar(lib(optimal_scalar_bounds(&s_c, DEFAULT_TOL))?, algebra);
    let id = GlPlusCertificate::identity(inst.module);
    let sample_seed = inst.seed ^ inst.case.rotate_left(32);
    let to_c = lib(convert_star_bounds(&plain, &inst.controller, StarConversion::PlainToControlled))?;
    let v = lib(verify_star_bounds(&inst.frame, &inst.controller, &to_c, DEFAULT_TOL, SAMPLES, sample_seed))?;
    ensure(v.holds, || "plain->controlled star bounds fail".into())?;
    let to_p = lib(convert_star_bounds(&controlled, &inst.controller, StarConversion::ControlledToPlain))?;
    let v = lib(verify_star_bounds(&inst.frame, &id, &to_p, DEFAULT_TOL, SAMPLES, sample_seed))?;
    ensure(v.holds, || "controlled->plain star bounds fail".into())
}

fn kf_operator_identity(inst: &RandomInstance) -> Check {
    let k = &inst.transform;
    let out = lib(transform_frame(k, &inst.frame, &inst.controller, DEFAULT_TOL))?;
    let s_c = lib(controlled_frame_operator(&inst.frame, &inst.controller))?;
    let predicted = lib(lib(k.compose(&s_c))?.compose(&k.adjoint()))?;
    let actual = lib(controlled_frame_operator(&out.family, &inst.controller))?;
    let gap = lib(actual.distance(&predicted))?;
    ensure(gap <= 1e-10 * predicted.op_norm(), || format!("KF operator gap {gap:e}"))?;
    ensure(sandwich_holds(&actual, &out.bounds, DEFAULT_TOL), || {
        "predicted KF bounds invalid".into()
    })
}

fn identity_reduction(inst: &RandomInstance, rng: &mut ChaCha8Rng) -> Check {
    let id = GlPlusCertificate::identity(inst.module);
    let s = lib(frame_operator(&inst.frame))?;
    let s_i = lib(controlled_frame_operator(&inst.frame, &id))?;
    ensure(s == s_i, || "S_I differs from S".into())?;
    let x = random::module_element(rng, inst.module);
    let c = lib(analysis(&inst.frame, &x))?;
    ensure(lib(synthesis(&inst.frame, &c))? == lib(controlled_synthesis(&inst.frame, &id, &c))?, || {
        "controlled synthesis with I differs".into()
    })?;
    let b = lib(optimal_scalar_bounds(&s, DEFAULT_TOL))?;
    ensure(lib(convert_controlled_to_plain(&b, &id))? == b, || "controlled->plain moved bounds".into())?;
    ensure(lib(convert_plain_to_controlled(&b, &id))? == b, || "plain->controlled moved bounds".into())?;
    let report = lib(is_controlled_frame(&inst.frame, &id, DEFAULT_TOL))?;
    ensure(report.bounds == Some(b), || "frame report bounds differ".into())?;
    let sb = StarBounds::from_scalar(b, inst.module.algebra());
    for dir in [StarConversion::PlainToControlled, StarConversion::ControlledToPlain] {
        ensure(lib(convert_star_bounds(&sb, &id, dir))? == sb, || "star conversion moved bounds".into())?;
    }
    Ok(())
}
