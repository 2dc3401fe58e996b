//! Analysis reports and their human, JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, Structure};
use crate::error::{Error, Result};
use crate::frames::{
    convert_controlled_to_plain, convert_plain_to_controlled, convert_star_bounds,
    derive_tight_star_bound, frame_operator, is_controlled_frame, is_extremal,
    optimal_scalar_bounds, reconstruct, sandwich_holds, transform_frame, verify_star_bounds,
    controlled_frame_operator, FrameDiagnostics, ScalarBounds, StarBounds, StarConversion,
    StarVerification, Tightness,
};
use crate::module::{GlPlusCertificate, ModuleOperator};
use crate::random::{self, rng_for, GENERATOR};
use crate::scenario::{streams, Scenario};
use crate::suite::SuiteReport;

/// Residuals kept in the Neumann trace; the total count and final value are
/// always reported.
pub const TRACE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Human,
    Json,
    Csv,
}

/// An algebra element as `[re, im]` pairs: the diagonal for diagonal
/// algebras, the full matrix otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementTable {
    Diagonal(Vec<[f64; 2]>),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl ElementTable {
    pub fn of(a: &AlgebraElement) -> Self {
        match a.descriptor().structure() {
            Structure::Diagonal => ElementTable::Diagonal(a.diagonal().iter().map(|z| [z.re, z.im]).collect()),
            Structure::Full => {
                let n = a.dim();
                ElementTable::Matrix(
                    (0..n)
                        .map(|i| (0..n).map(|j| a.get(i, j)).map(|z| [z.re, z.im]).collect())
                        .collect(),
                )
            }
        }
    }
}

fn operator_table(t: &ModuleOperator) -> Vec<Vec<ElementTable>> {
    let k = t.descriptor().rank();
    (0..k)
        .map(|j| (0..k).map(|i| ElementTable::of(t.coeff(j, i))).collect())
        .collect()
}

/// A pair of scalar bounds and whether it passed the operator sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckedBounds {
    pub lower: f64,
    pub upper: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversions {
    /// Optimal bounds of the plain frame operator `S`.
    pub plain_optimal: CheckedBounds,
    pub controlled_to_plain: CheckedBounds,
    /// Lower bound `A‖C^{-1/2}‖⁻²`.
    pub plain_to_controlled: CheckedBounds,
    /// The alternative lower bound `A‖C^{-1/2}‖²`, kept for comparison.
    pub plain_to_controlled_alternative: CheckedBounds,
    pub alternative_differs: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarSection {
    /// `derived-tight` when `S_C` is a multiplication operator, `scalar`
    /// otherwise.
    pub source: String,
    pub lower: ElementTable,
    pub upper: ElementTable,
    pub verification: StarVerification,
    pub controlled_to_plain_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSection {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub operator_identity_gap: f64,
    pub bounds_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannTrace {
    pub tolerance: f64,
    pub iterations: usize,
    /// First [`TRACE_LIMIT`] relative residuals.
    pub residuals: Vec<f64>,
    pub final_residual: f64,
    pub true_residual: f64,
    /// `‖x̂ − x‖ / ‖x‖` for the seeded test element.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceAnalysis {
    pub algebra: String,
    pub rank: usize,
    pub quadrature: String,
    pub nodes: usize,
    pub is_frame: bool,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub contraction_factor: Option<f64>,
    /// `‖I − B⁻¹S_C‖` measured on the operator.
    pub measured_contraction: Option<f64>,
    pub tightness: Option<Tightness>,
    pub diagnostics: FrameDiagnostics,
    pub eigenvalues: Vec<f64>,
    /// Coefficient table of `S_C`, right-action convention.
    pub frame_operator: Vec<Vec<ElementTable>>,
    pub conversions: Option<Conversions>,
    pub star: Option<StarSection>,
    pub transform: Option<TransformSection>,
    pub neumann: Option<NeumannTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub generator: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteReport>,
    pub verdicts: BTreeMap<String, bool>,
    /// Shown in human output only, so JSON stays byte-stable.
    #[serde(skip)]
    pub wall_time: Option<Duration>,
}

impl AnalysisReport {
    pub fn empty(seed: u64) -> Self {
        AnalysisReport {
            generator: GENERATOR.to_string(),
            seed,
            scenario: None,
            instance: None,
            suite: None,
            verdicts: BTreeMap::new(),
            wall_time: None,
        }
    }

    pub fn from_suite(suite: SuiteReport) -> Self {
        let mut report = Self::empty(suite.seed);
        report.verdicts.insert("suite".into(), suite.passed());
        report.suite = Some(suite);
        report
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

fn checked(lower: f64, upper: f64, op: &ModuleOperator, tol: f64) -> CheckedBounds {
    let valid = ScalarBounds::new(lower, upper).is_ok_and(|b| sandwich_holds(op, &b, tol));
    CheckedBounds { lower, upper, valid }
}

fn conversions(s: &ModuleOperator, s_c: &ModuleOperator, c: &GlPlusCertificate, controlled: &ScalarBounds, tol: f64) -> Result<Conversions> {
    let plain = optimal_scalar_bounds(s, tol)?;
    let to_plain = convert_controlled_to_plain(controlled, c)?;
    let to_c = convert_plain_to_controlled(&plain, c)?;
    let inv = c.inv_sqrt_norm().powi(2);
    let alternative = checked(plain.lower() * inv, plain.upper() * c.sqrt_norm().powi(2), s_c, tol);
    Ok(Conversions {
        plain_optimal: checked(plain.lower(), plain.upper(), s, tol),
        controlled_to_plain: checked(to_plain.lower(), to_plain.upper(), s, tol),
        plain_to_controlled: checked(to_c.lower(), to_c.upper(), s_c, tol),
        alternative_differs: alternative.lower != to_c.lower(),
        plain_to_controlled_alternative: alternative,
    })
}

fn star_section(sc: &Scenario, s_c_bounds: &ScalarBounds) -> Result<StarSection> {
    let tol = sc.tolerances.positivity;
    let algebra = sc.frame.module().algebra();
    let (source, bounds) = match derive_tight_star_bound(&sc.frame, &sc.controller, tol) {
        Ok(b) => ("derived-tight", b),
        Err(Error::NotCommutative | Error::NotMultiplicationOperator { .. }) => {
            ("scalar", StarBounds::from_scalar(*s_c_bounds, algebra))
        }
        Err(e) => return Err(e),
    };
    let seed = sc.seed ^ streams::STAR;
    let verification = verify_star_bounds(&sc.frame, &sc.controller, &bounds, tol, sc.star_samples, seed)?;
    let plain = convert_star_bounds(&bounds, &sc.controller, StarConversion::ControlledToPlain)?;
    let id = GlPlusCertificate::identity(sc.frame.module());
    let plain_check = verify_star_bounds(&sc.frame, &id, &plain, tol, sc.star_samples, seed)?;
    Ok(StarSection {
        source: source.into(),
        lower: ElementTable::of(bounds.lower()),
        upper: ElementTable::of(bounds.upper()),
        verification,
        controlled_to_plain_holds: plain_check.holds,
    })
}

fn neumann_trace(sc: &Scenario, tol: f64) -> Result<NeumannTrace> {
    let mut rng = rng_for(sc.seed, streams::RECONSTRUCTION);
    let x = random::module_element(&mut rng, sc.frame.module());
    let rec = reconstruct(&sc.frame, &sc.controller, &x, tol)?;
    let final_residual = rec.residuals.last().copied().unwrap_or(0.0);
    let mut residuals = rec.residuals;
    residuals.truncate(TRACE_LIMIT);
    Ok(NeumannTrace {
        tolerance: tol,
        iterations: rec.iterations,
        residuals,
        final_residual,
        true_residual: rec.true_residual,
        relative_error: rec.estimate.distance(&x)? / x.module_norm(),
    })
}

/// Reconstruct a seeded random element at tolerance `tol` and report the
/// Neumann trace.
pub fn run_reconstruction(sc: &Scenario, tol: f64) -> Result<AnalysisReport> {
    let start = Instant::now();
    let trace = neumann_trace(sc, tol)?;
    let mut report = base_report(sc);
    report
        .verdicts
        .insert("reconstruction".into(), trace.relative_error <= 10.0 * tol);
    let s_c = controlled_frame_operator(&sc.frame, &sc.controller)?;
    let eigenvalues = s_c.eigenvalues();
    report.instance = Some(InstanceAnalysis {
        neumann: Some(trace),
        ..bare_instance(sc, &s_c, eigenvalues)
    });
    report.wall_time = Some(start.elapsed());
    Ok(report)
}

fn base_report(sc: &Scenario) -> AnalysisReport {
    let mut report = AnalysisReport::empty(sc.seed);
    report.scenario = serde_json::to_value(&sc.config).ok();
    report
}

fn bare_instance(sc: &Scenario, s_c: &ModuleOperator, eigenvalues: Vec<f64>) -> InstanceAnalysis {
    let module = sc.frame.module();
    let lo = eigenvalues.first().copied().unwrap_or(0.0);
    let hi = eigenvalues.last().copied().unwrap_or(0.0);
    InstanceAnalysis {
        algebra: module.algebra().to_string(),
        rank: module.rank(),
        quadrature: sc.frame.space().kind().to_string(),
        nodes: sc.frame.len(),
        is_frame: false,
        lower_bound: None,
        upper_bound: None,
        contraction_factor: None,
        measured_contraction: None,
        tightness: None,
        diagnostics: FrameDiagnostics {
            self_adjoint: s_c.is_self_adjoint(sc.tolerances.positivity),
            positive: false,
            invertible: false,
            asymmetry: s_c.asymmetry(),
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        },
        eigenvalues,
        frame_operator: operator_table(s_c),
        conversions: None,
        star: None,
        transform: None,
        neumann: None,
    }
}

/// Every check the library offers for this scenario's frame and controller.
pub fn run_analysis(sc: &Scenario) -> Result<AnalysisReport> {
    let start = Instant::now();
    let tol = sc.tolerances.positivity;
    let mut report = base_report(sc);
    let fr = is_controlled_frame(&sc.frame, &sc.controller, tol)?;
    let eigenvalues = fr.operator.eigenvalues();
    let mut inst = bare_instance(sc, &fr.operator, eigenvalues);
    inst.diagnostics = fr.diagnostics;
    inst.is_frame = fr.is_frame;
    report.verdicts.insert("frame".into(), fr.is_frame);

    if let Some(bounds) = fr.bounds {
        let s_c = &fr.operator;
        inst.lower_bound = Some(bounds.lower());
        inst.upper_bound = Some(bounds.upper());
        inst.contraction_factor = Some(bounds.contraction_factor());
        inst.tightness = Some(classify(&bounds, sc.tolerances.tightness));
        let id = ModuleOperator::identity(sc.frame.module());
        let measured = id.try_sub(&s_c.scale_real(1.0 / bounds.upper()))?.op_norm();
        inst.measured_contraction = Some(measured);
        let v = &mut report.verdicts;
        v.insert("sandwich".into(), sandwich_holds(s_c, &bounds, tol));
        v.insert("extremal".into(), is_extremal(s_c, &bounds, 1e-6 * bounds.upper(), tol));
        v.insert("contraction".into(), measured <= bounds.contraction_factor() + 1e-10);

        let s = frame_operator(&sc.frame)?;
        let conv = conversions(&s, s_c, &sc.controller, &bounds, tol)?;
        v.insert("conversion_controlled_to_plain".into(), conv.controlled_to_plain.valid);
        v.insert("conversion_plain_to_controlled".into(), conv.plain_to_controlled.valid);
        inst.conversions = Some(conv);

        let star = star_section(sc, &bounds)?;
        v.insert("star_bounds".into(), star.verification.holds);
        v.insert("star_conversion".into(), star.controlled_to_plain_holds);
        inst.star = Some(star);

        if let Some(k) = &sc.transform {
            let out = transform_frame(k, &sc.frame, &sc.controller, tol)?;
            let predicted = k.compose(s_c)?.compose(&k.adjoint())?;
            let actual = controlled_frame_operator(&out.family, &sc.controller)?;
            let gap = actual.distance(&predicted)?;
            let section = TransformSection {
                lower_bound: out.bounds.lower(),
                upper_bound: out.bounds.upper(),
                operator_identity_gap: gap,
                bounds_valid: sandwich_holds(&actual, &out.bounds, tol),
            };
            v.insert("transform_identity".into(), gap <= 1e-10 * predicted.op_norm().max(1.0));
            v.insert("transform_bounds".into(), section.bounds_valid);
            inst.transform = Some(section);
        }

        let trace = neumann_trace(sc, sc.tolerances.reconstruction)?;
        v.insert(
            "reconstruction".into(),
            trace.relative_error <= 10.0 * sc.tolerances.reconstruction,
        );
        inst.neumann = Some(trace);
    }
    report.instance = Some(inst);
    report.wall_time = Some(start.elapsed());
    Ok(report)
}

fn classify(b: &ScalarBounds, tol: f64) -> Tightness {
    if b.upper() - b.lower() > tol * b.upper() {
        Tightness::General
    } else if (b.lower() - 1.0).abs() <= tol && (b.upper() - 1.0).abs() <= tol {
        Tightness::Parseval
    } else {
        Tightness::Tight
    }
}

/// Render `report` in `format`.
pub fn emit(report: &AnalysisReport, format: Format, out: &mut dyn Write) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => render_csv(report),
        Format::Human => render_human(report),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// `(quantity, value)` rows for the CSV view.
pub fn quantities(report: &AnalysisReport) -> Vec<(String, f64)> {
    let mut rows = Vec::new();
    if let Some(inst) = &report.instance {
        let scalars = [
            ("lower_bound", inst.lower_bound),
            ("upper_bound", inst.upper_bound),
            ("contraction_factor", inst.contraction_factor),
            ("measured_contraction", inst.measured_contraction),
        ];
        rows.extend(scalars.iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
        rows.extend(inst.eigenvalues.iter().enumerate().map(|(i, &v)| (format!("eigenvalue.{i}"), v)));
        if let Some(t) = &inst.neumann {
            rows.push(("neumann.iterations".into(), t.iterations as f64));
            rows.extend(t.residuals.iter().enumerate().map(|(i, &v)| (format!("residual.{i}"), v)));
            rows.push(("neumann.final_residual".into(), t.final_residual));
            rows.push(("neumann.relative_error".into(), t.relative_error));
        }
    }
    if let Some(suite) = &report.suite {
        for (name, tally) in &suite.tallies {
            rows.push((format!("suite.{name}.passed"), tally.passed as f64));
            rows.push((format!("suite.{name}.failed"), tally.failed as f64));
        }
    }
    rows
}

fn render_csv(report: &AnalysisReport) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in quantities(report) {
        let _ = writeln!(s, "{k},{v:.16e}");
    }
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

fn render_human(report: &AnalysisReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k:<36} {v}");
    };
    line("generator", report.generator.clone());
    line("seed", report.seed.to_string());
    if let Some(inst) = &report.instance {
        line("algebra", format!("{} (rank {})", inst.algebra, inst.rank));
        line("measure", format!("{} on {} nodes", inst.quadrature, inst.nodes));
        line("is_frame", inst.is_frame.to_string());
        line("lower_bound", opt(inst.lower_bound));
        line("upper_bound", opt(inst.upper_bound));
        line("contraction_factor", opt(inst.contraction_factor));
        line("measured_contraction", opt(inst.measured_contraction));
        if let Some(t) = inst.tightness {
            line("tightness", format!("{t:?}").to_lowercase());
        }
        let d = &inst.diagnostics;
        line(
            "diagnostics",
            format!(
                "self_adjoint={} positive={} invertible={} asymmetry={:e}",
                d.self_adjoint, d.positive, d.invertible, d.asymmetry
            ),
        );
        if let Some(c) = &inst.conversions {
            for (name, b) in [
                ("plain_optimal", c.plain_optimal),
                ("controlled_to_plain", c.controlled_to_plain),
                ("plain_to_controlled", c.plain_to_controlled),
                ("plain_to_controlled_alt", c.plain_to_controlled_alternative),
            ] {
                line(name, format!("({}, {}) valid={}", b.lower, b.upper, b.valid));
            }
        }
        if let Some(st) = &inst.star {
            let v = &st.verification;
            line(
                "star_bounds",
                format!(
                    "{} holds={} samples={} gaps=({:e}, {:e})",
                    st.source, v.holds, v.samples, v.max_lower_gap, v.max_upper_gap
                ),
            );
        }
        if let Some(t) = &inst.transform {
            line(
                "transform",
                format!("({}, {}) gap={:e} valid={}", t.lower_bound, t.upper_bound, t.operator_identity_gap, t.bounds_valid),
            );
        }
        if let Some(t) = &inst.neumann {
            line(
                "reconstruction",
                format!(
                    "iterations={} residual={:e} error={:e}",
                    t.iterations, t.final_residual, t.relative_error
                ),
            );
        }
    }
    if let Some(suite) = &report.suite {
        line("suite", format!("{} cases, convention {:?}", suite.cases, suite.convention).to_lowercase());
        for (name, t) in &suite.tallies {
            line(&format!("  {name}"), format!("passed={} failed={}", t.passed, t.failed));
        }
        for f in &suite.failures {
            line(
                "  failure",
                format!("seed={} case={} property={} :: {}", f.seed, f.case, f.property, f.detail),
            );
        }
    }
    for (name, ok) in &report.verdicts {
        line(&format!("verdict.{name}"), if *ok { "pass".into() } else { "FAIL".into() });
    }
    if let Some(t) = report.wall_time {
        line("wall_time", format!("{:.3} s", t.as_secs_f64()));
    }
    s
}

/// The frame vectors as `node,omega,weight,component,row,col,re,im` rows.
/// Diagonal algebras list only diagonal entries.
pub fn dump_frame(sc: &Scenario, out: &mut dyn Write) -> Result<()> {
    let mut s = String::from("node,omega,weight,component,row,col,re,im\n");
    let space = sc.frame.space();
    for (p, v) in sc.frame.vectors().iter().enumerate() {
        let (w, mu) = (space.nodes()[p], space.weights()[p]);
        for (j, a) in v.components().iter().enumerate() {
            let n = a.dim();
            let diagonal = a.descriptor().structure() == Structure::Diagonal;
            for r in 0..n {
                for c in 0..n {
                    if diagonal && r != c {
                        continue;
                    }
                    let z = a.get(r, c);
                    let _ = writeln!(s, "{p},{w:.16e},{mu:.16e},{j},{r},{c},{:.16e},{:.16e}", z.re, z.im);
                }
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}
