//! Scenario files.
//!
//! A scenario is a TOML document naming an algebra, a rank, a measure, a
//! frame and a controller:
//!
//! ```toml
//! seed = 7
//! rank = 1
//!
//! [algebra]
//! dim = 2
//! structure = "diagonal"
//!
//! [measure]
//! kind = "interval-gauss-legendre"
//! interval = [0.0, 1.0]
//! nodes = 8
//!
//! [frame]
//! kind = "random"
//!
//! [controller]
//! kind = "random-commuting"
//! ```
//!
//! The builtins `example1` and `example2` fix everything except their
//! parameters. Explicit tables write an algebra element as a list of `n`
//! diagonal entries (diagonal algebras) or `n` rows of `n` entries (full
//! algebras); an entry is a number or a `[re, im]` pair.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, Structure, DEFAULT_TOL};
use crate::builtin::{self, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameFamily};
use crate::linalg::CMatrix;
use crate::measure::{MeasureSpace, QuadratureKind};
use crate::module::{GlPlusCertificate, ModuleDescriptor, ModuleElement, ModuleOperator};
use crate::random::{self, rng_for};

/// Streams of the scenario seed reserved for each random ingredient.
pub(crate) mod streams {
    pub const FRAME: u64 = 0;
    pub const CONTROLLER: u64 = 1;
    pub const TRANSFORM: u64 = 2;
    pub const RECONSTRUCTION: u64 = 3;
    pub const STAR: u64 = 4;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub star_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureConfig>,
    pub frame: FrameConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    pub dim: usize,
    pub structure: Structure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub kind: QuadratureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Per-node weights for a discrete measure; counting weights otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FrameConfig {
    Example1 { alpha: f64 },
    Example2 { alpha: f64, n: usize },
    /// One list of `rank` algebra elements per node.
    Explicit { vectors: Vec<toml::Value> },
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControllerConfig {
    Identity,
    Scalar { alpha: f64 },
    /// `rank × rank` table of algebra elements, right-action convention.
    Explicit { coeffs: Vec<toml::Value> },
    RandomCommuting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransformConfig {
    Scalar { alpha: f64 },
    Explicit { coeffs: Vec<toml::Value> },
    RandomCommuting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_positivity")]
    pub positivity: f64,
    #[serde(default = "default_tightness")]
    pub tightness: f64,
    #[serde(default = "default_reconstruction")]
    pub reconstruction: f64,
}

fn default_positivity() -> f64 {
    DEFAULT_TOL
}

fn default_tightness() -> f64 {
    crate::frames::TIGHTNESS_TOL
}

fn default_reconstruction() -> f64 {
    1e-10
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            positivity: default_positivity(),
            tightness: default_tightness(),
            reconstruction: default_reconstruction(),
        }
    }
}

/// Number of sampled elements for `*`-bound checks unless a scenario says
/// otherwise.
pub const DEFAULT_STAR_SAMPLES: usize = 200;

/// Which builtin, if any, a scenario instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Builtin {
    Example1 { alpha: f64 },
    Example2 { alpha: f64, n: usize },
}

/// A validated scenario: everything resolved to concrete objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub builtin: Option<Builtin>,
    pub frame: FrameFamily,
    pub controller: GlPlusCertificate,
    pub transform: Option<ModuleOperator>,
    pub tolerances: Tolerances,
    pub star_samples: usize,
}

/// Read and validate a scenario file. `default_seed` applies when the file
/// does not set `seed`.
pub fn load_scenario(path: impl AsRef<Path>, default_seed: u64) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    parse_scenario(&text, &name, default_seed)
}

pub fn parse_scenario(text: &str, name: &str, default_seed: u64) -> Result<Scenario> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build_scenario(config, name, default_seed)
}

pub fn build_scenario(config: ScenarioConfig, name: &str, default_seed: u64) -> Result<Scenario> {
    let seed = config.seed.unwrap_or(default_seed);
    check_tolerances(&config.tolerances)?;
    let star_samples = config.star_samples.unwrap_or(DEFAULT_STAR_SAMPLES);
    if star_samples == 0 {
        return Err(Error::validation("star_samples", "must be at least 1"));
    }

    let mut planted = None;
    let (frame, builtin) = match &config.frame {
        FrameConfig::Example1 { alpha } => {
            check_fixed_controller(&config)?;
            check_fixed_module(&config, AlgebraDescriptor::diagonal(2))?;
            let space = match &config.measure {
                None => MeasureSpace::gauss_legendre(0.0, 1.0, DEFAULT_NODES)?,
                Some(m) => {
                    let space = build_measure(m)?;
                    if space.interval() != Some((0.0, 1.0)) {
                        return Err(Error::validation("measure", "example1 is defined on the interval [0, 1]"));
                    }
                    space
                }
            };
            let (frame, _) = builtin::example1(*alpha, space)?;
            (frame, Some(Builtin::Example1 { alpha: *alpha }))
        }
        FrameConfig::Example2 { alpha, n } => {
            check_fixed_controller(&config)?;
            if *n == 0 {
                return Err(Error::validation("frame.n", "truncation must be at least 1"));
            }
            check_fixed_module(&config, AlgebraDescriptor::diagonal(*n))?;
            if let Some(m) = &config.measure {
                let counting = m.kind == QuadratureKind::DiscreteCounting && m.weights.is_none();
                if !counting || m.nodes.is_some_and(|k| k != *n) {
                    return Err(Error::validation(
                        "measure",
                        format!("example2 uses counting measure on {n} nodes"),
                    ));
                }
            }
            let (frame, _) = builtin::example2(*alpha, *n)?;
            (frame, Some(Builtin::Example2 { alpha: *alpha, n: *n }))
        }
        FrameConfig::Explicit { vectors } => {
            let module = module_of(&config)?;
            let space = build_measure(require(&config.measure, "measure")?)?;
            if vectors.len() != space.len() {
                return Err(Error::validation(
                    "frame.vectors",
                    format!("{} vectors for {} nodes", vectors.len(), space.len()),
                ));
            }
            let elements = vectors
                .iter()
                .enumerate()
                .map(|(i, v)| parse_module_element(v, module, &format!("frame.vectors[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            (FrameFamily::new(module, space, elements)?, None)
        }
        FrameConfig::Random => {
            let module = module_of(&config)?;
            let space = build_measure(require(&config.measure, "measure")?)?;
            let p = random::plant(&mut rng_for(seed, streams::FRAME), module, space, false)?;
            let frame = p.frame.clone();
            planted = Some(p);
            (frame, None)
        }
    };
    let module = frame.module();

    let mut planted_controller = false;
    let controller = match (&builtin, &config.controller) {
        (Some(Builtin::Example1 { alpha }), _) | (Some(Builtin::Example2 { alpha, .. }), _) => {
            scalar_certificate(module, *alpha, "frame.alpha")?
        }
        (None, None) | (None, Some(ControllerConfig::Identity)) => GlPlusCertificate::identity(module),
        (None, Some(ControllerConfig::Scalar { alpha })) => scalar_certificate(module, *alpha, "controller.alpha")?,
        (None, Some(ControllerConfig::Explicit { coeffs })) => {
            parse_operator(coeffs, module, "controller.coeffs")?
                .certify_gl_plus(config.tolerances.positivity)
                .map_err(|e| Error::validation("controller.coeffs", e.to_string()))?
        }
        (None, Some(ControllerConfig::RandomCommuting)) => match &planted {
            Some(p) => {
                planted_controller = true;
                p.controller.clone()
            }
            None => random::commuting_controller(
                &mut rng_for(seed, streams::CONTROLLER),
                &frame_operator(&frame)?,
            )?,
        },
    };

    let transform = match &config.transform {
        None => None,
        Some(TransformConfig::Scalar { alpha }) => {
            if !(alpha.is_finite() && *alpha != 0.0) {
                return Err(Error::validation("transform.alpha", "must be finite and nonzero"));
            }
            Some(ModuleOperator::scalar(module, *alpha))
        }
        Some(TransformConfig::Explicit { coeffs }) => Some(parse_operator(coeffs, module, "transform.coeffs")?),
        Some(TransformConfig::RandomCommuting) => Some(match (&planted, planted_controller) {
            (Some(p), true) => p.transform.clone(),
            _ => {
                // aI + bC commutes with C and is invertible for a, b > 0.
                use rand::Rng;
                let mut rng = rng_for(seed, streams::TRANSFORM);
                let a = rng.random_range(0.5..1.5);
                let b = rng.random_range(0.5..1.5);
                ModuleOperator::scalar(module, a).try_add(&controller.operator().scale_real(b))?
            }
        }),
    };

    Ok(Scenario {
        name: name.to_string(),
        tolerances: config.tolerances,
        config,
        seed,
        builtin,
        frame,
        controller,
        transform,
        star_samples,
    })
}

fn require<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::validation(field, "required for this frame kind"))
}

fn check_tolerances(t: &Tolerances) -> Result<()> {
    for (field, v) in [
        ("tolerances.positivity", t.positivity),
        ("tolerances.tightness", t.tightness),
        ("tolerances.reconstruction", t.reconstruction),
    ] {
        if !(v.is_finite() && v > 0.0 && v < 1.0) {
            return Err(Error::validation(field, format!("must lie in (0, 1), got {v}")));
        }
    }
    Ok(())
}

fn check_fixed_controller(config: &ScenarioConfig) -> Result<()> {
    if config.controller.is_some() {
        return Err(Error::validation(
            "controller",
            "builtin frames fix the controller to alpha times the identity",
        ));
    }
    Ok(())
}

fn check_fixed_module(config: &ScenarioConfig, algebra: AlgebraDescriptor) -> Result<()> {
    if let Some(a) = &config.algebra {
        if a.dim != algebra.dim() || a.structure != algebra.structure() {
            return Err(Error::validation("algebra", format!("this builtin requires the algebra {algebra}")));
        }
    }
    if config.rank.is_some_and(|k| k != 1) {
        return Err(Error::validation("rank", "this builtin has rank 1"));
    }
    Ok(())
}

fn module_of(config: &ScenarioConfig) -> Result<ModuleDescriptor> {
    let a = require(&config.algebra, "algebra")?;
    let algebra = AlgebraDescriptor::new(a.dim, a.structure).map_err(|e| Error::validation("algebra.dim", e.to_string()))?;
    let rank = *require(&config.rank, "rank")?;
    ModuleDescriptor::new(algebra, rank).map_err(|e| Error::validation("rank", e.to_string()))
}

fn build_measure(m: &MeasureConfig) -> Result<MeasureSpace> {
    if m.kind == QuadratureKind::DiscreteCounting {
        if m.interval.is_some() {
            return Err(Error::validation("measure.interval", "not used by a discrete measure"));
        }
        return match (&m.weights, m.nodes) {
            (Some(w), nodes) => {
                if nodes.is_some_and(|k| k != w.len()) {
                    return Err(Error::validation("measure.weights", "length differs from measure.nodes"));
                }
                MeasureSpace::discrete((0..w.len()).map(|i| i as f64).collect(), w.clone())
            }
            (None, Some(k)) => MeasureSpace::counting(k),
            (None, None) => Err(Error::validation("measure.nodes", "required for a counting measure")),
        };
    }
    if m.weights.is_some() {
        return Err(Error::validation("measure.weights", "only discrete measures take weights"));
    }
    let [a, b] = m.interval.unwrap_or([0.0, 1.0]);
    let nodes = m.nodes.unwrap_or(DEFAULT_NODES);
    match m.kind {
        QuadratureKind::IntervalGaussLegendre => MeasureSpace::gauss_legendre(a, b, nodes),
        QuadratureKind::IntervalRiemann => MeasureSpace::riemann(a, b, nodes),
        QuadratureKind::IntervalTrapezoid => MeasureSpace::trapezoid(a, b, nodes),
        QuadratureKind::DiscreteCounting => unreachable!("handled above"),
    }
}

fn scalar_certificate(module: ModuleDescriptor, alpha: f64, field: &str) -> Result<GlPlusCertificate> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::validation(field, format!("must be positive, got {alpha}")));
    }
    ModuleOperator::scalar(module, alpha)
        .certify_gl_plus(0.0)
        .map_err(|e| Error::validation(field, e.to_string()))
}

fn located(path: &str, message: impl Into<String>) -> Error {
    Error::validation(path, message)
}

fn as_array<'a>(v: &'a toml::Value, path: &str, len: usize) -> Result<&'a [toml::Value]> {
    let items = v
        .as_array()
        .ok_or_else(|| located(path, format!("expected an array of length {len}")))?;
    if items.len() != len {
        return Err(located(path, format!("expected {len} entries, found {}", items.len())));
    }
    Ok(items)
}

fn as_number(v: &toml::Value, path: &str) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(located(path, "expected a number")),
    }
}

/// A number or a `[re, im]` pair.
pub fn parse_scalar(v: &toml::Value, path: &str) -> Result<Complex64> {
    if let Some(pair) = v.as_array() {
        if pair.len() != 2 {
            return Err(located(path, "complex entries are written [re, im]"));
        }
        return Ok(Complex64::new(
            as_number(&pair[0], &format!("{path}[0]"))?,
            as_number(&pair[1], &format!("{path}[1]"))?,
        ));
    }
    Ok(Complex64::new(as_number(v, path)?, 0.0))
}

pub fn parse_element(v: &toml::Value, desc: AlgebraDescriptor, path: &str) -> Result<AlgebraElement> {
    let n = desc.dim();
    let rows = as_array(v, path, n)?;
    match desc.structure() {
        Structure::Diagonal => {
            let diag = rows
                .iter()
                .enumerate()
                .map(|(i, z)| parse_scalar(z, &format!("{path}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            AlgebraElement::diag_in(desc, &diag)
        }
        Structure::Full => {
            let mut m = CMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                let row_path = format!("{path}[{i}]");
                for (j, z) in as_array(row, &row_path, n)?.iter().enumerate() {
                    m[(i, j)] = parse_scalar(z, &format!("{row_path}[{j}]"))?;
                }
            }
            AlgebraElement::from_matrix(desc, m)
        }
    }
}

pub fn parse_module_element(v: &toml::Value, module: ModuleDescriptor, path: &str) -> Result<ModuleElement> {
    let comps = as_array(v, path, module.rank())?
        .iter()
        .enumerate()
        .map(|(j, c)| parse_element(c, module.algebra(), &format!("{path}[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    ModuleElement::new(module, comps)
}

pub fn parse_operator(rows: &[toml::Value], module: ModuleDescriptor, path: &str) -> Result<ModuleOperator> {
    let k = module.rank();
    if rows.len() != k {
        return Err(located(path, format!("expected {k} rows, found {}", rows.len())));
    }
    let coeffs = rows
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let row_path = format!("{path}[{j}]");
            as_array(row, &row_path, k)?
                .iter()
                .enumerate()
                .map(|(i, c)| parse_element(c, module.algebra(), &format!("{row_path}[{i}]")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ModuleOperator::from_coeffs(module, coeffs)
}
