//! Finite discretisations of a measure space `(Ω, μ)` and the Bochner
//! integral of algebra- and module-valued functions over them.
//!
//! Every integral is the weighted sum `Σ_i μ_i f(ω_i)`, accumulated in
//! ascending node order so results are bit-stable from run to run.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::module::ModuleElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    IntervalRiemann,
    IntervalTrapezoid,
    IntervalGaussLegendre,
    DiscreteCounting,
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QuadratureKind::IntervalRiemann => "interval-riemann",
            QuadratureKind::IntervalTrapezoid => "interval-trapezoid",
            QuadratureKind::IntervalGaussLegendre => "interval-gauss-legendre",
            QuadratureKind::DiscreteCounting => "discrete-counting",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    kind: QuadratureKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: Option<(f64, f64)>,
}

fn check_interval(a: f64, b: f64, m: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidMeasure(format!("invalid interval [{a}, {b}]")));
    }
    if m == 0 {
        return Err(Error::InvalidMeasure("node count must be at least 1".into()));
    }
    Ok(())
}

impl MeasureSpace {
    /// `m`-point Gauss–Legendre rule mapped to `[a, b]`; exact for
    /// polynomials of degree `≤ 2m − 1`.
    pub fn gauss_legendre(a: f64, b: f64, m: usize) -> Result<Self> {
        check_interval(a, b, m)?;
        let (x, w) = legendre_rule(m);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Ok(MeasureSpace {
            kind: QuadratureKind::IntervalGaussLegendre,
            nodes: x.iter().map(|&t| mid + half * t).collect(),
            weights: w.iter().map(|&wi| half * wi).collect(),
            interval: Some((a, b)),
        })
    }

    /// Midpoint Riemann sum with `m` equal cells.
    pub fn riemann(a: f64, b: f64, m: usize) -> Result<Self> {
        check_interval(a, b, m)?;
        let h = (b - a) / m as f64;
        Ok(MeasureSpace {
            kind: QuadratureKind::IntervalRiemann,
            nodes: (0..m).map(|i| a + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; m],
            interval: Some((a, b)),
        })
    }

    /// Composite trapezoid rule on `m ≥ 2` equispaced nodes including both ends.
    pub fn trapezoid(a: f64, b: f64, m: usize) -> Result<Self> {
        check_interval(a, b, m)?;
        if m < 2 {
            return Err(Error::InvalidMeasure("trapezoid rule needs at least 2 nodes".into()));
        }
        let h = (b - a) / (m - 1) as f64;
        let mut weights = vec![h; m];
        weights[0] = 0.5 * h;
        weights[m - 1] = 0.5 * h;
        Ok(MeasureSpace {
            kind: QuadratureKind::IntervalTrapezoid,
            nodes: (0..m).map(|i| if i == m - 1 { b } else { a + i as f64 * h }).collect(),
            weights,
            interval: Some((a, b)),
        })
    }

    /// Counting measure on the indices `0..size`.
    pub fn counting(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidMeasure("counting measure needs at least one point".into()));
        }
        Ok(MeasureSpace {
            kind: QuadratureKind::DiscreteCounting,
            nodes: (0..size).map(|i| i as f64).collect(),
            weights: vec![1.0; size],
            interval: None,
        })
    }

    /// Discrete measure with explicit positive weights.
    pub fn discrete(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "need matching, nonempty node and weight lists (got {} and {})",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        Ok(MeasureSpace {
            kind: QuadratureKind::DiscreteCounting,
            nodes,
            weights,
            interval: None,
        })
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_i μ_i f(i, ω_i)` for algebra-valued `f`.
    pub fn integrate_algebra_valued(
        &self,
        mut f: impl FnMut(usize, f64) -> AlgebraElement,
    ) -> Result<AlgebraElement> {
        let mut acc: Option<AlgebraElement> = None;
        for (i, (&node, &weight)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let term = f(i, node).scale_real(weight);
            acc = Some(match acc {
                None => term,
                Some(sum) => sum.try_add(&term)?,
            });
        }
        acc.ok_or_else(|| Error::InvalidMeasure("empty measure space".into()))
    }

    /// `Σ_i μ_i f(i, ω_i)` for module-valued `f`.
    pub fn integrate_module_valued(
        &self,
        mut f: impl FnMut(usize, f64) -> ModuleElement,
    ) -> Result<ModuleElement> {
        let mut acc: Option<ModuleElement> = None;
        for (i, (&node, &weight)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let term = f(i, node).scale_real(weight);
            acc = Some(match acc {
                None => term,
                Some(sum) => sum.try_add(&term)?,
            });
        }
        acc.ok_or_else(|| Error::InvalidMeasure("empty measure space".into()))
    }
}

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending. Newton's method on `P_m` from Chebyshev-like guesses.
fn legendre_rule(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, z);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = weight;
        w[m - 1 - i] = weight;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(m: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if m == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=m {
        let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
