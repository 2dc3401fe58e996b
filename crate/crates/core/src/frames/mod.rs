//! Integral frames, controlled integral frames and their `*`-variants.
//!
//! A [`FrameFamily`] is a map `ω ↦ F_ω ∈ H` already sampled at the nodes of
//! a [`MeasureSpace`]. With a controller `C ∈ GL⁺(H)` the controlled frame
//! operator is `S_C x = ∫ ⟨x, F_ω⟩ C F_ω dμ(ω)`; `C = I` recovers the plain
//! frame operator `S`.

mod bounds;
mod neumann;
mod operator;
mod star;
mod transform;

#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::measure::MeasureSpace;
use crate::module::{ModuleDescriptor, ModuleElement, ModuleOperator};

pub use bounds::{
    convert_controlled_to_plain, convert_plain_to_controlled, convert_plain_to_controlled_with,
    is_controlled_frame, is_extremal, norm_form_check, optimal_scalar_bounds, sandwich_holds,
    ExponentConvention,
};
pub use neumann::{neumann_inverse_apply, reconstruct, NeumannSolution, Reconstruction};
pub use operator::{
    analysis, controlled_frame_operator, controlled_synthesis, frame_operator, synthesis,
};
pub use star::{
    convert_star_bounds, derive_tight_star_bound, verify_star_bounds, verify_star_bounds_on,
    StarConversion, StarVerification,
};
pub use transform::{transform_frame, transform_star_frame, TransformedFrame, TransformedStarFrame};

/// Relative threshold under which `A = B` counts as a tight frame.
pub const TIGHTNESS_TOL: f64 = 1e-9;

const ROUNDING_SLACK: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFamily {
    module: ModuleDescriptor,
    space: MeasureSpace,
    vectors: Vec<ModuleElement>,
}

impl FrameFamily {
    pub fn new(module: ModuleDescriptor, space: MeasureSpace, vectors: Vec<ModuleElement>) -> Result<Self> {
        if vectors.len() != space.len() {
            return Err(Error::mismatch(format!(
                "{} frame vectors for {} nodes",
                vectors.len(),
                space.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.descriptor() != module) {
            return Err(Error::mismatch(format!(
                "frame vector in {} but module is {}",
                v.descriptor(),
                module
            )));
        }
        Ok(FrameFamily {
            module,
            space,
            vectors,
        })
    }

    /// Sample a generator `ω ↦ F_ω` at every node.
    pub fn from_fn(
        module: ModuleDescriptor,
        space: MeasureSpace,
        mut generator: impl FnMut(usize, f64) -> Result<ModuleElement>,
    ) -> Result<Self> {
        let vectors = space
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &w)| generator(i, w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(module, space, vectors)
    }

    pub fn module(&self) -> ModuleDescriptor {
        self.module
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn vectors(&self) -> &[ModuleElement] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `ω ↦ T F_ω`.
    pub fn map_operator(&self, t: &ModuleOperator) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|v| t.apply(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(FrameFamily {
            module: self.module,
            space: self.space.clone(),
            vectors,
        })
    }
}

/// An element of `l²(Ω, A)`: one algebra coefficient per node.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    space: MeasureSpace,
    coeffs: Vec<AlgebraElement>,
}

impl CoefficientVector {
    pub fn new(space: MeasureSpace, coeffs: Vec<AlgebraElement>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::mismatch(format!(
                "{} coefficients for {} nodes",
                coeffs.len(),
                space.len()
            )));
        }
        Ok(CoefficientVector { space, coeffs })
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn coeffs(&self) -> &[AlgebraElement] {
        &self.coeffs
    }

    /// `⟨c, d⟩ = Σ_i μ_i c_i d_i*`.
    pub fn l2_inner(&self, other: &Self) -> Result<AlgebraElement> {
        if self.space != other.space {
            return Err(Error::mismatch("coefficient vectors over different measure spaces"));
        }
        self.space
            .integrate_algebra_valued(|i, _| &self.coeffs[i] * &other.coeffs[i].adjoint())
    }

    pub fn l2_norm(&self) -> Result<f64> {
        Ok(self.l2_inner(self)?.operator_norm().sqrt())
    }
}

/// Scalar frame bounds `0 < A ≤ B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarBounds {
    lower: f64,
    upper: f64,
}

impl ScalarBounds {
    /// `A` may exceed `B` by a few ulps (as happens for tight spectra after
    /// rescaling); `B` is then raised to `A`, which keeps the pair valid.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let ordered = lower <= upper * (1.0 + ROUNDING_SLACK);
        if !(lower.is_finite() && upper.is_finite() && 0.0 < lower && ordered) {
            return Err(Error::InvalidBounds(format!(
                "need 0 < A <= B < inf, got A = {lower:e}, B = {upper:e}"
            )));
        }
        Ok(ScalarBounds {
            lower,
            upper: upper.max(lower),
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// `(B − A) / B`, the Neumann contraction factor.
    pub fn contraction_factor(&self) -> f64 {
        (self.upper - self.lower) / self.upper
    }

    pub fn tightness(&self) -> Tightness {
        if self.upper - self.lower > TIGHTNESS_TOL * self.upper {
            Tightness::General
        } else if (self.lower - 1.0).abs() <= TIGHTNESS_TOL && (self.upper - 1.0).abs() <= TIGHTNESS_TOL {
            Tightness::Parseval
        } else {
            Tightness::Tight
        }
    }
}

/// Algebra-valued bounds entering as `A⟨x,x⟩A*` and `B⟨x,x⟩B*`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarBounds {
    lower: AlgebraElement,
    upper: AlgebraElement,
}

impl StarBounds {
    pub fn new(lower: AlgebraElement, upper: AlgebraElement) -> Result<Self> {
        if lower.descriptor() != upper.descriptor() {
            return Err(Error::mismatch("star bounds live in different algebras"));
        }
        if lower.operator_norm() == 0.0 || upper.operator_norm() == 0.0 {
            return Err(Error::InvalidBounds("star bounds must be nonzero".into()));
        }
        Ok(StarBounds { lower, upper })
    }

    /// `(√A·1, √B·1)`: scalar bounds lifted into the algebra.
    pub fn from_scalar(bounds: ScalarBounds, algebra: crate::algebra::AlgebraDescriptor) -> Self {
        let one = AlgebraElement::identity(algebra);
        StarBounds {
            lower: one.scale_real(bounds.lower.sqrt()),
            upper: one.scale_real(bounds.upper.sqrt()),
        }
    }

    pub fn lower(&self) -> &AlgebraElement {
        &self.lower
    }

    pub fn upper(&self) -> &AlgebraElement {
        &self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tightness {
    Tight,
    Parseval,
    General,
}

/// Verdicts on the frame operator: positive, self-adjoint, bounded, invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub self_adjoint: bool,
    pub positive: bool,
    pub invertible: bool,
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl FrameDiagnostics {
    pub fn all_pass(&self) -> bool {
        self.self_adjoint && self.positive && self.invertible
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub is_frame: bool,
    /// Optimal bounds; `None` when the family is not a frame.
    pub bounds: Option<ScalarBounds>,
    pub operator: ModuleOperator,
    pub tightness: Option<Tightness>,
    pub diagnostics: FrameDiagnostics,
}
