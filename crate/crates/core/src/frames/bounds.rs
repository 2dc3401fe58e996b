use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::module::{GlPlusCertificate, ModuleElement, ModuleOperator};

use super::operator::controlled_frame_operator;
use super::{FrameDiagnostics, FrameFamily, FrameReport, ScalarBounds};

/// Extreme eigenvalues of a positive self-adjoint operator: the largest `A`
/// and smallest `B` with `A·I ≤ S ≤ B·I`.
pub fn optimal_scalar_bounds(s: &ModuleOperator, tol: f64) -> Result<ScalarBounds> {
    if !s.is_self_adjoint(tol) {
        return Err(Error::NotSelfAdjoint {
            asymmetry: s.asymmetry(),
        });
    }
    let eig = s.eigenvalues();
    let lo = eig.first().copied().unwrap_or(0.0);
    let hi = eig.last().copied().unwrap_or(0.0);
    if lo <= tol * hi.max(1.0) {
        return Err(Error::NotPositive { min_eigenvalue: lo });
    }
    ScalarBounds::new(lo, hi)
}

/// `A·I ≤ S ≤ B·I` in the operator Loewner order.
pub fn sandwich_holds(s: &ModuleOperator, bounds: &ScalarBounds, tol: f64) -> bool {
    let id = ModuleOperator::identity(s.descriptor());
    let above = s.try_sub(&id.scale_real(bounds.lower())).expect("same module");
    let below = id.scale_real(bounds.upper()).try_sub(s).expect("same module");
    above.is_positive_operator(tol) && below.is_positive_operator(tol)
}

/// Neither `(A+ε)·I ≤ S` nor `S ≤ (B−ε)·I` holds.
pub fn is_extremal(s: &ModuleOperator, bounds: &ScalarBounds, eps: f64, tol: f64) -> bool {
    let id = ModuleOperator::identity(s.descriptor());
    let raised = s
        .try_sub(&id.scale_real(bounds.lower() + eps))
        .expect("same module");
    let lowered = id
        .scale_real(bounds.upper() - eps)
        .try_sub(s)
        .expect("same module");
    !raised.is_positive_operator(tol) && !lowered.is_positive_operator(tol)
}

/// Compute `S_C`, check it is positive, self-adjoint and invertible, and
/// extract the optimal bounds.
pub fn is_controlled_frame(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    tol: f64,
) -> Result<FrameReport> {
    let operator = controlled_frame_operator(frame, controller)?;
    let eig = operator.eigenvalues();
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
    let max_eigenvalue = eig.last().copied().unwrap_or(0.0);
    let scale = max_eigenvalue.abs().max(1.0);
    let diagnostics = FrameDiagnostics {
        self_adjoint: operator.is_self_adjoint(tol),
        positive: min_eigenvalue >= -tol * scale,
        invertible: min_eigenvalue > tol * scale,
        asymmetry: operator.asymmetry(),
        min_eigenvalue,
        max_eigenvalue,
    };
    let bounds = if diagnostics.all_pass() {
        ScalarBounds::new(min_eigenvalue, max_eigenvalue).ok()
    } else {
        None
    };
    Ok(FrameReport {
        is_frame: bounds.is_some(),
        tightness: bounds.map(|b| b.tightness()),
        bounds,
        operator,
        diagnostics,
    })
}

/// Check `A‖x‖² ≤ ‖⟨S_C x, x⟩‖ ≤ B‖x‖²` on every sample, with a relative
/// slack of `tol·B‖x‖²`.
pub fn norm_form_check(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    bounds: &ScalarBounds,
    samples: &[ModuleElement],
    tol: f64,
) -> Result<bool> {
    let s = controlled_frame_operator(frame, controller)?;
    for x in samples {
        let middle = s.apply(x)?.inner_product(x)?.operator_norm();
        let norm_sq = x.module_norm().powi(2);
        let slack = tol * bounds.upper() * norm_sq;
        if bounds.lower() * norm_sq - middle > slack || middle - bounds.upper() * norm_sq > slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bounds of a controlled frame, re-expressed for the plain frame:
/// `(A‖C^{1/2}‖⁻², B‖C^{-1/2}‖²)`.
pub fn convert_controlled_to_plain(bounds: &ScalarBounds, controller: &GlPlusCertificate) -> Result<ScalarBounds> {
    ScalarBounds::new(
        bounds.lower() / controller.sqrt_norm().powi(2),
        bounds.upper() * controller.inv_sqrt_norm().powi(2),
    )
}

/// Which exponent on `‖C^{-1/2}‖` the plain → controlled lower bound uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentConvention {
    /// `A‖C^{-1/2}‖⁻²`, which is what the derivation actually establishes.
    Proof,
    /// `A‖C^{-1/2}‖²`; unsound whenever `‖C^{-1/2}‖ > 1`.
    Statement,
}

/// Bounds of a plain frame, re-expressed for the `C`-controlled frame:
/// `(A‖C^{-1/2}‖⁻², B‖C^{1/2}‖²)`.
pub fn convert_plain_to_controlled(bounds: &ScalarBounds, controller: &GlPlusCertificate) -> Result<ScalarBounds> {
    convert_plain_to_controlled_with(bounds, controller, ExponentConvention::Proof)
}

pub fn convert_plain_to_controlled_with(
    bounds: &ScalarBounds,
    controller: &GlPlusCertificate,
    convention: ExponentConvention,
) -> Result<ScalarBounds> {
    let inv = controller.inv_sqrt_norm().powi(2);
    let lower = match convention {
        ExponentConvention::Proof => bounds.lower() / inv,
        ExponentConvention::Statement => bounds.lower() * inv,
    };
    ScalarBounds::new(lower, bounds.upper() * controller.sqrt_norm().powi(2))
}
