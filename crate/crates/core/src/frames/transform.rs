use crate::error::{Error, Result};
use crate::module::{GlPlusCertificate, ModuleOperator};

use super::bounds::is_controlled_frame;
use super::{FrameFamily, ScalarBounds, StarBounds};

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedFrame {
    pub family: FrameFamily,
    /// `(A·‖(KK*)⁻¹‖⁻¹, B·‖K‖²)` from the optimal bounds of `S_C`.
    pub bounds: ScalarBounds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedStarFrame {
    pub family: FrameFamily,
    /// `(‖(KK*)⁻¹‖^{-1/2}·A, ‖K‖·B)`.
    pub bounds: StarBounds,
}

/// Checks shared by both transforms; returns `‖(KK*)⁻¹‖⁻¹` and `‖K‖`.
fn check_transform(k: &ModuleOperator, controller: &GlPlusCertificate, tol: f64) -> Result<(f64, f64)> {
    if !k.is_surjective(tol) {
        return Err(Error::NotSurjective {
            sigma_min: k.sigma_min(),
        });
    }
    let c = controller.operator();
    let defect = k.compose(c)?.distance(&c.compose(k)?)?;
    let k_norm = k.op_norm();
    if defect > tol * k_norm * c.op_norm() {
        return Err(Error::NonCommuting { defect });
    }
    let kk_star = k.compose(&k.adjoint())?;
    let lower_factor = 1.0 / kk_star.invert(tol)?.op_norm();
    Ok((lower_factor, k_norm))
}

/// The family `ω ↦ K F_ω` for a surjective `K` commuting with `C`, whose
/// controlled frame operator is `K S_C K*`.
pub fn transform_frame(
    k: &ModuleOperator,
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    tol: f64,
) -> Result<TransformedFrame> {
    let (lower_factor, k_norm) = check_transform(k, controller, tol)?;
    let report = is_controlled_frame(frame, controller, tol)?;
    let bounds = report
        .bounds
        .ok_or_else(|| Error::NotAFrame("source family is not a controlled frame".into()))?;
    Ok(TransformedFrame {
        family: frame.map_operator(k)?,
        bounds: ScalarBounds::new(bounds.lower() * lower_factor, bounds.upper() * k_norm * k_norm)?,
    })
}

/// `*`-version of [`transform_frame`] carrying algebra-valued bounds.
pub fn transform_star_frame(
    k: &ModuleOperator,
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    bounds: &StarBounds,
    tol: f64,
) -> Result<TransformedStarFrame> {
    let (lower_factor, k_norm) = check_transform(k, controller, tol)?;
    Ok(TransformedStarFrame {
        family: frame.map_operator(k)?,
        bounds: StarBounds::new(
            bounds.lower().scale_real(lower_factor.sqrt()),
            bounds.upper().scale_real(k_norm),
        )?,
    })
}
