use crate::error::{Error, Result};
use crate::module::{GlPlusCertificate, ModuleElement, ModuleOperator};

use super::{CoefficientVector, FrameFamily};

fn check_module(frame: &FrameFamily, x: &ModuleElement) -> Result<()> {
    if frame.module() != x.descriptor() {
        return Err(Error::mismatch(format!(
            "element of {} against frame in {}",
            x.descriptor(),
            frame.module()
        )));
    }
    Ok(())
}

fn check_controller(frame: &FrameFamily, c: &GlPlusCertificate) -> Result<()> {
    if frame.module() != c.operator().descriptor() {
        return Err(Error::mismatch(format!(
            "controller on {} for frame in {}",
            c.operator().descriptor(),
            frame.module()
        )));
    }
    Ok(())
}

/// `c_ω = ⟨x, F_ω⟩`.
pub fn analysis(frame: &FrameFamily, x: &ModuleElement) -> Result<CoefficientVector> {
    check_module(frame, x)?;
    let coeffs = frame
        .vectors()
        .iter()
        .map(|f| x.inner_product(f))
        .collect::<Result<Vec<_>>>()?;
    CoefficientVector::new(frame.space().clone(), coeffs)
}

/// `∫ c_ω · F_ω dμ(ω)`.
pub fn synthesis(frame: &FrameFamily, c: &CoefficientVector) -> Result<ModuleElement> {
    synthesize(frame, c, frame.vectors())
}

/// `∫ c_ω · C F_ω dμ(ω)`.
pub fn controlled_synthesis(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    c: &CoefficientVector,
) -> Result<ModuleElement> {
    check_controller(frame, controller)?;
    let controlled = controlled_vectors(frame, controller)?;
    synthesize(frame, c, &controlled)
}

fn controlled_vectors(frame: &FrameFamily, controller: &GlPlusCertificate) -> Result<Vec<ModuleElement>> {
    frame
        .vectors()
        .iter()
        .map(|f| controller.operator().apply(f))
        .collect()
}

fn synthesize(frame: &FrameFamily, c: &CoefficientVector, vectors: &[ModuleElement]) -> Result<ModuleElement> {
    if c.space() != frame.space() {
        return Err(Error::mismatch("coefficients over a different measure space"));
    }
    let mut failure = None;
    let out = frame.space().integrate_module_valued(|i, _| {
        vectors[i].left_mul(&c.coeffs()[i]).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            ModuleElement::zero(frame.module())
        })
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Assemble the operator `x ↦ ∫ ⟨x, F_ω⟩ G_ω dμ` by evaluating it on the
/// standard basis: row `j` of the coefficient array is the image of `e_j`.
fn assemble(frame: &FrameFamily, targets: &[ModuleElement]) -> Result<ModuleOperator> {
    let desc = frame.module();
    let k = desc.rank();
    let mut rows = Vec::with_capacity(k);
    for j in 0..k {
        let e = ModuleElement::unit(desc, j);
        let coeffs = analysis(frame, &e)?;
        let image = synthesize(frame, &coeffs, targets)?;
        rows.push(image.components().to_vec());
    }
    ModuleOperator::from_coeffs(desc, rows)
}

/// The frame operator `S x = ∫ ⟨x, F_ω⟩ F_ω dμ(ω)`.
pub fn frame_operator(frame: &FrameFamily) -> Result<ModuleOperator> {
    assemble(frame, frame.vectors())
}

/// The controlled frame operator `S_C x = ∫ ⟨x, F_ω⟩ C F_ω dμ(ω)`.
pub fn controlled_frame_operator(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
) -> Result<ModuleOperator> {
    check_controller(frame, controller)?;
    let controlled = controlled_vectors(frame, controller)?;
    assemble(frame, &controlled)
}
