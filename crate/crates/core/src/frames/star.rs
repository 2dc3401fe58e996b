use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::module::{GlPlusCertificate, ModuleElement};
use crate::random;

use super::operator::controlled_frame_operator;
use super::{FrameFamily, StarBounds};

/// Outcome of checking `A⟨x,x⟩A* ≤ ⟨S_C x, x⟩ ≤ B⟨x,x⟩B*` over samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarVerification {
    pub holds: bool,
    pub samples: usize,
    pub seed: Option<u64>,
    /// Largest `‖⟨S_C x, x⟩ − A⟨x,x⟩A*‖` seen.
    pub max_lower_gap: f64,
    /// Largest `‖B⟨x,x⟩B* − ⟨S_C x, x⟩‖` seen.
    pub max_upper_gap: f64,
    /// Largest `‖⟨x,x⟩‖` seen, for scaling the gaps.
    pub max_scale: f64,
}

/// Sampled check of `*`-frame bounds with `samples` seeded random elements.
pub fn verify_star_bounds(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    bounds: &StarBounds,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<StarVerification> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs = random::sample_elements(&mut rng, frame.module(), samples);
    let mut out = verify_star_bounds_on(frame, controller, bounds, tol, &xs)?;
    out.seed = Some(seed);
    Ok(out)
}

/// [`verify_star_bounds`] on caller-supplied elements.
pub fn verify_star_bounds_on(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    bounds: &StarBounds,
    tol: f64,
    xs: &[ModuleElement],
) -> Result<StarVerification> {
    if bounds.lower().descriptor() != frame.module().algebra() {
        return Err(Error::mismatch("star bounds in a different algebra"));
    }
    let s = controlled_frame_operator(frame, controller)?;
    let mut out = StarVerification {
        holds: true,
        samples: xs.len(),
        seed: None,
        max_lower_gap: 0.0,
        max_upper_gap: 0.0,
        max_scale: 0.0,
    };
    for x in xs {
        let gram = x.inner_product(x)?;
        let middle = s.apply(x)?.inner_product(x)?;
        let lo = &(bounds.lower() * &gram) * &bounds.lower().adjoint();
        let hi = &(bounds.upper() * &gram) * &bounds.upper().adjoint();
        out.max_scale = out.max_scale.max(gram.operator_norm());
        out.max_lower_gap = out.max_lower_gap.max(middle.distance(&lo)?);
        out.max_upper_gap = out.max_upper_gap.max(hi.distance(&middle)?);
        if !(lo.loewner_leq(&middle, tol)? && middle.loewner_leq(&hi, tol)?) {
            out.holds = false;
        }
    }
    Ok(out)
}

/// For a commutative algebra where `S_C` is multiplication by a positive
/// element `s`, the tight `*`-bound `A = B = s^{1/2}`.
pub fn derive_tight_star_bound(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    tol: f64,
) -> Result<StarBounds> {
    let desc = frame.module();
    if !desc.algebra().is_commutative() {
        return Err(Error::NotCommutative);
    }
    let s_c = controlled_frame_operator(frame, controller)?;
    let symbol = s_c.apply(&ModuleElement::unit(desc, 0))?.component(0).clone();
    let scale = symbol.operator_norm().max(1.0);
    let mut defect: f64 = 0.0;
    for j in 0..desc.rank() {
        let image = s_c.apply(&ModuleElement::unit(desc, j))?;
        for (i, got) in image.components().iter().enumerate() {
            let want = if i == j {
                symbol.clone()
            } else {
                AlgebraElement::zero(desc.algebra())
            };
            defect = defect.max(got.distance(&want)?);
        }
    }
    if defect > tol * scale {
        return Err(Error::NotMultiplicationOperator { defect });
    }
    let root = symbol.psd_sqrt(tol)?;
    StarBounds::new(root.clone(), root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StarConversion {
    /// `(‖C^{1/2}‖⁻¹A, ‖C^{-1/2}‖B)`.
    ControlledToPlain,
    /// `(‖C^{-1/2}‖⁻¹A, ‖C^{1/2}‖B)`.
    PlainToControlled,
}

pub fn convert_star_bounds(
    bounds: &StarBounds,
    controller: &GlPlusCertificate,
    direction: StarConversion,
) -> Result<StarBounds> {
    let (lower, upper) = match direction {
        StarConversion::ControlledToPlain => (1.0 / controller.sqrt_norm(), controller.inv_sqrt_norm()),
        StarConversion::PlainToControlled => (1.0 / controller.inv_sqrt_norm(), controller.sqrt_norm()),
    };
    StarBounds::new(bounds.lower().scale_real(lower), bounds.upper().scale_real(upper))
}
