//! The two reference families.
//!
//! * `example1`: `A` = diagonal 2×2 matrices, `H = A`, `F_w = diag(w, w/2)`
//!   on `[0, 1]` with Lebesgue measure, controller `αI`. The controlled frame
//!   operator is multiplication by `diag(α/3, α/12)`.
//! * `example2`: `A` = diagonal `N×N` matrices (a truncation of `ℓ^∞`),
//!   `H = A`, `Ω = [0, ∞)` cut to `[0, N)`. `F_w` is `1/(n+1)` in slot
//!   `n = ⌊w⌋` and zero elsewhere, so each unit interval collapses to one
//!   counting node. Controller `αI`; the tight `*`-bound is
//!   `√α·diag(1, 1/2, …, 1/N)`.

use num_complex::Complex64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement};
use crate::error::{Error, Result};
use crate::frames::FrameFamily;
use crate::measure::MeasureSpace;
use crate::module::{GlPlusCertificate, ModuleDescriptor, ModuleElement, ModuleOperator};

/// Gauss–Legendre node count used when a scenario does not pick one.
pub const DEFAULT_NODES: usize = 16;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::validation("frame.alpha", format!("must be positive, got {alpha}")))
    }
}

fn scalar_controller(module: ModuleDescriptor, alpha: f64) -> GlPlusCertificate {
    ModuleOperator::scalar(module, alpha)
        .certify_gl_plus(0.0)
        .expect("positive multiple of the identity")
}

pub fn example1_module() -> ModuleDescriptor {
    ModuleDescriptor::new(AlgebraDescriptor::diagonal(2), 1).expect("rank 1")
}

/// `F_w = diag(w, w/2)` sampled on `space`, with controller `αI`.
pub fn example1(alpha: f64, space: MeasureSpace) -> Result<(FrameFamily, GlPlusCertificate)> {
    check_alpha(alpha)?;
    let module = example1_module();
    let frame = FrameFamily::from_fn(module, space, |_, w| {
        Ok(ModuleElement::singleton(AlgebraElement::from_real_diagonal(&[w, w / 2.0])))
    })?;
    Ok((frame, scalar_controller(module, alpha)))
}

/// [`example1`] on `[0, 1]` with [`DEFAULT_NODES`] Gauss–Legendre nodes.
pub fn example1_default(alpha: f64) -> Result<(FrameFamily, GlPlusCertificate)> {
    example1(alpha, MeasureSpace::gauss_legendre(0.0, 1.0, DEFAULT_NODES)?)
}

/// Truncation of the sequence example to `n` coordinates.
pub fn example2(alpha: f64, n: usize) -> Result<(FrameFamily, GlPlusCertificate)> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::validation("frame.n", "truncation must be at least 1"));
    }
    let algebra = AlgebraDescriptor::diagonal(n);
    let module = ModuleDescriptor::new(algebra, 1)?;
    let frame = FrameFamily::from_fn(module, MeasureSpace::counting(n)?, |p, _| {
        let mut slots = vec![Complex64::new(0.0, 0.0); n];
        slots[p] = Complex64::new(1.0 / (p as f64 + 1.0), 0.0);
        Ok(ModuleElement::singleton(AlgebraElement::diag_in(algebra, &slots)?))
    })?;
    Ok((frame, scalar_controller(module, alpha)))
}

/// `√α·diag(1, 1/2, …, 1/n)`.
pub fn example2_tight_bound(alpha: f64, n: usize) -> AlgebraElement {
    let values: Vec<f64> = (0..n).map(|p| alpha.sqrt() / (p as f64 + 1.0)).collect();
    AlgebraElement::from_real_diagonal(&values)
}
