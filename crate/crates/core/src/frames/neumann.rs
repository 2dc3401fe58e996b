use crate::algebra::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::module::{GlPlusCertificate, ModuleElement, ModuleOperator};

use super::bounds::is_controlled_frame;
use super::operator::{analysis, controlled_synthesis};
use super::{FrameFamily, ScalarBounds};

/// Hard cap on iterations chosen by [`reconstruct`].
const MAX_RECONSTRUCT_ITER: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSolution {
    pub solution: ModuleElement,
    pub iterations: usize,
    /// Relative residual `‖r_m‖ / ‖y‖` of the recurrence for
    /// `m = 0, 1, …, iterations`.
    pub residuals: Vec<f64>,
    /// `‖y − S x‖ / ‖y‖` for the returned solution.
    pub true_residual: f64,
}

/// Solve `S x = y` by `x_{m+1} = x_m + B⁻¹(y − S x_m)` from `x_0 = 0`.
///
/// Valid bounds give `‖I − B⁻¹S‖ ≤ (B − A)/B < 1`, so the residual shrinks by
/// at least that factor per step. The residual is carried by the recurrence
/// `r_{m+1} = r_m − B⁻¹ S r_m`, whose rounding scales with `r_m` rather than
/// with `y`. Convergence is only declared once the true residual
/// `‖y − S x_m‖` is below `tol·‖y‖`; if the recurrence has drifted, the true
/// residual replaces it and iteration continues.
pub fn neumann_inverse_apply(
    s: &ModuleOperator,
    bounds: &ScalarBounds,
    y: &ModuleElement,
    tol: f64,
    max_iter: usize,
) -> Result<NeumannSolution> {
    let y_norm = y.module_norm();
    let mut x = ModuleElement::zero(y.descriptor());
    if y_norm == 0.0 {
        return Ok(NeumannSolution {
            solution: x,
            iterations: 0,
            residuals: vec![0.0],
            true_residual: 0.0,
        });
    }
    let step = 1.0 / bounds.upper();
    let mut residual = y.clone();
    let mut residuals = vec![1.0];
    for iteration in 1..=max_iter {
        let correction = residual.scale_real(step);
        x = x.try_add(&correction)?;
        residual = residual.try_sub(&s.apply(&correction)?)?;
        let rel = residual.module_norm() / y_norm;
        residuals.push(rel);
        if rel <= tol {
            let exact = y.try_sub(&s.apply(&x)?)?;
            let true_residual = exact.module_norm() / y_norm;
            if true_residual <= tol {
                return Ok(NeumannSolution {
                    solution: x,
                    iterations: iteration,
                    residuals,
                    true_residual,
                });
            }
            residual = exact;
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub estimate: ModuleElement,
    pub bounds: ScalarBounds,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub true_residual: f64,
}

/// Recover `x` from its controlled synthesis `∫ ⟨x, F_ω⟩ C F_ω dμ` by
/// Neumann inversion of `S_C`.
///
/// The residual target is tightened by `A/(4B)` so that the error, not just
/// the residual, is below `tol·‖x‖` with room for rounding; `A/B` alone is
/// attained exactly when `x` sits in the top eigenspace. It is floored a few ulps above machine
/// precision, below which a residual cannot be certified.
pub fn reconstruct(
    frame: &FrameFamily,
    controller: &GlPlusCertificate,
    x: &ModuleElement,
    tol: f64,
) -> Result<Reconstruction> {
    let report = is_controlled_frame(frame, controller, DEFAULT_TOL)?;
    let bounds = report.bounds.ok_or_else(|| {
        Error::NotAFrame(format!(
            "controlled frame operator has spectrum [{:e}, {:e}] (self-adjoint: {})",
            report.diagnostics.min_eigenvalue,
            report.diagnostics.max_eigenvalue,
            report.diagnostics.self_adjoint
        ))
    })?;
    let y = controlled_synthesis(frame, controller, &analysis(frame, x)?)?;
    let inner_tol = (0.25 * tol * bounds.lower() / bounds.upper()).max(8.0 * f64::EPSILON);
    let q = bounds.contraction_factor();
    let max_iter = if q <= 0.0 {
        4
    } else {
        let predicted = (inner_tol.ln() / q.ln()).ceil();
        ((2.0 * predicted) as usize + 16).min(MAX_RECONSTRUCT_ITER)
    };
    let solved = neumann_inverse_apply(&report.operator, &bounds, &y, inner_tol, max_iter)?;
    Ok(Reconstruction {
        estimate: solved.solution,
        bounds,
        iterations: solved.iterations,
        residuals: solved.residuals,
        true_residual: solved.true_residual,
    })
}
