//! Controlled and `*`-integral frames on Hilbert modules over matrix
//! algebras.
//!
//! The layers build on each other: [`algebra`] for the coefficient algebra,
//! [`module`] for `A^k` and its operators, [`measure`] for quadrature, and
//! [`frames`] for frame operators, bounds and reconstruction. [`scenario`],
//! [`report`] and [`suite`] drive the `cframe` tool.

pub mod algebra;
pub mod builtin;
pub mod frames;
pub mod random;
pub mod report;
pub mod scenario;
pub mod suite;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod module;

pub use algebra::{AlgebraDescriptor, AlgebraElement, Structure, DEFAULT_TOL};
pub use error::{Error, Result};
pub use measure::{MeasureSpace, QuadratureKind};
pub use module::{GlPlusCertificate, ModuleDescriptor, ModuleElement, ModuleOperator};

/// The book chapters, compiled as doc-tests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/algebras.md")]
    mod algebras {}
    #[doc = include_str!("../../../book/src/modules.md")]
    mod modules {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/star-frames.md")]
    mod star_frames {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/property-suite.md")]
    mod property_suite {}
}
