//! The matrix C*-algebra `A`: either all of `ℂ^{n×n}` or its diagonal
//! (commutative) subalgebra.
//!
//! Diagonal elements are stored as their diagonal only, so every operation on
//! them is `O(n)` and off-diagonal entries are zero by construction.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

/// Default relative tolerance for positivity and order comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Full,
    Diagonal,
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Full => f.write_str("full"),
            Structure::Diagonal => f.write_str("diagonal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgebraDescriptor {
    dim: usize,
    structure: Structure,
}

impl AlgebraDescriptor {
    pub fn new(dim: usize, structure: Structure) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("algebra.dim", "must be at least 1"));
        }
        Ok(AlgebraDescriptor { dim, structure })
    }

    /// `ℂ^{n×n}`. Panics if `n == 0`.
    pub fn full(n: usize) -> Self {
        Self::new(n, Structure::Full).expect("algebra dimension must be positive")
    }

    /// Diagonal `n×n` matrices. Panics if `n == 0`.
    pub fn diagonal(n: usize) -> Self {
        Self::new(n, Structure::Diagonal).expect("algebra dimension must be positive")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn is_commutative(&self) -> bool {
        self.structure == Structure::Diagonal || self.dim == 1
    }
}

impl fmt::Display for AlgebraDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.structure, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Full(CMatrix),
    Diagonal(DVector<Complex64>),
}

/// An element of a matrix C*-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    desc: AlgebraDescriptor,
    repr: Repr,
}

impl AlgebraElement {
    pub fn zero(desc: AlgebraDescriptor) -> Self {
        Self::scalar(desc, ZERO)
    }

    pub fn identity(desc: AlgebraDescriptor) -> Self {
        Self::scalar(desc, ONE)
    }

    /// `c · 1_A`.
    pub fn scalar(desc: AlgebraDescriptor, c: Complex64) -> Self {
        let n = desc.dim;
        let repr = match desc.structure {
            Structure::Full => Repr::Full(CMatrix::identity(n, n) * c),
            Structure::Diagonal => Repr::Diagonal(DVector::from_element(n, c)),
        };
        AlgebraElement { desc, repr }
    }

    /// Build from a dense matrix. For a diagonal algebra every off-diagonal
    /// entry must be exactly zero.
    pub fn from_matrix(desc: AlgebraDescriptor, m: CMatrix) -> Result<Self> {
        let n = desc.dim;
        if m.shape() != (n, n) {
            return Err(Error::mismatch(format!(
                "expected {n}x{n} matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let repr = match desc.structure {
            Structure::Full => Repr::Full(m),
            Structure::Diagonal => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j && m[(i, j)] != ZERO {
                            return Err(Error::StructureViolation(format!(
                                "diagonal algebra element has nonzero entry at ({i}, {j})"
                            )));
                        }
                    }
                }
                Repr::Diagonal(m.diagonal())
            }
        };
        Ok(AlgebraElement { desc, repr })
    }

    /// A diagonal-algebra element with the given diagonal.
    pub fn from_diagonal(values: Vec<Complex64>) -> Self {
        let desc = AlgebraDescriptor::diagonal(values.len());
        AlgebraElement {
            desc,
            repr: Repr::Diagonal(DVector::from_vec(values)),
        }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self::from_diagonal(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Diagonal matrix with the given entries, in any algebra of matching size.
    pub fn diag_in(desc: AlgebraDescriptor, values: &[Complex64]) -> Result<Self> {
        if values.len() != desc.dim {
            return Err(Error::mismatch(format!(
                "expected {} diagonal entries, got {}",
                desc.dim,
                values.len()
            )));
        }
        let repr = match desc.structure {
            Structure::Full => Repr::Full(CMatrix::from_diagonal(&DVector::from_column_slice(values))),
            Structure::Diagonal => Repr::Diagonal(DVector::from_column_slice(values)),
        };
        Ok(AlgebraElement { desc, repr })
    }

    pub fn descriptor(&self) -> AlgebraDescriptor {
        self.desc
    }

    pub fn dim(&self) -> usize {
        self.desc.dim
    }

    /// Dense `n×n` matrix of entries.
    pub fn entries(&self) -> CMatrix {
        match &self.repr {
            Repr::Full(m) => m.clone(),
            Repr::Diagonal(d) => CMatrix::from_diagonal(d),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.repr {
            Repr::Full(m) => m[(i, j)],
            Repr::Diagonal(d) => {
                if i == j {
                    d[i]
                } else {
                    ZERO
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        match &self.repr {
            Repr::Full(m) => m.diagonal().iter().copied().collect(),
            Repr::Diagonal(d) => d.iter().copied().collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.desc != other.desc {
            return Err(Error::mismatch(format!("{} vs {}", self.desc, other.desc)));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Full(a), Repr::Full(b)) => Repr::Full(a * b),
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Repr::Diagonal(a.component_mul(b)),
            _ => unreachable!("descriptors agree"),
        };
        Ok(AlgebraElement {
            desc: self.desc,
            repr,
        })
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let repr = match (&self.repr, &other.repr) {
            (Repr::Full(a), Repr::Full(b)) => Repr::Full(a.zip_map(b, f)),
            (Repr::Diagonal(a), Repr::Diagonal(b)) => Repr::Diagonal(a.zip_map(b, f)),
            _ => unreachable!("descriptors agree"),
        };
        AlgebraElement {
            desc: self.desc,
            repr,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let repr = match &self.repr {
            Repr::Full(m) => Repr::Full(m * c),
            Repr::Diagonal(d) => Repr::Diagonal(d * c),
        };
        AlgebraElement {
            desc: self.desc,
            repr,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Full(m) => Repr::Full(m.adjoint()),
            Repr::Diagonal(d) => Repr::Diagonal(d.map(|z| z.conj())),
        };
        AlgebraElement {
            desc: self.desc,
            repr,
        }
    }

    /// The C*-norm: largest singular value.
    pub fn operator_norm(&self) -> f64 {
        match &self.repr {
            Repr::Full(m) => linalg::spectral_norm(m),
            Repr::Diagonal(d) => d.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Full(m) => linalg::singular_values(m),
            Repr::Diagonal(d) => {
                let mut s: Vec<f64> = d.iter().map(|z| z.norm()).collect();
                s.sort_by(|a, b| b.total_cmp(a));
                s
            }
        }
    }

    /// Largest entry of `a - a*`.
    pub fn asymmetry(&self) -> f64 {
        match &self.repr {
            Repr::Full(m) => linalg::asymmetry(m),
            Repr::Diagonal(d) => d.iter().map(|z| 2.0 * z.im.abs()).fold(0.0, f64::max),
        }
    }

    fn positivity_scale(&self) -> f64 {
        self.operator_norm().max(1.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.positivity_scale()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Full(m) => linalg::hermitian_eigen(m).values,
            Repr::Diagonal(d) => {
                let mut v: Vec<f64> = d.iter().map(|z| z.re).collect();
                v.sort_by(f64::total_cmp);
                v
            }
        }
    }

    /// Hermitian within `tol·max(1, ‖a‖)` and no eigenvalue below
    /// `-tol·max(1, ‖a‖)`. Non-Hermitian input is simply not positive.
    pub fn is_positive(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        let floor = -tol * self.positivity_scale();
        self.hermitian_eigenvalues()
            .first()
            .is_none_or(|&lambda| lambda >= floor)
    }

    /// `self ≤ other` in the Loewner order, i.e. `other - self ≥ 0`.
    pub fn loewner_leq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(other.try_sub(self)?.is_positive(tol))
    }

    /// The unique positive square root. Eigenvalues in `[-tol·scale, 0)` are
    /// clamped to zero.
    pub fn psd_sqrt(&self, tol: f64) -> Result<Self> {
        if !self.is_positive(tol) {
            let min_eigenvalue = if self.is_hermitian(tol) {
                self.hermitian_eigenvalues().first().copied().unwrap_or(0.0)
            } else {
                f64::NAN
            };
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let repr = match &self.repr {
            Repr::Full(m) => {
                Repr::Full(linalg::hermitian_eigen(m).map(|l| l.max(0.0).sqrt()))
            }
            Repr::Diagonal(d) => {
                Repr::Diagonal(d.map(|z| Complex64::new(z.re.max(0.0).sqrt(), 0.0)))
            }
        };
        Ok(AlgebraElement {
            desc: self.desc,
            repr,
        })
    }

    /// Inverse, provided the smallest singular value exceeds `tol·‖a‖`.
    pub fn invert(&self, tol: f64) -> Result<Self> {
        let s = self.singular_values();
        let sigma_max = s.first().copied().unwrap_or(0.0);
        let sigma_min = s.last().copied().unwrap_or(0.0);
        if sigma_max == 0.0 || sigma_min <= tol * sigma_max {
            return Err(Error::Singular { sigma_min });
        }
        let repr = match &self.repr {
            Repr::Full(m) => Repr::Full(
                m.clone()
                    .try_inverse()
                    .ok_or(Error::Singular { sigma_min })?,
            ),
            Repr::Diagonal(d) => Repr::Diagonal(d.map(|z| z.inv())),
        };
        Ok(AlgebraElement {
            desc: self.desc,
            repr,
        })
    }

    /// `‖a - b‖` in the C*-norm.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.operator_norm())
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_structurally_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Diagonal(_) => true,
            Repr::Full(m) => {
                let n = m.nrows();
                (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == ZERO))
            }
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&AlgebraElement> for &AlgebraElement {
            type Output = AlgebraElement;

            /// Panics on descriptor mismatch; use the `try_` form to recover.
            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                self.$checked(rhs).expect("algebra descriptor mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.scale_real(-1.0)
    }
}
