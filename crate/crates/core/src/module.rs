//! The standard Hilbert module `H = A^k` and its adjointable operators.
//!
//! Operators act on the right: `(x·T)_i = Σ_j x_j · T[j][i]`. With this
//! convention `(a·x)T = a·(xT)` holds identically for every `a ∈ A`, even
//! when `A` is not commutative, so every operator built here is `A`-linear.
//!
//! Writing `x` as the `n × nk` matrix `X = [x_1 | … | x_k]`, the action is
//! `X ↦ X·M` where `M` is the `nk × nk` block matrix with block `(j, i)`
//! equal to `T[j][i]`. `M` is the *flattened* form: `⟨xT, x⟩ = X M X^H`, the
//! adjoint flattens to `M^H`, and `T` is positive iff `M` is Hermitian PSD.

use std::fmt;

use num_complex::Complex64;

use crate::algebra::{AlgebraDescriptor, AlgebraElement, Structure};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, HermitianEigen, ZERO};

/// Off-structure entries of a flattened matrix smaller than this (relative to
/// its largest entry) are treated as round-off and dropped.
const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModuleDescriptor {
    algebra: AlgebraDescriptor,
    rank: usize,
}

impl ModuleDescriptor {
    pub fn new(algebra: AlgebraDescriptor, rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::validation("rank", "must be at least 1"));
        }
        Ok(ModuleDescriptor { algebra, rank })
    }

    pub fn algebra(&self) -> AlgebraDescriptor {
        self.algebra
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Side length of the flattened operator matrix.
    pub fn flat_dim(&self) -> usize {
        self.algebra.dim() * self.rank
    }

    /// Index sets that split every flattened operator into independent
    /// diagonal blocks. A full algebra gives one block; a diagonal algebra of
    /// size `n` gives `n` blocks of size `k`.
    pub fn spectral_blocks(&self) -> Vec<Vec<usize>> {
        let n = self.algebra.dim();
        let k = self.rank;
        match self.algebra.structure() {
            Structure::Full => vec![(0..n * k).collect()],
            Structure::Diagonal => (0..n).map(|r| (0..k).map(|j| j * n + r).collect()).collect(),
        }
    }
}

impl fmt::Display for ModuleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.algebra, self.rank)
    }
}

/// An element `x = (x_1, …, x_k)` of `A^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleElement {
    desc: ModuleDescriptor,
    components: Vec<AlgebraElement>,
}

impl ModuleElement {
    pub fn new(desc: ModuleDescriptor, components: Vec<AlgebraElement>) -> Result<Self> {
        if components.len() != desc.rank {
            return Err(Error::mismatch(format!(
                "expected {} components, got {}",
                desc.rank,
                components.len()
            )));
        }
        if let Some(bad) = components.iter().find(|c| c.descriptor() != desc.algebra) {
            return Err(Error::mismatch(format!(
                "component in {} but module is over {}",
                bad.descriptor(),
                desc.algebra
            )));
        }
        Ok(ModuleElement { desc, components })
    }

    /// Rank-one module `A^1` containing `a`.
    pub fn singleton(a: AlgebraElement) -> Self {
        let desc = ModuleDescriptor {
            algebra: a.descriptor(),
            rank: 1,
        };
        ModuleElement {
            desc,
            components: vec![a],
        }
    }

    pub fn zero(desc: ModuleDescriptor) -> Self {
        ModuleElement {
            desc,
            components: vec![AlgebraElement::zero(desc.algebra); desc.rank],
        }
    }

    /// Standard basis element `e_j` (unit of `A` in slot `j`).
    pub fn unit(desc: ModuleDescriptor, j: usize) -> Self {
        let mut x = Self::zero(desc);
        x.components[j] = AlgebraElement::identity(desc.algebra);
        x
    }

    pub fn descriptor(&self) -> ModuleDescriptor {
        self.desc
    }

    pub fn components(&self) -> &[AlgebraElement] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &AlgebraElement {
        &self.components[j]
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

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement,
    ) -> Self {
        ModuleElement {
            desc: self.desc,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ModuleElement {
            desc: self.desc,
            components: self.components.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// The module action `a·x`.
    pub fn left_mul(&self, a: &AlgebraElement) -> Result<Self> {
        if a.descriptor() != self.desc.algebra {
            return Err(Error::mismatch(format!(
                "scalar in {} acting on module over {}",
                a.descriptor(),
                self.desc.algebra
            )));
        }
        Ok(ModuleElement {
            desc: self.desc,
            components: self.components.iter().map(|x| a * x).collect(),
        })
    }

    /// `⟨x, y⟩ = Σ_j x_j · y_j*`.
    pub fn inner_product(&self, y: &Self) -> Result<AlgebraElement> {
        self.check_same(y)?;
        let mut acc = AlgebraElement::zero(self.desc.algebra);
        for (xj, yj) in self.components.iter().zip(&y.components) {
            acc = &acc + &(xj * &yj.adjoint());
        }
        Ok(acc)
    }

    /// `‖x‖ = ‖⟨x,x⟩‖^{1/2}`.
    pub fn module_norm(&self) -> f64 {
        self.inner_product(self)
            .expect("same descriptor")
            .operator_norm()
            .sqrt()
    }

    /// `|x| = ⟨x,x⟩^{1/2}`, an element of `A`.
    pub fn a_valued_norm(&self, tol: f64) -> Result<AlgebraElement> {
        self.inner_product(self)?.psd_sqrt(tol)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.module_norm())
    }

    /// The `n × nk` matrix `[x_1 | … | x_k]`.
    pub fn flattened(&self) -> CMatrix {
        let n = self.desc.algebra.dim();
        let mut out = CMatrix::zeros(n, n * self.desc.rank);
        for (j, comp) in self.components.iter().enumerate() {
            out.view_mut((0, j * n), (n, n)).copy_from(&comp.entries());
        }
        out
    }

    pub fn from_flattened(desc: ModuleDescriptor, x: &CMatrix) -> Result<Self> {
        let n = desc.algebra.dim();
        if x.shape() != (n, desc.flat_dim()) {
            return Err(Error::mismatch(format!(
                "expected {}x{} flattened element, got {}x{}",
                n,
                desc.flat_dim(),
                x.nrows(),
                x.ncols()
            )));
        }
        let components = (0..desc.rank)
            .map(|j| AlgebraElement::from_matrix(desc.algebra, x.view((0, j * n), (n, n)).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModuleElement { desc, components })
    }
}

/// An adjointable `A`-linear map on `A^k`, stored as its `k×k` coefficient
/// array together with the eagerly computed flattened matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleOperator {
    desc: ModuleDescriptor,
    /// Row-major, `coeffs[j * k + i] = T[j][i]`.
    coeffs: Vec<AlgebraElement>,
    flattened: CMatrix,
}

impl ModuleOperator {
    pub fn from_coeffs(desc: ModuleDescriptor, coeffs: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        let k = desc.rank;
        if coeffs.len() != k || coeffs.iter().any(|row| row.len() != k) {
            return Err(Error::mismatch(format!("expected a {k}x{k} coefficient array")));
        }
        let flat: Vec<AlgebraElement> = coeffs.into_iter().flatten().collect();
        if let Some(bad) = flat.iter().find(|c| c.descriptor() != desc.algebra) {
            return Err(Error::mismatch(format!(
                "coefficient in {} but module is over {}",
                bad.descriptor(),
                desc.algebra
            )));
        }
        Ok(Self::build(desc, flat))
    }

    fn build(desc: ModuleDescriptor, coeffs: Vec<AlgebraElement>) -> Self {
        let n = desc.algebra.dim();
        let k = desc.rank;
        let mut flattened = CMatrix::zeros(n * k, n * k);
        for j in 0..k {
            for i in 0..k {
                flattened
                    .view_mut((j * n, i * n), (n, n))
                    .copy_from(&coeffs[j * k + i].entries());
            }
        }
        ModuleOperator {
            desc,
            coeffs,
            flattened,
        }
    }

    /// Rebuild an operator from a flattened matrix. For a diagonal algebra,
    /// entries outside the block pattern must be round-off sized and are
    /// dropped.
    pub fn from_flattened(desc: ModuleDescriptor, m: &CMatrix) -> Result<Self> {
        let n = desc.algebra.dim();
        let k = desc.rank;
        if m.shape() != (n * k, n * k) {
            return Err(Error::mismatch(format!(
                "expected {0}x{0} flattened operator, got {1}x{2}",
                n * k,
                m.nrows(),
                m.ncols()
            )));
        }
        let diagonal = desc.algebra.structure() == Structure::Diagonal;
        let cutoff = STRUCTURE_TOL * linalg::max_abs(m).max(f64::MIN_POSITIVE);
        let mut coeffs = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                let mut block = m.view((j * n, i * n), (n, n)).into_owned();
                if diagonal {
                    for a in 0..n {
                        for b in 0..n {
                            if a != b {
                                if block[(a, b)].norm() > cutoff {
                                    return Err(Error::StructureViolation(format!(
                                        "flattened entry ({}, {}) breaks diagonal structure",
                                        j * n + a,
                                        i * n + b
                                    )));
                                }
                                block[(a, b)] = ZERO;
                            }
                        }
                    }
                }
                coeffs.push(AlgebraElement::from_matrix(desc.algebra, block)?);
            }
        }
        Ok(Self::build(desc, coeffs))
    }

    pub fn identity(desc: ModuleDescriptor) -> Self {
        Self::multiplication(desc, &AlgebraElement::identity(desc.algebra))
            .expect("identity matches descriptor")
    }

    pub fn zero(desc: ModuleDescriptor) -> Self {
        let z = AlgebraElement::zero(desc.algebra);
        Self::build(desc, vec![z; desc.rank * desc.rank])
    }

    /// `x ↦ α·x`.
    pub fn scalar(desc: ModuleDescriptor, alpha: f64) -> Self {
        Self::identity(desc).scale_real(alpha)
    }

    /// `x ↦ (x_1·a, …, x_k·a)`.
    pub fn multiplication(desc: ModuleDescriptor, a: &AlgebraElement) -> Result<Self> {
        if a.descriptor() != desc.algebra {
            return Err(Error::mismatch(format!(
                "multiplier in {} for module over {}",
                a.descriptor(),
                desc.algebra
            )));
        }
        let k = desc.rank;
        let z = AlgebraElement::zero(desc.algebra);
        let coeffs = (0..k * k)
            .map(|idx| if idx / k == idx % k { a.clone() } else { z.clone() })
            .collect();
        Ok(Self::build(desc, coeffs))
    }

    pub fn descriptor(&self) -> ModuleDescriptor {
        self.desc
    }

    /// `T[j][i]`.
    pub fn coeff(&self, j: usize, i: usize) -> &AlgebraElement {
        &self.coeffs[j * self.desc.rank + i]
    }

    pub fn flattened(&self) -> &CMatrix {
        &self.flattened
    }

    fn check_same(&self, other: ModuleDescriptor) -> Result<()> {
        if self.desc != other {
            return Err(Error::mismatch(format!("{} vs {}", self.desc, other)));
        }
        Ok(())
    }

    /// `x ↦ xT`.
    pub fn apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        self.check_same(x.descriptor())?;
        let k = self.desc.rank;
        let components = (0..k)
            .map(|i| {
                let mut acc = &x.components[0] * self.coeff(0, i);
                for j in 1..k {
                    acc = &acc + &(&x.components[j] * self.coeff(j, i));
                }
                acc
            })
            .collect();
        Ok(ModuleElement {
            desc: self.desc,
            components,
        })
    }

    /// `T*[i][j] = T[j][i]*`.
    pub fn adjoint(&self) -> Self {
        let k = self.desc.rank;
        let coeffs = (0..k * k)
            .map(|idx| self.coeff(idx % k, idx / k).adjoint())
            .collect();
        Self::build(self.desc, coeffs)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        self.check_same(inner.desc)?;
        let k = self.desc.rank;
        let coeffs = (0..k * k)
            .map(|idx| {
                let (j, i) = (idx / k, idx % k);
                let mut acc = inner.coeff(j, 0) * self.coeff(0, i);
                for l in 1..k {
                    acc = &acc + &(inner.coeff(j, l) * self.coeff(l, i));
                }
                acc
            })
            .collect();
        Ok(Self::build(self.desc, coeffs))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other.desc)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other.desc)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&AlgebraElement, &AlgebraElement) -> AlgebraElement,
    ) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| f(a, b))
            .collect();
        Self::build(self.desc, coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::build(self.desc, self.coeffs.iter().map(|a| a.scale(c)).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    fn block(&self, idx: &[usize]) -> CMatrix {
        CMatrix::from_fn(idx.len(), idx.len(), |r, c| self.flattened[(idx[r], idx[c])])
    }

    /// Singular values of the flattened matrix, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .desc
            .spectral_blocks()
            .iter()
            .flat_map(|idx| linalg::singular_values(&self.block(idx)))
            .collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all
    }

    /// Operator norm: the largest singular value of the flattening.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values().last().copied().unwrap_or(0.0)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.op_norm())
    }

    /// Largest entry of `M - M^H`.
    pub fn asymmetry(&self) -> f64 {
        linalg::asymmetry(&self.flattened)
    }

    fn positivity_scale(&self) -> f64 {
        self.op_norm().max(1.0)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.positivity_scale()
    }

    /// Eigendecomposition of the Hermitian part, one entry per spectral block
    /// together with the flattened indices it covers.
    pub fn eigen_blocks(&self) -> Vec<(Vec<usize>, HermitianEigen)> {
        self.desc
            .spectral_blocks()
            .into_iter()
            .map(|idx| {
                let eig = linalg::hermitian_eigen(&self.block(&idx));
                (idx, eig)
            })
            .collect()
    }

    /// Eigenvalues of the Hermitian part of the flattening, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .eigen_blocks()
            .into_iter()
            .flat_map(|(_, e)| e.values)
            .collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// Flattening Hermitian and PSD within `tol·max(1, ‖T‖)`.
    pub fn is_positive_operator(&self, tol: f64) -> bool {
        if !self.is_self_adjoint(tol) {
            return false;
        }
        let floor = -tol * self.positivity_scale();
        self.eigenvalues().first().is_none_or(|&l| l >= floor)
    }

    /// Full rank of the flattening: `σ_min > tol·‖T‖`.
    pub fn is_surjective(&self, tol: f64) -> bool {
        let s = self.singular_values();
        let max = s.first().copied().unwrap_or(0.0);
        let min = s.last().copied().unwrap_or(0.0);
        max > 0.0 && min > tol * max
    }

    /// Certify membership in `GL⁺(H)`.
    pub fn certify_gl_plus(&self, tol: f64) -> Result<GlPlusCertificate> {
        if !self.is_self_adjoint(tol) {
            return Err(Error::NotInGlPlus(format!(
                "not self-adjoint (asymmetry {:e})",
                self.asymmetry()
            )));
        }
        let eig = self.eigenvalues();
        let eig_min = eig.first().copied().unwrap_or(0.0);
        let eig_max = eig.last().copied().unwrap_or(0.0);
        if eig_min <= tol {
            return Err(Error::NotInGlPlus(format!(
                "smallest eigenvalue {eig_min:e} is not positive"
            )));
        }
        Ok(GlPlusCertificate {
            operator: self.clone(),
            eig_min,
            eig_max,
        })
    }

    fn spectral_map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dim = self.desc.flat_dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (idx, eig) in self.eigen_blocks() {
            let mapped = eig.map(&f);
            for (r, &gr) in idx.iter().enumerate() {
                for (c, &gc) in idx.iter().enumerate() {
                    out[(gr, gc)] = mapped[(r, c)];
                }
            }
        }
        Self::from_flattened(self.desc, &out)
    }

    /// Positive square root of a positive operator.
    pub fn op_psd_sqrt(&self, tol: f64) -> Result<Self> {
        if !self.is_positive_operator(tol) {
            return Err(Error::NotPositive {
                min_eigenvalue: self.eigenvalues().first().copied().unwrap_or(0.0),
            });
        }
        self.spectral_map(|l| l.max(0.0).sqrt())
    }

    /// Inverse operator, provided `σ_min > tol·‖T‖`.
    pub fn invert(&self, tol: f64) -> Result<Self> {
        if !self.is_surjective(tol) {
            return Err(Error::Singular {
                sigma_min: self.sigma_min(),
            });
        }
        let dim = self.desc.flat_dim();
        let mut out = CMatrix::zeros(dim, dim);
        for idx in self.desc.spectral_blocks() {
            let inv = self
                .block(&idx)
                .try_inverse()
                .ok_or(Error::Singular {
                    sigma_min: self.sigma_min(),
                })?;
            for (r, &gr) in idx.iter().enumerate() {
                for (c, &gc) in idx.iter().enumerate() {
                    out[(gr, gc)] = inv[(r, c)];
                }
            }
        }
        Self::from_flattened(self.desc, &out)
    }

    /// Unit-norm module elements attaining the smallest and largest values of
    /// `⟨xT, x⟩` (eigenvectors of the flattening, lifted back into `H`).
    pub fn extremal_witnesses(&self) -> (ModuleElement, ModuleElement) {
        let mut lo: Option<(f64, ModuleElement)> = None;
        let mut hi: Option<(f64, ModuleElement)> = None;
        for (idx, eig) in self.eigen_blocks() {
            let last = eig.values.len() - 1;
            let lo_w = self.witness(&idx, &eig, 0);
            let hi_w = self.witness(&idx, &eig, last);
            if lo.as_ref().is_none_or(|(v, _)| eig.values[0] < *v) {
                lo = Some((eig.values[0], lo_w));
            }
            if hi.as_ref().is_none_or(|(v, _)| eig.values[last] > *v) {
                hi = Some((eig.values[last], hi_w));
            }
        }
        (lo.expect("nonempty").1, hi.expect("nonempty").1)
    }

    fn witness(&self, idx: &[usize], eig: &HermitianEigen, col: usize) -> ModuleElement {
        let n = self.desc.algebra.dim();
        let diagonal = self.desc.algebra.structure() == Structure::Diagonal;
        let mut x = CMatrix::zeros(n, self.desc.flat_dim());
        for (t, &g) in idx.iter().enumerate() {
            let row = if diagonal { g % n } else { 0 };
            x[(row, g)] = eig.vectors[(t, col)].conj();
        }
        ModuleElement::from_flattened(self.desc, &x).expect("witness respects structure")
    }
}

/// Proof that an operator lies in `GL⁺(H)`, with its extreme eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct GlPlusCertificate {
    operator: ModuleOperator,
    eig_min: f64,
    eig_max: f64,
}

impl GlPlusCertificate {
    pub fn identity(desc: ModuleDescriptor) -> Self {
        GlPlusCertificate {
            operator: ModuleOperator::identity(desc),
            eig_min: 1.0,
            eig_max: 1.0,
        }
    }

    pub fn operator(&self) -> &ModuleOperator {
        &self.operator
    }

    pub fn eig_min(&self) -> f64 {
        self.eig_min
    }

    pub fn eig_max(&self) -> f64 {
        self.eig_max
    }

    /// `‖C^{1/2}‖ = eig_max^{1/2}`.
    pub fn sqrt_norm(&self) -> f64 {
        self.eig_max.sqrt()
    }

    /// `‖C^{-1/2}‖ = eig_min^{-1/2}`.
    pub fn inv_sqrt_norm(&self) -> f64 {
        1.0 / self.eig_min.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DEFAULT_TOL;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag_module(n: usize, k: usize) -> ModuleDescriptor {
        ModuleDescriptor::new(AlgebraDescriptor::diagonal(n), k).unwrap()
    }

    fn full_module(n: usize, k: usize) -> ModuleDescriptor {
        ModuleDescriptor::new(AlgebraDescriptor::full(n), k).unwrap()
    }

    #[test]
    fn unit_inner_product() {
        let x = ModuleElement::singleton(AlgebraElement::identity(AlgebraDescriptor::full(2)));
        assert_eq!(x.inner_product(&x).unwrap(), AlgebraElement::identity(AlgebraDescriptor::full(2)));
    }

    #[test]
    fn diagonal_inner_product_is_pointwise() {
        // ⟨diag(a,b), diag(c,d)⟩ = diag(a·conj(c), b·conj(d))
        let (a, b, cc, d) = (c(1.0, 2.0), c(-3.0, 0.5), c(0.5, -1.0), c(2.0, 2.0));
        let x = ModuleElement::singleton(AlgebraElement::from_diagonal(vec![a, b]));
        let y = ModuleElement::singleton(AlgebraElement::from_diagonal(vec![cc, d]));
        assert_eq!(
            x.inner_product(&y).unwrap(),
            AlgebraElement::from_diagonal(vec![a * cc.conj(), b * d.conj()])
        );
    }

    #[test]
    fn norms_of_simple_elements() {
        let desc = diag_module(2, 1);
        assert_eq!(ModuleElement::zero(desc).module_norm(), 0.0);
        let x = ModuleElement::singleton(AlgebraElement::from_real_diagonal(&[3.0, 4.0]));
        assert_relative_eq!(x.module_norm(), 4.0, epsilon = 1e-15);
        let y = ModuleElement::singleton(AlgebraElement::from_real_diagonal(&[3.0, -4.0]));
        assert_eq!(
            y.a_valued_norm(DEFAULT_TOL).unwrap(),
            AlgebraElement::from_real_diagonal(&[3.0, 4.0])
        );
        assert_eq!(
            ModuleElement::zero(desc).a_valued_norm(DEFAULT_TOL).unwrap(),
            AlgebraElement::zero(desc.algebra())
        );
    }

    #[test]
    fn identity_and_scalar_operators() {
        let desc = full_module(2, 2);
        let x = ModuleElement::new(
            desc,
            vec![
                AlgebraElement::diag_in(desc.algebra(), &[c(1.0, 1.0), c(2.0, 0.0)]).unwrap(),
                AlgebraElement::identity(desc.algebra()),
            ],
        )
        .unwrap();
        assert_eq!(ModuleOperator::identity(desc).apply(&x).unwrap(), x);
        let y = ModuleOperator::scalar(desc, 2.5).apply(&x).unwrap();
        assert!(y.distance(&x.scale_real(2.5)).unwrap() < 1e-15);
        assert_eq!(ModuleOperator::scalar(desc, 2.5).adjoint(), ModuleOperator::scalar(desc, 2.5));
        assert_relative_eq!(ModuleOperator::identity(desc).op_norm(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(ModuleOperator::scalar(desc, 3.0).op_norm(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn positivity_and_surjectivity() {
        let desc = full_module(2, 1);
        let id = ModuleOperator::identity(desc);
        assert!(id.is_positive_operator(DEFAULT_TOL));
        assert!(!id.scale_real(-1.0).is_positive_operator(DEFAULT_TOL));
        assert!(id.is_surjective(DEFAULT_TOL));
        assert!(!ModuleOperator::zero(desc).is_surjective(DEFAULT_TOL));
    }

    #[test]
    fn gl_plus_certificates() {
        let desc = diag_module(2, 1);
        let cert = ModuleOperator::scalar(desc, 2.0).certify_gl_plus(DEFAULT_TOL).unwrap();
        assert_relative_eq!(cert.eig_min(), 2.0);
        assert_relative_eq!(cert.eig_max(), 2.0);
        let cert = ModuleOperator::identity(desc).certify_gl_plus(DEFAULT_TOL).unwrap();
        assert_eq!((cert.eig_min(), cert.eig_max()), (1.0, 1.0));
        let indefinite =
            ModuleOperator::multiplication(desc, &AlgebraElement::from_real_diagonal(&[1.0, -1.0])).unwrap();
        assert!(matches!(indefinite.certify_gl_plus(DEFAULT_TOL), Err(Error::NotInGlPlus(_))));
    }

    #[test]
    fn psd_sqrt_examples() {
        let desc = full_module(2, 2);
        let id = ModuleOperator::identity(desc);
        assert!(id.op_psd_sqrt(DEFAULT_TOL).unwrap().distance(&id).unwrap() < 1e-14);
        let four = ModuleOperator::scalar(desc, 4.0);
        assert!(
            four.op_psd_sqrt(DEFAULT_TOL)
                .unwrap()
                .distance(&ModuleOperator::scalar(desc, 2.0))
                .unwrap()
                < 1e-14
        );
        assert!(id.scale_real(-1.0).op_psd_sqrt(DEFAULT_TOL).is_err());
    }

    #[test]
    fn compose_order() {
        // multiplication by a then by b is multiplication by a·b
        let desc = full_module(2, 1);
        let a = AlgebraElement::from_matrix(
            desc.algebra(),
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        )
        .unwrap();
        let b = AlgebraElement::from_matrix(
            desc.algebra(),
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        )
        .unwrap();
        let ta = ModuleOperator::multiplication(desc, &a).unwrap();
        let tb = ModuleOperator::multiplication(desc, &b).unwrap();
        let ab = ModuleOperator::multiplication(desc, &(&a * &b)).unwrap();
        assert!(tb.compose(&ta).unwrap().distance(&ab).unwrap() < 1e-15);
        let x = ModuleElement::singleton(AlgebraElement::identity(desc.algebra()));
        let via_apply = tb.apply(&ta.apply(&x).unwrap()).unwrap();
        assert!(via_apply.distance(&tb.compose(&ta).unwrap().apply(&x).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn diagonal_blocks_partition_indices() {
        let desc = diag_module(3, 2);
        let blocks = desc.spectral_blocks();
        assert_eq!(blocks, vec![vec![0, 3], vec![1, 4], vec![2, 5]]);
    }

    #[test]
    fn from_flattened_rejects_broken_structure() {
        let desc = diag_module(2, 1);
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            ModuleOperator::from_flattened(desc, &m),
            Err(Error::StructureViolation(_))
        ));
    }

    #[test]
    fn witnesses_attain_extremes() {
        let desc = diag_module(2, 1);
        let t = ModuleOperator::multiplication(desc, &AlgebraElement::from_real_diagonal(&[0.25, 3.0])).unwrap();
        let (lo, hi) = t.extremal_witnesses();
        assert_relative_eq!(lo.module_norm(), 1.0, epsilon = 1e-14);
        let val = t.apply(&lo).unwrap().inner_product(&lo).unwrap().operator_norm();
        assert_relative_eq!(val, 0.25, epsilon = 1e-14);
        let val = t.apply(&hi).unwrap().inner_product(&hi).unwrap().operator_norm();
        assert_relative_eq!(val, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_zero_rejected() {
        assert!(ModuleDescriptor::new(AlgebraDescriptor::full(1), 0).is_err());
    }
}
