//! Seeded samplers and planted random instances.
//!
//! Everything is driven by [`ChaCha8Rng`]: a scenario seed selects the key and
//! the case index selects the stream, so any single instance can be rebuilt
//! from `(seed, case)` alone.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraDescriptor, AlgebraElement, Structure, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameFamily};
use crate::linalg::{self, CMatrix};
use crate::measure::MeasureSpace;
use crate::module::{GlPlusCertificate, ModuleDescriptor, ModuleElement, ModuleOperator};

/// Name and version of the generator, recorded in reports.
pub const GENERATOR: &str = "chacha8-v1";

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

/// Gaussian element respecting the descriptor's structure.
pub fn algebra_element<R: Rng + ?Sized>(rng: &mut R, desc: AlgebraDescriptor) -> AlgebraElement {
    let n = desc.dim();
    match desc.structure() {
        Structure::Full => AlgebraElement::from_matrix(desc, complex_matrix(rng, n, n))
            .expect("full algebra accepts any matrix"),
        Structure::Diagonal => {
            AlgebraElement::from_diagonal((0..n).map(|_| complex(rng)).collect())
        }
    }
}

pub fn module_element<R: Rng + ?Sized>(rng: &mut R, desc: ModuleDescriptor) -> ModuleElement {
    let components = (0..desc.rank())
        .map(|_| algebra_element(rng, desc.algebra()))
        .collect();
    ModuleElement::new(desc, components).expect("components share the algebra")
}

pub fn sample_elements<R: Rng + ?Sized>(
    rng: &mut R,
    desc: ModuleDescriptor,
    count: usize,
) -> Vec<ModuleElement> {
    (0..count).map(|_| module_element(rng, desc)).collect()
}

/// Gaussian adjointable operator (not positive, not normal).
pub fn operator<R: Rng + ?Sized>(rng: &mut R, desc: ModuleDescriptor) -> ModuleOperator {
    let k = desc.rank();
    let coeffs = (0..k)
        .map(|_| (0..k).map(|_| algebra_element(rng, desc.algebra())).collect())
        .collect();
    ModuleOperator::from_coeffs(desc, coeffs).expect("coefficients share the algebra")
}

/// Haar unitary: QR of a Ginibre matrix with the phases of `R`'s diagonal
/// moved into `Q`.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CMatrix {
    let qr = complex_matrix(rng, m, m).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..m {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(j).apply(|z| *z *= phase);
        }
    }
    q
}

/// Place one local matrix per spectral block of `desc` into a flattened
/// operator.
pub fn from_blocks(desc: ModuleDescriptor, blocks: &[CMatrix]) -> Result<ModuleOperator> {
    let indices = desc.spectral_blocks();
    if indices.len() != blocks.len() {
        return Err(Error::mismatch(format!(
            "{} blocks supplied for {} spectral blocks",
            blocks.len(),
            indices.len()
        )));
    }
    let dim = desc.flat_dim();
    let mut m = CMatrix::zeros(dim, dim);
    for (idx, local) in indices.iter().zip(blocks) {
        if local.nrows() != idx.len() || local.ncols() != idx.len() {
            return Err(Error::mismatch("block size does not match spectral block"));
        }
        for (r, &gr) in idx.iter().enumerate() {
            for (c, &gc) in idx.iter().enumerate() {
                m[(gr, gc)] = local[(r, c)];
            }
        }
    }
    ModuleOperator::from_flattened(desc, &m)
}

fn conjugate(u: &CMatrix, middle: &CMatrix) -> CMatrix {
    u * middle * u.adjoint()
}

fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_dim: usize,
    pub max_rank: usize,
    pub max_nodes: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_dim: 4,
            max_rank: 3,
            max_nodes: 64,
        }
    }
}

impl Caps {
    pub fn validate(&self) -> Result<()> {
        if self.max_dim == 0 || self.max_rank == 0 {
            return Err(Error::validation("caps", "dimension and rank caps must be at least 1"));
        }
        if self.max_nodes <= self.max_rank {
            return Err(Error::validation(
                "caps",
                "node cap must exceed the rank cap so planted frames exist",
            ));
        }
        Ok(())
    }
}

/// A random controlled frame with known spectrum, a controller commuting with
/// its frame operator, and a surjective transform commuting with the
/// controller.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub seed: u64,
    pub case: u64,
    pub module: ModuleDescriptor,
    pub frame: FrameFamily,
    /// Eigenvalues of the plain frame operator, ascending.
    pub planted_spectrum: Vec<f64>,
    pub controller: GlPlusCertificate,
    pub transform: ModuleOperator,
    /// Whether an eigenvalue of `C` below 1 sits on the bottom of the
    /// spectrum of `S`.
    pub adversarial: bool,
}

const PLANTED_MIN: f64 = 0.25;
const PLANTED_MAX: f64 = 1.5;

fn random_measure<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<MeasureSpace> {
    match rng.random_range(0..4) {
        0 => MeasureSpace::gauss_legendre(0.0, 1.0, m),
        1 => {
            let a = rng.random_range(-1.0..1.0);
            MeasureSpace::riemann(a, a + rng.random_range(0.5..2.0), m)
        }
        2 => MeasureSpace::counting(m),
        _ => {
            let nodes = (0..m).map(|i| i as f64).collect();
            let weights = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
            MeasureSpace::discrete(nodes, weights)
        }
    }
}

/// A planted controlled frame on a fixed module and measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub frame: FrameFamily,
    /// Eigenvalues of the plain frame operator, ascending.
    pub spectrum: Vec<f64>,
    pub controller: GlPlusCertificate,
    pub transform: ModuleOperator,
}

/// Plant a frame on `module` over `space` whose frame operator `S` has
/// spectrum in `[0.25, 1.5]` with minimum exactly `0.25`.
///
/// Gaussian vectors `G_ω` are whitened and recoloured, `F_ω = P^{1/2}
/// S_G^{-1/2} G_ω`, giving `S = P`. The controller `C` and transform `K` share
/// the eigenbasis of `P`; `C` has a few repeated eigenvalues and `K` mixes
/// only inside each eigenspace of `C`, so `SC = CS` and `KC = CK`. With
/// `adversarial`, the smallest eigenvalue of `C` lies in `[0.2, 0.6]` on the
/// bottom eigenvector of `S`.
pub fn plant<R: Rng + ?Sized>(
    rng: &mut R,
    module: ModuleDescriptor,
    space: MeasureSpace,
    adversarial: bool,
) -> Result<Planted> {
    if space.len() < module.rank() {
        return Err(Error::validation(
            "measure.nodes",
            format!("need at least {} nodes to plant a frame of rank {}", module.rank(), module.rank()),
        ));
    }
    let nodes = space.len();
    let seed_vectors = sample_elements(rng, module, nodes);
    let raw = FrameFamily::new(module, space, seed_vectors)?;
    let s_raw = frame_operator(&raw)?;
    let whiten = s_raw.op_psd_sqrt(DEFAULT_TOL)?.invert(DEFAULT_TOL)?;

    let blocks = module.spectral_blocks();
    let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().sum();

    // Spectrum of S, with the global minimum at a chosen (block, index).
    let mut spectra: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&m| (0..m).map(|_| rng.random_range(PLANTED_MIN + 0.05..PLANTED_MAX)).collect())
        .collect();
    let bottom_block = rng.random_range(0..blocks.len());
    let bottom_index = rng.random_range(0..sizes[bottom_block]);
    spectra[bottom_block][bottom_index] = PLANTED_MIN;

    // Controller eigenvalues: a few distinct levels, shared across indices so
    // that transforms can mix inside each level.
    let c_floor = if adversarial { rng.random_range(0.2..0.6) } else { rng.random_range(0.5..1.5) };
    let levels: Vec<f64> = std::iter::once(c_floor)
        .chain((1..total.max(1)).map(|_| rng.random_range(c_floor + 0.1..c_floor + 2.5)))
        .collect();
    let mut groups: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&m| (0..m).map(|_| rng.random_range(0..levels.len().min(m.max(2)))).collect())
        .collect();
    if adversarial {
        groups[bottom_block][bottom_index] = 0;
    }

    let mut p_sqrt = Vec::with_capacity(blocks.len());
    let mut c_blocks = Vec::with_capacity(blocks.len());
    let mut k_blocks = Vec::with_capacity(blocks.len());
    for (b, &m) in sizes.iter().enumerate() {
        let u = unitary(rng, m);
        let sqrt_p: Vec<f64> = spectra[b].iter().map(|p| p.sqrt()).collect();
        p_sqrt.push(conjugate(&u, &real_diag(&sqrt_p)));
        let c: Vec<f64> = groups[b].iter().map(|&g| levels[g]).collect();
        c_blocks.push(conjugate(&u, &real_diag(&c)));
        // Within each level a well-conditioned random block, singular values
        // in [1, 2]; across levels zero, so K commutes with C.
        let mut mix = CMatrix::zeros(m, m);
        for level in 0..levels.len() {
            let members: Vec<usize> = (0..m).filter(|&i| groups[b][i] == level).collect();
            if members.is_empty() {
                continue;
            }
            let g = complex_matrix(rng, members.len(), members.len());
            let g = &g / Complex64::new(linalg::spectral_norm(&g).max(f64::MIN_POSITIVE), 0.0);
            for (r, &gr) in members.iter().enumerate() {
                for (c, &gc) in members.iter().enumerate() {
                    let id = if r == c { 1.5 } else { 0.0 };
                    mix[(gr, gc)] = Complex64::new(id, 0.0) + g[(r, c)] * 0.5;
                }
            }
        }
        k_blocks.push(conjugate(&u, &mix));
    }

    let planting = from_blocks(module, &p_sqrt)?.compose(&whiten)?;
    let frame = raw.map_operator(&planting)?;
    let controller = from_blocks(module, &c_blocks)?.certify_gl_plus(DEFAULT_TOL)?;
    let transform = from_blocks(module, &k_blocks)?;

    let mut spectrum: Vec<f64> = spectra.into_iter().flatten().collect();
    spectrum.sort_by(f64::total_cmp);
    Ok(Planted {
        frame,
        spectrum,
        controller,
        transform,
    })
}

/// A controller commuting with `s`: `U diag(c) U^H` in the eigenbasis of `s`,
/// with `c` drawn from `[0.5, 3]`.
pub fn commuting_controller<R: Rng + ?Sized>(rng: &mut R, s: &ModuleOperator) -> Result<GlPlusCertificate> {
    let mut blocks = Vec::new();
    for (_, eig) in s.eigen_blocks() {
        let c: Vec<f64> = eig.values.iter().map(|_| rng.random_range(0.5..3.0)).collect();
        blocks.push(conjugate(&eig.vectors, &real_diag(&c)));
    }
    from_blocks(s.descriptor(), &blocks)?.certify_gl_plus(DEFAULT_TOL)
}

/// Build instance `case` of the stream keyed by `seed`.
///
/// Odd cases are adversarial in the sense of [`plant`].
pub fn random_instance(seed: u64, case: u64, caps: Caps) -> Result<RandomInstance> {
    caps.validate()?;
    let mut rng = rng_for(seed, case);
    let rng = &mut rng;
    let adversarial = case % 2 == 1;

    let n = rng.random_range(1..=caps.max_dim);
    let structure = if rng.random_bool(0.5) {
        Structure::Full
    } else {
        Structure::Diagonal
    };
    let module = ModuleDescriptor::new(
        AlgebraDescriptor::new(n, structure)?,
        rng.random_range(1..=caps.max_rank),
    )?;
    let nodes = rng.random_range(module.rank() + 1..=caps.max_nodes);
    let space = random_measure(rng, nodes)?;
    let planted = plant(rng, module, space, adversarial)?;
    Ok(RandomInstance {
        seed,
        case,
        module,
        frame: planted.frame,
        planted_spectrum: planted.spectrum,
        controller: planted.controller,
        transform: planted.transform,
        adversarial,
    })
}
