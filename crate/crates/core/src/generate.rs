//! Instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameSystem, TIGHT_TOL};
use crate::linalg::{CMatrix, CVector, HermitianMatrix, C64};

/// What to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `m` vectors in `C^d` whitened to a tight frame.
    RandomTight { d: usize, m: usize, seed: u64 },
    /// A random tight frame with each vector scaled by `sqrt(s_i)`, `s_i ~ U(0,1)`.
    SubTightRandom { d: usize, m: usize, seed: u64 },
    /// `M` copies of `e_1 / sqrt(M)` followed by `M` copies of `e_2 / sqrt(M)`.
    DiagonalCounterexample { big_m: usize },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<FrameSystem> {
        match *self {
            GeneratorSpec::RandomTight { d, m, seed } => random_tight(d, m, seed),
            GeneratorSpec::SubTightRandom { d, m, seed } => random_sub_tight(d, m, seed),
            GeneratorSpec::DiagonalCounterexample { big_m } => diagonal_counterexample(big_m),
        }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> CVector {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_fn(d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(scale * re, scale * im)
    })
}

/// Complex Gaussian vectors `g_i` mapped to `B0^{-1/2} g_i` with
/// `B0 = sum g_i g_i*`.
pub fn random_tight(d: usize, m: usize, seed: u64) -> Result<FrameSystem> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if m < d {
        return Err(Error::InvalidInput(format!("need m >= d for a tight frame, got m = {m}, d = {d}")));
    }
    let mut rng = rng_for(seed);
    let raw: Vec<CVector> = (0..m).map(|_| gaussian_vector(&mut rng, d)).collect();
    let mut b0 = HermitianMatrix::zeros(d);
    for g in &raw {
        b0.add_outer(g);
    }
    let eig = b0.eigh();
    if eig.eigenvalues[0] <= 1e-12 {
        return Err(Error::InvalidInput("sampled vectors are rank deficient".into()));
    }
    let whitening: CMatrix = eig.reassemble(|_| true, |l| 1.0 / l.sqrt()).into_matrix();
    let vectors = raw.iter().map(|g| &whitening * g).collect();
    build_frame(vectors, TIGHT_TOL)
}

pub fn random_sub_tight(d: usize, m: usize, seed: u64) -> Result<FrameSystem> {
    let tight = random_tight(d, m, seed)?;
    // Separate stream so the tight part matches random_tight(d, m, seed).
    let mut rng = rng_for(seed ^ 0x5eed_5eed_5eed_5eed);
    let vectors = tight.vectors().iter().map(|u| u * C64::new(rng.random::<f64>().sqrt(), 0.0)).collect();
    build_frame(vectors, TIGHT_TOL)
}

pub fn diagonal_counterexample(big_m: usize) -> Result<FrameSystem> {
    if big_m == 0 {
        return Err(Error::InvalidInput("M must be positive".into()));
    }
    let r = 1.0 / (big_m as f64).sqrt();
    let e = |k: usize| {
        let mut v = CVector::zeros(2);
        v[k] = C64::new(r, 0.0);
        v
    };
    let vectors = (0..2 * big_m).map(|i| e(if i < big_m { 0 } else { 1 })).collect();
    build_frame(vectors, TIGHT_TOL)
}
