//! Reproducible noise sources: Sobol' low-discrepancy blocks with digital
//! shifts, seeded pseudo-random blocks, the uniform→normal transform, and the
//! seed-derivation scheme that splits one master seed into independent
//! streams.
//!
//! A *block* is a `count × dimension` matrix of standard uniforms or normals:
//! one row per scenario (path-major), coordinates ordered time-major within
//! the row (the first `d` coordinates drive a scenario's first transition).

pub mod normal;
pub mod sobol;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

pub use normal::inverse_normal_cdf;
pub use sobol::{SobolSequence, MAX_DIMENSION};

use crate::Result;

/// Which generator fills a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerKind {
    /// Seeded pseudo-random uniforms (ChaCha8).
    #[serde(rename = "mc")]
    Pseudo,
    /// Digitally shifted Sobol' points.
    #[serde(rename = "qmc")]
    Sobol,
}

/// Full description of one noise block: generator, shape, and the seed (for
/// pseudo-random blocks) or digital-shift seed (for Sobol' blocks).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub kind: SamplerKind,
    pub dimension: usize,
    pub count: usize,
    pub seed: u64,
}

impl NoiseSpec {
    /// Uniform block in (0,1) for this spec.
    pub fn uniforms(&self) -> Result<DMatrix<f64>> {
        match self.kind {
            SamplerKind::Pseudo => Ok(pseudo_block(self.dimension, self.count, self.seed)),
            SamplerKind::Sobol => sobol_block(self.dimension, self.count, Some(self.seed)),
        }
    }

    /// Standard normal block for this spec.
    pub fn normals(&self) -> Result<DMatrix<f64>> {
        Ok(to_normals(self.uniforms()?))
    }
}

/// 52-bit digital shift words for `dimension` coordinates, derived from a
/// shift seed.
fn shift_words(dimension: usize, shift_seed: u64) -> Vec<u64> {
    let mut rng = chacha(shift_seed);
    (0..dimension)
        .map(|_| rng.next_u64() >> (64 - sobol::BITS))
        .collect()
}

/// `count × dimension` Sobol' block mapped into the open interval (0,1).
///
/// With a shift seed, points 0..count are XOR-ed with a per-dimension 52-bit
/// digital shift (the shifted sequence almost surely avoids 0). Without a
/// shift, the all-zeros first point is skipped and raw points 1..=count are
/// returned. Either way each raw coordinate w becomes (w + ½)·2⁻⁵², keeping
/// every value strictly inside (0,1) for the normal transform.
pub fn sobol_block(dimension: usize, count: usize, shift_seed: Option<u64>) -> Result<DMatrix<f64>> {
    let mut seq = SobolSequence::new(dimension)?;
    let shift = shift_seed.map(|s| shift_words(dimension, s));
    if shift.is_none() {
        seq.skip(1);
    }
    let mut block = DMatrix::zeros(count, dimension);
    for r in 0..count {
        let raw = seq.next_raw();
        match &shift {
            Some(words) => {
                for (c, (&w, &sh)) in raw.iter().zip(words).enumerate() {
                    block[(r, c)] = ((w ^ sh) as f64 + 0.5) * sobol::SCALE;
                }
            }
            None => {
                for (c, &w) in raw.iter().enumerate() {
                    block[(r, c)] = (w as f64 + 0.5) * sobol::SCALE;
                }
            }
        }
    }
    Ok(block)
}

/// `count × dimension` seeded pseudo-random uniform block in (0,1), filled
/// row by row (scenario-major) at the same 52-bit resolution as the Sobol'
/// blocks.
pub fn pseudo_block(dimension: usize, count: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = chacha(seed);
    let mut block = DMatrix::zeros(count, dimension);
    for r in 0..count {
        for c in 0..dimension {
            block[(r, c)] = unit_open_f64(&mut rng);
        }
    }
    block
}

/// Map a uniform block through the inverse normal CDF, consuming it.
pub fn to_normals(mut block: DMatrix<f64>) -> DMatrix<f64> {
    for u in block.iter_mut() {
        *u = inverse_normal_cdf(*u);
    }
    block
}

/// The crate's pseudo-random generator, seeded.
pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the open interval (0,1) at 52-bit resolution.
pub fn unit_open_f64(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> (64 - sobol::BITS)) as f64 + 0.5) * sobol::SCALE
}

/// Uniform in [-1, 1).
pub fn symmetric_unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    2.0 * unit_open_f64(rng) - 1.0
}

/// Small-range draw for test/synthetic use (modulo; bias is irrelevant at the
/// ranges used).
pub fn next_u64_below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    rng.next_u64() % n
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer: full-avalanche 64-bit mixing.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multiplier for the seed-derivation chain; odd, so the map h ↦ h·M is a
/// bijection on 64-bit words.
const CHAIN_MULT: u64 = 0x2545_F491_4F6C_DD1D;

/// Derive an independent stream seed from a master seed and a word path
/// (stream tag, then indices). Deterministic, order-sensitive, and
/// avalanche-mixed at every level. The chain multiplies the running state
/// before absorbing each word, so the state and the word enter asymmetrically
/// — a commutative combiner here would make the master seed and the first
/// word interchangeable and collide whole streams for small integer seeds.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GAMMA));
    for &w in words {
        h = mix64(h.wrapping_mul(CHAIN_MULT) ^ mix64(w.wrapping_add(GAMMA)));
    }
    h
}

/// Stream tags for [`derive_seed`]; one per independent purpose.
pub mod stream {
    /// Outer market-driver paths.
    pub const OUTER_DRIVERS: u64 = 1;
    /// Price-increment noise.
    pub const PRICES: u64 = 2;
    /// Inner scenario noise, pseudo-random sampler.
    pub const INNER_SEED: u64 = 3;
    /// Inner scenario noise, Sobol' digital shifts.
    pub const INNER_SHIFT: u64 = 4;
    /// Feasible-perturbation draws for oracle dominance checks.
    pub const PERTURBATION: u64 = 5;
}
