//! Sobol' low-discrepancy sequence with 52-bit direction integers.
//!
//! Direction numbers come from the public Joe–Kuo `new-joe-kuo-6.21201`
//! parameter table (dimensions 2..=21201; dimension 1 is the van der Corput
//! sequence), embedded at compile time. Points are enumerated in Gray-code
//! order, so advancing costs one XOR per dimension.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Largest supported dimension (van der Corput + 21200 table rows).
pub const MAX_DIMENSION: usize = 21201;

/// Bits of resolution per coordinate. 52 keeps every raw coordinate exactly
/// representable in an f64 mantissa.
pub const BITS: u32 = 52;

/// Scale factor 2⁻⁵².
pub const SCALE: f64 = 1.0 / ((1u64 << BITS) as f64);

/// One table row: primitive-polynomial coefficient word `a` and initial
/// direction values m₁..m_s.
struct ParamRow {
    a: u64,
    m: Vec<u64>,
}

static TABLE: OnceLock<Vec<ParamRow>> = OnceLock::new();

fn table() -> &'static [ParamRow] {
    TABLE.get_or_init(|| {
        let raw = include_str!("../../data/new-joe-kuo-6.21201");
        let mut rows = Vec::with_capacity(MAX_DIMENSION - 1);
        for (lineno, line) in raw.lines().enumerate() {
            if lineno == 0 {
                continue; // header: "d s a m_i"
            }
            let mut it = line.split_whitespace();
            let d: usize = it.next().and_then(|t| t.parse().ok()).unwrap_or_else(|| {
                panic!("direction table line {} malformed", lineno + 1)
            });
            let s: usize = it.next().and_then(|t| t.parse().ok()).expect("s field");
            let a: u64 = it.next().and_then(|t| t.parse().ok()).expect("a field");
            let m: Vec<u64> = it.map(|t| t.parse().expect("m field")).collect();
            assert_eq!(d, rows.len() + 2, "direction table rows out of order");
            assert_eq!(m.len(), s, "direction table m-count mismatch at d={d}");
            rows.push(ParamRow { a, m });
        }
        rows
    })
}

/// Direction integers v₁..v₅₂ (52-bit, index 0-based) for a 0-based dimension.
fn direction_integers(dim: usize) -> [u64; BITS as usize] {
    let bits = BITS as usize;
    let mut v = [0u64; BITS as usize];
    if dim == 0 {
        // van der Corput: all m_i = 1.
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = 1u64 << (bits - 1 - k);
        }
        return v;
    }
    let row = &table()[dim - 1];
    let s = row.m.len();
    for k in 0..bits {
        if k < s {
            v[k] = row.m[k] << (bits - 1 - k);
        } else {
            let mut next = v[k - s] ^ (v[k - s] >> s);
            for t in 1..s {
                if (row.a >> (s - 1 - t)) & 1 == 1 {
                    next ^= v[k - t];
                }
            }
            v[k] = next;
        }
    }
    v
}

/// Gray-code Sobol' point generator over a fixed dimension.
pub struct SobolSequence {
    directions: Vec<[u64; BITS as usize]>,
    state: Vec<u64>,
    /// Number of points already emitted; the next point has this index.
    index: u64,
}

impl SobolSequence {
    /// Create a generator for `dimension` coordinates.
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::SobolDimension {
                requested: dimension,
                max: MAX_DIMENSION,
            });
        }
        Ok(SobolSequence {
            directions: (0..dimension).map(direction_integers).collect(),
            state: vec![0u64; dimension],
            index: 0,
        })
    }

    /// Dimension of the points produced.
    pub fn dimension(&self) -> usize {
        self.state.len()
    }

    /// Advance to the next point and return its raw 52-bit integer
    /// coordinates. The first call returns point 0 (the all-zeros point).
    pub fn next_raw(&mut self) -> &[u64] {
        if self.index > 0 {
            // Gray-code step: point i differs from point i-1 in direction
            // number trailing_ones(i-1).
            let flip = (self.index - 1).trailing_ones() as usize;
            debug_assert!(flip < BITS as usize, "point index exhausts 52-bit resolution");
            for (x, dirs) in self.state.iter_mut().zip(&self.directions) {
                *x ^= dirs[flip];
            }
        }
        self.index += 1;
        &self.state
    }

    /// Skip `count` points.
    pub fn skip(&mut self, count: u64) {
        for _ in 0..count {
            self.next_raw();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_fractions(dim_count: usize, points: usize) -> Vec<Vec<f64>> {
        let mut seq = SobolSequence::new(dim_count).unwrap();
        (0..points)
            .map(|_| seq.next_raw().iter().map(|&w| w as f64 * SCALE).collect())
            .collect()
    }

    #[test]
    fn van_der_corput_first_points() {
        let pts = raw_fractions(1, 4);
        let coord: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(coord, vec![0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn two_dimensional_first_points() {
        let pts = raw_fractions(2, 4);
        assert_eq!(pts[0], vec![0.0, 0.0]);
        assert_eq!(pts[1], vec![0.5, 0.5]);
        assert_eq!(pts[2], vec![0.75, 0.25]);
        assert_eq!(pts[3], vec![0.25, 0.75]);
    }

    #[test]
    fn dimension_limits_enforced() {
        assert!(SobolSequence::new(0).is_err());
        assert!(SobolSequence::new(MAX_DIMENSION + 1).is_err());
        let mut seq = SobolSequence::new(MAX_DIMENSION).unwrap();
        let p = seq.next_raw();
        assert_eq!(p.len(), MAX_DIMENSION);
    }

    #[test]
    fn direction_integers_fit_in_52_bits() {
        for dim in [0usize, 1, 2, 50, 1000, 21200] {
            for &v in direction_integers(dim).iter() {
                assert!(v < (1u64 << BITS));
                assert!(v > 0);
            }
        }
    }
}
