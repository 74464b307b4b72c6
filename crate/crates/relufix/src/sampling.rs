//! Deterministic sampling helpers shared by search, verification and data
//! generation: a Halton low-discrepancy sequence and seeded uniform draws.

use rand::Rng;

use crate::bounds::Bounds;

/// Prime bases for the Halton sequence, one per input dimension.
const HALTON_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical-inverse of `index` in the given base; lies in (0, 1) for index >= 1.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut factor = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv_base;
    }
    value
}

/// The `index`-th point (1-based) of the Halton sequence mapped into `bounds`.
///
/// Dimensions beyond the prime table reuse the largest base; boxes that wide
/// do not occur in this crate (inputs are at most a few dozen dimensions).
pub(crate) fn halton_point(index: u64, bounds: &Bounds) -> Vec<f64> {
    (0..bounds.dim())
        .map(|d| {
            let base = HALTON_BASES[d.min(HALTON_BASES.len() - 1)];
            let t = radical_inverse(index, base);
            bounds.lower[d] + t * (bounds.upper[d] - bounds.lower[d])
        })
        .collect()
}

/// One uniform draw from the box. Degenerate axes return their single value.
pub(crate) fn uniform_point<R: Rng>(rng: &mut R, bounds: &Bounds) -> Vec<f64> {
    (0..bounds.dim())
        .map(|d| {
            let (l, u) = (bounds.lower[d], bounds.upper[d]);
            if l == u {
                l
            } else {
                rng.gen_range(l..u)
            }
        })
        .collect()
}

/// FNV-1a hash of a component name folded with a base seed.
///
/// Every stochastic stage derives its seed this way so that one top-level seed
/// reproduces a whole run while stages stay decorrelated.
pub fn derive_seed(base: u64, component: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ base;
    for &b in component.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
