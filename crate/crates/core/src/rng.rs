//! Counter-based noise: every draw is a pure function of `(seed, index)`,
//! so results do not depend on evaluation order or thread count.

use std::f64::consts::PI;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// One round of splitmix64 applied to `x`.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 64-bit key for draw `stream` of item `index` under `seed`.
#[inline]
pub fn key(seed: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ stream.wrapping_mul(GOLDEN))
}

/// Uniform draw in the open interval `(0, 1)`.
#[inline]
pub fn uniform_open(k: u64) -> f64 {
    ((k >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Standard normal draw for item `index` (Box–Muller on two keyed uniforms).
pub fn standard_normal(seed: u64, index: u64) -> f64 {
    let u1 = uniform_open(key(seed, index, 0));
    let u2 = uniform_open(key(seed, index, 1));
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Uniform draw in `[0, 1)` for item `index`.
pub fn uniform(seed: u64, index: u64) -> f64 {
    (key(seed, index, 2) >> 11) as f64 / (1u64 << 53) as f64
}
