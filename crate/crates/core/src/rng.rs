//! Counter-based random numbers.
//!
//! Every random quantity in the crate is a pure function of a 64-bit key and
//! a 128-bit counter, evaluated with the Philox4x32-10 bijection. Matrix
//! entries use the counter `(col, row, domain, 0)`, so any single entry can
//! be produced without generating the others, in any order, on any thread.

const MUL0: u32 = 0xD251_1F53;
const MUL1: u32 = 0xCD9E_8D57;
const WEYL0: u32 = 0x9E37_79B9;
const WEYL1: u32 = 0xBB67_AE85;

/// Domain tags occupying the third counter word.
pub mod domain {
    pub const ENTRY: u32 = 0;
    pub const SIGNING: u32 = 1;
    pub const BOX_SAMPLE: u32 = 2;
    pub const SEED_DERIVE: u32 = 3;
    pub const ANTICONC: u32 = 4;
}

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

/// One Philox4x32 block with ten rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut ctr = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(WEYL0);
            k[1] = k[1].wrapping_add(WEYL1);
        }
        let (hi0, lo0) = mulhilo(MUL0, ctr[0]);
        let (hi1, lo1) = mulhilo(MUL1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ k[0], lo1, hi0 ^ ctr[3] ^ k[1], lo0];
    }
    ctr
}

#[inline]
fn split_key(seed: u64) -> [u32; 2] {
    [seed as u32, (seed >> 32) as u32]
}

/// Two 64-bit words for `(seed, counter)`.
#[inline]
pub fn block64(seed: u64, counter: [u32; 4]) -> (u64, u64) {
    let w = philox4x32(counter, split_key(seed));
    (
        u64::from(w[0]) | (u64::from(w[1]) << 32),
        u64::from(w[2]) | (u64::from(w[3]) << 32),
    )
}

/// Maps 64 random bits to the open interval (0, 1).
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Box–Muller pair from one block: both the cosine and the sine branch.
#[inline]
pub fn normal_pair(seed: u64, counter: [u32; 4]) -> (f64, f64) {
    let (a, b) = block64(seed, counter);
    let u1 = open_unit(a);
    let u2 = open_unit(b);
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Standard normal keyed by a matrix coordinate.
#[inline]
pub fn entry_normal(seed: u64, row: usize, col: usize) -> f64 {
    normal_pair(seed, [col as u32, row as u32, domain::ENTRY, 0]).0
}

/// Uniform (0,1) keyed by a matrix coordinate.
#[inline]
pub fn entry_uniform(seed: u64, row: usize, col: usize) -> f64 {
    open_unit(block64(seed, [col as u32, row as u32, domain::ENTRY, 0]).0)
}

/// Fair coin keyed by `(seed, index, domain)`; true means +1.
#[inline]
pub fn coin(seed: u64, index: u64, tag: u32) -> bool {
    block64(seed, [index as u32, (index >> 32) as u32, tag, 0]).0 >> 63 == 1
}

/// Uniform (0,1) keyed by `(seed, index, domain)`.
#[inline]
pub fn uniform(seed: u64, index: u64, tag: u32) -> f64 {
    open_unit(block64(seed, [index as u32, (index >> 32) as u32, tag, 0]).0)
}

/// Deterministic child seed, used to give ensemble members and experiment
/// tasks independent streams from a single master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    block64(master, [index as u32, (index >> 32) as u32, domain::SEED_DERIVE, 0]).0
}

/// Standard normal for sample `index`, coordinate `dim` of a vector draw.
#[inline]
pub fn vector_normal(seed: u64, tag: u32, index: u64, dim: usize) -> f64 {
    let (c, s) = normal_pair(seed, [index as u32, (index >> 32) as u32, tag, (dim / 2) as u32]);
    if dim % 2 == 0 {
        c
    } else {
        s
    }
}
