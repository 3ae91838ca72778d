//! Binary-reflected Gray-code walk over half of {-1,+1}^n.
//!
//! Coordinate 0 is pinned to +1 (global sign flip leaves `|M sigma|_inf`
//! unchanged). Step `i` of the walk flips coordinate `1 + trailing_zeros(i)`,
//! which moves every row sum by `+-2` times one column. The walk over
//! `[0, 2^(n-1))` can be cut into contiguous chunks; each chunk seeds its row
//! sums directly from its first code word, so chunks run independently and
//! concatenating their outputs reproduces the sequential order.

use rayon::prelude::*;

/// Steps between exact recomputations of the row sums for real entries.
const RESYNC_PERIOD: u64 = 1 << 16;
/// Chunk length for parallel walks.
const CHUNK: u64 = 1 << 15;

#[inline]
pub(crate) fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Column-major matrix view used by the walk.
pub(crate) struct Columns {
    pub rows: usize,
    pub cols: Vec<Vec<f64>>,
    pub exact: bool,
}

impl Columns {
    pub fn new(inst: &crate::Instance) -> Self {
        Self { rows: inst.rows(), cols: inst.columns(), exact: inst.disorder().is_integer() }
    }

    pub fn n(&self) -> usize {
        self.cols.len()
    }

    /// Row sums for the sign vector encoded by `mask` (bit set = -1).
    pub fn row_sums(&self, mask: u64, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (j, col) in self.cols.iter().enumerate() {
            let s = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            for (o, c) in out.iter_mut().zip(col) {
                *o += s * c;
            }
        }
    }

    /// Number of code words in the half-space walk.
    pub fn half_size(&self) -> u64 {
        1u64 << (self.n() - 1)
    }

    /// Walks code indices `[start, end)`, calling `f(index, mask, row_sums)`.
    pub fn walk<F: FnMut(u64, u64, &[f64])>(&self, start: u64, end: u64, mut f: F) {
        if start >= end {
            return;
        }
        let mut sums = vec![0.0; self.rows];
        let mut mask = gray(start) << 1;
        self.row_sums(mask, &mut sums);
        f(start, mask, &sums);
        for i in start + 1..end {
            let j = 1 + i.trailing_zeros() as usize;
            mask ^= 1 << j;
            if !self.exact && (i - start) % RESYNC_PERIOD == 0 {
                self.row_sums(mask, &mut sums);
            } else {
                let col = &self.cols[j];
                if mask >> j & 1 == 1 {
                    for (s, c) in sums.iter_mut().zip(col) {
                        *s -= 2.0 * c;
                    }
                } else {
                    for (s, c) in sums.iter_mut().zip(col) {
                        *s += 2.0 * c;
                    }
                }
            }
            f(i, mask, &sums);
        }
    }

    /// Runs `chunk_fn` over consecutive chunks in parallel and returns the
    /// per-chunk outputs in walk order.
    pub fn par_chunks<T, F>(&self, chunk_fn: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        let total = self.half_size();
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| chunk_fn(c * CHUNK, ((c + 1) * CHUNK).min(total)))
            .collect()
    }
}

#[inline]
pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{generate, Disorder};

    #[test]
    fn walk_visits_each_half_vector_once() {
        let inst = generate(2, 9, Disorder::Rademacher, 1).unwrap();
        let cols = Columns::new(&inst);
        let mut seen = std::collections::HashSet::new();
        cols.walk(0, cols.half_size(), |_, mask, _| {
            assert_eq!(mask & 1, 0);
            assert!(seen.insert(mask));
        });
        assert_eq!(seen.len(), 256);
    }

    #[test]
    fn chunked_walk_matches_sequential() {
        let inst = generate(3, 18, Disorder::Gaussian, 2).unwrap();
        let cols = Columns::new(&inst);
        let mut seq = Vec::new();
        cols.walk(0, cols.half_size(), |_, m, _| seq.push(m));
        let par: Vec<u64> = cols
            .par_chunks(|a, b| {
                let mut v = Vec::new();
                cols.walk(a, b, |_, m, _| v.push(m));
                v
            })
            .into_iter()
            .flatten()
            .collect();
        assert_eq!(seq, par);
    }

    #[test]
    fn incremental_sums_track_direct_sums() {
        let inst = generate(4, 12, Disorder::Gaussian, 3).unwrap();
        let cols = Columns::new(&inst);
        let mut direct = vec![0.0; 4];
        cols.walk(0, cols.half_size(), |_, mask, sums| {
            cols.row_sums(mask, &mut direct);
            for (a, b) in sums.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
        });
    }
}
