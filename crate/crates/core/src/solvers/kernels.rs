//! Row-parallel kernels with a fixed reduction order.
//!
//! Partial sums are formed over fixed blocks of rows and added in block
//! order, so results do not depend on the number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::types::{dot_conj, SensingEnsemble};

/// Rows per reduction block.
const BLOCK: usize = 128;

/// `⟨a_m, x⟩` for every row.
pub(crate) fn project(a: &SensingEnsemble, x: &[Complex64]) -> Vec<Complex64> {
    let n = a.dim();
    a.as_flat()
        .par_chunks(n)
        .with_min_len(BLOCK)
        .map(|row| dot_conj(row, x))
        .collect()
}

/// `Σ_m w_m a_m`.
pub(crate) fn weighted_sum(a: &SensingEnsemble, w: &[Complex64]) -> Vec<Complex64> {
    let n = a.dim();
    let partials: Vec<Vec<Complex64>> = a
        .as_flat()
        .par_chunks(n * BLOCK)
        .zip(w.par_chunks(BLOCK))
        .map(|(rows, ws)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n];
            for (row, &wm) in rows.chunks(n).zip(ws) {
                for (s, r) in acc.iter_mut().zip(row) {
                    *s += wm * r;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    out
}

/// Ordered sum of `f(i)` for `i < len`, blocked like [`weighted_sum`].
pub(crate) fn ordered_sum<T, F>(len: usize, f: F) -> T
where
    T: Send + Copy + std::iter::Sum<T> + std::ops::Add<Output = T>,
    F: Fn(usize) -> T + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let partials: Vec<T> = (0..blocks)
        .into_par_iter()
        .map(|b| (b * BLOCK..((b + 1) * BLOCK).min(len)).map(&f).sum())
        .collect();
    partials.into_iter().sum()
}
