//! Thread-count independent parallel reductions.
//!
//! Work is split into fixed-size blocks whose boundaries depend only on the
//! problem size. Blocks run in parallel, each folding its items sequentially,
//! and the block partials are combined in ascending block order. Floating
//! point results are therefore bitwise identical for any pool size.

use rayon::prelude::*;

pub const DEFAULT_BLOCK: usize = 256;

/// `init` must return the identity of `merge`.
pub fn ordered_reduce<T, Init, Fold, Merge>(
    n_items: usize,
    block: usize,
    init: Init,
    fold: Fold,
    merge: Merge,
) -> T
where
    T: Send,
    Init: Fn() -> T + Sync,
    Fold: Fn(&mut T, usize) + Sync,
    Merge: Fn(&mut T, T),
{
    let block = block.max(1);
    let n_blocks = n_items.div_ceil(block);
    let partials: Vec<T> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            let end = ((b + 1) * block).min(n_items);
            for i in b * block..end {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_pool_size() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                ordered_reduce(
                    10_007,
                    64,
                    || 0.0f64,
                    |acc, i| *acc += ((i as f64) * 0.37).sin() / 3.0,
                    |a, b| *a += b,
                )
            })
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(4).to_bits());
        assert_eq!(one.to_bits(), run(8).to_bits());
    }

    #[test]
    fn empty_range_is_init() {
        let s = ordered_reduce(0, 8, || 0usize, |a, i| *a += i, |a, b| *a += b);
        assert_eq!(s, 0);
    }
}
