//! Monte Carlo oracle.
//!
//! Simulates explicit PPP realizations to estimate the same quantities the
//! analytical modules compute in closed or integral form: coverage and rate
//! of the typical MT ([`sinr`]) and boundary-crossing intensities along a
//! straight trajectory ([`crossings`]).
//!
//! Each realization draws from its own ChaCha stream selected by
//! `(seed, realization index)`. Work is split into fixed-size chunks whose
//! partial sums are combined in chunk order, so results are bit-identical
//! whatever the number of worker threads.

pub mod crossings;
pub mod ppp;
pub mod sinr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use crossings::{count_crossings, CrossingReport, CrossingSpec};
pub use ppp::PppRealization;
pub use sinr::{
    simulate_rate, simulate_sinr, simulate_success_prob, McOptions, SinrStudy, Snapshot,
};

/// Realizations per work item.
const CHUNK: u64 = 512;

/// Random stream for realization `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A Monte Carlo point estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Sample standard deviation over `sqrt(sample_count)`.
    pub standard_error: f64,
    pub sample_count: u64,
    pub seed: u64,
}

impl McEstimate {
    pub(crate) fn from_moments(sum: f64, sum_sq: f64, count: u64, seed: u64) -> Self {
        let n = count as f64;
        let mean = sum / n;
        let var = if count > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            estimate: mean,
            standard_error: (var / n).sqrt(),
            sample_count: count,
            seed,
        }
    }
}

/// Runs `work` for realization indices `0..count` and folds the per-chunk
/// accumulators in index order.
pub(crate) fn deterministic_reduce<A, W, M>(count: u64, work: W, merge: M) -> A
where
    A: Send + Default,
    W: Fn(u64, &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = A::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                work(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = A::default();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a: u64 = stream(7, 3).random();
        let b: u64 = stream(7, 3).random();
        let c: u64 = stream(7, 4).random();
        let d: u64 = stream(8, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn reduction_independent_of_thread_count() {
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                deterministic_reduce(
                    5000,
                    |i, acc: &mut f64| *acc += stream(1, i).random::<f64>().sqrt(),
                    |t, p| *t += p,
                )
            })
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn moments() {
        let e = McEstimate::from_moments(6.0, 14.0, 3, 0);
        assert_eq!(e.estimate, 2.0);
        assert!((e.standard_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
