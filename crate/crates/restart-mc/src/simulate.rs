//! Monte Carlo oracle: trajectory sampling for the restarted chain and the
//! two closed-form walks, independent of every analytic solver.
//!
//! Each replica owns a ChaCha stream keyed by `(seed, replica index)` and
//! step counts are reduced in exact integer arithmetic, so results are
//! bit-identical for a given seed regardless of how many workers run the
//! replicas.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::exp_line::ExpLineWalk;
use crate::kernel::{RestartChain, TargetSet};
use crate::lattice::LatticeWalk;

/// Summary statistics of a hitting-time sample.
///
/// `truncated` counts replicas stopped at the step cap; those contribute the
/// cap itself, so a nonzero count flags the mean as a lower bound only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub truncated: u64,
}

impl SampleStats {
    fn from_sums(n: u64, sum: u128, sumsq: u128, truncated: u64) -> Self {
        assert!(n >= 1);
        let mean = sum as f64 / n as f64;
        let stderr = if n >= 2 {
            // n * sumsq - sum^2 is exact in u128 for any capped sample.
            let numer = (n as u128 * sumsq - sum * sum) as f64;
            let var = numer / (n as f64 * (n - 1) as f64);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        SampleStats {
            n,
            mean,
            stderr,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            truncated,
        }
    }
}

/// Stream 0 is reserved for single-trajectory runs; replicas get 1-based
/// streams.
fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica + 1);
    rng
}

fn run_replicas<F>(replicas: u64, seed: u64, run: F) -> SampleStats
where
    F: Fn(&mut ChaCha8Rng) -> (u64, bool) + Sync,
{
    let body = |i: u64| {
        let mut rng = replica_rng(seed, i);
        let (steps, truncated) = run(&mut rng);
        (
            steps as u128,
            steps as u128 * steps as u128,
            truncated as u64,
        )
    };
    let merge = |a: (u128, u128, u64), b: (u128, u128, u64)| (a.0 + b.0, a.1 + b.1, a.2 + b.2);

    #[cfg(feature = "parallel")]
    let sums = (0..replicas)
        .into_par_iter()
        .map(body)
        .reduce(|| (0, 0, 0), merge);
    #[cfg(not(feature = "parallel"))]
    let sums = (0..replicas).map(body).fold((0, 0, 0), merge);

    SampleStats::from_sums(replicas, sums.0, sums.1, sums.2)
}

/// Draws an index from a cumulative distribution row.
fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn cumulative(row: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    row.map(|v| {
        acc += v;
        acc
    })
    .collect()
}

/// Samples the number of steps until the restarted chain first enters the
/// target, over `replicas` independent trajectories from `start`.
///
/// Each transition restarts to a `nu` draw with probability `p` and
/// otherwise moves by the base kernel. Trajectories exceeding `cap` steps
/// contribute `cap` and are counted in `truncated`. Deterministic in
/// `(seed, replicas, cap)` regardless of worker count.
pub fn sample_hitting_time(
    chain: &RestartChain,
    target: &TargetSet,
    start: usize,
    replicas: u64,
    cap: u64,
    seed: u64,
) -> SampleStats {
    assert!(replicas >= 1 && cap >= 1 && start < chain.n());
    let p = chain.p();
    let nu_cdf = cumulative(chain.nu().iter().copied());
    let row_cdfs: Vec<Vec<f64>> = (0..chain.n())
        .map(|i| cumulative(chain.kernel().matrix().row(i).iter().copied()))
        .collect();

    run_replicas(replicas, seed, |rng| {
        let mut state = start;
        let mut steps = 0u64;
        while !target.contains(state) {
            if steps == cap {
                return (cap, true);
            }
            state = if rng.random::<f64>() < p {
                draw(&nu_cdf, rng)
            } else {
                draw(&row_cdfs[state], rng)
            };
            steps += 1;
        }
        (steps, false)
    })
}

/// Occupation frequencies of one long trajectory of the restarted chain,
/// recorded over `samples` steps after `burn_in` steps. The trajectory
/// starts from a draw of the restart distribution.
pub fn empirical_stationary(
    chain: &RestartChain,
    burn_in: u64,
    samples: u64,
    seed: u64,
) -> DVector<f64> {
    assert!(samples >= 1);
    let p = chain.p();
    let nu_cdf = cumulative(chain.nu().iter().copied());
    let row_cdfs: Vec<Vec<f64>> = (0..chain.n())
        .map(|i| cumulative(chain.kernel().matrix().row(i).iter().copied()))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = draw(&nu_cdf, &mut rng);
    let step = |state: usize, rng: &mut ChaCha8Rng| {
        if rng.random::<f64>() < p {
            draw(&nu_cdf, rng)
        } else {
            draw(&row_cdfs[state], rng)
        }
    };
    for _ in 0..burn_in {
        state = step(state, &mut rng);
    }
    let mut counts = vec![0u64; chain.n()];
    for _ in 0..samples {
        state = step(state, &mut rng);
        counts[state] += 1;
    }
    DVector::from_iterator(
        chain.n(),
        counts.into_iter().map(|c| c as f64 / samples as f64),
    )
}

/// Exact simulation of the exponential line walk: each transition restarts
/// to the base point with probability `p` and otherwise advances by an
/// `Exp(mu)` increment; a hit is a landing inside `[a, b]`.
pub fn sample_exp_line(
    walk: &ExpLineWalk,
    start: f64,
    replicas: u64,
    cap: u64,
    seed: u64,
) -> SampleStats {
    assert!(replicas >= 1 && cap >= 1);
    let (mu, p, restart) = (walk.mu(), walk.p(), walk.restart());
    run_replicas(replicas, seed, |rng| {
        let mut pos = start;
        let mut steps = 0u64;
        while !walk.in_target(pos) {
            if steps == cap {
                return (cap, true);
            }
            if rng.random::<f64>() < p {
                pos = restart;
            } else {
                // Inverse-CDF exponential increment; 1 - u is never zero.
                let u: f64 = rng.random();
                pos += -(1.0 - u).ln() / mu;
            }
            steps += 1;
        }
        (steps, false)
    })
}

/// Exact simulation of the restarted symmetric lattice walk targeting the
/// origin.
pub fn sample_lattice(
    walk: &LatticeWalk,
    start: u64,
    replicas: u64,
    cap: u64,
    seed: u64,
) -> SampleStats {
    assert!(replicas >= 1 && cap >= 1);
    let (p, restart) = (walk.p(), walk.restart() as i64);
    run_replicas(replicas, seed, |rng| {
        let mut pos = start as i64;
        let mut steps = 0u64;
        while pos != 0 {
            if steps == cap {
                return (cap, true);
            }
            if rng.random::<f64>() < p {
                pos = restart;
            } else if rng.random::<f64>() < 0.5 {
                pos -= 1;
            } else {
                pos += 1;
            }
            steps += 1;
        }
        (steps, false)
    })
}
