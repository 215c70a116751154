//! Shared generators for randomized chains. Everything is driven by a seeded
//! ChaCha stream so the suites are deterministic.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use restart_mc::hitting::hitting_time;
use restart_mc::{FiniteKernel, RestartChain, TargetSet};

pub struct Case {
    pub chain: RestartChain,
    pub target: TargetSet,
}

fn positive_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    // Exponential weights keep every entry strictly positive with a wide
    // dynamic range.
    let mut v = DVector::from_fn(n, |_, _| -(1.0 - rng.random::<f64>()).ln());
    v /= v.sum();
    v
}

/// Dense random chain: strictly positive kernel rows and restart vector, so
/// every state is reachable and every target has positive stationary mass.
pub fn dense_case(rng: &mut ChaCha8Rng, max_n: usize) -> Case {
    let n = rng.random_range(2..=max_n);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m.set_row(i, &positive_unit_vector(rng, n).transpose());
    }
    let kernel = FiniteKernel::new(m).expect("generated kernel invalid");
    let nu = positive_unit_vector(rng, n);
    let p = 0.05 + 0.90 * rng.random::<f64>();

    let target_size = rng.random_range(1..=3.min(n - 1));
    let mut indices = Vec::new();
    while indices.len() < target_size {
        let i = rng.random_range(0..n);
        if !indices.contains(&i) {
            indices.push(i);
        }
    }
    Case {
        chain: RestartChain::new(kernel, nu, p).unwrap(),
        target: TargetSet::new(indices, n).unwrap(),
    }
}

/// Dense case filtered so the explicit-formula denominator stays away from
/// zero; at tiny denominators the hitting times blow up and absolute
/// cross-route comparisons stop being meaningful in f64.
pub fn well_conditioned_case(rng: &mut ChaCha8Rng, max_n: usize, min_denom: f64) -> Case {
    loop {
        let case = dense_case(rng, max_n);
        let sol = hitting_time(&case.chain, &case.target).unwrap();
        if sol.denom >= min_denom {
            return case;
        }
    }
}

/// Block chain whose restart support cannot reach the target: the kernel is
/// block-diagonal, the restart distribution lives on the first block and the
/// target on the second, so the target's stationary mass is exactly zero.
pub fn unreachable_case(rng: &mut ChaCha8Rng) -> Case {
    let na = rng.random_range(2..=4);
    let nb = rng.random_range(1..=3);
    let n = na + nb;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..na {
        let row = positive_unit_vector(rng, na);
        for j in 0..na {
            m[(i, j)] = row[j];
        }
    }
    for i in 0..nb {
        let row = positive_unit_vector(rng, nb);
        for j in 0..nb {
            m[(na + i, na + j)] = row[j];
        }
    }
    let kernel = FiniteKernel::new(m).unwrap();

    let head = positive_unit_vector(rng, na);
    let mut nu = DVector::zeros(n);
    for i in 0..na {
        nu[i] = head[i];
    }
    let p = 0.05 + 0.90 * rng.random::<f64>();
    let target = TargetSet::new([na + rng.random_range(0..nb)], n).unwrap();
    Case {
        chain: RestartChain::new(kernel, nu, p).unwrap(),
        target,
    }
}
