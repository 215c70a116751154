//! Stationary distribution of the restarted chain, computed two independent
//! ways: the geometric series pushing the restart distribution through powers
//! of the base kernel, and a direct solve of the stationarity equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{FiniteKernel, RestartChain, TargetSet};

const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    /// Truncated series `sum_t p (1-p)^t nu P^t`, renormalized.
    Series,
    /// Direct least-squares solve of `q = q * restarted`.
    Stationarity,
}

/// A stationary probability vector with provenance.
#[derive(Debug, Clone)]
pub struct StationaryDist {
    pub q: DVector<f64>,
    pub method: StationaryMethod,
    /// L1 norm of `q - q * restarted`.
    pub residual: f64,
    /// Truncation horizon, for the series method.
    pub horizon: Option<usize>,
}

impl StationaryDist {
    /// Total stationary mass on the target set.
    pub fn mass_on(&self, target: &TargetSet) -> f64 {
        target.indices().iter().map(|&i| self.q[i]).sum()
    }
}

fn stationarity_residual(q: &DVector<f64>, restarted: &FiniteKernel) -> f64 {
    let pushed = restarted.matrix().tr_mul(q);
    (q - pushed).abs().sum()
}

/// Stationary distribution by summing the restart series until the neglected
/// geometric tail is at most `tol`, then renormalizing to unit mass.
///
/// The truncated sum has mass `1 - (1-p)^(horizon+1)`; renormalizing rather
/// than extrapolating keeps the vector an exact probability distribution.
/// With `tol <= 1e-12` the stationarity residual stays below `1e-10`.
pub fn invariant_series(chain: &RestartChain, tol: f64) -> StationaryDist {
    assert!(tol > 0.0, "tolerance must be positive");
    let p = chain.p();
    let horizon = (tol.ln() / (1.0 - p).ln()).ceil().max(1.0) as usize;

    let base = chain.kernel().matrix();
    // Row vector nu P^t, advanced in place.
    let mut pushed = chain.nu().clone();
    let mut acc = pushed.clone() * p;
    let mut weight = p;
    for _ in 1..=horizon {
        pushed = base.tr_mul(&pushed);
        weight *= 1.0 - p;
        acc.axpy(weight, &pushed, 1.0);
    }
    acc /= acc.sum();

    let residual = stationarity_residual(&acc, &chain.restarted());
    StationaryDist {
        q: acc,
        method: StationaryMethod::Series,
        residual,
        horizon: Some(horizon),
    }
}

/// Stationary distribution by solving the stationarity equations
/// `q (restarted - I) = 0`, `sum q = 1` as a least-squares system.
///
/// The restarted chain has a unique stationary distribution; uniqueness is
/// asserted through the residual check and (in debug builds) a rank check of
/// the stacked system.
pub fn invariant_stationary(chain: &RestartChain) -> Result<StationaryDist> {
    let n = chain.n();
    let restarted = chain.restarted();

    // Stack (restarted^T - I) over the normalization row.
    let mut system = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            system[(i, j)] = restarted.matrix()[(j, i)] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        system[(n, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;

    let svd = system.svd(true, true);
    debug_assert!(
        {
            let max_sv = svd.singular_values.max();
            svd.singular_values.iter().filter(|&&s| s > 1e-10 * max_sv).count() == n
        },
        "stationarity system is rank-deficient: the stationary distribution is not unique"
    );
    let solved = svd
        .solve(&rhs, 1e-14)
        .map_err(|_| Error::SolverFailure {
            residual: f64::INFINITY,
            limit: RESIDUAL_LIMIT,
        })?;

    let mut q = DVector::from_iterator(n, solved.iter().map(|&v| v.max(0.0)));
    q /= q.sum();

    let residual = stationarity_residual(&q, &restarted);
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::SolverFailure {
            residual,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok(StationaryDist {
        q,
        method: StationaryMethod::Stationarity,
        residual,
        horizon: None,
    })
}

/// Whether the target can be reached from the support of the restart
/// distribution under the base kernel. Equivalent to the target having
/// positive stationary mass for some (hence every) restart probability.
pub fn target_reachable(kernel: &FiniteKernel, nu: &DVector<f64>, target: &TargetSet) -> bool {
    let n = kernel.n();
    let mut seen = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| nu[i] > 0.0).collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(x) = queue.pop() {
        if target.contains(x) {
            return true;
        }
        for y in 0..n {
            if !seen[y] && kernel.matrix()[(x, y)] > 0.0 {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    target.indices().iter().any(|&i| seen[i])
}
