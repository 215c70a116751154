//! Symmetric nearest-neighbor random walk on the integer lattice, restarted
//! to a positive node, targeting the origin.
//!
//! The discounted value decays geometrically with the distance from the
//! origin; its decay rate is the minimal root of the quadratic
//! `alpha = (1-p)/2 * (1 + alpha^2)`. The optimal restart probability solves
//! a cubic and admits a singular-perturbation expansion in the restart
//! distance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::kernel::{FiniteKernel, TargetSet};

/// Truncation tail bound that [`LatticeWalk::truncate`] refuses to exceed.
pub const TRUNCATION_TAIL_LIMIT: f64 = 1e-10;

/// Minimal root (in `(0, 1)`) of the characteristic equation
/// `alpha = (1-p)/2 * (1 + alpha^2)`: the per-site geometric decay rate of
/// the discounted value.
///
/// Evaluated as `(1-p) / (1 + sqrt(p(2-p)))`, which is stable at both ends
/// of `(0, 1)`.
pub fn decay_root(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "restart probability must lie in (0, 1)");
    (1.0 - p) / (1.0 + (p * (2.0 - p)).sqrt())
}

/// The restarted lattice walk: `+1` or `-1` with equal probability, target
/// at the origin, restart to node `restart >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeWalk {
    restart: u32,
    p: f64,
}

impl LatticeWalk {
    pub fn new(restart: u32, p: f64) -> Result<Self> {
        if restart == 0 {
            return Err(Error::BadDistribution {
                reason: "restart node must be a positive lattice site".into(),
            });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadRestartProbability { p });
        }
        Ok(Self { restart, p })
    }

    pub fn restart(&self) -> u32 {
        self.restart
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Expected discounted time before the base walk reaches the origin:
    /// `(1 - alpha^k) / p` from node `k`.
    pub fn discounted_value(&self, k: u32) -> f64 {
        let alpha = decay_root(self.p);
        (1.0 - alpha.powi(k as i32)) / self.p
    }

    /// Expected hitting time of the origin for the restarted walk:
    /// `(1 - alpha^k) / (p * alpha^restart)` from node `k`.
    pub fn hitting_time(&self, k: u32) -> ExtReal {
        let alpha = decay_root(self.p);
        ExtReal::from_ratio(
            1.0 - alpha.powi(k as i32),
            self.p * alpha.powi(self.restart as i32),
        )
    }

    /// Limit of the hitting time as the start goes far from the origin:
    /// `1 / (p * alpha^restart)`, the quantity the optimal restart
    /// probability minimizes.
    pub fn hitting_time_far(&self) -> f64 {
        let alpha = decay_root(self.p);
        1.0 / (self.p * alpha.powi(self.restart as i32))
    }

    /// Truncates the lattice to states `{0, ..., boundary}` for the generic
    /// finite solver: interior sites step `+-1`, the boundary site reflects
    /// its rightward step onto itself, the target is the origin and the
    /// restart distribution is the point mass at the restart node.
    ///
    /// The truncation error in the discounted value decays like
    /// `alpha^(boundary - k)`; the constructor rejects boundaries whose tail
    /// bound at the restart node exceeds [`TRUNCATION_TAIL_LIMIT`].
    pub fn truncate(&self, boundary: usize) -> Result<(FiniteKernel, DVector<f64>, TargetSet)> {
        let r = self.restart as usize;
        if boundary <= r {
            return Err(Error::BoundaryTooClose {
                bound: 1.0,
                limit: TRUNCATION_TAIL_LIMIT,
            });
        }
        let tail = decay_root(self.p).powi((boundary - r) as i32);
        if tail > TRUNCATION_TAIL_LIMIT {
            return Err(Error::BoundaryTooClose {
                bound: tail,
                limit: TRUNCATION_TAIL_LIMIT,
            });
        }

        let n = boundary + 1;
        let mut m = DMatrix::zeros(n, n);
        m[(0, 0)] = 1.0;
        for k in 1..boundary {
            m[(k, k - 1)] = 0.5;
            m[(k, k + 1)] = 0.5;
        }
        m[(boundary, boundary - 1)] = 0.5;
        m[(boundary, boundary)] = 0.5;

        let mut nu = DVector::zeros(n);
        nu[r] = 1.0;
        Ok((
            FiniteKernel::new(m)?,
            nu,
            TargetSet::new([0], n)?,
        ))
    }
}

/// Optimal restart probability for far starts: the unique root in `(0, 1)`
/// of the cubic `(1-p)^2 (2-p) / r^2 = p`, found by bisection.
///
/// The left-hand side decreases and the right-hand side increases on
/// `(0, 1)`, so the sign change is unique and bisection is branch-free.
pub fn optimal_restart(restart: u32) -> f64 {
    assert!(restart >= 1);
    let rr = (restart as f64) * (restart as f64);
    let f = |p: f64| (1.0 - p) * (1.0 - p) * (2.0 - p) / rr - p;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-term singular-perturbation expansion of the optimal restart
/// probability: `2/r^2 - 10/r^4`.
pub fn optimal_restart_series(restart: u32) -> f64 {
    assert!(restart >= 1);
    let rr = (restart as f64) * (restart as f64);
    2.0 / rr - 10.0 / (rr * rr)
}
