//! Expected hitting times of the restarted chain.
//!
//! The discounted value `w(x)` is the expected sum of `(1-p)^t` over the
//! steps the *base* chain spends before first entering the target. The
//! expected hitting time of the restarted chain is then `w(x) / D` with
//! `D = 1 - p * <w, nu>`, finite exactly when `D > 0`. A linear solve is the
//! primary route; the truncated series and value iteration serve as
//! independent oracles and disagreements fail loudly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::kernel::{RestartChain, TargetSet};
use crate::stationary::StationaryDist;

/// Denominators below this are treated as zero, i.e. infinite hitting time.
/// On finite chains the infinite case yields `D = 0` up to rounding, so any
/// tiny threshold works.
pub const DEFAULT_DENOM_EPS: f64 = 1e-12;

/// Stationary mass below this counts as zero in classifications.
pub const DEFAULT_MASS_EPS: f64 = 1e-12;

const SOLVE_RESIDUAL_LIMIT: f64 = 1e-10;

/// Solution of the expected-hitting-time problem for one chain and target.
#[derive(Debug, Clone)]
pub struct HittingSolution {
    /// Expected discounted time before hitting, per starting state
    /// (zero on the target, in `[1, 1/p]` off it).
    pub discounted: DVector<f64>,
    /// `D = 1 - p * <discounted, nu>`, in `[0, 1]`. Reported so callers can
    /// judge conditioning: a tiny positive value means a huge finite answer.
    pub denom: f64,
    /// Expected number of steps until the restarted chain enters the target.
    pub expected: Vec<ExtReal>,
    /// True iff every expected value is finite, equivalently `denom > 0`.
    pub finite: bool,
}

impl HittingSolution {
    pub fn max_expected(&self) -> ExtReal {
        self.expected
            .iter()
            .copied()
            .fold(ExtReal::ZERO, ExtReal::max)
    }
}

/// Solves the discounted-value fixed point `w = 1 + (1-p) * T w` off the
/// target (`T` the taboo kernel), `w = 0` on it, by dense LU factorization.
///
/// The restricted system `(I - (1-p) Q) w = 1` has spectral radius of
/// `(1-p) Q` strictly below one, hence a unique solution.
pub fn discounted_value(chain: &RestartChain, target: &TargetSet) -> Result<DVector<f64>> {
    expect_dims(chain, target)?;
    let n = chain.n();
    let off = target.complement();
    let m = off.len();
    if m == 0 {
        return Ok(DVector::zeros(n));
    }

    let base = chain.kernel().matrix();
    let q = 1.0 - chain.p();
    let mut system = DMatrix::from_fn(m, m, |a, b| -q * base[(off[a], off[b])]);
    for a in 0..m {
        system[(a, a)] += 1.0;
    }
    let rhs = DVector::from_element(m, 1.0);
    let solved = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SolverFailure {
            residual: f64::INFINITY,
            limit: SOLVE_RESIDUAL_LIMIT,
        })?;

    let residual = (&system * &solved - &rhs).amax();
    if !(residual <= SOLVE_RESIDUAL_LIMIT) {
        return Err(Error::SolverFailure {
            residual,
            limit: SOLVE_RESIDUAL_LIMIT,
        });
    }

    let mut full = DVector::zeros(n);
    for (a, &x) in off.iter().enumerate() {
        full[x] = solved[a];
    }
    Ok(full)
}

/// Discounted value by direct summation of `(1-p)^t` times the taboo
/// survival mass, truncated so the neglected tail is at most `tol`.
///
/// Independent of [`discounted_value`]; used as an oracle against it.
pub fn discounted_value_series(chain: &RestartChain, target: &TargetSet, tol: f64) -> DVector<f64> {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = chain.n();
    let p = chain.p();
    // Tail sum_{t > T} (1-p)^t = (1-p)^{T+1} / p <= tol.
    let horizon = ((tol * p).ln() / (1.0 - p).ln()).ceil().max(0.0) as usize;

    let taboo = chain.kernel().taboo(target);
    let mut mass = DVector::from_fn(n, |i, _| if target.contains(i) { 0.0 } else { 1.0 });
    let mut acc = mass.clone();
    let mut weight = 1.0;
    for _ in 1..=horizon {
        mass = &taboo * mass;
        weight *= 1.0 - p;
        acc.axpy(weight, &mass, 1.0);
    }
    acc
}

/// Expected hitting time of the restarted chain via the explicit formula,
/// with the default denominator threshold.
pub fn hitting_time(chain: &RestartChain, target: &TargetSet) -> Result<HittingSolution> {
    hitting_time_with(chain, target, DEFAULT_DENOM_EPS)
}

/// Same as [`hitting_time`] with an explicit denominator threshold.
///
/// If `D > denom_eps` every off-target state gets the finite value
/// `discounted / D`; otherwise the hitting time is infinite off the target.
/// Infinity is a value here, not an error.
pub fn hitting_time_with(
    chain: &RestartChain,
    target: &TargetSet,
    denom_eps: f64,
) -> Result<HittingSolution> {
    let discounted = discounted_value(chain, target)?;
    let denom = 1.0 - chain.p() * discounted.dot(chain.nu());
    let finite = denom > denom_eps;
    let expected = (0..chain.n())
        .map(|x| {
            if target.contains(x) {
                ExtReal::ZERO
            } else if finite {
                ExtReal::Finite(discounted[x] / denom)
            } else {
                ExtReal::Inf
            }
        })
        .collect();
    Ok(HittingSolution {
        discounted,
        denom,
        expected,
        finite,
    })
}

/// Value iteration for the expected hitting time, from the zero function.
///
/// Iterates `V <- 1 + p <V, nu> + (1-p) T V` off the target. The iterates
/// increase monotonically to the minimal nonnegative solution; monotonicity
/// is asserted at every step. Returns the first iterate whose sup-norm step
/// change drops below `tol` together with the iteration count. When the
/// hitting time is infinite the iterates grow without bound and the
/// iteration reports [`Error::NonConverged`] carrying the last iterate.
pub fn value_iteration(
    chain: &RestartChain,
    target: &TargetSet,
    max_iter: usize,
    tol: f64,
) -> Result<(DVector<f64>, usize)> {
    assert!(max_iter >= 1 && tol > 0.0);
    expect_dims(chain, target)?;
    let n = chain.n();
    let p = chain.p();
    let taboo = chain.kernel().taboo(target);

    let mut current = DVector::zeros(n);
    for iter in 1..=max_iter {
        let restart_term = p * current.dot(chain.nu());
        let mut next = &taboo * &current;
        let mut step = 0.0f64;
        for x in 0..n {
            if target.contains(x) {
                next[x] = 0.0;
            } else {
                next[x] = 1.0 + restart_term + (1.0 - p) * next[x];
            }
            assert!(
                next[x] >= current[x] - 1e-9 * (1.0 + current[x].abs()),
                "value iteration lost monotonicity at state {x}"
            );
            step = step.max((next[x] - current[x]).abs());
        }
        current = next;
        if step < tol {
            return Ok((current, iter));
        }
    }
    Err(Error::NonConverged {
        iterations: max_iter,
        last: current.as_slice().to_vec(),
    })
}

/// The four equivalent finiteness statements, evaluated independently.
#[derive(Debug, Clone, Copy)]
pub struct Classification {
    /// Stationary mass of the target is positive.
    pub target_mass_positive: bool,
    /// Expected hitting time finite from every state.
    pub finite_everywhere: bool,
    /// Expected hitting time finite from stationary-almost-every state.
    pub finite_typical: bool,
    /// The maximum over states is finite.
    pub sup_finite: bool,
    /// The common verdict.
    pub finite: bool,
    /// Raw stationary mass of the target.
    pub target_mass: f64,
}

/// Evaluates the four finiteness criteria separately and checks that they
/// agree; disagreement is an implementation bug surfaced as
/// [`Error::EquivalenceViolation`].
pub fn classify(
    chain: &RestartChain,
    target: &TargetSet,
    stationary: &StationaryDist,
) -> Result<Classification> {
    if stationary.q.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            actual: stationary.q.len(),
        });
    }
    let solution = hitting_time(chain, target)?;
    let target_mass = stationary.mass_on(target);
    let target_mass_positive = target_mass > DEFAULT_MASS_EPS;
    let finite_everywhere = solution.expected.iter().all(|v| v.is_finite());
    let finite_typical = solution
        .expected
        .iter()
        .zip(stationary.q.iter())
        .filter(|(_, &mass)| mass > DEFAULT_MASS_EPS)
        .all(|(v, _)| v.is_finite());
    let sup_finite = solution.max_expected().is_finite();

    let flags = [
        target_mass_positive,
        finite_everywhere,
        finite_typical,
        sup_finite,
    ];
    if flags.iter().any(|&f| f != flags[0]) {
        return Err(Error::EquivalenceViolation {
            details: format!(
                "mass>0: {target_mass_positive}, finite everywhere: {finite_everywhere}, \
                 finite a.e.: {finite_typical}, sup finite: {sup_finite} (q(H) = {target_mass:e})"
            ),
        });
    }
    Ok(Classification {
        target_mass_positive,
        finite_everywhere,
        finite_typical,
        sup_finite,
        finite: flags[0],
        target_mass,
    })
}

fn expect_dims(chain: &RestartChain, target: &TargetSet) -> Result<()> {
    if target.n() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            actual: target.n(),
        });
    }
    Ok(())
}
