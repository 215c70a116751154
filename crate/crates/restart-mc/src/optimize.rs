//! Expected hitting time as a function of the restart probability, including
//! the closed forms at the boundary `p = 0` (no restart) and `p = 1` (restart
//! every step), and its minimization over `[0, 1]`.
//!
//! The dependence on `p` is continuous on `[0, 1]` and smooth inside, but not
//! necessarily unimodal, so the minimizer brackets with a coarse grid before
//! refining by golden section.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::hitting::hitting_time;
use crate::kernel::{FiniteKernel, RestartChain, TargetSet};
use crate::stationary::target_reachable;

const SOLVE_RESIDUAL_LIMIT: f64 = 1e-10;
/// Interior evaluations stay this far away from the boundary; the boundary
/// itself is always handled by the closed forms.
const EDGE_PAD: f64 = 1e-9;

/// What to minimize or plot across restart probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Expected hitting time from one starting state.
    State(usize),
    /// Worst case over all starting states.
    MaxOverStates,
    /// Average over the restart distribution.
    NuAverage,
}

/// Expected hitting time of the chain *without* restart, for every starting
/// state.
///
/// The value from `x` is finite exactly when the base chain reaches the
/// target almost surely from `x`, decided by graph reachability; the finite
/// values solve `(I - Q) w = 1` on the almost-surely-absorbed states.
pub fn no_restart_hitting(kernel: &FiniteKernel, target: &TargetSet) -> Result<Vec<ExtReal>> {
    let n = kernel.n();
    let base = kernel.matrix();

    // States that can reach the target at all.
    let mut can_reach = vec![false; n];
    let mut queue: Vec<usize> = target.indices().to_vec();
    for &i in &queue {
        can_reach[i] = true;
    }
    while let Some(y) = queue.pop() {
        for x in 0..n {
            if !can_reach[x] && base[(x, y)] > 0.0 {
                can_reach[x] = true;
                queue.push(x);
            }
        }
    }

    // States that with positive probability never hit the target: those that
    // can walk (avoiding the target) into a state from which the target is
    // unreachable.
    let mut doomed = vec![false; n];
    let mut queue: Vec<usize> = (0..n)
        .filter(|&x| !can_reach[x] && !target.contains(x))
        .collect();
    for &x in &queue {
        doomed[x] = true;
    }
    while let Some(y) = queue.pop() {
        for x in 0..n {
            if !doomed[x] && !target.contains(x) && !target.contains(y) && base[(x, y)] > 0.0 {
                doomed[x] = true;
                queue.push(x);
            }
        }
    }

    let sure: Vec<usize> = (0..n)
        .filter(|&x| !target.contains(x) && !doomed[x])
        .collect();
    let m = sure.len();
    let mut values = vec![ExtReal::ZERO; n];
    for x in 0..n {
        if doomed[x] {
            values[x] = ExtReal::Inf;
        }
    }
    if m == 0 {
        return Ok(values);
    }

    let mut system = DMatrix::from_fn(m, m, |a, b| -base[(sure[a], sure[b])]);
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
    for (a, &x) in sure.iter().enumerate() {
        values[x] = ExtReal::Finite(solved[a]);
    }
    Ok(values)
}

/// Expected hitting time when the chain restarts on every transition:
/// zero on the target and `1 / nu(target)` elsewhere, with `1/0 = inf`.
pub fn full_restart_hitting(nu: &DVector<f64>, target: &TargetSet) -> Vec<ExtReal> {
    let target_mass: f64 = target.indices().iter().map(|&i| nu[i]).sum();
    (0..nu.len())
        .map(|x| {
            if target.contains(x) {
                ExtReal::ZERO
            } else {
                ExtReal::from_ratio(1.0, target_mass)
            }
        })
        .collect()
}

fn fold_objective(values: &[ExtReal], nu: &DVector<f64>, objective: Objective) -> ExtReal {
    match objective {
        Objective::State(x) => values[x],
        Objective::MaxOverStates => values.iter().copied().fold(ExtReal::ZERO, ExtReal::max),
        Objective::NuAverage => {
            let mut acc = 0.0;
            for (x, v) in values.iter().enumerate() {
                if nu[x] > 0.0 {
                    match v {
                        ExtReal::Finite(f) => acc += nu[x] * f,
                        ExtReal::Inf => return ExtReal::Inf,
                    }
                }
            }
            ExtReal::Finite(acc)
        }
    }
}

fn eval_interior(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    objective: Objective,
    p: f64,
) -> Result<ExtReal> {
    let chain = RestartChain::new(kernel.clone(), nu.clone(), p)?;
    let sol = hitting_time(&chain, target)?;
    Ok(fold_objective(&sol.expected, nu, objective))
}

fn eval_at_zero(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    objective: Objective,
) -> Result<ExtReal> {
    Ok(fold_objective(
        &no_restart_hitting(kernel, target)?,
        nu,
        objective,
    ))
}

fn eval_at_one(nu: &DVector<f64>, target: &TargetSet, objective: Objective) -> ExtReal {
    fold_objective(&full_restart_hitting(nu, target), nu, objective)
}

/// Expected hitting time sampled across restart probabilities.
#[derive(Debug, Clone)]
pub struct HittingCurve {
    pub objective: Objective,
    /// `(p, value)` pairs with strictly increasing `p`, always including both
    /// endpoints `p = 0` and `p = 1`.
    pub points: Vec<(f64, ExtReal)>,
}

/// Evaluates the hitting-time objective on a grid of restart probabilities.
///
/// Interior points go through the explicit solver; the endpoints use their
/// dedicated closed forms. The endpoints are added if the grid omits them;
/// the grid is sorted and deduplicated.
pub fn curve(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    objective: Objective,
    grid: &[f64],
) -> Result<HittingCurve> {
    assert!(
        grid.iter().all(|&p| (0.0..=1.0).contains(&p)),
        "grid values must lie in [0, 1]"
    );
    let mut ps: Vec<f64> = grid.to_vec();
    ps.extend([0.0, 1.0]);
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ps.dedup();

    let mut points = Vec::with_capacity(ps.len());
    for &p in &ps {
        let v = if p == 0.0 {
            eval_at_zero(kernel, nu, target, objective)?
        } else if p == 1.0 {
            eval_at_one(nu, target, objective)
        } else {
            eval_interior(kernel, nu, target, objective, p)?
        };
        points.push((p, v));
    }
    Ok(HittingCurve { objective, points })
}

/// Outcome of the restart-probability minimization.
#[derive(Debug, Clone, Copy)]
pub struct OptResult {
    pub p_opt: f64,
    pub value: ExtReal,
    /// Width of the final golden-section bracket (zero when an endpoint or
    /// plain grid point won), reported so callers can inspect flatness.
    pub bracket: f64,
    pub evaluations: usize,
}

/// Minimizes the hitting-time objective over `p` in `[0, 1]` with the default
/// grid of 64 interior points and a golden-section bracket of `1e-8`.
pub fn minimize_restart_prob(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    objective: Objective,
) -> Result<OptResult> {
    minimize_restart_prob_with(kernel, nu, target, objective, 64, 1e-8)
}

/// Grid-then-refine minimization of the hitting-time objective.
///
/// A coarse scan brackets the best interior candidate, golden section
/// refines it, and the two boundary closed forms compete as candidates.
/// Ties go to the smallest `p` (restarting less is operationally cheaper).
/// Fails with [`Error::InfeasibleTarget`] when the target cannot be reached
/// from the restart distribution, in which case the value is infinite for
/// every interior `p`.
pub fn minimize_restart_prob_with(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    objective: Objective,
    grid_points: usize,
    bracket_tol: f64,
) -> Result<OptResult> {
    assert!(grid_points >= 2 && bracket_tol > 0.0);
    if !target_reachable(kernel, nu, target) {
        return Err(Error::InfeasibleTarget);
    }

    let evals = Cell::new(0usize);
    let mut candidates: Vec<(f64, ExtReal)> = Vec::new();

    evals.set(evals.get() + 1);
    candidates.push((0.0, eval_at_zero(kernel, nu, target, objective)?));
    evals.set(evals.get() + 1);
    candidates.push((1.0, eval_at_one(nu, target, objective)));

    let ps: Vec<f64> = (1..=grid_points)
        .map(|i| i as f64 / (grid_points as f64 + 1.0))
        .collect();
    let mut best_i = 0;
    let mut best = ExtReal::Inf;
    for (i, &p) in ps.iter().enumerate() {
        evals.set(evals.get() + 1);
        let v = eval_interior(kernel, nu, target, objective, p)?;
        candidates.push((p, v));
        if v < best {
            best = v;
            best_i = i;
        }
    }

    // Refine inside the bracket around the best grid point. Solver failures
    // inside the closure are promoted to panics; they cannot occur for the
    // well-posed interior systems the feasibility check guarantees.
    let lo = if best_i == 0 { EDGE_PAD } else { ps[best_i - 1] };
    let hi = if best_i + 1 == ps.len() {
        1.0 - EDGE_PAD
    } else {
        ps[best_i + 1]
    };
    let f = |p: f64| -> f64 {
        evals.set(evals.get() + 1);
        eval_interior(kernel, nu, target, objective, p)
            .expect("interior evaluation failed during refinement")
            .as_f64()
    };
    let (p_gold, f_gold, width) = golden_min(f, lo, hi, bracket_tol);
    candidates.push((p_gold, ExtReal::from(f_gold)));

    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (mut p_opt, mut value) = candidates[0];
    for &(p, v) in &candidates[1..] {
        if v < value {
            p_opt = p;
            value = v;
        }
    }
    Ok(OptResult {
        p_opt,
        value,
        bracket: if p_opt == p_gold { width } else { 0.0 },
        evaluations: evals.get(),
    })
}

/// Golden-section minimization on `[a, b]`, returning the best point seen,
/// its value, and the final bracket width. Ties favor the left probe.
fn golden_min(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let (mut best_x, mut best_f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        if f1 < best_f {
            best_x = x1;
            best_f = f1;
        }
        if f2 < best_f {
            best_x = x2;
            best_f = f2;
        }
    }
    (best_x, best_f, b - a)
}

/// Central finite difference of the hitting time in `p` at one state,
/// used to probe smoothness. Requires `p - h` and `p + h` inside `(0, 1)`.
pub fn hitting_time_derivative_fd(
    kernel: &FiniteKernel,
    nu: &DVector<f64>,
    target: &TargetSet,
    x: usize,
    p: f64,
    h: f64,
) -> Result<f64> {
    assert!(h > 0.0 && p - h > 0.0 && p + h < 1.0, "p +- h must lie inside (0, 1)");
    let above = eval_interior(kernel, nu, target, Objective::State(x), p + h)?;
    let below = eval_interior(kernel, nu, target, Objective::State(x), p - h)?;
    let (above, below) = (
        above.finite().expect("hitting time infinite at p + h"),
        below.finite().expect("hitting time infinite at p - h"),
    );
    Ok((above - below) / (2.0 * h))
}
