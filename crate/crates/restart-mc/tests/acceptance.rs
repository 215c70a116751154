//! Acceptance suite. Each test exercises one release criterion at its stated
//! tolerance and prints a PASS line with the measured runtime; the CLI
//! contract criterion lives in the CLI crate's own suite.

mod common;

use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use restart_mc::exp_line::{self, ExpLineWalk};
use restart_mc::hitting::{classify, discounted_value_series, hitting_time, value_iteration};
use restart_mc::lattice::{self, LatticeWalk};
use restart_mc::optimize::{
    curve, full_restart_hitting, hitting_time_derivative_fd, no_restart_hitting, Objective,
};
use restart_mc::simulate::{sample_exp_line, sample_hitting_time, sample_lattice};
use restart_mc::stationary::{invariant_series, invariant_stationary};
use restart_mc::{ExtReal, FiniteKernel, RestartChain, TargetSet};

fn report(criterion: &str, started: Instant, budget_secs: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("[acceptance] PASS {criterion} ({elapsed:.2}s)");
    assert!(
        elapsed < budget_secs,
        "{criterion}: runtime {elapsed:.2}s exceeds budget {budget_secs}s"
    );
}

/// Golden-section minimizer local to the suite so the numeric optimization
/// oracles stay independent of the library's own optimizer.
fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
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
    }
    0.5 * (a + b)
}

#[test]
fn criterion_01_explicit_formula_three_routes() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    for _ in 0..1000 {
        let case = common::well_conditioned_case(&mut rng, 20, 0.02);
        let sol = hitting_time(&case.chain, &case.target).unwrap();
        assert!(sol.finite, "dense chains always have finite hitting times");

        let series = discounted_value_series(&case.chain, &case.target, 1e-10);
        let solve_vs_series = (&sol.discounted - &series).amax();
        assert!(
            solve_vs_series <= 1e-8,
            "series route disagrees by {solve_vs_series:e}"
        );

        let (vi, _) = value_iteration(&case.chain, &case.target, 2_000_000, 5e-12).unwrap();
        let mut vi_vs_formula = 0.0f64;
        for x in 0..case.chain.n() {
            let v = sol.expected[x].finite().unwrap();
            vi_vs_formula = vi_vs_formula.max((vi[x] - v).abs());
            // Minimality: iterates approach from below.
            assert!(vi[x] <= v + 1e-8);
        }
        assert!(
            vi_vs_formula <= 1e-8,
            "value iteration disagrees by {vi_vs_formula:e}"
        );
    }
    report(
        "criterion 1: explicit formula vs series and value iteration (1000 chains, 1e-8)",
        started,
        10.0,
    );
}

#[test]
fn criterion_02_invariant_measure_two_routes() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    for _ in 0..500 {
        let case = common::dense_case(&mut rng, 50);
        let series = invariant_series(&case.chain, 1e-13);
        let direct = invariant_stationary(&case.chain).unwrap();
        assert!(series.residual <= 1e-10, "series residual {:e}", series.residual);
        assert!(direct.residual <= 1e-10, "direct residual {:e}", direct.residual);
        let l1: f64 = (&series.q - &direct.q).abs().sum();
        assert!(l1 <= 1e-8, "methods disagree by {l1:e}");
    }
    report(
        "criterion 2: stationary distribution, series vs direct solve (500 chains, 1e-8)",
        started,
        10.0,
    );
}

#[test]
fn criterion_03_equivalence_classification() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for i in 0..1000 {
        let case = if i % 10 < 7 {
            common::dense_case(&mut rng, 20)
        } else {
            common::unreachable_case(&mut rng)
        };
        let q = invariant_series(&case.chain, 1e-13);
        // classify() errors if the four criteria disagree.
        let verdict = classify(&case.chain, &case.target, &q).unwrap();

        let sol = hitting_time(&case.chain, &case.target).unwrap();
        if verdict.finite {
            assert!(sol.expected.iter().all(|v| v.is_finite()));
        } else {
            // Zero target mass forces infinity off the target.
            for x in 0..case.chain.n() {
                if case.target.contains(x) {
                    assert_eq!(sol.expected[x], ExtReal::ZERO);
                } else {
                    assert_eq!(sol.expected[x], ExtReal::Inf);
                }
            }
        }
    }
    report(
        "criterion 3: four finiteness criteria agree (1000 chains incl. zero-mass targets)",
        started,
        10.0,
    );
}

#[test]
fn criterion_04_discounted_value_bound() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    for _ in 0..1000 {
        let case = common::dense_case(&mut rng, 20);
        let sol = hitting_time(&case.chain, &case.target).unwrap();
        let cap = 1.0 / case.chain.p();
        for x in 0..case.chain.n() {
            assert!(
                sol.discounted[x] <= cap + 1e-9,
                "discounted value {} above 1/p = {cap}",
                sol.discounted[x]
            );
        }
        // Dense chains have positive target mass, so the hitting time is
        // finite and bounded by (1/p) / D.
        assert!(sol.finite);
        let bound = cap / sol.denom;
        let max = sol.max_expected().finite().unwrap();
        assert!(max <= bound * (1.0 + 1e-12) + 1e-9);
    }
    report(
        "criterion 4: discounted value <= 1/p and hitting bounded by (1/p)/D (1000 chains)",
        started,
        10.0,
    );
}

#[test]
fn criterion_05_exp_line_optimal_restart() {
    let started = Instant::now();

    assert_eq!(exp_line::optimal_restart(1.0, 0.0), 0.5);

    // Closed form vs direct numeric minimization of the hitting time for a
    // start right of the target; minimized through the log for conditioning.
    for s in [0.1, 1.0, 2.0, 10.0] {
        let closed = exp_line::optimal_restart(1.0, s);
        let objective = |p: f64| {
            ExpLineWalk::new(1.0, s, s + 1.0, 0.0, p)
                .unwrap()
                .hitting_time(s + 2.0)
                .finite()
                .unwrap()
                .ln()
        };
        let numeric = golden(objective, 1e-9, 1.0 - 1e-9, 1e-10);
        assert!(
            (closed - numeric).abs() <= 1e-6,
            "mu*gap = {s}: closed {closed} vs numeric {numeric}"
        );
    }

    let exact = exp_line::optimal_restart(1.0, 100.0);
    let asym = exp_line::optimal_restart_asymptotic(1.0, 100.0);
    assert!((exact - asym).abs() / exact <= 0.10);

    report(
        "criterion 5: exp-line optimal restart, closed form vs numeric and asymptotics",
        started,
        2.0,
    );
}

#[test]
fn criterion_06_lattice_optimal_restart() {
    let started = Instant::now();

    let root10 = lattice::optimal_restart(10);
    let cubic_residual = ((1.0 - root10).powi(2) * (2.0 - root10) / 100.0 - root10).abs();
    assert!(cubic_residual <= 1e-12, "residual {cubic_residual:e}");
    assert!((root10 - 0.019).abs() <= 1e-4, "root {root10} vs series 0.019");
    assert!((lattice::optimal_restart_series(10) - 0.019).abs() < 1e-15);

    for r in [1u32, 3, 10, 30] {
        let root = lattice::optimal_restart(r);
        let objective = |p: f64| {
            let w = LatticeWalk::new(r, p).unwrap();
            w.hitting_time_far().ln()
        };
        let numeric = golden(objective, 1e-9, 1.0 - 1e-9, 1e-11);
        assert!(
            (root - numeric).abs() <= 1e-8,
            "r = {r}: cubic {root} vs numeric {numeric}"
        );
    }

    report(
        "criterion 6: lattice optimal restart, cubic root vs series and numeric minimization",
        started,
        2.0,
    );
}

#[test]
fn criterion_07_lattice_bridge_to_generic_solver() {
    let started = Instant::now();
    for r in [1u32, 3, 5, 10] {
        for p in [0.1, 0.2, 0.5] {
            let walk = LatticeWalk::new(r, p).unwrap();
            let solve_at = |boundary: usize| {
                let (kernel, nu, target) = walk.truncate(boundary).unwrap();
                let chain = RestartChain::new(kernel, nu, p).unwrap();
                hitting_time(&chain, &target).unwrap()
            };
            let coarse = solve_at(160);
            let fine = solve_at(320);
            for k in 0..=10usize {
                let closed = walk.hitting_time(k as u32);
                let generic = coarse.expected[k];
                match closed {
                    ExtReal::Finite(c) if c > 0.0 => {
                        let g = generic.finite().expect("generic solver returned inf");
                        assert!(
                            (g - c).abs() / c <= 1e-8,
                            "r={r} p={p} k={k}: closed {c} vs generic {g}"
                        );
                        let f = fine.expected[k].finite().unwrap();
                        assert!(
                            (g - f).abs() <= 1e-10 * g.max(1.0),
                            "r={r} p={p} k={k}: doubling moved {g} -> {f}"
                        );
                    }
                    _ => {
                        assert_eq!(generic, ExtReal::ZERO);
                        assert_eq!(fine.expected[k], ExtReal::ZERO);
                    }
                }
            }
        }
    }
    report(
        "criterion 7: lattice closed form vs truncated generic solver (rel 1e-8, stable under doubling)",
        started,
        5.0,
    );
}

#[test]
fn criterion_08_monte_carlo_consistency() {
    let started = Instant::now();
    let replicas = 100_000;
    let cap = 10_000_000;
    let mut checked = 0;

    // Finite chains: four hand-built plus four seeded random dense chains,
    // all simulated from state 0 against the explicit formula.
    let mut chains: Vec<(RestartChain, TargetSet)> = Vec::new();
    let hits = FiniteKernel::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let nu10 = DVector::from_row_slice(&[1.0, 0.0]);
    let nu01 = DVector::from_row_slice(&[0.0, 1.0]);
    chains.push((
        RestartChain::new(hits.clone(), nu10.clone(), 0.5).unwrap(),
        TargetSet::new([1], 2).unwrap(),
    ));
    chains.push((
        RestartChain::new(hits, nu10.clone(), 0.2).unwrap(),
        TargetSet::new([1], 2).unwrap(),
    ));
    chains.push((
        RestartChain::new(FiniteKernel::identity(2), nu01, 0.25).unwrap(),
        TargetSet::new([1], 2).unwrap(),
    ));
    let shift = FiniteKernel::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
    ])
    .unwrap();
    chains.push((
        RestartChain::new(shift, DVector::from_row_slice(&[1.0 / 3.0; 3]), 0.5).unwrap(),
        TargetSet::new([2], 3).unwrap(),
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for _ in 0..4 {
        let case = common::well_conditioned_case(&mut rng, 6, 0.05);
        chains.push((case.chain, case.target));
    }

    for (i, (chain, target)) in chains.iter().enumerate() {
        let sol = hitting_time(chain, target).unwrap();
        let analytic = sol.expected[0].finite().expect("test chains are finite");
        let stats = sample_hitting_time(chain, target, 0, replicas, cap, 1000 + i as u64);
        assert_eq!(stats.truncated, 0);
        assert!(
            (stats.mean - analytic).abs() <= 4.0 * stats.stderr.max(1e-12),
            "chain {i}: mean {} vs analytic {analytic} (stderr {})",
            stats.mean,
            stats.stderr
        );
        checked += 1;
    }

    // Exponential line walk at its optimal restart probability.
    let walk = ExpLineWalk::new(1.0, 0.0, 1.0, -2.0, exp_line::optimal_restart(1.0, 2.0)).unwrap();
    let analytic = walk.hitting_time(2.0).finite().unwrap();
    let stats = sample_exp_line(&walk, 2.0, replicas, cap, 2024);
    assert_eq!(stats.truncated, 0);
    assert!((stats.mean - analytic).abs() <= 4.0 * stats.stderr);
    checked += 1;

    // Lattice walk with the exact rational value 35.
    let walk = LatticeWalk::new(3, 0.2).unwrap();
    let stats = sample_lattice(&walk, 3, replicas, cap, 2025);
    assert_eq!(stats.truncated, 0);
    assert!((stats.mean - 35.0).abs() <= 4.0 * stats.stderr);
    checked += 1;

    assert_eq!(checked, 10);
    report(
        "criterion 8: Monte Carlo within 4 stderr of analytic values (10 cases, 1e5 replicas)",
        started,
        20.0,
    );
}

#[test]
fn criterion_09_continuity_and_smoothness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC9);
    let mut built = 0;
    while built < 20 {
        let case = common::well_conditioned_case(&mut rng, 12, 0.05);
        let nu = case.chain.nu().clone();
        let kernel = case.chain.kernel().clone();
        let target = &case.target;
        let nu_target: f64 = target.indices().iter().map(|&i| nu[i]).sum();
        if nu_target < 0.05 {
            continue;
        }
        built += 1;

        // Continuity toward p = 0: dense kernels reach the target almost
        // surely, so the no-restart value is finite everywhere.
        let at_zero = no_restart_hitting(&kernel, target).unwrap();
        let near_zero =
            curve(&kernel, &nu, target, Objective::MaxOverStates, &[1e-6]).unwrap();
        let v_eps = near_zero.points[1].1.finite().unwrap();
        let v0 = at_zero
            .iter()
            .copied()
            .fold(ExtReal::ZERO, ExtReal::max)
            .finite()
            .unwrap();
        assert!(
            (v_eps - v0).abs() / v0.max(1.0) <= 1e-3,
            "p->0 limit {v_eps} vs boundary {v0}"
        );

        // Continuity toward p = 1.
        let at_one = full_restart_hitting(&nu, target);
        let near_one =
            curve(&kernel, &nu, target, Objective::MaxOverStates, &[1.0 - 1e-6]).unwrap();
        let v_eps = near_one.points[1].1.finite().unwrap();
        let v1 = at_one
            .iter()
            .copied()
            .fold(ExtReal::ZERO, ExtReal::max)
            .finite()
            .unwrap();
        assert!(
            (v_eps - v1).abs() / v1.max(1.0) <= 1e-3,
            "p->1 limit {v_eps} vs boundary {v1}"
        );

        // Smoothness: central differences converge at order h^2, so the
        // difference-of-differences ratio sits at 4 up to O(h^2).
        let fd = |h: f64| hitting_time_derivative_fd(&kernel, &nu, target, 0, 0.35, h).unwrap();
        let h = 0.02;
        let a = fd(h) - fd(h / 2.0);
        let b = fd(h / 2.0) - fd(h / 4.0);
        assert!(
            a.abs() <= 4.0 * b.abs() * 1.05 + 1e-10,
            "Richardson ratio high: {a:e} vs {b:e}"
        );
        assert!(
            a.abs() >= 4.0 * b.abs() * 0.95 - 1e-10,
            "Richardson ratio low: {a:e} vs {b:e}"
        );
    }
    report(
        "criterion 9: boundary continuity (rel 1e-3) and O(h^2) derivative consistency (20 chains)",
        started,
        5.0,
    );
}
