//! `restart-mc`: solve, classify, optimize and simulate hitting times of
//! Markov chains with restart.
//!
//! Exit codes are a stable scripting contract: 0 for success with a finite
//! verdict, 2 for an infinite-hitting-time or infeasible-target verdict,
//! 1 for usage or input errors.

mod report;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use restart_mc::chain_spec::ChainSpec;
use restart_mc::exp_line::{self, ExpLineWalk};
use restart_mc::hitting::{classify, hitting_time};
use restart_mc::lattice::{self, LatticeWalk};
use restart_mc::optimize::{curve, minimize_restart_prob, Objective};
use restart_mc::simulate::{sample_exp_line, sample_hitting_time, sample_lattice, SampleStats};
use restart_mc::stationary::invariant_stationary;
use restart_mc::{Error, ExtReal, ValidatedChain};

use report::Report;

#[derive(Parser)]
#[command(
    name = "restart-mc",
    version,
    about = "Hitting times of Markov chains with restart: solve, classify, optimize, simulate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Report,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    /// Hitting time from one starting state (needs --state)
    State,
    /// Worst case over starting states
    Max,
    /// Average over the restart distribution
    NuAvg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    Expline,
    Lattice,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a chain file: hitting times, stationary distribution, verdict
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Report)]
        format: Format,
    },
    /// Tabulate the hitting time across restart probabilities
    Curve {
        #[arg(long)]
        spec: PathBuf,
        /// Starting state label
        #[arg(long)]
        state: String,
        /// Number of grid points including both endpoints
        #[arg(long, default_value_t = 33)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Minimize the hitting time over the restart probability
    Optimize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::State)]
        objective: ObjectiveArg,
        #[arg(long)]
        state: Option<String>,
    },
    /// Monte Carlo estimate with the analytic value and z-score
    Simulate {
        /// Chain file to simulate (needs --state)
        #[arg(long, conflicts_with = "builtin")]
        spec: Option<PathBuf>,
        /// Starting state label for --spec runs
        #[arg(long)]
        state: Option<String>,
        /// Built-in walk instead of a chain file
        #[arg(long, value_enum)]
        builtin: Option<Builtin>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        /// Step cap per replica; capped replicas are counted as truncated
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
        /// Increment rate (expline)
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Target interval left edge (expline)
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        /// Target interval right edge (expline)
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        b: f64,
        /// Restart point (expline, default -2) or node (lattice, default 3)
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
        /// Restart probability (default: expline optimum, 0.2 for lattice)
        #[arg(long)]
        p: Option<f64>,
        /// Start position (expline)
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        x0: f64,
        /// Start node (lattice)
        #[arg(long, default_value_t = 3)]
        k: u64,
    },
    /// Closed forms of the built-in walks
    Example {
        #[command(subcommand)]
        example: ExampleCmd,
    },
}

#[derive(Subcommand)]
enum ExampleCmd {
    /// Rightward walk with exponential steps targeting an interval
    Expline {
        #[command(subcommand)]
        action: ExplineAction,
    },
    /// Symmetric lattice walk targeting the origin
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
}

#[derive(Subcommand)]
enum ExplineAction {
    /// Optimal restart probability: closed form, asymptotics, numeric check
    Popt {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Distance from the restart point to the near target edge
        #[arg(long, default_value_t = 2.0)]
        gap: f64,
    },
    /// Hitting time from x as a function of p (CSV)
    Curve {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 65)]
        grid: usize,
    },
    /// Discounted value and hitting time across starting positions (CSV)
    Table {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        r: f64,
        /// Restart probability (default: the closed-form optimum)
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        xmax: Option<f64>,
        #[arg(long, default_value_t = 25)]
        points: usize,
    },
    /// Discounted-value fixed point residual sampled across x (CSV)
    Residual {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
}

#[derive(Subcommand)]
enum LatticeAction {
    /// Optimal restart probability: cubic root, series, numeric check
    Popt {
        #[arg(long, default_value_t = 10)]
        r: u32,
    },
    /// Hitting time from node k as a function of p (CSV)
    Curve {
        #[arg(long, default_value_t = 3)]
        r: u32,
        #[arg(long, default_value_t = 3)]
        k: u32,
        #[arg(long, default_value_t = 65)]
        grid: usize,
    },
    /// Discounted value and hitting time across starting nodes (CSV)
    Table {
        #[arg(long, default_value_t = 3)]
        r: u32,
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long, default_value_t = 12)]
        kmax: u32,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            std::process::exit(0);
        }
        Err(e) => {
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let code = match with_thread_cap(|| run(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

/// RESTART_HIT_THREADS caps the worker count for the internally parallel
/// commands; results are identical for every setting.
fn with_thread_cap<R: Send>(f: impl (FnOnce() -> R) + Send) -> R {
    match std::env::var("RESTART_HIT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(k) if k >= 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("building thread pool")
            .install(f),
        _ => f(),
    }
}

fn load(path: &Path) -> Result<ValidatedChain> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: ChainSpec =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(spec
        .validate()
        .with_context(|| format!("validating {}", path.display()))?)
}

fn linspace(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
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

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Solve { spec, format } => cmd_solve(&spec, format),
        Cmd::Curve {
            spec,
            state,
            grid,
            format,
        } => cmd_curve(&spec, &state, grid, format),
        Cmd::Optimize {
            spec,
            objective,
            state,
        } => cmd_optimize(&spec, objective, state.as_deref()),
        Cmd::Simulate {
            spec,
            state,
            builtin,
            seed,
            replicas,
            cap,
            mu,
            a,
            b,
            r,
            p,
            x0,
            k,
        } => cmd_simulate(SimulateArgs {
            spec,
            state,
            builtin,
            seed,
            replicas,
            cap,
            mu,
            a,
            b,
            r,
            p,
            x0,
            k,
        }),
        Cmd::Example { example } => cmd_example(example),
    }
}

fn cmd_solve(spec: &Path, format: Format) -> Result<i32> {
    let v = load(spec)?;
    let sol = hitting_time(&v.chain, &v.target)?;
    let q = invariant_stationary(&v.chain)?;
    let class = classify(&v.chain, &v.target, &q)?;

    match format {
        Format::Report => {
            let mut rep = Report::new("solve");
            rep.raw("states", &report::str_array(v.labels.iter().map(|s| s.as_str())));
            rep.number("p", v.chain.p());
            rep.string("verdict", if class.finite { "finite" } else { "infinite" });
            rep.number("denom", sol.denom);
            rep.number("q_target", class.target_mass);
            rep.raw("v1", &report::num_array(sol.discounted.iter().copied()));
            rep.raw("v", &report::ext_array(sol.expected.iter()));
            rep.raw("q", &report::num_array(q.q.iter().copied()));
            print!("{}", rep.finish());
        }
        Format::Csv => {
            let mut out = String::from("state,v1,v,q\n");
            for x in 0..v.chain.n() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    v.labels[x],
                    report::num(sol.discounted[x]),
                    report::ext(sol.expected[x]),
                    report::num(q.q[x]),
                ));
            }
            print!("{out}");
        }
    }
    Ok(if class.finite { 0 } else { 2 })
}

fn cmd_curve(spec: &Path, state: &str, grid: usize, format: Format) -> Result<i32> {
    if grid < 2 {
        bail!("--grid must be at least 2 (both endpoints are always included)");
    }
    let v = load(spec)?;
    let x = v.state_index(state)?;
    let c = curve(
        v.chain.kernel(),
        v.chain.nu(),
        &v.target,
        Objective::State(x),
        &linspace(grid),
    )?;

    match format {
        Format::Csv => {
            let rows = c.points.iter().map(|&(p, val)| (p, val.as_f64()));
            print!("{}", report::csv_table(("p", "v"), rows));
        }
        Format::Report => {
            let mut rep = Report::new("curve");
            rep.string("state", state);
            rep.raw("p", &report::num_array(c.points.iter().map(|&(p, _)| p)));
            rep.raw(
                "v",
                &report::num_array(c.points.iter().map(|&(_, val)| val.as_f64())),
            );
            print!("{}", rep.finish());
        }
    }
    Ok(0)
}

fn cmd_optimize(spec: &Path, objective: ObjectiveArg, state: Option<&str>) -> Result<i32> {
    let v = load(spec)?;
    let (objective, label) = match objective {
        ObjectiveArg::State => {
            let label = state.context("--objective state needs --state LABEL")?;
            (Objective::State(v.state_index(label)?), label.to_string())
        }
        ObjectiveArg::Max => (Objective::MaxOverStates, "max".to_string()),
        ObjectiveArg::NuAvg => (Objective::NuAverage, "nu-avg".to_string()),
    };

    match minimize_restart_prob(v.chain.kernel(), v.chain.nu(), &v.target, objective) {
        Ok(opt) => {
            let mut rep = Report::new("optimize");
            rep.string("objective", &label);
            rep.number("p_opt", opt.p_opt);
            rep.number("value", opt.value.as_f64());
            rep.number("bracket", opt.bracket);
            rep.integer("evaluations", opt.evaluations as u64);
            print!("{}", rep.finish());
            Ok(0)
        }
        Err(Error::InfeasibleTarget) => {
            eprintln!(
                "error: target unreachable from the restart distribution; \
                 the hitting time is infinite for every restart probability"
            );
            Ok(2)
        }
        Err(e) => Err(e.into()),
    }
}

struct SimulateArgs {
    spec: Option<PathBuf>,
    state: Option<String>,
    builtin: Option<Builtin>,
    seed: u64,
    replicas: u64,
    cap: u64,
    mu: f64,
    a: f64,
    b: f64,
    r: Option<f64>,
    p: Option<f64>,
    x0: f64,
    k: u64,
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let (source, stats, analytic) = match (&args.spec, args.builtin) {
        (Some(spec), None) => {
            let v = load(spec)?;
            let label = args
                .state
                .as_deref()
                .context("simulating a chain file needs --state LABEL")?;
            let x = v.state_index(label)?;
            let sol = hitting_time(&v.chain, &v.target)?;
            let stats =
                sample_hitting_time(&v.chain, &v.target, x, args.replicas, args.cap, args.seed);
            ("spec".to_string(), stats, sol.expected[x])
        }
        (None, Some(Builtin::Expline)) => {
            let r = args.r.unwrap_or(-2.0);
            let p = args.p.unwrap_or_else(|| exp_line::optimal_restart(args.mu, args.a - r));
            let walk = ExpLineWalk::new(args.mu, args.a, args.b, r, p)?;
            let stats = sample_exp_line(&walk, args.x0, args.replicas, args.cap, args.seed);
            ("expline".to_string(), stats, walk.hitting_time(args.x0))
        }
        (None, Some(Builtin::Lattice)) => {
            let r = args.r.unwrap_or(3.0);
            if r < 1.0 || r.fract() != 0.0 {
                bail!("lattice restart node --r must be a positive integer, got {r}");
            }
            let p = args.p.unwrap_or(0.2);
            let walk = LatticeWalk::new(r as u32, p)?;
            let stats = sample_lattice(&walk, args.k, args.replicas, args.cap, args.seed);
            let analytic = if args.k <= u32::MAX as u64 {
                walk.hitting_time(args.k as u32)
            } else {
                ExtReal::Finite(walk.hitting_time_far())
            };
            ("lattice".to_string(), stats, analytic)
        }
        _ => bail!("pass exactly one of --spec PATH or --builtin {{expline|lattice}}"),
    };

    print_sample_report(&source, &stats, analytic, args.seed, args.cap);
    Ok(0)
}

fn print_sample_report(source: &str, stats: &SampleStats, analytic: ExtReal, seed: u64, cap: u64) {
    let mut rep = Report::new("simulate");
    rep.string("source", source);
    rep.integer("seed", seed);
    rep.integer("replicas", stats.n);
    rep.integer("cap", cap);
    rep.number("mean", stats.mean);
    rep.number("stderr", stats.stderr);
    rep.raw("ci95", &report::num_array([stats.ci95.0, stats.ci95.1]));
    rep.integer("truncated", stats.truncated);
    rep.number("analytic", analytic.as_f64());
    if let Some(v) = analytic.finite() {
        let z = if stats.stderr > 0.0 {
            (stats.mean - v).abs() / stats.stderr
        } else if (stats.mean - v).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        rep.number("z_score", z);
    }
    print!("{}", rep.finish());
}

fn cmd_example(example: ExampleCmd) -> Result<i32> {
    match example {
        ExampleCmd::Expline { action } => match action {
            ExplineAction::Popt { mu, gap } => {
                if !(mu > 0.0 && gap >= 0.0) {
                    bail!("need --mu > 0 and --gap >= 0");
                }
                let exact = exp_line::optimal_restart(mu, gap);
                let asym = exp_line::optimal_restart_asymptotic(mu, gap);
                // Independent numeric check: minimize the hitting time for a
                // start right of the target (log-transformed for
                // conditioning). A zero gap puts the restart point on the
                // target edge, where the walk itself degenerates; minimize
                // the limiting objective -ln(p(1-p)) instead.
                let objective: Box<dyn Fn(f64) -> f64> = if gap > 0.0 {
                    Box::new(move |p| {
                        ExpLineWalk::new(mu, gap, gap + 1.0, 0.0, p)
                            .unwrap()
                            .hitting_time(gap + 2.0)
                            .finite()
                            .unwrap()
                            .ln()
                    })
                } else {
                    Box::new(|p: f64| -(p.ln() + (1.0 - p).ln()))
                };
                let numeric = golden_min(objective, 1e-9, 1.0 - 1e-9, 1e-10);
                let mut rep = Report::new("example-expline-popt");
                rep.number("mu", mu);
                rep.number("gap", gap);
                rep.number("p_opt", exact);
                rep.number("p_opt_asymptotic", asym);
                rep.number("asymptotic_delta", (exact - asym).abs());
                rep.number("p_opt_numeric", numeric);
                rep.number("numeric_delta", (exact - numeric).abs());
                print!("{}", rep.finish());
            }
            ExplineAction::Curve { mu, a, b, r, x, grid } => {
                if grid < 2 {
                    bail!("--grid must be at least 2");
                }
                let rows = linspace(grid).into_iter().map(|p| {
                    let v = if p == 0.0 || p == 1.0 {
                        // No restart never returns to the interval; full
                        // restart pins the walker to the restart point.
                        f64::INFINITY
                    } else {
                        ExpLineWalk::new(mu, a, b, r, p)
                            .unwrap()
                            .hitting_time(x)
                            .as_f64()
                    };
                    (p, v)
                });
                print!("{}", report::csv_table(("p", "v"), rows));
            }
            ExplineAction::Table {
                mu,
                a,
                b,
                r,
                p,
                xmin,
                xmax,
                points,
            } => {
                if points < 2 {
                    bail!("--points must be at least 2");
                }
                let p = p.unwrap_or_else(|| exp_line::optimal_restart(mu, a - r));
                let walk = ExpLineWalk::new(mu, a, b, r, p)?;
                let lo = xmin.unwrap_or(r - 1.0);
                let hi = xmax.unwrap_or(b + 2.0);
                let rows = (0..points).map(|i| {
                    let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                    (x, walk.discounted_value(x), walk.hitting_time(x).as_f64())
                });
                print!("{}", report::csv_table3(("x", "v1", "v"), rows));
            }
            ExplineAction::Residual { mu, a, b, p } => {
                // Fixed-point residual of the closed-form discounted value,
                // evaluated by quadrature; a direct check of the formula.
                let walk = ExpLineWalk::new(mu, a, b, a - 3.0, p)?;
                let rows = (0..20).map(|i| {
                    let x = a - 0.25 * (i as f64 + 0.5);
                    let len = a - x;
                    let shave = a - len * 1e-13;
                    let panels = 4096;
                    let h = len / panels as f64;
                    let f = |s: f64| {
                        walk.discounted_value((x + s).min(shave)) * mu * (-mu * s).exp()
                    };
                    let mut acc = f(0.0) + f(len);
                    for i in 1..panels {
                        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
                    }
                    let integral = acc * h / 3.0;
                    let overshoot = (1.0 / p) * (-mu * (b - x)).exp();
                    let rhs = 1.0 + (1.0 - p) * (integral + overshoot);
                    (x, walk.discounted_value(x) - rhs)
                });
                print!("{}", report::csv_table(("x", "residual"), rows));
            }
        },
        ExampleCmd::Lattice { action } => match action {
            LatticeAction::Popt { r } => {
                if r == 0 {
                    bail!("--r must be at least 1");
                }
                let exact = lattice::optimal_restart(r);
                let series = lattice::optimal_restart_series(r);
                let numeric = golden_min(
                    |p| LatticeWalk::new(r, p).unwrap().hitting_time_far().ln(),
                    1e-9,
                    1.0 - 1e-9,
                    1e-11,
                );
                let rr = (r as f64) * (r as f64);
                let residual = ((1.0 - exact).powi(2) * (2.0 - exact) / rr - exact).abs();
                let mut rep = Report::new("example-lattice-popt");
                rep.integer("r", r as u64);
                rep.number("p_opt", exact);
                rep.number("cubic_residual", residual);
                rep.number("p_opt_series", series);
                rep.number("series_delta", (exact - series).abs());
                rep.number("p_opt_numeric", numeric);
                rep.number("numeric_delta", (exact - numeric).abs());
                print!("{}", rep.finish());
            }
            LatticeAction::Curve { r, k, grid } => {
                if r == 0 {
                    bail!("--r must be at least 1");
                }
                if grid < 2 {
                    bail!("--grid must be at least 2");
                }
                let rows = linspace(grid).into_iter().map(|p| {
                    let v = if k == 0 {
                        0.0
                    } else if p == 0.0 || p == 1.0 {
                        // Null-recurrent without restart; pinned to the
                        // restart node with full restart.
                        f64::INFINITY
                    } else {
                        LatticeWalk::new(r, p).unwrap().hitting_time(k).as_f64()
                    };
                    (p, v)
                });
                print!("{}", report::csv_table(("p", "v"), rows));
            }
            LatticeAction::Table { r, p, kmax } => {
                if r == 0 {
                    bail!("--r must be at least 1");
                }
                let walk = LatticeWalk::new(r, p)?;
                let rows = (0..=kmax).map(|k| {
                    (
                        k as f64,
                        walk.discounted_value(k),
                        walk.hitting_time(k).as_f64(),
                    )
                });
                print!("{}", report::csv_table3(("k", "v1", "v"), rows));
            }
        },
    }
    Ok(0)
}
