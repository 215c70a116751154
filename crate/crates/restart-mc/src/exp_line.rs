//! Rightward random walk on the line with i.i.d. exponential increments,
//! restarted to a fixed point, targeting an interval `[a, b]`.
//!
//! Without restart the walk drifts right forever and the expected hitting
//! time of the interval is infinite from any start outside it; restarting
//! from a base point left of the interval makes it finite, and the optimal
//! restart probability has a closed form.

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

/// Parameters of the restarted exponential line walk.
///
/// Increments are exponential with rate `mu` (mean `1/mu`), the target is
/// `[a, b]`, and each transition restarts the walker to `restart` with
/// probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpLineWalk {
    mu: f64,
    a: f64,
    b: f64,
    restart: f64,
    p: f64,
}

impl ExpLineWalk {
    pub fn new(mu: f64, a: f64, b: f64, restart: f64, p: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::BadDistribution {
                reason: format!("increment rate must be positive, got {mu}"),
            });
        }
        if !(a < b) {
            return Err(Error::BadDistribution {
                reason: format!("target interval requires a < b, got [{a}, {b}]"),
            });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadRestartProbability { p });
        }
        Ok(Self { mu, a, b, restart, p })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn restart(&self) -> f64 {
        self.restart
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn in_target(&self, x: f64) -> bool {
        (self.a..=self.b).contains(&x)
    }

    /// Expected discounted time (discount `1 - p`) the base walk spends
    /// before first landing in `[a, b]`, in closed form.
    ///
    /// Zero inside the target; exactly `1/p` to the right of `b` (the walk
    /// never returns); below `a` the crossing may jump over the interval,
    /// which the exponential overshoot makes explicit.
    pub fn discounted_value(&self, x: f64) -> f64 {
        let Self { mu, a, b, p, .. } = *self;
        if self.in_target(x) {
            0.0
        } else if x > b {
            1.0 / p
        } else {
            1.0 / p - ((1.0 - p) / p) * (1.0 - (-mu * (b - a)).exp()) * (-mu * (a - x) * p).exp()
        }
    }

    /// Expected hitting time of `[a, b]` for the restarted walk, in closed
    /// form. Requires the restart point strictly left of the interval.
    ///
    /// To the right of `b` the value does not depend on the start: the walk
    /// is lost until the first restart anyway.
    pub fn hitting_time(&self, x: f64) -> ExtReal {
        let Self { mu, a, b, restart, p } = *self;
        assert!(
            restart < a,
            "closed form requires the restart point left of the target"
        );
        if self.in_target(x) {
            return ExtReal::ZERO;
        }
        let interval = 1.0 - (-mu * (b - a)).exp();
        let reach = (-mu * (a - restart) * p).exp();
        if x > b {
            ExtReal::Finite(1.0 / (interval * p * (1.0 - p) * reach))
        } else {
            let numer = 1.0 - (1.0 - p) * interval * (-mu * (a - x) * p).exp();
            ExtReal::Finite(numer / (p * (1.0 - p) * interval * reach))
        }
    }
}

/// Optimal restart probability for starts right of the target:
/// `2 / (2 + mu*gap + sqrt(4 + (mu*gap)^2))` where `gap = a - restart`.
///
/// Depends only on the mean step and the distance from the restart point to
/// the near edge of the target, not on the target width.
pub fn optimal_restart(mu: f64, gap: f64) -> f64 {
    assert!(mu > 0.0 && gap >= 0.0);
    let s = mu * gap;
    2.0 / (2.0 + s + (4.0 + s * s).sqrt())
}

/// Leading-order approximation `1 / (1 + mu*gap)` of the optimal restart
/// probability, valid when `mu*gap` is large.
pub fn optimal_restart_asymptotic(mu: f64, gap: f64) -> f64 {
    assert!(mu > 0.0 && gap >= 0.0);
    1.0 / (1.0 + mu * gap)
}
