//! Stochastic kernels on a finite state space: validation, the restarted
//! kernel `p*nu + (1-p)*P`, and the taboo kernel that removes all mass
//! entering a target set.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance for row sums and distribution mass. Tight enough to catch
/// modeling bugs, loose enough for decimal-literal inputs.
pub const MASS_TOL: f64 = 1e-12;

/// A row-stochastic transition matrix over states `0..n`.
///
/// Every entry lies in `[0, 1]` and every row sums to one within
/// [`MASS_TOL`]. Substochastic rows are a hard error, never renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    rows: DMatrix<f64>,
}

impl FiniteKernel {
    /// Validates and wraps a square matrix as a transition kernel.
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.nrows() != rows.ncols() || rows.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: rows.nrows(),
                cols: rows.ncols(),
            });
        }
        for i in 0..rows.nrows() {
            let mut sum = 0.0;
            for j in 0..rows.ncols() {
                let v = rows[(i, j)];
                if !(v >= 0.0) {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                sum += v;
            }
            if !sum.is_finite() || (sum - 1.0).abs() > MASS_TOL {
                return Err(Error::RowSumViolation {
                    row: i,
                    sum,
                    deviation: sum - 1.0,
                });
            }
        }
        Ok(Self { rows })
    }

    /// Convenience constructor from nested row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: r.len(),
                });
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: DMatrix::identity(n, n),
        }
    }

    /// Trusted constructor for matrices that are stochastic by construction.
    pub(crate) fn new_unchecked(rows: DMatrix<f64>) -> Self {
        debug_assert!((0..rows.nrows()).all(|i| (rows.row(i).sum() - 1.0).abs() < 1e-9));
        Self { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    /// Taboo kernel with respect to `target`: all mass entering the target is
    /// removed (target columns zeroed). Rows indexed by target states are
    /// irrelevant to the downstream solvers and are zeroed by the same
    /// convention.
    pub fn taboo(&self, target: &TargetSet) -> DMatrix<f64> {
        let mut t = self.rows.clone();
        for &j in target.indices() {
            t.column_mut(j).fill(0.0);
            t.row_mut(j).fill(0.0);
        }
        t
    }
}

/// Total taboo mass still alive after `t` steps, per starting state:
/// component `x` is the mass of row `x` of the `t`-th taboo-kernel power.
/// States inside the target carry zero for every `t` (the `t = 0` power is
/// the indicator of the complement).
pub fn survival_mass(taboo: &DMatrix<f64>, target: &TargetSet, t: usize) -> DVector<f64> {
    let n = taboo.nrows();
    let mut mass = DVector::from_fn(n, |i, _| if target.contains(i) { 0.0 } else { 1.0 });
    for _ in 0..t {
        mass = taboo * mass;
    }
    mass
}

/// A nonempty set of target states, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    indices: Vec<usize>,
    mask: Vec<bool>,
}

impl TargetSet {
    pub fn new(indices: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= n) {
            return Err(Error::TargetOutOfRange { index: bad, n });
        }
        let mut mask = vec![false; n];
        for &i in &v {
            mask[i] = true;
        }
        Ok(Self { indices: v, mask })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// States outside the target, in increasing order.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| !self.mask[i]).collect()
    }
}

/// A base kernel together with a restart distribution `nu` and a restart
/// probability `p` strictly inside `(0, 1)`.
///
/// At every transition the chain jumps to a `nu`-distributed state with
/// probability `p` and otherwise moves by the base kernel. The boundary
/// values `p = 0` and `p = 1` are handled by dedicated closed forms in the
/// `optimize` module and are deliberately rejected here.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartChain {
    kernel: FiniteKernel,
    nu: DVector<f64>,
    p: f64,
}

impl RestartChain {
    pub fn new(kernel: FiniteKernel, nu: DVector<f64>, p: f64) -> Result<Self> {
        if nu.len() != kernel.n() {
            return Err(Error::DimensionMismatch {
                expected: kernel.n(),
                actual: nu.len(),
            });
        }
        if let Some((i, &v)) = nu.iter().enumerate().find(|(_, &v)| !(v >= 0.0)) {
            return Err(Error::BadDistribution {
                reason: format!("entry {i} = {v} is negative"),
            });
        }
        let sum: f64 = nu.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::BadDistribution {
                reason: format!("mass sums to {sum}"),
            });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::BadRestartProbability { p });
        }
        Ok(Self { kernel, nu, p })
    }

    pub fn kernel(&self) -> &FiniteKernel {
        &self.kernel
    }

    pub fn nu(&self) -> &DVector<f64> {
        &self.nu
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.kernel.n()
    }

    /// The restarted kernel: entry `(i, j)` equals
    /// `p * nu(j) + (1 - p) * P(i, j)`. Row-stochastic as a convex
    /// combination of distributions.
    pub fn restarted(&self) -> FiniteKernel {
        let n = self.n();
        let p = self.p;
        let base = self.kernel.matrix();
        let rows = DMatrix::from_fn(n, n, |i, j| p * self.nu[j] + (1.0 - p) * base[(i, j)]);
        FiniteKernel::new_unchecked(rows)
    }
}
