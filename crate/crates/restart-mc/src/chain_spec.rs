//! Serde schema for chain description files: state labels, transition
//! matrix, restart distribution and probability, and the target set by label
//! or index. The CLI reads these from TOML files; the browser demo accepts
//! the same text. All kernel invariants are enforced on validation with
//! field-level messages.

use nalgebra::DVector;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kernel::{FiniteKernel, RestartChain, TargetSet};

pub const SCHEMA_VERSION: u32 = 1;

/// Raw deserialized chain description, prior to validation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub schema_version: u32,
    /// Human-readable state labels; the matrix and vectors follow this order.
    pub states: Vec<String>,
    /// Row-major transition matrix of the base chain.
    #[serde(rename = "P")]
    pub transition: Vec<Vec<f64>>,
    /// Restart distribution.
    pub nu: Vec<f64>,
    /// Restart probability, strictly inside (0, 1).
    pub p: f64,
    /// Target states, by label or by index.
    #[serde(rename = "H")]
    pub target: Vec<StateRef>,
}

/// A state referenced either by its label or by its index.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Label(String),
}

/// A fully validated chain ready for the solvers.
#[derive(Debug, Clone)]
pub struct ValidatedChain {
    pub labels: Vec<String>,
    pub chain: RestartChain,
    pub target: TargetSet,
}

impl ChainSpec {
    pub fn validate(self) -> Result<ValidatedChain> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema {
                version: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let n = self.states.len();
        if n == 0 {
            return Err(Error::BadDistribution {
                reason: "states list is empty".into(),
            });
        }
        if self.transition.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.transition.len(),
            });
        }
        if self.nu.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.nu.len(),
            });
        }
        let kernel = FiniteKernel::from_rows(&self.transition)?;
        let chain = RestartChain::new(kernel, DVector::from_row_slice(&self.nu), self.p)?;

        let mut indices = Vec::with_capacity(self.target.len());
        for r in &self.target {
            indices.push(match r {
                StateRef::Index(i) => *i,
                StateRef::Label(l) => self
                    .states
                    .iter()
                    .position(|s| s == l)
                    .ok_or_else(|| Error::UnknownState { label: l.clone() })?,
            });
        }
        let target = TargetSet::new(indices, n)?;
        Ok(ValidatedChain {
            labels: self.states,
            chain,
            target,
        })
    }
}

impl ValidatedChain {
    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState {
                label: label.to_string(),
            })
    }
}
