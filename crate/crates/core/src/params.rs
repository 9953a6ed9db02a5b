use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::linalg;

/// Ordered list of `k ≥ 1` parameter vectors sharing one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ParamSet {
    thetas: Vec<Vec<f64>>,
}

impl ParamSet {
    pub fn new(thetas: Vec<Vec<f64>>) -> Result<Self> {
        let first = thetas.first().ok_or(Error::Empty("parameter set"))?;
        let d = first.len();
        if d == 0 {
            return Err(Error::Empty("parameter vector"));
        }
        for t in &thetas {
            ensure_dim(d, t.len())?;
            if !linalg::all_finite(t) {
                return Err(Error::NonFinite("parameter vector"));
            }
        }
        Ok(Self { thetas })
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    pub fn dim(&self) -> usize {
        self.thetas[0].len()
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.thetas[j]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<f64>> {
        self.thetas.iter()
    }

    /// Reorders components so that component `j` of the result is
    /// component `order[j]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> ParamSet {
        debug_assert_eq!(order.len(), self.k());
        ParamSet {
            thetas: order.iter().map(|&j| self.thetas[j].clone()).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.thetas
            .iter()
            .map(|t| linalg::norm(t))
            .fold(0.0, f64::max)
    }

    pub(crate) fn from_unchecked(thetas: Vec<Vec<f64>>) -> Self {
        Self { thetas }
    }
}

impl TryFrom<Vec<Vec<f64>>> for ParamSet {
    type Error = Error;

    fn try_from(thetas: Vec<Vec<f64>>) -> Result<Self> {
        ParamSet::new(thetas)
    }
}

impl From<ParamSet> for Vec<Vec<f64>> {
    fn from(p: ParamSet) -> Self {
        p.thetas
    }
}
