//! Labeled samples and index-addressable datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && linalg::all_finite(&self.x)
    }
}

/// A collection of samples sharing one covariate dimension.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataSet {
    samples: Vec<LabeledSample>,
}

impl DataSet {
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        if let Some(first) = samples.first() {
            let d = first.dim();
            for s in &samples {
                crate::error::ensure_dim(d, s.dim())?;
                if !s.is_finite() {
                    return Err(Error::NonFinite("sample"));
                }
            }
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Covariate dimension, `None` for an empty set.
    pub fn dim(&self) -> Option<usize> {
        self.samples.first().map(LabeledSample::dim)
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn get(&self, index: usize) -> Option<&LabeledSample> {
        self.samples.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSample> {
        self.samples.iter()
    }

    /// New dataset holding the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> DataSet {
        DataSet {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn max_norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| linalg::norm_sq(&s.x))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_label(&self) -> f64 {
        self.samples.iter().map(|s| s.y.abs()).fold(0.0, f64::max)
    }

    pub fn into_samples(self) -> Vec<LabeledSample> {
        self.samples
    }
}

impl<'a> IntoIterator for &'a DataSet {
    type Item = &'a LabeledSample;
    type IntoIter = std::slice::Iter<'a, LabeledSample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}
