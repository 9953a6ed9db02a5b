//! Gradient EM: at each iteration compute soft-min responsibilities at the
//! current parameters, then move every component along its
//! responsibility-weighted mean gradient.
//!
//! With resampling on, the data is shuffled once and cut into `T` disjoint
//! folds of `⌊n/T⌋` samples; iteration `t` only sees fold `t`. Leftover
//! samples are never used.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::align::align;
use crate::data::DataSet;
use crate::error::{Error, Result};
use crate::linalg;
use crate::loss::LossModel;
use crate::params::ParamSet;
use crate::rng::{in_ball, substream, unit_vector, DOMAIN_INIT, DOMAIN_PARTITION};
use crate::softmin::{empirical_loss, soft_min_weights_into, SoftMinConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig {
    pub step_size: f64,
    pub iterations: usize,
    pub softmin: SoftMinConfig,
    pub resample: bool,
    pub seed: u64,
}

impl EmConfig {
    /// `γ = 1/(2M)` from the model's certified smoothness.
    pub fn default_step_size(model: &LossModel) -> Result<f64> {
        Ok(1.0 / (2.0 * model.curvature()?.smoothness))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step size must be finite and nonnegative, got {}",
                self.step_size
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "iterations must be at least 1".into(),
            ));
        }
        if self.resample && n < self.iterations {
            return Err(Error::Partition {
                n,
                folds: self.iterations,
            });
        }
        Ok(())
    }
}

/// Seeded shuffle of `0..n` cut into `folds` disjoint blocks of `⌊n/folds⌋`.
pub fn partition_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds == 0 || n < folds {
        return Err(Error::Partition { n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, DOMAIN_PARTITION, 0));
    let size = n / folds;
    Ok(order
        .chunks_exact(size)
        .take(folds)
        .map(<[usize]>::to_vec)
        .collect())
}

pub fn partition_dataset(dataset: &DataSet, folds: usize, seed: u64) -> Result<Vec<DataSet>> {
    Ok(partition_indices(dataset.len(), folds, seed)?
        .iter()
        .map(|idx| dataset.select(idx))
        .collect())
}

/// One gradient EM update on `fold`. Responsibilities come from the incoming
/// parameters and all components move simultaneously.
pub fn gradient_em_step(
    params: &ParamSet,
    fold: &DataSet,
    model: &LossModel,
    config: &EmConfig,
) -> Result<ParamSet> {
    if fold.is_empty() {
        return Err(Error::Empty("fold"));
    }
    let k = params.k();
    let d = params.dim();
    model.check_dataset(fold, d)?;

    let mut acc = vec![vec![0.0; d]; k];
    let mut losses = vec![0.0; k];
    let mut weights = vec![0.0; k];
    for sample in fold {
        for (f, theta) in losses.iter_mut().zip(params.iter()) {
            *f = model.value_unchecked(sample, theta);
        }
        soft_min_weights_into(&losses, config.softmin, &mut weights)?;
        for (j, &p) in weights.iter().enumerate() {
            if p != 0.0 {
                let g = model.gradient_unchecked(sample, params.component(j));
                linalg::axpy(&mut acc[j], p, &g);
            }
        }
    }

    let scale = config.step_size / fold.len() as f64;
    let mut next = Vec::with_capacity(k);
    for (theta, a) in params.iter().zip(&acc) {
        if !linalg::all_finite(a) {
            return Err(Error::NonFinite("weighted gradient"));
        }
        let updated: Vec<f64> = theta.iter().zip(a).map(|(t, g)| t - scale * g).collect();
        if !linalg::all_finite(&updated) {
            return Err(Error::NonFinite("updated parameters"));
        }
        next.push(updated);
    }
    Ok(ParamSet::from_unchecked(next))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    /// Aligned distance per reference component; empty without a reference.
    pub distances: Vec<f64>,
    /// Estimated component matched to each reference component.
    pub alignment: Vec<usize>,
    /// Empirical soft-min loss on the full dataset.
    pub loss: f64,
}

impl IterationRecord {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    pub fitted_rate: Option<f64>,
    pub fitted_floor: Option<f64>,
}

impl ConvergenceTrace {
    pub fn max_distances(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(IterationRecord::max_distance)
            .collect()
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("trace always holds t = 0")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmRun {
    pub params: ParamSet,
    pub trace: ConvergenceTrace,
}

/// Least-squares fit of `ln d_t` against `t` over the points with
/// `d_t > 2·d_final`, or over the whole trace when it never got that far.
/// Returns `(rate, floor)`; `rate` is `e^slope` and is absent when the fit
/// does not decay.
/// `floor` is the mean distance over the remaining plateau points.
pub fn fit_geometric_rate(distances: &[f64]) -> (Option<f64>, Option<f64>) {
    let Some(&last) = distances.last() else {
        return (None, None);
    };
    let cutoff = 2.0 * last;
    type Points = Vec<(usize, f64)>;
    let (pre, plateau): (Points, Points) = distances
        .iter()
        .copied()
        .enumerate()
        .partition(|&(_, d)| d > cutoff && d > 0.0);
    let floor = if plateau.is_empty() {
        None
    } else {
        Some(plateau.iter().map(|&(_, d)| d).sum::<f64>() / plateau.len() as f64)
    };
    let pre: Points = if pre.len() >= 2 {
        pre
    } else {
        distances
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, d)| d > 0.0)
            .collect()
    };
    if pre.len() < 2 {
        return (None, floor);
    }
    let n = pre.len() as f64;
    let mean_t = pre.iter().map(|&(t, _)| t as f64).sum::<f64>() / n;
    let mean_y = pre.iter().map(|&(_, d)| d.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, d) in &pre {
        let dt = t as f64 - mean_t;
        sxy += dt * (d.ln() - mean_y);
        sxx += dt * dt;
    }
    let rate = (sxy / sxx).exp();
    (if rate < 1.0 { Some(rate) } else { None }, floor)
}

/// Runs `config.iterations` gradient EM steps from `init`.
///
/// When `reference` is given, each record holds the component distances
/// under the best matching permutation, and the trace carries a fitted
/// geometric rate and floor for the max-component distance.
pub fn run_gradient_em(
    init: &ParamSet,
    dataset: &DataSet,
    model: &LossModel,
    config: &EmConfig,
    reference: Option<&ParamSet>,
) -> Result<EmRun> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    config.validate(dataset.len())?;
    model.check_dataset(dataset, init.dim())?;
    let folds = if config.resample {
        Some(partition_dataset(dataset, config.iterations, config.seed)?)
    } else {
        None
    };

    let record = |t: usize, params: &ParamSet| -> Result<IterationRecord> {
        let loss = empirical_loss(params, dataset, model, config.softmin)?;
        let (distances, alignment) = match reference {
            Some(r) => {
                let a = align(params, r)?;
                (a.distances, a.order)
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(IterationRecord {
            t,
            distances,
            alignment,
            loss,
        })
    };

    let mut params = init.clone();
    let mut records = Vec::with_capacity(config.iterations + 1);
    records.push(record(0, &params)?);
    for t in 0..config.iterations {
        let fold = folds.as_ref().map_or(dataset, |f| &f[t]);
        params = gradient_em_step(&params, fold, model, config)?;
        records.push(record(t + 1, &params)?);
    }

    let (fitted_rate, fitted_floor) = if reference.is_some() {
        let d: Vec<f64> = records.iter().map(IterationRecord::max_distance).collect();
        fit_geometric_rate(&d)
    } else {
        (None, None)
    };
    Ok(EmRun {
        params,
        trace: ConvergenceTrace {
            records,
            fitted_rate,
            fitted_floor,
        },
    })
}

/// Starts every component at distance exactly `c_ini‖θ*_j‖` from the
/// reference, in a uniformly random direction from stream `(seed, INIT, 0)`.
pub fn perturb_reference(reference: &ParamSet, c_ini: f64, seed: u64) -> Result<ParamSet> {
    if !(c_ini.is_finite() && c_ini >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c_ini must be >= 0, got {c_ini}"
        )));
    }
    let mut rng = substream(seed, DOMAIN_INIT, 0);
    ParamSet::new(
        reference
            .iter()
            .map(|t| {
                let r = c_ini * linalg::norm(t);
                let u = unit_vector(&mut rng, t.len());
                t.iter().zip(u).map(|(a, b)| a + r * b).collect()
            })
            .collect(),
    )
}

/// `k` independent uniform points in the ball of the given radius.
pub fn random_ball_init(k: usize, d: usize, radius: f64, seed: u64) -> Result<ParamSet> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be >= 0, got {radius}"
        )));
    }
    let mut rng = substream(seed, DOMAIN_INIT, 1);
    ParamSet::new((0..k).map(|_| in_ball(&mut rng, d, radius)).collect())
}
