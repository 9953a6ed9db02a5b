//! Seeded synthetic datasets.
//!
//! Sample `i` draws everything it needs (component, covariates, label) from
//! its own ChaCha8 stream `(seed, SAMPLE, i)`, so generation is parallel and
//! still bit-reproducible. The default truth is `k` independent uniform
//! directions on the unit sphere from stream `(seed, TRUTH, 0)`.

mod io;

pub use io::{
    load_dataset, read_csv, read_records, write_csv, write_records, RecordHeader, RECORD_FORMAT,
};

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataSet, LabeledSample};
use crate::error::{Error, Result};
use crate::linalg;
use crate::loss::sigmoid;
use crate::params::ParamSet;
use crate::rng::{in_ball, substream, unit_vector, DOMAIN_SAMPLE, DOMAIN_TRUTH};

/// Rejection attempts per sample before `margin` is declared infeasible.
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    /// `y = ⟨x, θ_z⟩ + σ·N(0,1)`.
    GenerativeMlr,
    /// `y = ±1` with `P(y = 1) = sigmoid(⟨x, θ_z⟩)`.
    GenerativeLogisticMix,
    /// `y = clip(⟨x, θ_z⟩) + a·tanh(‖x‖²/d) + σ·N(0,1)`; the one-sided
    /// bump keeps every component from fitting its region exactly.
    AgnosticPiecewise,
    /// Like `GenerativeMlr`, with Student-t covariates required.
    HeavyTailMlr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Covariate {
    /// `N(0, I_d)`.
    Gaussian,
    /// Independent Student-t coordinates rescaled to unit variance.
    StudentT { dof: f64 },
    /// Uniform in the ball of the given radius.
    UniformBall { radius: f64 },
}

fn default_covariate() -> Covariate {
    Covariate::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub kind: GenKind,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub noise_sigma: f64,
    /// Uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix_weights: Option<Vec<f64>>,
    #[serde(default = "default_covariate")]
    pub covariate: Covariate,
    #[serde(default)]
    pub seed: u64,
    /// Drawn on the unit sphere when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<ParamSet>,
    /// Covariates are redrawn until `min_{l≠z} ⟨x, θ_z − θ_l⟩² ≥ margin`.
    #[serde(default)]
    pub margin: f64,
    /// Amplitude `a` of the agnostic bump.
    #[serde(default)]
    pub perturbation: f64,
    /// Clip level for the agnostic regression part; none when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
}

impl GenSpec {
    pub fn new(kind: GenKind, k: usize, d: usize, n: usize) -> Self {
        Self {
            kind,
            k,
            d,
            n,
            noise_sigma: 0.0,
            mix_weights: None,
            covariate: if kind == GenKind::HeavyTailMlr {
                Covariate::StudentT { dof: 5.0 }
            } else {
                Covariate::Gaussian
            },
            seed: 0,
            truth: None,
            margin: 0.0,
            perturbation: 0.0,
            clip: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.k == 0 || self.d == 0 {
            return bad("k and d must be at least 1".into());
        }
        if self.n < self.k {
            return bad(format!("n = {} is smaller than k = {}", self.n, self.k));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            ));
        }
        if let Some(w) = &self.mix_weights {
            if w.len() != self.k {
                return bad(format!(
                    "mix_weights has {} entries, k = {}",
                    w.len(),
                    self.k
                ));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("mix_weights must be nonnegative".into());
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return bad(format!("mix_weights sum to {total}, not 1"));
            }
        }
        match self.covariate {
            Covariate::Gaussian => {}
            Covariate::StudentT { dof } => {
                if !(dof.is_finite() && dof >= 3.0) {
                    return bad(format!("Student-t dof must be >= 3, got {dof}"));
                }
            }
            Covariate::UniformBall { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
            }
        }
        if self.kind == GenKind::HeavyTailMlr
            && !matches!(self.covariate, Covariate::StudentT { .. })
        {
            return bad("heavy-tail-mlr needs student-t covariates".into());
        }
        if let Some(t) = &self.truth {
            if t.k() != self.k || t.dim() != self.d {
                return bad(format!(
                    "truth is {}x{}, spec is {}x{}",
                    t.k(),
                    t.dim(),
                    self.k,
                    self.d
                ));
            }
        }
        if !(self.margin.is_finite() && self.margin >= 0.0) {
            return bad(format!("margin must be >= 0, got {}", self.margin));
        }
        if !(self.perturbation.is_finite() && self.perturbation >= 0.0) {
            return bad(format!(
                "perturbation must be >= 0, got {}",
                self.perturbation
            ));
        }
        if let Some(c) = self.clip {
            if c.is_nan() || c <= 0.0 {
                return bad(format!("clip must be positive, got {c}"));
            }
        }
        Ok(())
    }

    /// The configured truth, or the seeded default.
    pub fn resolve_truth(&self) -> Result<ParamSet> {
        if let Some(t) = &self.truth {
            return Ok(t.clone());
        }
        let mut rng = substream(self.seed, DOMAIN_TRUTH, 0);
        ParamSet::new((0..self.k).map(|_| unit_vector(&mut rng, self.d)).collect())
    }
}

/// A generated dataset together with the generating component of each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub dataset: DataSet,
    pub truth: ParamSet,
    pub labels: Vec<usize>,
}

pub fn generate(spec: &GenSpec) -> Result<(DataSet, ParamSet)> {
    let g = generate_labeled(spec)?;
    Ok((g.dataset, g.truth))
}

pub fn generate_labeled(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let truth = spec.resolve_truth()?;
    let weights = spec
        .mix_weights
        .clone()
        .unwrap_or_else(|| vec![1.0 / spec.k as f64; spec.k]);
    let picker = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidArgument(format!("mix_weights: {e}")))?;
    let student = match spec.covariate {
        Covariate::StudentT { dof } => Some(
            StudentT::new(dof).map_err(|e| Error::InvalidArgument(format!("student-t: {e}")))?,
        ),
        _ => None,
    };

    let drawn: Vec<(LabeledSample, usize)> = (0..spec.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(spec.seed, DOMAIN_SAMPLE, i as u64);
            let z = picker.sample(&mut rng);
            let x = draw_covariate(spec, &truth, z, student.as_ref(), &mut rng)?;
            let y = draw_label(spec, truth.component(z), &x, &mut rng);
            Ok((LabeledSample::new(x, y), z))
        })
        .collect::<Result<_>>()?;
    let (samples, labels): (Vec<_>, Vec<_>) = drawn.into_iter().unzip();
    Ok(Generated {
        dataset: DataSet::new(samples)?,
        truth,
        labels,
    })
}

fn draw_covariate<R: Rng>(
    spec: &GenSpec,
    truth: &ParamSet,
    z: usize,
    student: Option<&StudentT<f64>>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for _ in 0..MAX_ATTEMPTS {
        let x: Vec<f64> = match (spec.covariate, student) {
            (Covariate::StudentT { dof }, Some(t)) => {
                let scale = ((dof - 2.0) / dof).sqrt();
                (0..spec.d).map(|_| scale * t.sample(rng)).collect()
            }
            (Covariate::UniformBall { radius }, _) => in_ball(rng, spec.d, radius),
            _ => (0..spec.d).map(|_| StandardNormal.sample(rng)).collect(),
        };
        if spec.margin == 0.0 || separation_gap(truth, z, &x) >= spec.margin {
            return Ok(x);
        }
    }
    Err(Error::InvalidArgument(format!(
        "margin {} rejected {MAX_ATTEMPTS} covariate draws in a row",
        spec.margin
    )))
}

/// `min_{l≠z} ⟨x, θ_z − θ_l⟩²`, `+∞` when `k = 1`.
fn separation_gap(truth: &ParamSet, z: usize, x: &[f64]) -> f64 {
    let own = linalg::dot(x, truth.component(z));
    truth
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != z)
        .map(|(_, t)| (own - linalg::dot(x, t)).powi(2))
        .fold(f64::INFINITY, f64::min)
}

fn draw_label<R: Rng>(spec: &GenSpec, theta: &[f64], x: &[f64], rng: &mut R) -> f64 {
    let signal = linalg::dot(x, theta);
    let noise: f64 = if spec.noise_sigma > 0.0 {
        spec.noise_sigma * Distribution::<f64>::sample(&StandardNormal, rng)
    } else {
        0.0
    };
    match spec.kind {
        GenKind::GenerativeMlr | GenKind::HeavyTailMlr => signal + noise,
        GenKind::GenerativeLogisticMix => {
            if rng.random::<f64>() < sigmoid(signal) {
                1.0
            } else {
                -1.0
            }
        }
        GenKind::AgnosticPiecewise => {
            let clipped = match spec.clip {
                Some(c) => signal.clamp(-c, c),
                None => signal,
            };
            let bump = spec.perturbation * (linalg::norm_sq(x) / spec.d as f64).tanh();
            clipped + bump + noise
        }
    }
}
