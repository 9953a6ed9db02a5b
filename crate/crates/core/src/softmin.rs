//! Soft-min responsibilities and the soft-min mixture loss
//! `ℓ = Σ_j p_j F_j`, `p_j ∝ exp(−β F_j)`.
//!
//! Weights are computed after subtracting the smallest component loss, so
//! `β·F` never overflows. `β = 0` gives the uniform average and
//! `β = ∞` the hard minimum (ties go to the lowest index).

use std::fmt;

use rayon::prelude::*;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::{DataSet, LabeledSample};
use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::params::ParamSet;

/// Inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl Beta {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "beta must be nonnegative, got {value}"
            )));
        }
        Ok(if value.is_infinite() {
            Beta::Infinite
        } else {
            Beta::Finite(value)
        })
    }

    /// `f64::INFINITY` for the hard-min limit.
    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Beta::Finite(b) => Some(b),
            Beta::Infinite => None,
        }
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BetaVisitor;

        impl Visitor<'_> for BetaVisitor {
            type Value = Beta;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Beta, E> {
                Beta::new(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Beta, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Beta, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Beta, E> {
                match v {
                    "inf" | "infinity" | "INFINITY" => Ok(Beta::Infinite),
                    other => other
                        .parse::<f64>()
                        .map_err(|_| E::custom(format!("invalid beta {other:?}")))
                        .and_then(|b| self.visit_f64(b)),
                }
            }
        }

        d.deserialize_any(BetaVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieRule {
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftMinConfig {
    pub beta: Beta,
    pub tie_rule: TieRule,
}

impl SoftMinConfig {
    pub fn new(beta: Beta) -> Self {
        Self {
            beta,
            tie_rule: TieRule::LowestIndex,
        }
    }

    pub fn finite(beta: f64) -> Result<Self> {
        Ok(Self::new(Beta::new(beta)?))
    }

    pub fn hard_min() -> Self {
        Self::new(Beta::Infinite)
    }
}

fn argmin(losses: &[f64]) -> usize {
    // Strict `<` keeps the first index on ties.
    let mut best = 0;
    for (j, &f) in losses.iter().enumerate().skip(1) {
        if f < losses[best] {
            best = j;
        }
    }
    best
}

/// Writes the soft-min weights for `losses` into `out`.
pub fn soft_min_weights_into(losses: &[f64], config: SoftMinConfig, out: &mut [f64]) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::Empty("component losses"));
    }
    if losses.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("component losses"));
    }
    debug_assert_eq!(out.len(), losses.len());
    match config.beta {
        Beta::Infinite => {
            out.fill(0.0);
            match config.tie_rule {
                TieRule::LowestIndex => out[argmin(losses)] = 1.0,
            }
        }
        Beta::Finite(beta) => {
            let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
            let mut total = 0.0;
            for (o, &f) in out.iter_mut().zip(losses) {
                *o = (-beta * (f - min)).exp();
                total += *o;
            }
            // total ≥ 1 because the minimizing component contributes exp(0).
            for o in out.iter_mut() {
                *o /= total;
            }
        }
    }
    Ok(())
}

pub fn soft_min_weights(losses: &[f64], config: SoftMinConfig) -> Result<Vec<f64>> {
    let mut out = vec![0.0; losses.len()];
    soft_min_weights_into(losses, config, &mut out)?;
    Ok(out)
}

/// `Σ_j p_j F_j` for precomputed component losses.
pub fn soft_min_combine(losses: &[f64], config: SoftMinConfig) -> Result<f64> {
    let w = soft_min_weights(losses, config)?;
    Ok(w.iter().zip(losses).map(|(p, f)| p * f).sum())
}

pub(crate) fn component_losses(
    params: &ParamSet,
    sample: &LabeledSample,
    model: &LossModel,
) -> Result<Vec<f64>> {
    params
        .iter()
        .map(|theta| model.value(sample, theta))
        .collect()
}

pub fn soft_min_loss(
    params: &ParamSet,
    sample: &LabeledSample,
    model: &LossModel,
    config: SoftMinConfig,
) -> Result<f64> {
    soft_min_combine(&component_losses(params, sample, model)?, config)
}

/// Mean soft-min loss over the dataset.
pub fn empirical_loss(
    params: &ParamSet,
    dataset: &DataSet,
    model: &LossModel,
    config: SoftMinConfig,
) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut total = 0.0;
    for s in dataset {
        total += soft_min_loss(params, s, model, config)?;
    }
    Ok(total / dataset.len() as f64)
}

/// `n × k` matrix of soft-min responsibilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    k: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn compute(
        params: &ParamSet,
        dataset: &DataSet,
        model: &LossModel,
        config: SoftMinConfig,
    ) -> Result<Self> {
        let k = params.k();
        let rows: Vec<Vec<f64>> = dataset
            .samples()
            .par_iter()
            .map(|s| soft_min_weights(&component_losses(params, s, model)?, config))
            .collect::<Result<_>>()?;
        Ok(Self {
            n: rows.len(),
            k,
            weights: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.k + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks(self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossFamily;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cfg(beta: f64) -> SoftMinConfig {
        SoftMinConfig::finite(beta).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(soft_min_weights(&[7.3], cfg(4.0)).unwrap(), vec![1.0]);
        assert_eq!(
            soft_min_weights(&[7.3], SoftMinConfig::hard_min()).unwrap(),
            vec![1.0]
        );
        let w = soft_min_weights(&[0.0, 3f64.ln()], cfg(1.0)).unwrap();
        assert_abs_diff_eq!(w[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.25, epsilon = 1e-15);
        let w = soft_min_weights(&[5.0, 1.0, 9.0], cfg(0.0)).unwrap();
        for p in w {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_eq!(
            soft_min_weights(&[2.0, 1.0, 1.0], SoftMinConfig::hard_min()).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn loss_examples() {
        assert_eq!(soft_min_combine(&[2.5, 2.5], cfg(3.0)).unwrap(), 2.5);
        assert_abs_diff_eq!(
            soft_min_combine(&[0.0, 3f64.ln()], cfg(1.0)).unwrap(),
            0.25 * 3f64.ln(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(0.25 * 3f64.ln(), 0.27465, epsilon = 1e-5);
        assert_eq!(
            soft_min_combine(&[2.0, 1.0, 1.0], SoftMinConfig::hard_min()).unwrap(),
            1.0
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            soft_min_weights(&[], cfg(1.0)),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            soft_min_weights(&[1.0, f64::NAN], cfg(1.0)),
            Err(Error::NonFinite(_))
        ));
        assert!(Beta::new(-1.0).is_err());
        assert!(Beta::new(f64::NAN).is_err());
        assert_eq!(Beta::new(f64::INFINITY).unwrap(), Beta::Infinite);
    }

    #[test]
    fn overflow_safety() {
        let w = soft_min_weights(&[1e300, 1e300 * 0.5, 3.0], cfg(1.0)).unwrap();
        assert!(w.iter().all(|p| p.is_finite()));
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_eq!(w[2], 1.0);
    }

    #[test]
    fn beta_serde() {
        #[derive(Deserialize, Serialize)]
        struct W {
            beta: Beta,
        }
        let w: W = serde_json::from_str(r#"{"beta":"inf"}"#).unwrap();
        assert_eq!(w.beta, Beta::Infinite);
        let w: W = serde_json::from_str(r#"{"beta":10}"#).unwrap();
        assert_eq!(w.beta, Beta::Finite(10.0));
        assert!(serde_json::from_str::<W>(r#"{"beta":-1}"#).is_err());
        assert_eq!(
            serde_json::to_string(&W {
                beta: Beta::Infinite
            })
            .unwrap(),
            r#"{"beta":"inf"}"#
        );
    }

    #[test]
    fn empirical_loss_cases() {
        let model = LossModel::new(LossFamily::RidgeSquared, 0.1).unwrap();
        let s = LabeledSample::new(vec![1.0, -2.0], 0.5);
        let params = ParamSet::new(vec![vec![0.3, 0.1], vec![-0.2, 0.4]]).unwrap();
        let twice = DataSet::new(vec![s.clone(), s.clone()]).unwrap();
        let c = cfg(2.0);
        assert_abs_diff_eq!(
            empirical_loss(&params, &twice, &model, c).unwrap(),
            soft_min_loss(&params, &s, &model, c).unwrap(),
            epsilon = 1e-15
        );

        let single = ParamSet::new(vec![vec![0.3, 0.1]]).unwrap();
        let data = DataSet::new(vec![
            s.clone(),
            LabeledSample::new(vec![0.0, 1.0], -1.0),
            LabeledSample::new(vec![2.0, 1.0], 3.0),
        ])
        .unwrap();
        let mean_base: f64 = data
            .iter()
            .map(|s| model.value(s, single.component(0)).unwrap())
            .sum::<f64>()
            / 3.0;
        assert_abs_diff_eq!(
            empirical_loss(&single, &data, &model, c).unwrap(),
            mean_base,
            epsilon = 1e-15
        );
        assert!(matches!(
            empirical_loss(&single, &DataSet::default(), &model, c),
            Err(Error::Empty(_))
        ));
    }

    fn losses(k: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, k)
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(f in losses(1..8), beta in 0.0f64..100.0) {
            let w = soft_min_weights(&f, cfg(beta)).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(w.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }

        #[test]
        fn shift_invariance(f in losses(1..8), beta in 0.0f64..20.0, c in -100.0f64..100.0) {
            let w = soft_min_weights(&f, cfg(beta)).unwrap();
            let shifted: Vec<f64> = f.iter().map(|x| x + c).collect();
            let ws = soft_min_weights(&shifted, cfg(beta)).unwrap();
            for (a, b) in w.iter().zip(&ws) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn argmin_weight_sharpens(f in losses(2..6), b1 in 0.0f64..30.0, db in 0.0f64..30.0) {
            let j = argmin(&f);
            prop_assume!(f.iter().enumerate().all(|(l, &x)| l == j || x > f[j]));
            let lo = soft_min_weights(&f, cfg(b1)).unwrap()[j];
            let hi = soft_min_weights(&f, cfg(b1 + db)).unwrap()[j];
            prop_assert!(hi >= lo - 1e-15);
        }

        #[test]
        fn large_beta_matches_hard_min(f in losses(1..6)) {
            let mut sorted = f.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] >= 0.01));
            let soft = soft_min_weights(&f, cfg(1e6)).unwrap();
            let hard = soft_min_weights(&f, SoftMinConfig::hard_min()).unwrap();
            for (a, b) in soft.iter().zip(&hard) {
                prop_assert!((a - b).abs() <= 1e-6);
            }
        }

        #[test]
        fn loss_is_bracketed(f in prop::collection::vec(0.0f64..50.0, 1..8), beta in 0.0f64..50.0) {
            let l = soft_min_combine(&f, cfg(beta)).unwrap();
            let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(l >= lo - 1e-12 && l <= hi + 1e-12);
        }
    }
}
