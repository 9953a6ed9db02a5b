//! Independent checks: finite-difference gradients, exhaustive grid search
//! on tiny instances, randomized sweeps of the soft-min weight bounds, and
//! the in-region/out-of-region split of a single update.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::align;
use crate::data::{DataSet, LabeledSample};
use crate::em::{gradient_em_step, EmConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::loss::LossModel;
use crate::params::ParamSet;
use crate::rng::{in_ball, substream, DOMAIN_CHECK, DOMAIN_LEMMA};
use crate::softmin::{empirical_loss, soft_min_weights, soft_min_weights_into, SoftMinConfig};
use crate::theory::{compute_eta, compute_eta_prime, estimate_constants, partition_regions};

/// Default central-difference step. Truncation error is `O(h²)`, rounding
/// `O(ε_mach·|F|/h)`; `1e-5` balances both for O(1)-scaled losses.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Slack allowed on the lemma comparisons for floating-point rounding.
pub const LEMMA_TOLERANCE: f64 = 1e-12;

/// Largest number of grid evaluations `brute_force_minimize` will do.
pub const GRID_BUDGET: u128 = 10_000_000;

/// `(F(θ + h e_i) − F(θ − h e_i)) / 2h` per coordinate.
pub fn finite_diff_gradient(
    model: &LossModel,
    sample: &LabeledSample,
    theta: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step h must be positive, got {h}"
        )));
    }
    model.check(sample, theta)?;
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            probe[i] = theta[i] + h;
            let up = model.value_unchecked(sample, &probe);
            probe[i] = theta[i] - h;
            let down = model.value_unchecked(sample, &probe);
            probe[i] = theta[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Gradient norms below this are compared in absolute terms.
pub const GRADIENT_ERROR_FLOOR: f64 = 1e-6;

/// `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let scale = linalg::norm(analytic).max(linalg::norm(numeric)).max(floor);
    linalg::distance(analytic, numeric) / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub checked: usize,
    pub failures: usize,
    pub worst_relative_error: f64,
    pub tolerance: f64,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares analytic and central-difference gradients at `samples` random
/// (sample, θ) pairs: a uniform data index, a uniform component of `center`
/// and a uniform offset within `radius` of it. Draw `s` comes from stream
/// `(seed, CHECK, s)`.
#[allow(clippy::too_many_arguments)]
pub fn check_gradients(
    model: &LossModel,
    dataset: &DataSet,
    center: &ParamSet,
    samples: usize,
    radius: f64,
    h: f64,
    tolerance: f64,
    seed: u64,
) -> Result<GradientCheck> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let errors = (0..samples)
        .map(|s| {
            let mut rng = substream(seed, DOMAIN_CHECK, s as u64);
            let sample = &dataset.samples()[rng.random_range(0..dataset.len())];
            let base = center.component(rng.random_range(0..center.k()));
            let theta: Vec<f64> = base
                .iter()
                .zip(in_ball(&mut rng, base.len(), radius))
                .map(|(a, b)| a + b)
                .collect();
            let analytic = model.gradient(sample, &theta)?;
            let numeric = finite_diff_gradient(model, sample, &theta, h)?;
            Ok(relative_error(&analytic, &numeric, GRADIENT_ERROR_FLOOR))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(GradientCheck {
        checked: samples,
        failures: errors
            .iter()
            .filter(|&&e| e.is_nan() || e > tolerance)
            .count(),
        worst_relative_error: errors.iter().copied().fold(0.0, f64::max),
        tolerance,
    })
}

/// Uniform grid with `points` nodes per coordinate on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn node(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
    }

    pub fn spacing(&self) -> f64 {
        if self.points <= 1 {
            0.0
        } else {
            (self.hi - self.lo) / (self.points - 1) as f64
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) || self.points == 0 {
            return Err(Error::InvalidArgument(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub params: ParamSet,
    pub loss: f64,
    /// Largest loss change between the optimum and a grid neighbor one step
    /// away along any coordinate.
    pub cell_variation: f64,
}

/// Exhaustive search over all ParamSets whose coordinates lie on `grid`.
/// Ties keep the first grid point in lexicographic order.
pub fn brute_force_minimize(
    dataset: &DataSet,
    model: &LossModel,
    config: SoftMinConfig,
    k: usize,
    grid: &GridSpec,
) -> Result<BruteForceResult> {
    grid.validate()?;
    let d = dataset.dim().ok_or(Error::Empty("dataset"))?;
    if d > 2 || k > 2 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "brute force needs d <= 2 and 1 <= k <= 2, got d = {d}, k = {k}"
        )));
    }
    model.check_dataset(dataset, d)?;
    let dims = (k * d) as u32;
    let total = (grid.points as u128).pow(dims);
    if total > GRID_BUDGET {
        return Err(Error::BudgetExceeded {
            points: total,
            limit: GRID_BUDGET,
        });
    }
    let total = total as usize;
    let params_at = |mut index: usize| -> ParamSet {
        let mut flat = vec![0.0; k * d];
        for slot in flat.iter_mut().rev() {
            *slot = grid.node(index % grid.points);
            index /= grid.points;
        }
        ParamSet::from_unchecked(flat.chunks(d).map(<[f64]>::to_vec).collect())
    };
    let loss_at = |index: usize| empirical_loss(&params_at(index), dataset, model, config);

    let (best_loss, best_index) = (0..total)
        .into_par_iter()
        .map(|i| loss_at(i).map(|l| (l, i)))
        .try_reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| {
                Ok(if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                })
            },
        )?;

    let mut cell_variation: f64 = 0.0;
    let mut stride = 1;
    for _ in 0..dims {
        let coord = (best_index / stride) % grid.points;
        if coord > 0 {
            cell_variation = cell_variation.max((loss_at(best_index - stride)? - best_loss).abs());
        }
        if coord + 1 < grid.points {
            cell_variation = cell_variation.max((loss_at(best_index + stride)? - best_loss).abs());
        }
        stride *= grid.points;
    }
    Ok(BruteForceResult {
        params: params_at(best_index),
        loss: best_loss,
        cell_variation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Number of (sample, trial) pairs compared.
    pub checked: usize,
    /// Pairs whose slack fell below `−LEMMA_TOLERANCE`; zero when vacuous.
    pub violations: usize,
    /// Most negative slack seen, `+∞` if nothing was checked.
    #[serde(with = "crate::serde_float")]
    pub worst_margin: f64,
    pub bound_vacuous: bool,
    /// Bound the weights were compared against (`1 − η` or `η′`).
    #[serde(with = "crate::serde_float")]
    pub bound: f64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.bound_vacuous || self.violations == 0
    }
}

/// Randomized sweep of the weight bounds around `reference`.
///
/// Each trial perturbs every component uniformly within
/// `‖θ_j − θ*_j‖ ≤ c_ini‖θ*_j‖`. For every sample with a strict best
/// reference component `j`, the weight of `j` is compared against `1 − η`
/// and the weight of every other component against `η′`. Both use the
/// dataset's empirical constants and the largest perturbation radius
/// `c_ini·max_j ‖θ*_j‖`, so the checked statement holds exactly on the
/// finite sample rather than almost surely over a distribution.
#[allow(clippy::too_many_arguments)]
pub fn check_lemma_bounds(
    dataset: &DataSet,
    reference: &ParamSet,
    model: &LossModel,
    beta: f64,
    c_ini: f64,
    trials: usize,
    seed: u64,
) -> Result<(LemmaReport, LemmaReport)> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite, got {beta}"
        )));
    }
    if !(c_ini.is_finite() && c_ini >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "c_ini must be >= 0, got {c_ini}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let smoothness = model.curvature()?.smoothness;
    let constants = estimate_constants(dataset, reference, model)?;
    let regions = partition_regions(dataset, reference, model)?;
    let owner = regions.owner_of(dataset.len());
    let k = reference.k();
    let radius = c_ini * reference.max_norm();
    let eta = compute_eta(&constants, beta, radius, smoothness, k);
    let eta_prime = compute_eta_prime(&constants, beta, radius, smoothness);
    let own_bound = 1.0 - eta;
    let softmin = SoftMinConfig::finite(beta)?;

    // (checked, worst own slack, worst cross slack, own violations, cross violations)
    type Tally = (usize, f64, f64, usize, usize);
    let merge = |a: Tally, b: Tally| -> Tally {
        (a.0 + b.0, a.1.min(b.1), a.2.min(b.2), a.3 + b.3, a.4 + b.4)
    };
    let empty: Tally = (0, f64::INFINITY, f64::INFINITY, 0, 0);

    let tally = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<Tally> {
            let mut rng = substream(seed, DOMAIN_LEMMA, trial as u64);
            let params = ParamSet::new(
                reference
                    .iter()
                    .map(|t| {
                        let off = in_ball(&mut rng, t.len(), c_ini * linalg::norm(t));
                        t.iter().zip(off).map(|(a, b)| a + b).collect()
                    })
                    .collect(),
            )?;
            let mut acc = empty;
            let mut losses = vec![0.0; k];
            let mut weights = vec![0.0; k];
            for (sample, own) in dataset.iter().zip(&owner) {
                let Some(j) = *own else { continue };
                for (f, theta) in losses.iter_mut().zip(params.iter()) {
                    *f = model.value_unchecked(sample, theta);
                }
                soft_min_weights_into(&losses, softmin, &mut weights)?;
                let own_slack = weights[j] - own_bound;
                let cross_slack = weights
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != j)
                    .map(|(_, &p)| eta_prime - p)
                    .fold(f64::INFINITY, f64::min);
                acc.0 += 1;
                acc.1 = acc.1.min(own_slack);
                acc.2 = acc.2.min(cross_slack);
                acc.3 += usize::from(own_slack < -LEMMA_TOLERANCE);
                acc.4 += usize::from(cross_slack < -LEMMA_TOLERANCE);
            }
            Ok(acc)
        })
        .try_reduce(|| empty, |a, b| Ok(merge(a, b)))?;

    let own_vacuous = eta >= 1.0;
    let cross_vacuous = eta_prime >= 1.0;
    Ok((
        LemmaReport {
            checked: tally.0,
            violations: if own_vacuous { 0 } else { tally.3 },
            worst_margin: tally.1,
            bound_vacuous: own_vacuous,
            bound: own_bound,
        },
        LemmaReport {
            checked: if k > 1 { tally.0 } else { 0 },
            violations: if cross_vacuous { 0 } else { tally.4 },
            worst_margin: tally.2,
            bound_vacuous: cross_vacuous,
            bound: eta_prime,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDecomposition {
    /// `‖θ₁ − θ*₁ − (γ/n′) Σ_{i∈S*₁} p_i ∇F_i(θ₁)‖`.
    pub t1: f64,
    /// `(γ/n′) ‖Σ_{i∉S*₁} p_i ∇F_i(θ₁)‖`.
    pub t2: f64,
    /// Measured `‖θ₁⁺ − θ*₁‖`.
    pub total: f64,
}

impl StepDecomposition {
    pub fn holds(&self) -> bool {
        self.total <= self.t1 + self.t2 + 1e-12
    }
}

/// Splits the update of the component matched to reference component 0
/// into its in-region and out-of-region parts on `fold`.
pub fn step_decomposition(
    params: &ParamSet,
    fold: &DataSet,
    model: &LossModel,
    config: &EmConfig,
    reference: &ParamSet,
) -> Result<StepDecomposition> {
    if fold.is_empty() {
        return Err(Error::Empty("fold"));
    }
    let aligned = params.permuted(&align(params, reference)?.order);
    let regions = partition_regions(fold, reference, model)?;
    let owner = regions.owner_of(fold.len());
    if regions.regions[0].is_empty() {
        return Err(Error::EmptyRegion(0));
    }
    let theta = aligned.component(0);
    let target = reference.component(0);
    let d = theta.len();
    let mut inside = vec![0.0; d];
    let mut outside = vec![0.0; d];
    for (sample, own) in fold.iter().zip(&owner) {
        let losses: Vec<f64> = aligned
            .iter()
            .map(|t| model.value_unchecked(sample, t))
            .collect();
        let p = soft_min_weights(&losses, config.softmin)?[0];
        if p == 0.0 {
            continue;
        }
        let g = model.gradient_unchecked(sample, theta);
        let acc = if *own == Some(0) {
            &mut inside
        } else {
            &mut outside
        };
        linalg::axpy(acc, p, &g);
    }
    let scale = config.step_size / fold.len() as f64;
    let t1_vec: Vec<f64> = theta
        .iter()
        .zip(target)
        .zip(&inside)
        .map(|((t, s), g)| t - s - scale * g)
        .collect();
    let next = gradient_em_step(&aligned, fold, model, config)?;
    Ok(StepDecomposition {
        t1: linalg::norm(&t1_vec),
        t2: scale * linalg::norm(&outside),
        total: linalg::distance(next.component(0), target),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossFamily;
    use crate::softmin::Beta;
    use approx::assert_abs_diff_eq;

    fn ridge(lambda: f64) -> LossModel {
        LossModel::new(LossFamily::RidgeSquared, lambda).unwrap()
    }

    fn data(rows: &[(f64, f64)]) -> DataSet {
        DataSet::new(
            rows.iter()
                .map(|&(x, y)| LabeledSample::new(vec![x], y))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn central_differences_are_exact_on_quadratics() {
        let model = ridge(0.3);
        let s = LabeledSample::new(vec![0.5, -2.0], 1.25);
        let theta = [0.75, 0.5];
        for h in [1.0, 0.5, 0.125] {
            let fd = finite_diff_gradient(&model, &s, &theta, h).unwrap();
            let an = model.gradient(&s, &theta).unwrap();
            for (a, b) in fd.iter().zip(&an) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn logistic_gradient_at_origin() {
        let model = LossModel::new(LossFamily::RegLogistic, 0.0).unwrap();
        let s = LabeledSample::new(vec![1.0], 1.0);
        let fd = finite_diff_gradient(&model, &s, &[0.0], 1e-5).unwrap();
        assert_abs_diff_eq!(fd[0], -0.5, epsilon = 1e-8);
    }

    #[test]
    fn zero_step_is_rejected() {
        let s = LabeledSample::new(vec![1.0], 1.0);
        assert!(finite_diff_gradient(&ridge(0.0), &s, &[0.0], 0.0).is_err());
        assert!(finite_diff_gradient(&ridge(0.0), &s, &[0.0], -1.0).is_err());
    }

    #[test]
    fn single_component_grid_hits_least_squares() {
        let ds = data(&[(1.0, 1.1), (2.0, 1.9), (-1.0, -0.8), (0.5, 0.7)]);
        let sxy: f64 = ds.iter().map(|s| s.x[0] * s.y).sum();
        let sxx: f64 = ds.iter().map(|s| s.x[0] * s.x[0]).sum();
        let exact = sxy / sxx;
        let grid = GridSpec {
            lo: -2.0,
            hi: 2.0,
            points: 401,
        };
        let r =
            brute_force_minimize(&ds, &ridge(0.0), SoftMinConfig::hard_min(), 1, &grid).unwrap();
        let nearest = (0..grid.points)
            .map(|i| grid.node(i))
            .min_by(|a, b| (a - exact).abs().total_cmp(&(b - exact).abs()))
            .unwrap();
        assert_eq!(r.params.component(0)[0], nearest);
    }

    #[test]
    fn grid_beats_truth_when_truth_is_on_grid() {
        let ds = data(&[(1.0, 1.0), (2.0, 2.0), (1.0, -1.0), (-2.0, 2.0), (0.5, 0.5)]);
        let truth = ParamSet::new(vec![vec![1.0], vec![-1.0]]).unwrap();
        let cfg = SoftMinConfig::finite(5.0).unwrap();
        let grid = GridSpec {
            lo: -2.0,
            hi: 2.0,
            points: 81,
        };
        let r = brute_force_minimize(&ds, &ridge(0.0), cfg, 2, &grid).unwrap();
        assert!(r.loss <= empirical_loss(&truth, &ds, &ridge(0.0), cfg).unwrap());
    }

    /// Minimum over all 2-way label assignments of the summed per-cluster
    /// ridge fits, divided by n.
    fn assignment_oracle(ds: &DataSet, lambda: f64) -> f64 {
        let n = ds.len();
        let samples = ds.samples();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            let mut total = 0.0;
            for side in [0, 1] {
                let members: Vec<&LabeledSample> = (0..n)
                    .filter(|&i| (mask >> i & 1) == side)
                    .map(|i| &samples[i])
                    .collect();
                let sxy: f64 = members.iter().map(|s| s.x[0] * s.y).sum();
                let sxx: f64 = members.iter().map(|s| s.x[0] * s.x[0]).sum();
                let theta = sxy / (sxx + lambda * members.len() as f64);
                let theta = if theta.is_finite() { theta } else { 0.0 };
                total += members
                    .iter()
                    .map(|s| (s.y - s.x[0] * theta).powi(2) + lambda * theta * theta)
                    .sum::<f64>();
            }
            best = best.min(total / n as f64);
        }
        best
    }

    #[test]
    fn hard_min_grid_matches_assignment_enumeration() {
        let ds = data(&[
            (1.0, 0.9),
            (-0.5, -0.6),
            (2.0, -1.7),
            (0.7, -0.8),
            (1.5, 1.2),
        ]);
        let model = ridge(0.01);
        let grid = GridSpec {
            lo: -2.0,
            hi: 2.0,
            points: 801,
        };
        let r = brute_force_minimize(&ds, &model, SoftMinConfig::hard_min(), 2, &grid).unwrap();
        let oracle = assignment_oracle(&ds, 0.01);
        assert!(r.loss >= oracle - 1e-12);
        assert!(
            r.loss - oracle <= r.cell_variation.max(1e-12),
            "{} vs {oracle}",
            r.loss
        );
    }

    #[test]
    fn brute_force_budget_and_shape() {
        let ds = data(&[(1.0, 1.0)]);
        let huge = GridSpec {
            lo: -1.0,
            hi: 1.0,
            points: 4000,
        };
        assert!(matches!(
            brute_force_minimize(&ds, &ridge(0.0), SoftMinConfig::hard_min(), 2, &huge),
            Err(Error::BudgetExceeded { .. })
        ));
        let ds3 = DataSet::new(vec![LabeledSample::new(vec![1.0, 2.0, 3.0], 1.0)]).unwrap();
        let g = GridSpec {
            lo: -1.0,
            hi: 1.0,
            points: 3,
        };
        assert!(brute_force_minimize(&ds3, &ridge(0.0), SoftMinConfig::hard_min(), 1, &g).is_err());
    }

    fn separated() -> (DataSet, ParamSet, LossModel) {
        let reference = ParamSet::new(vec![vec![1.0], vec![-1.0]]).unwrap();
        let rows: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let x = 0.6 + 0.01 * i as f64;
                let x = if i % 3 == 0 { -x } else { x };
                (x, if i % 2 == 0 { x } else { -x })
            })
            .collect();
        let ds = data(&rows);
        let mut model = ridge(1e-3);
        model.certify_constants(&ds).unwrap();
        (ds, reference, model)
    }

    #[test]
    fn lemmas_hold_at_the_reference() {
        let (ds, reference, model) = separated();
        let (l1, l2) = check_lemma_bounds(&ds, &reference, &model, 10.0, 0.0, 3, 1).unwrap();
        assert!(!l1.bound_vacuous && !l2.bound_vacuous);
        assert_eq!((l1.violations, l2.violations), (0, 0));
        assert_eq!(l1.checked, 3 * ds.len());
    }

    #[test]
    fn zero_beta_meets_the_uniform_bound() {
        let (ds, reference, model) = separated();
        let (l1, l2) = check_lemma_bounds(&ds, &reference, &model, 0.0, 0.1, 5, 2).unwrap();
        assert_eq!(l1.violations, 0);
        assert!(l1.worst_margin.abs() <= LEMMA_TOLERANCE);
        assert!(l2.bound_vacuous);
    }

    #[test]
    fn vacuous_bounds_are_flagged() {
        let (ds, reference, model) = separated();
        // c_ini large enough that the cross floor goes negative.
        let (_, l2) = check_lemma_bounds(&ds, &reference, &model, 10.0, 0.9, 2, 3).unwrap();
        assert!(l2.bound_vacuous);
        assert_eq!(l2.violations, 0);
    }

    #[test]
    fn decomposition_single_component() {
        let ds = data(&[(1.0, 2.0), (0.5, -1.0), (2.0, 0.3)]);
        let params = ParamSet::new(vec![vec![0.2]]).unwrap();
        let reference = ParamSet::new(vec![vec![0.5]]).unwrap();
        let cfg = EmConfig {
            step_size: 0.1,
            iterations: 1,
            softmin: SoftMinConfig::new(Beta::Finite(1.0)),
            resample: false,
            seed: 0,
        };
        let model = ridge(0.1);
        let s = step_decomposition(&params, &ds, &model, &cfg, &reference).unwrap();
        assert_eq!(s.t2, 0.0);
        assert!(s.holds());
        let still = EmConfig {
            step_size: 0.0,
            ..cfg
        };
        let s = step_decomposition(&params, &ds, &model, &still, &reference).unwrap();
        assert_eq!(s.t1, linalg::distance(&[0.2], &[0.5]));
        assert_eq!(s.t2, 0.0);
    }

    #[test]
    fn decomposition_triangle_inequality() {
        let (ds, reference, model) = separated();
        for (i, start) in [[0.8, -1.3], [-0.9, 1.2], [1.4, -0.2]].iter().enumerate() {
            let params = ParamSet::new(start.iter().map(|&v| vec![v]).collect()).unwrap();
            let cfg = EmConfig {
                step_size: 0.2,
                iterations: 1,
                softmin: SoftMinConfig::finite(1.0 + i as f64).unwrap(),
                resample: false,
                seed: 0,
            };
            let s = step_decomposition(&params, &ds, &model, &cfg, &reference).unwrap();
            assert!(s.holds(), "{s:?}");
            assert!(s.t2 > 0.0);
        }
    }

    #[test]
    fn gradient_sweep_passes_for_smooth_losses() {
        let ds = data(&[(0.5, 1.0), (-0.3, -1.0), (0.9, 1.0)]);
        let center = ParamSet::new(vec![vec![0.2], vec![-0.4]]).unwrap();
        for family in LossFamily::CERTIFIABLE {
            let model = LossModel::new(family, 0.2).unwrap();
            let r =
                check_gradients(&model, &ds, &center, 50, 1.0, DEFAULT_FD_STEP, 1e-5, 9).unwrap();
            assert!(r.passed(), "{family:?}: {r:?}");
            assert_eq!(r.checked, 50);
        }
    }
}
