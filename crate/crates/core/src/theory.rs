//! Problem geometry around a reference solution and the closed-form
//! quantities of the one-step contraction bound for gradient EM.
//!
//! Regions, misspecification `(ε, ε₁)`, separation `Δ` and `π_min` are
//! estimated as exact max/min over a finite dataset. The bound itself:
//!
//! ```text
//! ‖θ⁺_j − θ*_j‖ ≤ (1 − c·γ·π_min·m·(1−η))^{1/2} ‖θ_j − θ*_j‖ + ζ
//! ζ  = γε₁ + (γε₁c_ini)^{1/2} + γη′(2 + ε₁ + M·c_ini)
//! a  = ε + ε₁c_ini + (M/2)c_ini²        (own-region loss ceiling)
//! b  = Δ − (ε₁ + 2M)c_ini               (cross-region loss floor)
//! η  = 1 − e^{−βa} / (1 + (k−1)e^{−βb})
//! η′ = e^{−βb} / e^{−βa}
//! ```

use serde::{Deserialize, Serialize};

use crate::data::DataSet;
use crate::em::{gradient_em_step, EmConfig};
use crate::error::{ensure_dim, Error, Result};
use crate::linalg;
use crate::loss::{Curvature, LossModel};
use crate::params::ParamSet;
use crate::rng::{in_ball, substream, DOMAIN_RESTART};
use crate::softmin::{empirical_loss, SoftMinConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regions {
    /// `regions[j]`: indices where reference component `j` is strictly best.
    pub regions: Vec<Vec<usize>>,
    /// Indices where the best loss is tied.
    pub unassigned: Vec<usize>,
}

impl Regions {
    pub fn sizes(&self) -> Vec<usize> {
        self.regions.iter().map(Vec::len).collect()
    }

    /// Region owning sample `i`, if any.
    pub fn owner_of(&self, n: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n];
        for (j, idx) in self.regions.iter().enumerate() {
            for &i in idx {
                owner[i] = Some(j);
            }
        }
        owner
    }
}

/// `n × k` matrix of base losses at the reference, row per sample.
pub(crate) fn loss_matrix(
    dataset: &DataSet,
    reference: &ParamSet,
    model: &LossModel,
) -> Result<Vec<Vec<f64>>> {
    dataset
        .iter()
        .map(|s| reference.iter().map(|t| model.value(s, t)).collect())
        .collect()
}

fn regions_from_losses(losses: &[Vec<f64>], k: usize) -> Regions {
    let mut regions = vec![Vec::new(); k];
    let mut unassigned = Vec::new();
    for (i, row) in losses.iter().enumerate() {
        let best = row.iter().copied().fold(f64::INFINITY, f64::min);
        let mut winners = row.iter().enumerate().filter(|&(_, &f)| f == best);
        let (j, _) = winners.next().expect("k >= 1");
        if winners.next().is_none() {
            regions[j].push(i);
        } else {
            unassigned.push(i);
        }
    }
    Regions {
        regions,
        unassigned,
    }
}

pub fn partition_regions(
    dataset: &DataSet,
    reference: &ParamSet,
    model: &LossModel,
) -> Result<Regions> {
    let losses = loss_matrix(dataset, reference, model)?;
    Ok(regions_from_losses(&losses, reference.k()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Largest base loss at the reference over its own region.
    pub epsilon: f64,
    /// Largest gradient norm at the reference over its own region.
    pub epsilon1: f64,
    /// Smallest base loss of a component on another component's region;
    /// `+∞` when `k = 1`.
    #[serde(with = "crate::serde_float")]
    pub delta: f64,
    pub pi_min: f64,
    pub region_sizes: Vec<usize>,
    pub n: usize,
}

impl ProblemConstants {
    /// `Δ > ε`: without it the separation regime is empty.
    pub fn is_separated(&self) -> bool {
        self.delta > self.epsilon
    }
}

pub fn estimate_constants(
    dataset: &DataSet,
    reference: &ParamSet,
    model: &LossModel,
) -> Result<ProblemConstants> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let k = reference.k();
    let losses = loss_matrix(dataset, reference, model)?;
    let regions = regions_from_losses(&losses, k);
    if let Some(j) = regions.regions.iter().position(Vec::is_empty) {
        return Err(Error::EmptyRegion(j));
    }
    let samples = dataset.samples();
    let mut epsilon: f64 = 0.0;
    let mut epsilon1: f64 = 0.0;
    let mut delta = f64::INFINITY;
    for (j, idx) in regions.regions.iter().enumerate() {
        for &i in idx {
            epsilon = epsilon.max(losses[i][j]);
            let g = model.gradient(&samples[i], reference.component(j))?;
            epsilon1 = epsilon1.max(linalg::norm(&g));
            for (l, &f) in losses[i].iter().enumerate() {
                if l != j {
                    delta = delta.min(f);
                }
            }
        }
    }
    let sizes = regions.sizes();
    let n = dataset.len();
    let pi_min = sizes.iter().copied().min().unwrap_or(0) as f64 / n as f64;
    Ok(ProblemConstants {
        epsilon,
        epsilon1,
        delta,
        pi_min,
        region_sizes: sizes,
        n,
    })
}

fn own_loss_ceiling(c: &ProblemConstants, c_ini: f64, smoothness: f64) -> f64 {
    c.epsilon + c.epsilon1 * c_ini + 0.5 * smoothness * c_ini * c_ini
}

fn cross_loss_floor(c: &ProblemConstants, c_ini: f64, smoothness: f64) -> f64 {
    c.delta - (c.epsilon1 + 2.0 * smoothness) * c_ini
}

/// `ln(1 + e^s)`
fn softplus(s: f64) -> f64 {
    s.max(0.0) + (-s.abs()).exp().ln_1p()
}

/// `ln(1 − η)`, evaluated in log space so that large `β` neither
/// overflows nor loses the small weight floor to cancellation.
pub fn log_weight_floor(
    constants: &ProblemConstants,
    beta: f64,
    c_ini: f64,
    smoothness: f64,
    k: usize,
) -> f64 {
    if beta == 0.0 {
        return -(k as f64).ln();
    }
    let a = own_loss_ceiling(constants, c_ini, smoothness);
    let mut log_den = 0.0;
    if k > 1 {
        let b = cross_loss_floor(constants, c_ini, smoothness);
        log_den = softplus(((k - 1) as f64).ln() - beta * b);
    }
    -beta * a - log_den
}

/// `η`; the soft-min weight of the correct component is at least `1 − η`.
pub fn compute_eta(
    constants: &ProblemConstants,
    beta: f64,
    c_ini: f64,
    smoothness: f64,
    k: usize,
) -> f64 {
    -log_weight_floor(constants, beta, c_ini, smoothness, k).exp_m1()
}

/// `η′`; the soft-min weight of a wrong component is at most `η′`.
pub fn compute_eta_prime(
    constants: &ProblemConstants,
    beta: f64,
    c_ini: f64,
    smoothness: f64,
) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    let a = own_loss_ceiling(constants, c_ini, smoothness);
    let b = cross_loss_floor(constants, c_ini, smoothness);
    (-beta * (b - a)).exp()
}

/// `ζ = γε₁ + (γε₁c_ini)^{1/2} + γη′(2 + ε₁ + M c_ini)`.
pub fn compute_error_floor(
    constants: &ProblemConstants,
    gamma: f64,
    c_ini: f64,
    eta_prime: f64,
    smoothness: f64,
) -> f64 {
    let e1 = constants.epsilon1;
    gamma * e1 + (gamma * e1 * c_ini).sqrt() + gamma * eta_prime * (2.0 + e1 + smoothness * c_ini)
}

/// `(1 − c·γ·π_min·m·(1−η))^{1/2}`.
pub fn compute_contraction(
    gamma: f64,
    pi_min: f64,
    strong_convexity: f64,
    eta: f64,
    c_universal: f64,
) -> Result<f64> {
    if [gamma, pi_min, strong_convexity, c_universal]
        .iter()
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        return Err(Error::InvalidArgument(
            "contraction inputs must be finite and nonnegative".into(),
        ));
    }
    if eta.is_nan() || eta >= 1.0 {
        return Err(Error::Vacuous(format!("eta = {eta} is not below 1")));
    }
    let shrink = c_universal * gamma * pi_min * strong_convexity * (1.0 - eta);
    if shrink >= 1.0 {
        return Err(Error::Vacuous(format!(
            "c*gamma*pi_min*m*(1-eta) = {shrink} >= 1; step too large for the bound"
        )));
    }
    Ok((1.0 - shrink).sqrt())
}

fn check_contraction(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "contraction {r} outside [0, 1]"
        )))
    }
}

/// Applies the one-step bound `T` times: `r^T d₀ + ζ(1 − r^T)/(1 − r)`.
pub fn predicted_distance_bound(
    initial_distances: &[f64],
    contraction: f64,
    zeta: f64,
    iterations: u32,
) -> Result<Vec<f64>> {
    check_contraction(contraction)?;
    let rt = contraction.powi(iterations as i32);
    let accumulated = if contraction == 1.0 {
        zeta * iterations as f64
    } else {
        zeta * (1.0 - rt) / (1.0 - contraction)
    };
    Ok(initial_distances
        .iter()
        .map(|d| rt * d + accumulated)
        .collect())
}

/// `r^T d₀ + ζ`, the single-floor form of the T-step statement.
pub fn summary_distance_bound(
    initial_distances: &[f64],
    contraction: f64,
    zeta: f64,
    iterations: u32,
) -> Result<Vec<f64>> {
    check_contraction(contraction)?;
    let rt = contraction.powi(iterations as i32);
    Ok(initial_distances.iter().map(|d| rt * d + zeta).collect())
}

/// `r^T d₀ + ζ/(1 − r)`, which dominates the recursion for every `T`.
pub fn asymptotic_distance_bound(
    initial_distances: &[f64],
    contraction: f64,
    zeta: f64,
    iterations: u32,
) -> Result<Vec<f64>> {
    check_contraction(contraction)?;
    let rt = contraction.powi(iterations as i32);
    let tail = if contraction == 1.0 {
        f64::INFINITY
    } else {
        zeta / (1.0 - contraction)
    };
    Ok(initial_distances.iter().map(|d| rt * d + tail).collect())
}

/// All theorem quantities for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremQuantities {
    pub eta: f64,
    #[serde(with = "crate::serde_float")]
    pub eta_prime: f64,
    #[serde(with = "crate::serde_float")]
    pub zeta: f64,
    /// Absent when the bound is vacuous for these inputs.
    pub contraction: Option<f64>,
    pub contraction_error: Option<String>,
    pub c_universal: f64,
    pub gamma: f64,
    pub beta: f64,
    pub c_ini: f64,
    pub k: usize,
    pub strong_convexity: f64,
    pub smoothness: f64,
}

impl TheoremQuantities {
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        constants: &ProblemConstants,
        curvature: Curvature,
        gamma: f64,
        beta: f64,
        c_ini: f64,
        k: usize,
        c_universal: f64,
    ) -> Self {
        let m_big = curvature.smoothness;
        let eta = compute_eta(constants, beta, c_ini, m_big, k);
        let eta_prime = compute_eta_prime(constants, beta, c_ini, m_big);
        let zeta = compute_error_floor(constants, gamma, c_ini, eta_prime, m_big);
        let (contraction, contraction_error) = match compute_contraction(
            gamma,
            constants.pi_min,
            curvature.strong_convexity,
            eta,
            c_universal,
        ) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Self {
            eta,
            eta_prime,
            zeta,
            contraction,
            contraction_error,
            c_universal,
            gamma,
            beta,
            c_ini,
            k,
            strong_convexity: curvature.strong_convexity,
            smoothness: m_big,
        }
    }

    pub fn lemma1_vacuous(&self) -> bool {
        self.eta >= 1.0
    }

    pub fn lemma2_vacuous(&self) -> bool {
        self.eta_prime >= 1.0
    }
}

/// Warning text when the reference violates `max_j ‖θ*_j‖ ≤ 1`.
pub fn reference_norm_warning(reference: &ParamSet) -> Option<String> {
    let max = reference.max_norm();
    (max > 1.0)
        .then(|| format!("reference max norm {max:.4} exceeds 1; the bounds lack formal backing"))
}

/// Settings for the multi-start reference optimization used when no
/// ground truth exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSearch {
    pub restarts: usize,
    pub max_iterations: usize,
    pub step_size: f64,
    /// Restarts beyond the first are drawn uniformly in a ball of this
    /// radius around the hint.
    pub spread: f64,
    /// Stop once the largest per-step parameter change drops below this.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for ReferenceSearch {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_iterations: 5000,
            step_size: 0.05,
            spread: 0.5,
            tolerance: 1e-13,
            seed: 0,
        }
    }
}

/// Runs full-data gradient EM from `search.restarts` starting points
/// around `hint` and returns the end point with the lowest empirical loss.
pub fn reference_minimizer(
    dataset: &DataSet,
    model: &LossModel,
    softmin: SoftMinConfig,
    hint: &ParamSet,
    search: &ReferenceSearch,
) -> Result<(ParamSet, f64)> {
    if search.restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    ensure_dim(hint.dim(), dataset.dim().ok_or(Error::Empty("dataset"))?)?;
    let config = EmConfig {
        step_size: search.step_size,
        iterations: 1,
        softmin,
        resample: false,
        seed: search.seed,
    };
    let mut best: Option<(ParamSet, f64)> = None;
    for r in 0..search.restarts {
        let mut params = if r == 0 {
            hint.clone()
        } else {
            let mut rng = substream(search.seed, DOMAIN_RESTART, r as u64);
            ParamSet::new(
                hint.iter()
                    .map(|t| {
                        let off = in_ball(&mut rng, t.len(), search.spread);
                        t.iter().zip(off).map(|(a, b)| a + b).collect()
                    })
                    .collect(),
            )?
        };
        for _ in 0..search.max_iterations {
            let next = gradient_em_step(&params, dataset, model, &config)?;
            let change = next
                .iter()
                .zip(params.iter())
                .map(|(a, b)| linalg::distance(a, b))
                .fold(0.0, f64::max);
            params = next;
            if change < search.tolerance {
                break;
            }
        }
        let loss = empirical_loss(&params, dataset, model, softmin)?;
        if best.as_ref().is_none_or(|(_, l)| loss < *l) {
            best = Some((params, loss));
        }
    }
    Ok(best.expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabeledSample;
    use crate::loss::LossFamily;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn constants(epsilon: f64, epsilon1: f64, delta: f64) -> ProblemConstants {
        ProblemConstants {
            epsilon,
            epsilon1,
            delta,
            pi_min: 0.5,
            region_sizes: vec![1, 1],
            n: 2,
        }
    }

    #[test]
    fn eta_examples() {
        let c = constants(0.0, 0.0, 9f64.ln());
        assert_abs_diff_eq!(compute_eta(&c, 1.0, 0.0, 3.0, 2), 0.1, epsilon = 1e-15);
        for k in 1..6 {
            assert_abs_diff_eq!(
                compute_eta(&constants(0.3, 0.2, 1.0), 0.0, 0.1, 3.0, k),
                1.0 - 1.0 / k as f64,
                epsilon = 1e-15
            );
        }
        let single = constants(0.0, 0.0, f64::INFINITY);
        assert_eq!(compute_eta(&single, 4.0, 0.0, 3.0, 1), 0.0);
    }

    #[test]
    fn eta_prime_examples() {
        assert_eq!(
            compute_eta_prime(&constants(0.2, 0.1, 0.5), 0.0, 0.3, 2.0),
            1.0
        );
        assert_abs_diff_eq!(
            compute_eta_prime(&constants(0.0, 0.0, 1.0), 2.0, 0.0, 5.0),
            (-2.0f64).exp(),
            epsilon = 1e-15
        );
        // Δ below (ε₁ + 2M)c_ini: exponent turns positive.
        assert!(compute_eta_prime(&constants(0.0, 0.1, 0.5), 1.0, 0.5, 1.0) > 1.0);
        assert_eq!(
            compute_eta_prime(&constants(0.0, 0.0, f64::INFINITY), 1.0, 0.0, 1.0),
            0.0
        );
    }

    #[test]
    fn error_floor_examples() {
        assert_eq!(
            compute_error_floor(&constants(0.1, 0.0, 1.0), 0.3, 0.2, 0.0, 4.0),
            0.0
        );
        // 0.1·0.04 + (0.1·0.04·0.1)^{1/2} + 0.1·0.05·(2 + 0.04 + 3·0.1)
        let z = compute_error_floor(&constants(0.0, 0.04, 1.0), 0.1, 0.1, 0.05, 3.0);
        assert_abs_diff_eq!(z, 0.004 + 0.02 + 0.005 * 2.34, epsilon = 1e-15);
        assert_abs_diff_eq!(z, 0.0357, epsilon = 1e-12);
        let c = constants(0.0, 0.0, 1.0);
        let z1 = compute_error_floor(&c, 0.1, 0.2, 0.3, 2.0);
        let z2 = compute_error_floor(&c, 0.2, 0.2, 0.3, 2.0);
        assert_eq!(z2, 2.0 * z1);
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(compute_contraction(0.0, 0.5, 1.0, 0.2, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            compute_contraction(0.5, 0.5, 1.0, 0.0, 1.0).unwrap(),
            0.75f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(0.75f64.sqrt(), 0.8660, epsilon = 1e-4);
        let near = compute_contraction(0.5, 0.5, 1.0, 1.0 - 1e-12, 1.0).unwrap();
        assert!(1.0 - near < 1e-12);
        assert!(matches!(
            compute_contraction(0.5, 0.5, 1.0, 1.0, 1.0),
            Err(Error::Vacuous(_))
        ));
        assert!(matches!(
            compute_contraction(4.0, 1.0, 1.0, 0.0, 1.0),
            Err(Error::Vacuous(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(
            predicted_distance_bound(&[0.7, 1.2], 0.9, 0.3, 0).unwrap(),
            vec![0.7, 1.2]
        );
        assert_abs_diff_eq!(
            predicted_distance_bound(&[1.0], 0.5, 0.0, 3).unwrap()[0],
            0.125
        );
        assert_abs_diff_eq!(
            predicted_distance_bound(&[1.0], 0.5, 0.1, 3).unwrap()[0],
            0.3,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            summary_distance_bound(&[1.0], 0.5, 0.1, 3).unwrap()[0],
            0.225
        );
        assert_abs_diff_eq!(
            asymptotic_distance_bound(&[1.0], 0.5, 0.1, 3).unwrap()[0],
            0.325,
            epsilon = 1e-15
        );
        assert!(predicted_distance_bound(&[1.0], 1.5, 0.1, 3).is_err());
    }

    #[test]
    fn bound_matches_unrolled_recursion() {
        let (r, z) = (0.83, 0.017);
        let mut d = 2.5;
        for t in 0..40u32 {
            let b = predicted_distance_bound(&[2.5], r, z, t).unwrap()[0];
            assert_abs_diff_eq!(b, d, epsilon = 1e-12);
            d = r * d + z;
        }
    }

    fn ridge() -> LossModel {
        LossModel::new(LossFamily::RidgeSquared, 0.0).unwrap()
    }

    #[test]
    fn region_examples() {
        let one = ParamSet::new(vec![vec![0.5]]).unwrap();
        let data = DataSet::new(vec![
            LabeledSample::new(vec![1.0], 2.0),
            LabeledSample::new(vec![2.0], -1.0),
        ])
        .unwrap();
        let r = partition_regions(&data, &one, &ridge()).unwrap();
        assert_eq!(r.regions, vec![vec![0, 1]]);
        assert!(r.unassigned.is_empty());

        // Losses [[1, 2], [3, 0]] via θ = (0, ·) on x = 1.
        let reference = ParamSet::new(vec![vec![0.0], vec![1.0 - 2f64.sqrt()]]).unwrap();
        let data = DataSet::new(vec![
            LabeledSample::new(vec![1.0], 1.0),
            LabeledSample::new(vec![1.0], 1.0 - 2f64.sqrt()),
        ])
        .unwrap();
        let losses = loss_matrix(&data, &reference, &ridge()).unwrap();
        assert_abs_diff_eq!(losses[0][0], 1.0);
        assert_abs_diff_eq!(losses[0][1], 2.0, epsilon = 1e-12);
        let r = regions_from_losses(&[vec![1.0, 2.0], vec![3.0, 0.0]], 2);
        assert_eq!(r.regions, vec![vec![0], vec![1]]);
        let r = regions_from_losses(&[vec![2.0, 2.0]], 2);
        assert_eq!(r.unassigned, vec![0]);
        assert!(r.regions.iter().all(Vec::is_empty));
    }

    #[test]
    fn constants_for_single_component() {
        let one = ParamSet::new(vec![vec![1.0]]).unwrap();
        let data = DataSet::new(vec![LabeledSample::new(vec![1.0], 1.5)]).unwrap();
        let c = estimate_constants(&data, &one, &ridge()).unwrap();
        assert_eq!(c.delta, f64::INFINITY);
        assert_eq!(c.pi_min, 1.0);
        assert_abs_diff_eq!(c.epsilon, 0.25);
        assert_abs_diff_eq!(c.epsilon1, 1.0);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"delta\":\"inf\""));
        let back: ProblemConstants = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_region_is_an_error() {
        let reference = ParamSet::new(vec![vec![1.0], vec![50.0]]).unwrap();
        let data = DataSet::new(vec![LabeledSample::new(vec![1.0], 1.0)]).unwrap();
        assert!(matches!(
            estimate_constants(&data, &reference, &ridge()),
            Err(Error::EmptyRegion(1))
        ));
    }

    proptest! {
        #[test]
        fn eta_is_monotone(
            eps in 0.0f64..1.0, e1 in 0.0f64..1.0, delta in 2.0f64..10.0,
            c_ini in 0.0f64..0.3, beta in 0.1f64..10.0, bump in 0.0f64..0.5, k in 2usize..5,
        ) {
            let m = 1.5;
            let base = compute_eta(&constants(eps, e1, delta), beta, c_ini, m, k);
            prop_assert!(compute_eta(&constants(eps + bump, e1, delta), beta, c_ini, m, k) >= base);
            prop_assert!(compute_eta(&constants(eps, e1 + bump, delta), beta, c_ini, m, k) >= base);
            prop_assert!(compute_eta(&constants(eps, e1, delta), beta, c_ini + bump, m, k) >= base);
            prop_assert!(compute_eta(&constants(eps, e1, delta + bump), beta, c_ini, m, k) <= base);
        }

        #[test]
        fn log_eta_prime_is_linear_in_beta(
            eps in 0.0f64..1.0, e1 in 0.0f64..1.0, delta in 0.0f64..5.0,
            c_ini in 0.0f64..0.5, beta in 0.1f64..5.0, m in 0.1f64..5.0,
        ) {
            let c = constants(eps, e1, delta);
            let slope = -(delta - (e1 + 2.0 * m) * c_ini - eps - e1 * c_ini - 0.5 * m * c_ini * c_ini);
            let l1 = compute_eta_prime(&c, beta, c_ini, m).ln();
            let l2 = compute_eta_prime(&c, 2.0 * beta, c_ini, m).ln();
            prop_assert!(((l2 - l1) / beta - slope).abs() <= 1e-10 * (1.0 + slope.abs()));
        }
    }
}
