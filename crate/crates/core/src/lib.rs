//! Gradient EM for agnostic mixtures.
//!
//! Fits `k` parameter vectors to unlabeled data by minimizing a soft-min
//! combination of per-component losses. Each base loss must be strongly
//! convex and smooth in the parameters; certified curvature constants feed
//! the contraction bound in [`theory`].
//!
//! ```
//! use gradem_core::{generate, EmConfig, GenKind, GenSpec, LossFamily, LossModel};
//! use gradem_core::{run_gradient_em, ParamSet, SoftMinConfig};
//!
//! let spec = GenSpec { seed: 3, margin: 1.0, ..GenSpec::new(GenKind::GenerativeMlr, 2, 2, 400) };
//! let (data, truth) = generate(&spec).unwrap();
//! let mut model = LossModel::new(LossFamily::RidgeSquared, 1e-3).unwrap();
//! model.certify_constants(&data).unwrap();
//! let init = ParamSet::new(truth.iter().map(|t| t.iter().map(|v| 0.9 * v).collect()).collect()).unwrap();
//! let config = EmConfig {
//!     step_size: EmConfig::default_step_size(&model).unwrap(),
//!     iterations: 50,
//!     softmin: SoftMinConfig::finite(10.0).unwrap(),
//!     resample: false,
//!     seed: 0,
//! };
//! let run = run_gradient_em(&init, &data, &model, &config, Some(&truth)).unwrap();
//! let trace = &run.trace;
//! assert!(trace.final_record().max_distance() < trace.records[0].max_distance());
//! ```

pub mod align;
pub mod data;
pub mod datagen;
pub mod em;
pub mod error;
pub mod linalg;
pub mod loss;
pub mod params;
pub mod rng;
pub mod serde_float;
pub mod softmin;
pub mod theory;
pub mod verify;

pub use align::{align, Alignment};
pub use data::{DataSet, LabeledSample};
pub use datagen::{generate, generate_labeled, Covariate, GenKind, GenSpec, Generated};
pub use em::{
    fit_geometric_rate, gradient_em_step, partition_dataset, partition_indices, perturb_reference,
    random_ball_init, run_gradient_em, ConvergenceTrace, EmConfig, EmRun, IterationRecord,
};
pub use error::{Error, Result};
pub use loss::{Curvature, Link, LossFamily, LossModel};
pub use params::ParamSet;
pub use softmin::{
    empirical_loss, soft_min_loss, soft_min_weights, Beta, SoftMinConfig, TieRule, WeightMatrix,
};
pub use theory::{
    estimate_constants, partition_regions, ProblemConstants, Regions, TheoremQuantities,
};
pub use verify::{
    brute_force_minimize, check_gradients, check_lemma_bounds, finite_diff_gradient,
    step_decomposition, GradientCheck, GridSpec, LemmaReport, StepDecomposition,
};
