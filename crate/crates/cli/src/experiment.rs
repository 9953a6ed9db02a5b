//! Generation → certification → gradient EM → theory checks → report.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use gradem_core::datagen::load_dataset;
use gradem_core::theory::{
    asymptotic_distance_bound, predicted_distance_bound, reference_minimizer,
    reference_norm_warning, summary_distance_bound, ReferenceSearch,
};
use gradem_core::verify::{BruteForceResult, DEFAULT_FD_STEP};
use gradem_core::{
    brute_force_minimize, check_gradients, check_lemma_bounds, estimate_constants, generate,
    partition_dataset, perturb_reference, random_ball_init, run_gradient_em, step_decomposition,
    Curvature, DataSet, EmConfig, GradientCheck, GridSpec, LemmaReport, LossModel, ParamSet,
    ProblemConstants, StepDecomposition, TheoremQuantities,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BoundForm, DataConfig, ExperimentConfig, InitConfig, ReferenceConfig};

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "GRADEM_WORKERS";

/// Relative error allowed by the gradient oracle check.
pub const GRADIENT_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSource {
    Configured,
    /// `1/(2M)` from the certified smoothness.
    Default,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceCheck {
    pub em_loss: f64,
    pub grid_loss: f64,
    pub cell_variation: f64,
    pub grid_params: ParamSet,
    pub passed: bool,
}

/// Outcome of one optional check: a result, or the reason it did not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check<T> {
    Ran(T),
    Skipped(String),
    Errored(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaPair {
    pub lemma1: LemmaReport,
    pub lemma2: LemmaReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    pub repetition: usize,
    pub seed: u64,
    pub data_seed: Option<u64>,
    pub step_size: f64,
    pub step_size_source: StepSource,
    pub curvature: Option<Curvature>,
    pub certification_error: Option<String>,
    pub reference: ParamSet,
    /// Initialization radius relative to the reference norms.
    pub c_ini: f64,
    pub constants: Option<ProblemConstants>,
    pub quantities: Option<TheoremQuantities>,
    pub theory_note: Option<String>,
    pub initial_distances: Vec<f64>,
    pub final_distances: Vec<f64>,
    /// Estimated component matched to each reference component at the end.
    pub final_alignment: Vec<usize>,
    pub final_loss: f64,
    pub fitted_rate: Option<f64>,
    pub fitted_floor: Option<f64>,
    /// Mean max-distance over the last quarter of iterations.
    pub plateau: f64,
    #[serde(with = "gradem_core::serde_float::option")]
    pub bound: Option<f64>,
    pub success: Option<bool>,
    pub lemmas: Option<Check<LemmaPair>>,
    pub decomposition: Option<Check<StepDecomposition>>,
    pub gradient_oracle: Option<Check<GradientCheck>>,
    pub brute_force: Option<Check<BruteForceCheck>>,
    pub final_params: ParamSet,
}

impl RepetitionReport {
    pub fn final_max_distance(&self) -> f64 {
        self.final_distances.iter().copied().fold(0.0, f64::max)
    }

    /// Failures of enabled checks, as human-readable lines.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let r = self.repetition;
        match &self.lemmas {
            Some(Check::Ran(p)) => {
                for (name, l) in [("lemma 1", &p.lemma1), ("lemma 2", &p.lemma2)] {
                    if !l.passed() {
                        out.push(format!("rep {r}: {name} has {} violations", l.violations));
                    }
                }
            }
            Some(Check::Errored(e)) => out.push(format!("rep {r}: lemma check failed: {e}")),
            _ => {}
        }
        match &self.decomposition {
            Some(Check::Ran(s)) if !s.holds() => out.push(format!(
                "rep {r}: step distance {} exceeds T1 + T2 = {}",
                s.total,
                s.t1 + s.t2
            )),
            Some(Check::Errored(e)) => out.push(format!("rep {r}: decomposition failed: {e}")),
            _ => {}
        }
        match &self.gradient_oracle {
            Some(Check::Ran(g)) if !g.passed() => out.push(format!(
                "rep {r}: {} of {} gradient comparisons exceed {} (worst {:e})",
                g.failures, g.checked, g.tolerance, g.worst_relative_error
            )),
            Some(Check::Errored(e)) => out.push(format!("rep {r}: gradient check failed: {e}")),
            _ => {}
        }
        match &self.brute_force {
            Some(Check::Ran(b)) if !b.passed => out.push(format!(
                "rep {r}: grid optimum {} is not within {} of the EM loss {}",
                b.grid_loss, b.cell_variation, b.em_loss
            )),
            Some(Check::Errored(e)) => out.push(format!("rep {r}: brute force failed: {e}")),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub repetition_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub repetitions: Vec<RepetitionReport>,
    /// Fraction of repetitions whose final distance is within the bound,
    /// over the repetitions where the bound is defined.
    pub success_frequency: Option<f64>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

impl ExperimentReport {
    pub fn checks_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Everything a repetition needs before gradient EM starts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub dataset: DataSet,
    pub truth: Option<ParamSet>,
    pub data_seed: Option<u64>,
    pub model: LossModel,
    pub certification_error: Option<String>,
    pub step_size: f64,
    pub step_size_source: StepSource,
    pub reference: ParamSet,
}

fn load_data(
    config: &ExperimentConfig,
    rep_seed: u64,
) -> Result<(DataSet, Option<ParamSet>, Option<u64>)> {
    match &config.data {
        DataConfig::Generate(spec) => {
            let mut spec = spec.clone();
            if config.reseed_data {
                spec.seed = rep_seed;
            }
            let (data, truth) = generate(&spec).context("generating data")?;
            Ok((data, Some(truth), Some(spec.seed)))
        }
        DataConfig::File { path } => {
            let data = load_dataset(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((data, None, None))
        }
    }
}

/// Loads data, certifies the loss, fixes the step size and the reference.
pub fn prepare(config: &ExperimentConfig, rep_seed: u64) -> Result<Prepared> {
    let (dataset, truth, data_seed) = load_data(config, rep_seed)?;
    if dataset.is_empty() {
        bail!("dataset is empty");
    }
    let mut model = config.loss.build()?;
    let certification_error = model
        .certify_constants(&dataset)
        .err()
        .map(|e| e.to_string());
    let (step_size, step_size_source) = match config.em.step_size {
        Some(g) => (g, StepSource::Configured),
        None => match &certification_error {
            None => (EmConfig::default_step_size(&model)?, StepSource::Default),
            Some(e) => bail!("em.step_size is required when the loss cannot be certified ({e})"),
        },
    };
    let reference = match &config.reference {
        ReferenceConfig::Truth => truth
            .clone()
            .context("reference = truth needs generated data")?,
        ReferenceConfig::Explicit { params } => params.clone(),
        ReferenceConfig::Minimize {
            hint,
            restarts,
            max_iterations,
            step_size: search_step,
            spread,
            tolerance,
        } => {
            let hint = hint
                .clone()
                .or_else(|| truth.clone())
                .context("reference minimization needs a hint or generated data")?;
            let search = ReferenceSearch {
                restarts: *restarts,
                max_iterations: *max_iterations,
                step_size: search_step.unwrap_or(step_size),
                spread: *spread,
                tolerance: *tolerance,
                seed: rep_seed,
            };
            reference_minimizer(&dataset, &model, config.em.softmin(), &hint, &search)?.0
        }
    };
    Ok(Prepared {
        dataset,
        truth,
        data_seed,
        model,
        certification_error,
        step_size,
        step_size_source,
        reference,
    })
}

fn initial_params(config: &ExperimentConfig, reference: &ParamSet, seed: u64) -> Result<ParamSet> {
    Ok(match &config.init {
        InitConfig::PerturbReference { c_ini } => perturb_reference(reference, *c_ini, seed)?,
        InitConfig::Explicit { params } => params.clone(),
        InitConfig::RandomBall { radius } => {
            random_ball_init(reference.k(), reference.dim(), *radius, seed)?
        }
    })
}

/// `c_ini` as the largest initial distance relative to the reference norm.
fn relative_radius(config: &ExperimentConfig, init: &ParamSet, reference: &ParamSet) -> f64 {
    if let InitConfig::PerturbReference { c_ini } = config.init {
        return c_ini;
    }
    init.iter()
        .zip(reference.iter())
        .map(|(a, b)| gradem_core::linalg::distance(a, b) / gradem_core::linalg::norm(b))
        .fold(0.0, f64::max)
}

/// Theorem quantities at a prepared instance, or the reason they are absent.
pub fn theory_for(
    config: &ExperimentConfig,
    prepared: &Prepared,
    c_ini: f64,
) -> (
    Option<ProblemConstants>,
    Option<TheoremQuantities>,
    Option<String>,
) {
    let constants =
        match estimate_constants(&prepared.dataset, &prepared.reference, &prepared.model) {
            Ok(c) => c,
            Err(e) => return (None, None, Some(e.to_string())),
        };
    let Ok(curvature) = prepared.model.curvature() else {
        return (Some(constants), None, prepared.certification_error.clone());
    };
    let Some(beta) = config.em.beta.finite() else {
        return (
            Some(constants),
            None,
            Some("theorem quantities need a finite beta".into()),
        );
    };
    // Distance radius: the theorem measures c_ini in units of ‖θ*‖ ≤ 1.
    let radius = c_ini * prepared.reference.max_norm();
    let q = TheoremQuantities::compute(
        &constants,
        curvature,
        prepared.step_size,
        beta,
        radius,
        prepared.reference.k(),
        config.theory.c_universal,
    );
    let note = q.contraction_error.clone();
    (Some(constants), Some(q), note)
}

fn bound_value(form: BoundForm, d0: f64, r: f64, zeta: f64, iterations: usize) -> Option<f64> {
    let t = u32::try_from(iterations).ok()?;
    let v = match form {
        BoundForm::Recursion => predicted_distance_bound(&[d0], r, zeta, t),
        BoundForm::Asymptotic => asymptotic_distance_bound(&[d0], r, zeta, t),
        BoundForm::Summary => summary_distance_bound(&[d0], r, zeta, t),
    };
    v.ok().map(|v| v[0])
}

fn plateau(distances: &[f64]) -> f64 {
    let tail = (distances.len() / 4).max(1);
    let last = &distances[distances.len() - tail..];
    last.iter().sum::<f64>() / last.len() as f64
}

/// Runs one repetition against an already prepared instance.
pub fn run_repetition(
    config: &ExperimentConfig,
    prepared: &Prepared,
    repetition: usize,
    seed: u64,
) -> Result<(RepetitionReport, gradem_core::ConvergenceTrace)> {
    let reference = &prepared.reference;
    let dataset = &prepared.dataset;
    let model = &prepared.model;
    let init = initial_params(config, reference, seed)?;
    let em = EmConfig {
        step_size: prepared.step_size,
        iterations: config.em.iterations,
        softmin: config.em.softmin(),
        resample: config.em.resample,
        seed,
    };
    let run = run_gradient_em(&init, dataset, model, &em, Some(reference))
        .with_context(|| format!("gradient EM, repetition {repetition}"))?;
    let trace = run.trace;
    let first = &trace.records[0];
    let last = trace.final_record();
    let c_ini = relative_radius(config, &init, reference);
    let (constants, quantities, theory_note) = theory_for(config, prepared, c_ini);

    let d0 = first.max_distance();
    let bound = quantities.as_ref().and_then(|q| {
        q.contraction
            .and_then(|r| bound_value(config.theory.bound, d0, r, q.zeta, config.em.iterations))
    });
    let final_max = last.max_distance();
    let success = bound.map(|b| final_max <= b);

    let checks = &config.checks;
    let lemmas = checks
        .lemmas
        .then(|| match (config.em.beta.finite(), model.curvature()) {
            (None, _) => Check::Skipped("lemma bounds need a finite beta".into()),
            (_, Err(e)) => Check::Skipped(e.to_string()),
            (Some(beta), Ok(_)) => {
                match check_lemma_bounds(
                    dataset,
                    reference,
                    model,
                    beta,
                    c_ini,
                    checks.lemma_trials,
                    seed,
                ) {
                    Ok((lemma1, lemma2)) => Check::Ran(LemmaPair { lemma1, lemma2 }),
                    Err(e) => Check::Errored(e.to_string()),
                }
            }
        });
    let decomposition = checks.decomposition.then(|| {
        let fold = if config.em.resample {
            partition_dataset(dataset, config.em.iterations, seed).map(|mut f| f.swap_remove(0))
        } else {
            Ok(dataset.clone())
        };
        match fold.and_then(|f| step_decomposition(&init, &f, model, &em, reference)) {
            Ok(s) => Check::Ran(s),
            Err(e) => Check::Errored(e.to_string()),
        }
    });
    let gradient_oracle = checks.gradient_oracle.then(|| {
        match check_gradients(
            model,
            dataset,
            &init,
            checks.gradient_samples,
            1.0,
            DEFAULT_FD_STEP,
            GRADIENT_TOLERANCE,
            seed,
        ) {
            Ok(g) => Check::Ran(g),
            Err(e) => Check::Errored(e.to_string()),
        }
    });
    let brute_force = checks.brute_force.then(|| {
        if reference.dim() > 2 || reference.k() > 2 {
            return Check::Skipped("brute force needs d <= 2 and k <= 2".into());
        }
        let grid = GridSpec {
            lo: -checks.grid_radius,
            hi: checks.grid_radius,
            points: checks.grid_points,
        };
        match brute_force_minimize(dataset, model, em.softmin, reference.k(), &grid) {
            Ok(BruteForceResult {
                params,
                loss,
                cell_variation,
            }) => Check::Ran(BruteForceCheck {
                em_loss: last.loss,
                grid_loss: loss,
                cell_variation,
                grid_params: params,
                passed: loss <= last.loss + cell_variation,
            }),
            Err(e) => Check::Errored(e.to_string()),
        }
    });

    let report = RepetitionReport {
        repetition,
        seed,
        data_seed: prepared.data_seed,
        step_size: prepared.step_size,
        step_size_source: prepared.step_size_source,
        curvature: model.curvature().ok(),
        certification_error: prepared.certification_error.clone(),
        reference: reference.clone(),
        c_ini,
        constants,
        quantities,
        theory_note,
        initial_distances: first.distances.clone(),
        final_distances: last.distances.clone(),
        final_alignment: last.alignment.clone(),
        final_loss: last.loss,
        fitted_rate: trace.fitted_rate,
        fitted_floor: trace.fitted_floor,
        plateau: plateau(&trace.max_distances()),
        bound,
        success,
        lemmas,
        decomposition,
        gradient_oracle,
        brute_force,
        final_params: run.params,
    };
    Ok((report, trace))
}

/// Worker count from `GRADEM_WORKERS`, if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every repetition, writes `report.json`, `trace.csv` and `plot.csv`
/// to the output directory and returns the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers_from_env() {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building worker pool")?;
    pool.install(|| run_in_pool(config))
}

fn run_in_pool(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..config.repetitions as u64)
        .map(|r| config.seed.wrapping_add(r))
        .collect();
    let shared = if config.reseed_data && matches!(config.data, DataConfig::Generate(_)) {
        None
    } else {
        Some(prepare(config, config.seed)?)
    };

    let outcomes = seeds
        .par_iter()
        .enumerate()
        .map(|(r, &seed)| -> Result<_> {
            let t0 = Instant::now();
            let owned;
            let prepared = match &shared {
                Some(p) => p,
                None => {
                    owned = prepare(config, seed)?;
                    &owned
                }
            };
            let (report, trace) = run_repetition(config, prepared, r, seed)?;
            info!(
                "rep {r}: final distance {:.3e}, rate {:?}",
                report.final_max_distance(),
                report.fitted_rate
            );
            Ok((report, trace, t0.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    let mut repetitions = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    let mut repetition_seconds = Vec::with_capacity(outcomes.len());
    for (report, trace, secs) in outcomes {
        if let Some(w) = reference_norm_warning(&report.reference) {
            let w = format!("rep {}: {w}", report.repetition);
            warn!("{w}");
            warnings.push(w);
        }
        failures.extend(report.failures());
        repetitions.push(report);
        traces.push(trace);
        repetition_seconds.push(secs);
    }
    let judged: Vec<bool> = repetitions.iter().filter_map(|r| r.success).collect();
    let success_frequency = (!judged.is_empty())
        .then(|| judged.iter().filter(|&&s| s).count() as f64 / judged.len() as f64);

    write_traces(&config.output_dir, &traces)?;
    let report = ExperimentReport {
        config: config.clone(),
        seeds,
        repetitions,
        success_frequency,
        failures,
        warnings,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            repetition_seconds,
        },
    };
    let file = fs::File::create(config.output_dir.join("report.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)?;
    Ok(report)
}

/// `trace.csv` (rep,t,j,distance,loss) and `plot.csv` (rep,t,j,log_distance).
pub fn write_traces(dir: &Path, traces: &[gradem_core::ConvergenceTrace]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut trace = BufWriter::new(fs::File::create(dir.join("trace.csv"))?);
    let mut plot = BufWriter::new(fs::File::create(dir.join("plot.csv"))?);
    writeln!(trace, "rep,t,j,distance,loss")?;
    writeln!(plot, "rep,t,j,log_distance")?;
    for (rep, tr) in traces.iter().enumerate() {
        for rec in &tr.records {
            for (j, d) in rec.distances.iter().enumerate() {
                writeln!(trace, "{rep},{},{j},{d},{}", rec.t, rec.loss)?;
                writeln!(plot, "{rep},{},{j},{}", rec.t, d.ln())?;
            }
        }
    }
    trace.flush()?;
    plot.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub step_size: f64,
    pub step_size_source: StepSource,
    pub curvature: Option<Curvature>,
    pub c_ini: f64,
    pub constants: Option<ProblemConstants>,
    pub quantities: Option<TheoremQuantities>,
    pub note: Option<String>,
}

/// Theory quantities for the first repetition's instance, without running EM.
pub fn compute_bounds(config: &ExperimentConfig) -> Result<BoundsReport> {
    config.validate()?;
    let prepared = prepare(config, config.seed)?;
    let init = initial_params(config, &prepared.reference, config.seed)?;
    let c_ini = relative_radius(config, &init, &prepared.reference);
    let (constants, quantities, note) = theory_for(config, &prepared, c_ini);
    Ok(BoundsReport {
        step_size: prepared.step_size,
        step_size_source: prepared.step_size_source,
        curvature: prepared.model.curvature().ok(),
        c_ini,
        constants,
        quantities,
        note,
    })
}

/// Input of the `check-gradients` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientCheckSpec {
    #[serde(flatten)]
    pub loss: crate::config::LossSpec,
    #[serde(default = "default_check_dim")]
    pub d: usize,
    #[serde(default = "default_check_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_fd_step")]
    pub h: f64,
    #[serde(default = "default_gradient_tolerance")]
    pub tolerance: f64,
}

fn default_check_dim() -> usize {
    3
}

fn default_check_samples() -> usize {
    100
}

fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}

fn default_gradient_tolerance() -> f64 {
    GRADIENT_TOLERANCE
}

/// Finite-difference sweep on random unit-ball data for one loss.
pub fn run_gradient_check(spec: &GradientCheckSpec) -> Result<GradientCheck> {
    use gradem_core::{Covariate, GenKind, GenSpec};
    let model = spec.loss.build()?;
    let kind = if spec.loss.family.is_classification() {
        GenKind::GenerativeLogisticMix
    } else {
        GenKind::GenerativeMlr
    };
    let gen = GenSpec {
        seed: spec.seed,
        noise_sigma: if kind == GenKind::GenerativeMlr {
            0.5
        } else {
            0.0
        },
        covariate: Covariate::UniformBall { radius: 1.0 },
        ..GenSpec::new(kind, 1, spec.d, spec.samples.max(1))
    };
    let (data, _) = generate(&gen)?;
    let center = random_ball_init(1, spec.d, 1.0, spec.seed)?;
    Ok(check_gradients(
        &model,
        &data,
        &center,
        spec.samples,
        1.0,
        spec.h,
        spec.tolerance,
        spec.seed,
    )?)
}
