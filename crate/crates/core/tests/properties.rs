use gradem_core::linalg::{distance, dot, norm_sq, sub};
use gradem_core::verify::relative_error;
use gradem_core::{
    brute_force_minimize, check_lemma_bounds, empirical_loss, finite_diff_gradient, generate,
    run_gradient_em, step_decomposition, Covariate, DataSet, EmConfig, GenKind, GenSpec, GridSpec,
    LabeledSample, Link, LossFamily, LossModel, ParamSet, SoftMinConfig,
};
use proptest::prelude::*;

fn family_model(family: LossFamily) -> LossModel {
    match family {
        LossFamily::RegGlm => LossModel::new(family, 0.5)
            .unwrap()
            .with_link(Link::LogisticCdf)
            .unwrap(),
        _ => LossModel::new(family, 0.3).unwrap(),
    }
}

fn label(family: LossFamily, raw: f64) -> f64 {
    if family.is_classification() {
        if raw >= 0.0 {
            1.0
        } else {
            -1.0
        }
    } else {
        raw
    }
}

fn family() -> impl Strategy<Value = LossFamily> {
    prop::sample::select(LossFamily::CERTIFIABLE.to_vec())
}

fn vector(d: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn analytic_gradients_match_central_differences(
        family in family(),
        (x, theta) in (1usize..5).prop_flat_map(|d| (vector(d, 1.0), vector(d, 2.0))),
        raw in -1.0f64..1.0,
    ) {
        let model = family_model(family);
        let s = LabeledSample::new(x, label(family, raw));
        let an = model.gradient(&s, &theta).unwrap();
        let fd = finite_diff_gradient(&model, &s, &theta, 1e-5).unwrap();
        prop_assert!(relative_error(&an, &fd, 1e-6) <= 1e-5, "{an:?} vs {fd:?}");
    }

    #[test]
    fn certified_constants_sandwich_the_bregman_gap(
        family in family(),
        (xs, a, b) in (1usize..4).prop_flat_map(|d| (
            prop::collection::vec((vector(d, 0.5), -1.0f64..1.0), 1..8),
            vector(d, 3.0),
            vector(d, 3.0),
        )),
    ) {
        let mut model = family_model(family);
        let data = DataSet::new(
            xs.into_iter().map(|(x, y)| LabeledSample::new(x, label(family, y))).collect()
        ).unwrap();
        let c = model.certify_constants(&data).unwrap();
        let gap = norm_sq(&sub(&b, &a));
        for s in &data {
            let fa = model.value(s, &a).unwrap();
            let fb = model.value(s, &b).unwrap();
            let g = model.gradient(s, &a).unwrap();
            let bregman = fb - fa - dot(&g, &sub(&b, &a));
            let slack = 1e-10 * (1.0 + fa.abs() + fb.abs());
            prop_assert!(bregman >= 0.5 * c.strong_convexity * gap - slack);
            prop_assert!(bregman <= 0.5 * c.smoothness * gap + slack);
        }
    }

    #[test]
    fn single_component_em_is_gradient_descent(seed in any::<u64>(), steps in 1usize..30) {
        let spec = GenSpec { seed, noise_sigma: 0.3, ..GenSpec::new(GenKind::GenerativeMlr, 1, 3, 40) };
        let (data, _) = generate(&spec).unwrap();
        let mut model = LossModel::new(LossFamily::RidgeSquared, 0.1).unwrap();
        model.certify_constants(&data).unwrap();
        let gamma = EmConfig::default_step_size(&model).unwrap();
        let config = EmConfig {
            step_size: gamma,
            iterations: steps,
            softmin: SoftMinConfig::finite(3.0).unwrap(),
            resample: false,
            seed,
        };
        let start = vec![0.5, -0.25, 1.0];
        let run = run_gradient_em(&ParamSet::new(vec![start.clone()]).unwrap(), &data, &model, &config, None).unwrap();
        let mut theta = start;
        for _ in 0..steps {
            let mut acc = vec![0.0; 3];
            for s in &data {
                let g = model.gradient(s, &theta).unwrap();
                for (a, gi) in acc.iter_mut().zip(&g) {
                    *a += gi;
                }
            }
            let scale = gamma / data.len() as f64;
            theta = theta.iter().zip(&acc).map(|(t, a)| t - scale * a).collect();
        }
        prop_assert_eq!(run.params.component(0), &theta[..]);
    }

    #[test]
    fn one_step_obeys_the_triangle_split(seed in any::<u64>(), beta in 0.0f64..20.0, gamma in 0.0f64..0.3) {
        let spec = GenSpec {
            seed,
            margin: 0.5,
            noise_sigma: 0.1,
            truth: Some(ParamSet::new(vec![vec![0.8, 0.6], vec![-0.6, 0.8]]).unwrap()),
            ..GenSpec::new(GenKind::GenerativeMlr, 2, 2, 30)
        };
        let (data, truth) = generate(&spec).unwrap();
        let model = LossModel::new(LossFamily::RidgeSquared, 0.01).unwrap();
        let params = gradem_core::perturb_reference(&truth, 0.3, seed).unwrap();
        let config = EmConfig {
            step_size: gamma,
            iterations: 1,
            softmin: SoftMinConfig::finite(beta).unwrap(),
            resample: false,
            seed,
        };
        let split = step_decomposition(&params, &data, &model, &config, &truth).unwrap();
        prop_assert!(split.holds(), "{split:?}");
    }
}

#[test]
fn lemma_sweep_on_a_separated_instance() {
    let spec = GenSpec {
        seed: 17,
        margin: 1.0,
        covariate: Covariate::UniformBall { radius: 1.0 },
        truth: Some(ParamSet::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap()),
        ..GenSpec::new(GenKind::GenerativeMlr, 2, 2, 200)
    };
    let (data, truth) = generate(&spec).unwrap();
    let mut model = LossModel::new(LossFamily::RidgeSquared, 1e-3).unwrap();
    model.certify_constants(&data).unwrap();
    let (l1, l2) = check_lemma_bounds(&data, &truth, &model, 10.0, 0.1, 60, 3).unwrap();
    assert!(l1.checked >= 10_000);
    assert!(!l1.bound_vacuous && !l2.bound_vacuous, "{l1:?} {l2:?}");
    assert_eq!((l1.violations, l2.violations), (0, 0));
}

#[test]
fn grid_optimum_is_no_worse_than_gradient_em() {
    let spec = GenSpec {
        seed: 5,
        margin: 1.0,
        noise_sigma: 0.05,
        truth: Some(ParamSet::new(vec![vec![1.0], vec![-1.0]]).unwrap()),
        ..GenSpec::new(GenKind::GenerativeMlr, 2, 1, 12)
    };
    let (data, truth) = generate(&spec).unwrap();
    let model = LossModel::new(LossFamily::RidgeSquared, 0.01).unwrap();
    let softmin = SoftMinConfig::finite(10.0).unwrap();
    let config = EmConfig {
        step_size: 0.05,
        iterations: 400,
        softmin,
        resample: false,
        seed: 0,
    };
    let init = gradem_core::perturb_reference(&truth, 0.2, 1).unwrap();
    let run = run_gradient_em(&init, &data, &model, &config, None).unwrap();
    let em_loss = empirical_loss(&run.params, &data, &model, softmin).unwrap();
    let grid = GridSpec {
        lo: -2.0,
        hi: 2.0,
        points: 401,
    };
    let brute = brute_force_minimize(&data, &model, softmin, 2, &grid).unwrap();
    assert!(
        brute.loss <= em_loss + brute.cell_variation,
        "{} vs {em_loss}",
        brute.loss
    );
    assert!(
        distance(&run.params.components().concat(), &[1.0, -1.0]) < 0.2
            || distance(&run.params.components().concat(), &[-1.0, 1.0]) < 0.2
    );
}
