use ndarray::Array2;
use proptest::prelude::*;
use robustopt_core::learning::{
    apply_corruption, baseline_even_split, baseline_individual, baseline_uniform, bottleneck_losses, ensemble_predict,
    robust_train, train_oracle, CorruptedCopies, CorruptionSet, CorruptionSpec, DatasetRole, Image, LabeledDataset,
    Method, MlpParams, TrainConfig,
};
use robustopt_core::rng::{derive_seed, SplitMix64};
use robustopt_core::robust::WeightVector;

/// Ten noisy class prototypes on an 8 × 8 canvas.
fn synthetic(n: usize, seed: u64, role: DatasetRole) -> LabeledDataset {
    let mut proto_rng = SplitMix64::new(1);
    let protos: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..64).map(|_| if proto_rng.bernoulli(0.3) { 0.9 } else { 0.0 }).collect())
        .collect();
    let mut rng = SplitMix64::new(seed);
    let mut labels = Vec::with_capacity(n);
    let mut pixels = Vec::with_capacity(n * 64);
    for _ in 0..n {
        let y = rng.below(10);
        labels.push(y as u8);
        pixels.extend(protos[y].iter().map(|&p| (p + rng.uniform(-0.1, 0.1)).clamp(0.0, 1.0) as f32));
    }
    LabeledDataset::new(8, 8, Array2::from_shape_vec((n, 64), pixels).unwrap(), labels, role).unwrap()
}

fn small_cfg(steps: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 0.5,
        steps,
        batch_size: 20,
        hidden: 16,
        seed: 3,
    }
}

#[test]
fn one_hot_weights_make_both_methods_identical() {
    let train = synthetic(200, 5, DatasetRole::Train);
    let cset = CorruptionSet::pixel();
    for i in 0..cset.m() {
        let w = WeightVector::<f64>::point_mass(cset.m(), i).unwrap();
        let h = train_oracle(Method::Hybrid, &w, &train, &cset, &small_cfg(15)).unwrap();
        let c = train_oracle(Method::Composite, &w, &train, &cset, &small_cfg(15)).unwrap();
        assert_eq!(h.params, c.params, "corruption {i}");
        assert_eq!(h.batch_losses, c.batch_losses);
    }
}

#[test]
fn identical_copies_reduce_to_plain_training() {
    let train = synthetic(100, 6, DatasetRole::Train);
    let four = CorruptionSet::new("id4", vec![CorruptionSpec::Identity; 4]).unwrap();
    let one = CorruptionSet::new("id1", vec![CorruptionSpec::Identity]).unwrap();
    let c = train_oracle(Method::Composite, &WeightVector::<f64>::uniform(4).unwrap(), &train, &four, &small_cfg(1)).unwrap();
    let p = train_oracle(Method::Hybrid, &WeightVector::<f64>::uniform(1).unwrap(), &train, &one, &small_cfg(1)).unwrap();
    assert!((c.batch_losses[0] - p.batch_losses[0]).abs() < 1e-12);
}

#[test]
fn composite_gradient_matches_finite_differences() {
    let data = synthetic(6, 9, DatasetRole::Train);
    let cset = CorruptionSet::mixed();
    let w = [0.1, 0.2, 0.3, 0.4];
    let copies: Vec<Array2<f64>> = cset
        .specs
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            Array2::from_shape_fn((6, 64), |(r, c)| {
                let img = data.image(r);
                apply_corruption(&img, spec, derive_seed(2, r as u64, i as u64)).unwrap().pixels()[c] as f64
            })
        })
        .collect();
    // Independent evaluation of Σ_i w_i · mean_n −ln p(y_n | c_i(x_n)) through `forward`.
    let objective = |p: &MlpParams<f64>| -> f64 {
        copies
            .iter()
            .zip(&w)
            .map(|(x, wi)| {
                let ce: f64 = x
                    .rows()
                    .into_iter()
                    .zip(&data.labels)
                    .map(|(row, &y)| -p.forward(row.as_slice().unwrap()).unwrap()[y as usize].ln())
                    .sum();
                wi * ce / 6.0
            })
            .sum()
    };
    let stacked = ndarray::concatenate(ndarray::Axis(0), &copies.iter().map(|c| c.view()).collect::<Vec<_>>()).unwrap();
    let labels: Vec<u8> = (0..4).flat_map(|_| data.labels.iter().copied()).collect();
    let row_weights: Vec<f64> = w.iter().flat_map(|&wi| std::iter::repeat_n(wi / 6.0, 6)).collect();
    let params = MlpParams::<f64>::init(64, 12, 10, 4).unwrap();
    let (loss, grad) = params.loss_and_grad(stacked.view(), &labels, &row_weights).unwrap();
    assert!((loss - objective(&params)).abs() < 1e-12);
    let mut rng = SplitMix64::new(10);
    for _ in 0..20 {
        let i = rng.below(params.num_params());
        let eps = 1e-6;
        let mut plus = params.clone();
        plus.flat_set(i, params.flat_get(i) + eps);
        let mut minus = params.clone();
        minus.flat_set(i, params.flat_get(i) - eps);
        let numeric = (objective(&plus) - objective(&minus)) / (2.0 * eps);
        let analytic = grad.flat_get(i);
        let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-8);
        assert!(rel < 1e-4, "param {i}: {analytic} vs {numeric}");
    }
}

#[test]
fn training_loss_goes_down() {
    let train = synthetic(500, 7, DatasetRole::Train);
    let cset = CorruptionSet::pixel();
    let w = WeightVector::<f32>::uniform(4).unwrap();
    let cfg = TrainConfig {
        batch_size: 50,
        ..small_cfg(50)
    };
    let t = train_oracle(Method::Hybrid, &w, &train, &cset, &cfg).unwrap();
    let first: f32 = t.batch_losses[..10].iter().sum::<f32>() / 10.0;
    let last: f32 = t.batch_losses[40..].iter().sum::<f32>() / 10.0;
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn baselines_follow_their_schedules() {
    let train = synthetic(120, 11, DatasetRole::Train);
    let val = CorruptedCopies::new(&synthetic(40, 12, DatasetRole::Validation), &CorruptionSet::pixel(), 1);
    let cset = CorruptionSet::pixel();
    let cfg = small_cfg(5);
    let seed = 77;
    let round_cfg = |t: u64| TrainConfig {
        seed: derive_seed(seed, t, 0),
        ..cfg
    };

    let even = baseline_even_split::<f64>(&train, &cset, 4, &cfg, seed).unwrap();
    for (t, p) in even.iter().enumerate() {
        let w = WeightVector::point_mass(4, t).unwrap();
        assert_eq!(*p, train_oracle(Method::Hybrid, &w, &train, &cset, &round_cfg(t as u64)).unwrap().params);
    }

    for method in [Method::Hybrid, Method::Composite] {
        let run = baseline_uniform::<f64>(&train, &val, &cset, 3, &cfg, method, seed).unwrap();
        for (t, p) in run.solutions.iter().enumerate() {
            let w = WeightVector::uniform(4).unwrap();
            assert_eq!(*p, train_oracle(method, &w, &train, &cset, &round_cfg(t as u64)).unwrap().params);
            assert_eq!(run.weight_history[t], w);
        }
    }

    // With a single corruption all three baselines train the same nets.
    let single = CorruptionSet::new("one", vec![CorruptionSpec::PixelNoise { lo: -0.05, hi: 0.05 }]).unwrap();
    let val1 = CorruptedCopies::new(&synthetic(40, 12, DatasetRole::Validation), &single, 1);
    let a = baseline_individual::<f64>(0, &train, &single, 3, &cfg, seed).unwrap();
    let b = baseline_even_split::<f64>(&train, &single, 3, &cfg, seed).unwrap();
    let c = baseline_uniform::<f64>(&train, &val1, &single, 3, &cfg, Method::Hybrid, seed).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c.solutions);
}

#[test]
fn robust_training_is_deterministic_and_jensen_holds() {
    let train = synthetic(150, 13, DatasetRole::Train);
    let cset = CorruptionSet::pixel();
    let val = CorruptedCopies::new(&synthetic(60, 14, DatasetRole::Validation), &cset, 2);
    let test = CorruptedCopies::new(&synthetic(60, 15, DatasetRole::Test), &cset, 3);
    let cfg = small_cfg(10);
    for method in [Method::Hybrid, Method::Composite] {
        let a = robust_train::<f32>(&train, &val, &cset, 4, &cfg, method, 0.5, 5).unwrap();
        let b = robust_train::<f32>(&train, &val, &cset, 4, &cfg, method, 0.5, 5).unwrap();
        assert_eq!(a.weight_history, b.weight_history);
        let losses = bottleneck_losses(&a.solutions, &test).unwrap();
        assert!(losses.ensemble <= losses.individual + 1e-12);
        for (e, i) in losses.ensemble_by_corruption.iter().zip(&losses.individual_by_corruption) {
            assert!(e <= &(i + 1e-12));
        }
        let single = bottleneck_losses(&a.solutions[..1], &test).unwrap();
        assert!((single.ensemble - single.individual).abs() < 1e-9);
    }
}

#[test]
fn uniform_nets_cost_ln_ten_and_predict_zero() {
    let test = CorruptedCopies::new(&synthetic(30, 16, DatasetRole::Test), &CorruptionSet::pixel(), 1);
    let nets = vec![MlpParams::<f64>::zeros(64, 4, 10); 3];
    let l = bottleneck_losses(&nets, &test).unwrap();
    assert!((l.individual - 10f64.ln()).abs() < 1e-12);
    assert!((l.ensemble - 10f64.ln()).abs() < 1e-12);
    assert_eq!(ensemble_predict(&nets, &[0.5; 64]).unwrap(), 0);
}

#[test]
fn ensemble_prediction_averages_probabilities() {
    // Net a puts most mass on 1, net b splits between 3 and 7; the average peaks at 3.
    let mut a = MlpParams::<f64>::zeros(1, 1, 10);
    a.b2[1] = 3.0;
    a.b2[3] = 2.5;
    let mut b = MlpParams::<f64>::zeros(1, 1, 10);
    b.b2[3] = 4.0;
    b.b2[7] = 3.9;
    let pa = a.forward(&[0.0]).unwrap();
    let pb = b.forward(&[0.0]).unwrap();
    let avg: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| 0.5 * (x + y)).collect();
    let expect = (0..10).fold(0, |best, c| if avg[c] > avg[best] { c } else { best });
    assert_eq!(expect, 3);
    assert_eq!(ensemble_predict(&[a.clone(), b], &[0.0]).unwrap(), 3);
    assert_eq!(ensemble_predict(&[a], &[0.0]).unwrap(), 1);
}

fn spec_strategy() -> impl Strategy<Value = CorruptionSpec> {
    prop_oneof![
        Just(CorruptionSpec::Identity),
        (0.0f64..=1.0).prop_map(|level| CorruptionSpec::TintBackground { level }),
        (0.0f64..=1.0).prop_map(|max_level| CorruptionSpec::GradientBackground { max_level }),
        (0.0f64..=1.0, 1usize..8).prop_map(|(level, block)| CorruptionSpec::CheckerboardBackground { level, block }),
        (0.05f64..=1.0).prop_map(|factor| CorruptionSpec::ShrinkH { factor }),
        (0.05f64..=1.0).prop_map(|factor| CorruptionSpec::ShrinkV { factor }),
        (0.05f64..=1.0).prop_map(|factor| CorruptionSpec::ShrinkBoth { factor }),
        (-0.5f64..0.5, 0.0f64..0.5).prop_map(|(lo, w)| CorruptionSpec::PixelNoise { lo, hi: lo + w }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn corrupted_images_stay_in_range(spec in spec_strategy(), seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let img = Image::new(28, 28, (0..784).map(|_| rng.unit_f64() as f32).collect()).unwrap();
        let out = apply_corruption(&img, &spec, seed).unwrap();
        prop_assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
    }
}
