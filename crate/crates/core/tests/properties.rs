use phaseqec::analytics::{
    calibrate_readout, detected_syndrome_probabilities, evaluate_model, fit_curve, forward_readout, infer_input_errors,
    initial_guess, syndrome_probabilities, CurveModel, DataPoint, ModelId, ReadoutCalibration,
};
use phaseqec::experiments::{run_single_round_qec, ConventionChoice, RunOptions, SingleRoundVariant};
use phaseqec::measurement::{symmetrized_measurement_fidelity, AssignmentConvention};
use phaseqec::noise::{per_round_probability, phase_flip_channel, DeviceParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn prob() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn distribution() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.001..1.0f64).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.map(|x| x / s)
    })
}

proptest! {
    #[test]
    fn syndromes_are_a_distribution(p_in in prop::array::uniform3(prob()), p_e in prob()) {
        let p = syndrome_probabilities(p_in, p_e).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|v| *v >= -1e-15));
    }

    #[test]
    fn syndromes_symmetric_about_half(p_e in prob()) {
        let a = syndrome_probabilities([0.0; 3], p_e).unwrap();
        let b = syndrome_probabilities([0.0; 3], 1.0 - p_e).unwrap();
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn input_errors_round_trip(p_in in prop::array::uniform3(0.0..0.4f64)) {
        let measured = syndrome_probabilities(p_in, 0.0).unwrap();
        let back = infer_input_errors(measured).unwrap();
        for i in 0..3 {
            prop_assert!((back[i] - p_in[i]).abs() < 1e-9, "{:?} -> {:?}", p_in, back);
        }
    }

    #[test]
    fn readout_map_is_stochastic(p in distribution(), f0 in 0.5..=1.0f64, f1 in 0.5..=1.0f64) {
        for conv in AssignmentConvention::ALL {
            let d = detected_syndrome_probabilities(p, conv, f0, f1).unwrap();
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrized_readout_equals_mean_fidelity(p in distribution(), f0 in 0.5..=1.0f64, f1 in 0.5..=1.0f64) {
        let mut avg = [0.0; 4];
        for conv in AssignmentConvention::ALL {
            let d = detected_syndrome_probabilities(p, conv, f0, f1).unwrap();
            for k in 0..4 {
                avg[k] += 0.25 * d[k];
            }
        }
        let f = 0.5 * (f0 + f1);
        let direct = detected_syndrome_probabilities(p, AssignmentConvention::OPTIMAL, f, f).unwrap();
        for k in 0..4 {
            prop_assert!((avg[k] - direct[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrized_measurement_fidelity_is_flat(p_e in 0.0..=0.5f64, f0 in 0.5..=1.0f64, f1 in 0.5..=1.0f64) {
        let params = DeviceParams { f0_readout: f0, f1_readout: f1, ..DeviceParams::calibrated() };
        let fm = symmetrized_measurement_fidelity(p_e, &params).unwrap();
        prop_assert!((fm - (0.5 * (f0 + f1)).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn rounds_compose_to_total_error(p_e in 0.0..=0.5f64, n in 1u32..=10) {
        let p_n = per_round_probability(p_e, n).unwrap();
        prop_assert!((0.0..=0.5).contains(&p_n));
        prop_assert!(((1.0 - 2.0 * p_n).powi(n as i32) - (1.0 - 2.0 * p_e)).abs() < 1e-12);
    }

    #[test]
    fn phase_flip_channel_is_complete(p in prob()) {
        prop_assert!(phase_flip_channel(p).is_ok());
    }

    #[test]
    fn calibration_round_trip(
        qubit in prop::array::uniform3(0.5..1.0f64),
        init in prop::array::uniform3(0.5..1.0f64),
        pair in 0.5..1.1f64,
        triple in 0.5..1.1f64,
        f_n in 0.7..=1.0f64,
    ) {
        let cal = ReadoutCalibration { qubit, init, multi: vec![(vec![0, 2], pair), (vec![0, 1, 2], triple)] };
        let (single, multi) = forward_readout(&cal, f_n).unwrap();
        let back = calibrate_readout(single, &multi, f_n).unwrap();
        for i in 0..3 {
            prop_assert!((back.qubit[i] - qubit[i]).abs() < 1e-10);
            prop_assert!((back.init[i] - init[i]).abs() < 1e-10);
        }
        prop_assert!((back.multi[0].1 - pair).abs() < 1e-10);
        prop_assert!((back.multi[1].1 - triple).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qec_model_matches_ideal_simulation(p_e in 0.0..=1.0f64) {
        let sim = run_single_round_qec(&[p_e], &DeviceParams::ideal(), ConventionChoice::default(), SingleRoundVariant::Qec, &RunOptions::exact()).unwrap();
        let model = CurveModel::new(ModelId::FQec).with("O", 0.0).with("A", 1.0);
        prop_assert!((sim.points[0].fidelity - evaluate_model(&model, p_e).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn exact_syndromes_sum_to_one(p_e in 0.0..=1.0f64, conv in 0usize..4) {
        let c = ConventionChoice::Fixed(AssignmentConvention::ALL[conv]);
        let sim = run_single_round_qec(&[p_e], &DeviceParams::calibrated(), c, SingleRoundVariant::Qec, &RunOptions::exact()).unwrap();
        prop_assert!((sim.points[0].syndrome.unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_is_seed_deterministic(seed in any::<u64>()) {
        let opts = RunOptions::monte_carlo(60, seed);
        let run = || run_single_round_qec(&[0.1, 0.3], &DeviceParams::calibrated(), ConventionChoice::Symmetrized, SingleRoundVariant::Qec, &opts).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn fit_coverage_on_own_model() {
    let truth = CurveModel::new(ModelId::Weighted).with("w", 0.81).with("A", 0.557).with("O", 0.086);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(500);
    let mut covered = [0usize; 3];
    let reps = 500;
    for _ in 0..reps {
        let data: Vec<_> = grid
            .iter()
            .map(|&x| DataPoint::with_sigma(x, evaluate_model(&truth, x).unwrap() + noise.sample(&mut rng), 0.01))
            .collect();
        let fit = fit_curve(&initial_guess(ModelId::Weighted, &data), &["w", "A", "O"], &data).unwrap();
        for (i, k) in ["w", "A", "O"].iter().enumerate() {
            covered[i] += usize::from((fit.params[*k] - truth.params[*k]).abs() <= 3.0 * fit.sigmas[*k]);
        }
    }
    for (k, c) in ["w", "A", "O"].iter().zip(covered) {
        assert!(c * 100 >= 99 * reps, "{k}: {c}/{reps}");
    }
}
