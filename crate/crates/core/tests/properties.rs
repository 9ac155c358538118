use proptest::prelude::*;
use tubevar::geometry::{directed_distance, hausdorff_distance};
use tubevar::measure::{discrete_measure, integrate, ScalarField, Window, XiRule};
use tubevar::scenario::{parse, Scenario, ScenarioFile, SensitivityExpect, SensitivityScenario};
use tubevar::sensitivity::{
    delayed_control, integration_grid, simulate_state, ControlSignal, ControlSystem, DerivativeSide,
    SensitivitySettings,
};
use tubevar::variation::{eta_delta_eps_profile, Multifunction, Partition, VariationSettings};
use tubevar::{SetValue, Trajectory};

fn cloud(max: usize) -> impl Strategy<Value = SetValue> {
    prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 1..max).prop_map(SetValue::cloud)
}

/// Values on a uniform grid of `[0, 1]`.
fn samples(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec(-3.0..3.0f64, 2..max).prop_map(|v| {
        let n = v.len() - 1;
        ((0..=n).map(|i| i as f64 / n as f64).collect(), v)
    })
}

fn lerp(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&x| x <= t).clamp(1, times.len() - 1);
    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
    values[k - 1] + w * (values[k] - values[k - 1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric(a in cloud(6), b in cloud(6), c in cloud(6)) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert!(hausdorff_distance(&a, &a).unwrap() == 0.0);
        prop_assert!((ab - hausdorff_distance(&b, &a).unwrap()).abs() < 1e-12);
        let ac = hausdorff_distance(&a, &c).unwrap();
        let cb = hausdorff_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
        prop_assert!(directed_distance(&a, &b).unwrap() <= ab);
    }

    #[test]
    fn box_distance_matches_its_corners(lo in prop::collection::vec(-2.0..0.0f64, 2), w in prop::collection::vec(0.0..2.0f64, 2), p in prop::collection::vec(-4.0..4.0f64, 2)) {
        let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
        let bx = SetValue::boxed(lo.clone(), hi.clone());
        let corners = SetValue::cloud(vec![
            vec![lo[0], lo[1]], vec![lo[0], hi[1]], vec![hi[0], lo[1]], vec![hi[0], hi[1]],
        ]);
        let pt = SetValue::point(p);
        // farthest point of a box from a point is a corner
        let d = directed_distance(&bx, &pt).unwrap();
        prop_assert!((d - directed_distance(&corners, &pt).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn variation_of_linear_interpolant_is_the_sum_of_steps((times, values) in samples(12)) {
        let (t2, v2) = (times.clone(), values.clone());
        let f = Multifunction::from_point_map((0.0, 1.0), move |t, _| vec![lerp(&t2, &v2, t)])
            .with_breakpoints(times.clone());
        let xbar = Trajectory::from_fn(0.0, 1.0, 4, |_| vec![0.0]).unwrap();
        let prof = eta_delta_eps_profile(&f, &xbar, &times, 0.0, 1.0 / 16.0, &VariationSettings::default()).unwrap();
        let mut acc = 0.0;
        for (i, &t) in times.iter().enumerate() {
            if i > 0 {
                acc += (values[i] - values[i - 1]).abs();
            }
            prop_assert!((prof.at(t) - acc).abs() < 1e-9, "t = {t}: {} vs {acc}", prof.at(t));
        }
        prop_assert!(prof.values.windows(2).all(|w| w[0].eta <= w[1].eta));
    }

    #[test]
    fn x_independent_measure_telescopes((times, values) in samples(10), level in 2u32..8) {
        let (t2, v2) = (times.clone(), values.clone());
        let m = ScalarField::time_only((0.0, 1.0), 1, move |t| lerp(&t2, &v2, t));
        let xbar = Trajectory::from_fn(0.0, 1.0, 4, |t| vec![t]).unwrap();
        let p = Partition::dyadic(0.0, 1.0, level, &[]).unwrap();
        let mu = discrete_measure(&m, &xbar, &p, &XiRule::Left, 0.0).unwrap();
        let total = integrate(|_| vec![1.0], &mu, Window::Closed);
        prop_assert!((total - (values[values.len() - 1] - values[0])).abs() < 1e-9);
        let first = mu.atoms[0].weight[0];
        let last = mu.atoms[mu.atoms.len() - 1].weight[0];
        prop_assert!((integrate(|_| vec![1.0], &mu, Window::RightOpen) - (total - last)).abs() < 1e-12);
        prop_assert!((integrate(|_| vec![1.0], &mu, Window::LeftOpen) - (total - first)).abs() < 1e-12);
    }

    #[test]
    fn delay_is_a_clamped_shift((times, values) in samples(8), h in -0.4..0.4f64, t in 0.0..1.0f64) {
        let vals: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
        let u = ControlSignal::from_samples(&times, &vals).unwrap();
        let uh = delayed_control(&u, h);
        let want = u.eval((t - h).clamp(0.0, 1.0));
        prop_assert!((uh.eval(t)[0] - want[0]).abs() < 1e-9, "{} vs {}", uh.eval(t)[0], want[0]);
        prop_assert_eq!(uh.span(), u.span());
    }

    #[test]
    fn control_variation_is_monotone_and_exact((times, values) in samples(10)) {
        let vals: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
        let u = ControlSignal::from_samples(&times, &vals).unwrap();
        let table = u.variation_table(&times);
        prop_assert!(table.windows(2).all(|w| w[0].1 <= w[1].1 + 1e-12));
        let tv: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        prop_assert!((table[table.len() - 1].1 - tv).abs() < 1e-9);
    }

    #[test]
    fn linear_ode_matches_exponential(a in -2.0..2.0f64, x0 in -2.0..2.0f64) {
        let sys = ControlSystem::new(vec![x0], SetValue::interval(-1.0, 1.0), move |x, _| vec![a * x[0]], move |_, _| vec![a], |x| x[0], |_| vec![1.0]);
        let u = ControlSignal::constant((0.0, 1.0), vec![0.0]).unwrap();
        let x = simulate_state(&sys, &u, &integration_grid(&u, 256)).unwrap();
        for (t, v) in x.times().iter().zip(x.values()) {
            prop_assert!((v[0] - x0 * (a * t).exp()).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scenario_round_trips(h in prop::collection::vec(-0.1..0.1f64, 1..4), steps in 1usize..5000, tol in 1e-6..1.0f64) {
        let file = ScenarioFile {
            schema_version: 1,
            scenarios: vec![Scenario::Sensitivity(SensitivityScenario {
                name: "s".into(),
                system: "decay".into(),
                control: Some("ramp".into()),
                control_samples: None,
                expect: vec![SensitivityExpect { h: h[0], value: -1.0, tolerance: tol }],
                h,
                side: DerivativeSide::Left,
                settings: SensitivitySettings {
                    sim: tubevar::sensitivity::SimSettings { steps },
                    ..Default::default()
                },
                filippov_h: vec![],
            })],
        };
        let src = toml::to_string(&file).unwrap();
        prop_assert_eq!(parse(&src).unwrap(), file);
    }
}
