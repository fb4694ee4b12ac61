use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use proptest::prelude::*;

use esc_sat::config::{
    AnalysisSection, ControllerMode, ControllerSection, DitherSection, ExperimentConfig, HessianSource, MapSection,
    OutputSection, SimSection,
};
use esc_sat::plant::{deadzone, saturate, QuadraticMap, SaturationBounds};
use esc_sat::signals::DitherSpec;
use esc_sat::sim::Scenario;

fn finite() -> impl Strategy<Value = f64> {
    -1e3..1e3f64
}

fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        &a * a.transpose() + DMatrix::identity(n, n)
    })
}

fn config(n: usize) -> impl Strategy<Value = ExperimentConfig> {
    (
        finite(),
        prop::collection::vec(-2.0..2.0f64, n),
        spd(n),
        prop::collection::vec(0.01..1.0f64, n),
        prop::collection::vec(1i64..20, n),
        prop::collection::vec(-5.0..5.0f64, n),
        1usize..50,
        any::<bool>(),
    )
        .prop_map(move |(q, ts, h, amps, mult, th0, stride, plot)| ExperimentConfig {
            map: MapSection {
                q_star: q,
                theta_star: ts,
                hessian: HessianSource::Direct(h.clone()),
                alpha: None,
                input_bounds: Some(vec![3.0; n]),
            },
            dither: DitherSection {
                amplitudes: amps,
                multipliers: mult.into_iter().map(Rational64::from_integer).collect(),
                base_omega: 10.0,
            },
            controller: ControllerSection {
                mode: ControllerMode::Explicit,
                k: Some(-h),
                k_aw: Some(DMatrix::identity(n, n)),
                rate_bounds: None,
            },
            synthesis: None,
            sim: SimSection {
                scenario: Scenario::InputSaturation,
                theta0: th0,
                t_end: 3.0,
                dt: None,
            },
            outputs: OutputSection {
                dir: None,
                stride,
                plot,
            },
            sweep: None,
            analysis: AnalysisSection::default(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(cfg in (1usize..4).prop_flat_map(config)) {
        let text = cfg.to_string();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn saturation_splits_the_input(v in prop::collection::vec(-50.0..50.0f64, 1..5), lim in 0.1..10.0f64) {
        let b = SaturationBounds::uniform(lim, v.len()).unwrap();
        let v = DVector::from_vec(v);
        let s = saturate(&v, &b).unwrap();
        let d = deadzone(&v, &b).unwrap();
        prop_assert!(((&s + &d) - &v).norm() <= 1e-12 * (1.0 + v.norm()));
        prop_assert!(s.iter().all(|x| x.abs() <= lim));
        // the dead-zone vanishes exactly inside the bounds
        for i in 0..v.len() {
            if v[i].abs() <= lim {
                prop_assert_eq!(d[i], 0.0);
            }
        }
    }

    #[test]
    fn convex_map_output_is_bounded_below(theta in prop::collection::vec(-20.0..20.0f64, 2), q in finite()) {
        let h = DMatrix::from_row_slice(2, 2, &[100.0, 30.0, 30.0, 20.0]);
        let b = SaturationBounds::uniform(5.0, 2).unwrap();
        let map = QuadraticMap::new(q, DVector::from_vec(vec![2.0, 4.0]), h, Some(b)).unwrap();
        prop_assert!(map.output(&DVector::from_vec(theta), true).unwrap() >= q - 1e-9);
    }

    #[test]
    fn every_dither_completes_whole_cycles(mult in prop::collection::vec((1i64..30, 1i64..5), 1..4), base in 0.5..50.0f64) {
        let m: Vec<Rational64> = mult.iter().map(|(p, q)| Rational64::new(*p, *q)).collect();
        let spec = DitherSpec::new(vec![0.1; m.len()], m, base).unwrap();
        for w in spec.frequencies() {
            let cycles = w * spec.period() / (2.0 * PI);
            prop_assert!((cycles - cycles.round()).abs() < 1e-6 * cycles.max(1.0), "{cycles}");
        }
    }
}
