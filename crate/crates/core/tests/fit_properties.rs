use std::f64::consts::PI;

use divacancy::analysis::*;
use divacancy::simulator::{Axis, MeasurementRecord, RecordMeta};
use proptest::prelude::*;

fn record(x: Vec<f64>, y: Vec<f64>, axis: Axis) -> MeasurementRecord {
    let n = x.len();
    MeasurementRecord::new(
        x,
        y,
        vec![0.0; n],
        RecordMeta {
            label: "synthetic".into(),
            axis,
            seed: 0,
            shots: 1,
        },
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn phase_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn damped_cosine_noiseless(
        a in 0.2f64..2.0,
        t_d in 4e-6f64..20e-6,
        n in 1.0f64..3.0,
        f in 0.3e6f64..1.5e6,
        phi in -3.0f64..3.0,
        b in -0.5f64..0.5,
    ) {
        let x: Vec<f64> = (1..=200).map(|k| k as f64 * 0.15e-6).collect();
        let y = x.iter().map(|&t| damped_cosine(t, a, t_d, n, f, phi, b)).collect();
        let fit = fit_damped_cosine(&record(x, y, Axis::Time), None).unwrap();
        prop_assert!(rel(fit.value("a"), a) < 1e-6, "a {}", fit.value("a"));
        prop_assert!(rel(fit.value("t_d"), t_d) < 1e-6, "t_d {}", fit.value("t_d"));
        prop_assert!(rel(fit.value("n"), n) < 1e-6, "n {}", fit.value("n"));
        prop_assert!(rel(fit.value("f"), f) < 1e-6, "f {}", fit.value("f"));
        prop_assert!(phase_gap(fit.value("phi"), phi) < 1e-6);
        prop_assert!((fit.value("b") - b).abs() < 1e-6 * a);
    }

    #[test]
    fn lorentzian_pair_noiseless(
        baseline in 100.0f64..1000.0,
        c1 in 1250e6f64..1270e6,
        c2 in 1430e6f64..1450e6,
        w1 in 4e6f64..12e6,
        w2 in 4e6f64..12e6,
        k1 in 0.01f64..0.05,
        k2 in 0.01f64..0.05,
    ) {
        let truth = LorentzianPair {
            baseline,
            center_minus: c1,
            width_minus: w1,
            contrast_minus: k1,
            center_plus: c2,
            width_plus: w2,
            contrast_plus: k2,
        };
        let x: Vec<f64> = (0..=520).map(|k| 1.22e9 + k as f64 * 0.5e6).collect();
        let y = x.iter().map(|&f| truth.eval(f)).collect();
        let fit = fit_lorentzian_pair(&record(x, y, Axis::Frequency)).unwrap();
        prop_assert!((fit.value("center_minus") - c1).abs() < 1e-6 * w1);
        prop_assert!((fit.value("center_plus") - c2).abs() < 1e-6 * w2);
        prop_assert!(rel(fit.value("width_minus"), w1) < 1e-6);
        prop_assert!(rel(fit.value("contrast_plus"), k2) < 1e-6);
        prop_assert!(rel(fit.value("baseline"), baseline) < 1e-6);
    }

    #[test]
    fn line_noiseless(slope in -2e5f64..2e5, intercept in -1e9f64..2e9, points in 3usize..30) {
        let x: Vec<f64> = (0..points).map(|k| 280.0 + 1.5 * k as f64).collect();
        let y: Vec<f64> = x.iter().map(|t| slope * t + intercept).collect();
        let fit = fit_linear(&x, &y, None).unwrap();
        prop_assert!((fit.value("slope") - slope).abs() <= 1e-6 * slope.abs().max(1.0));
        prop_assert!((fit.value("intercept") - intercept).abs() <= 1e-6 * intercept.abs().max(1.0));
    }
}
