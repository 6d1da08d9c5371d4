mod oracle;

use std::f64::consts::PI;

use proxyval::seasonality::{stl, StlParams};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn components_add_up() {
    let mut rng = StdRng::seed_from_u64(1);
    let params = StlParams { n_outer: 2, ..StlParams::default() };
    for _ in 0..100 {
        let y: Vec<f64> = (0..36).map(|_| rng.gen_range(-50.0..150.0)).collect();
        let d = stl(&y, &params).unwrap();
        for i in 0..36 {
            let sum = d.trend[i] + d.seasonal[i] + d.remainder[i];
            assert!((sum - y[i]).abs() <= 1e-9 * y[i].abs().max(1.0));
        }
    }
}

#[test]
fn recovers_sinusoid_on_ramp() {
    let wave: Vec<f64> = (0..36).map(|t| (2.0 * PI * t as f64 / 12.0).sin()).collect();
    let ramp: Vec<f64> = (0..36).map(|t| 10.0 + 0.2 * t as f64).collect();
    let y: Vec<f64> = wave.iter().zip(&ramp).map(|(a, b)| a + b).collect();
    let d = stl(&y, &StlParams::default()).unwrap();
    assert!(oracle::pearson(&d.seasonal, &wave) >= 0.99);
    let range = ramp[35] - ramp[0];
    let worst = d.trend.iter().zip(&ramp).map(|(t, r)| (t - r).abs()).fold(0.0, f64::max);
    assert!(worst <= 0.05 * range, "trend deviation {worst}");
}

#[test]
fn constant_series_is_all_trend() {
    for (n, outer) in [(36, 0), (36, 2), (48, 1), (120, 3)] {
        let y = vec![4.25; n];
        let d = stl(&y, &StlParams { n_outer: outer, ..StlParams::default() }).unwrap();
        let tol = 1e-12 * 4.25;
        assert!(d.trend.iter().all(|&t| (t - 4.25).abs() <= tol));
        assert!(d.seasonal.iter().chain(&d.remainder).all(|&v| v.abs() <= tol));
    }
}
