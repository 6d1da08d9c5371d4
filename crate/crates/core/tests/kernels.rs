mod oracle;

use proxyval::numstat::{
    chi_squared_2x2, cochran_armitage, loess, reg_incomplete_gamma_upper, TrendTable, TwoByTwoTable,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn chi_squared_matches_closed_form() {
    let r = chi_squared_2x2(&TwoByTwoTable::new(20, 80, 10, 90)).unwrap();
    assert!((r.statistic - 3.9216).abs() < 1e-4);
    assert!((r.p_value - 0.0477).abs() < 1e-4);

    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let c: Vec<u64> = (0..4).map(|_| rng.gen_range(1..400)).collect();
        let got = chi_squared_2x2(&TwoByTwoTable::new(c[0], c[1], c[2], c[3])).unwrap();
        let (stat, p) = oracle::chi2_2x2(c[0] as f64, c[1] as f64, c[2] as f64, c[3] as f64);
        assert!((got.statistic - stat).abs() <= 1e-9 * stat.max(1.0), "{c:?}");
        assert!((got.p_value - p).abs() < 1e-10, "{c:?}: {} vs {p}", got.p_value);
    }
}

#[test]
fn incomplete_gamma_matches_reference() {
    assert!((reg_incomplete_gamma_upper(0.5, 1.9208).unwrap() - 0.05).abs() < 1e-4);
    let mut worst = 0.0f64;
    for i in 0..=99 {
        let s = 0.5 + 49.5 * i as f64 / 99.0;
        for j in 0..=200 {
            let x = j as f64;
            let err = (reg_incomplete_gamma_upper(s, x).unwrap() - oracle::gamma_q(s, x)).abs();
            worst = worst.max(err);
        }
    }
    assert!(worst <= 1e-10, "max error {worst:e}");
}

#[test]
fn trend_test_matches_hand_formula_and_permutation() {
    let groups = [(0.0, 10, 100), (1.0, 20, 100), (2.0, 30, 100)];
    let t = TrendTable::with_integer_scores(&[(10, 100), (20, 100), (30, 100)]).unwrap();
    let r = cochran_armitage(&t).unwrap();
    assert!((r.statistic - 3.5355339).abs() < 1e-6);
    assert!((r.statistic - oracle::trend_z(&groups)).abs() < 1e-12);

    let mut rng = StdRng::seed_from_u64(11);
    let (p, se) = oracle::trend_permutation_p(&groups, 100_000, &mut rng);
    assert!((r.p_value - p).abs() <= 3.0 * se, "analytic {} permutation {p} (se {se})", r.p_value);
}

fn random_points(rng: &mut StdRng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
    xs.sort_by(f64::total_cmp);
    let ys = xs.iter().map(|x| x.sin() + rng.gen_range(-0.3..0.3)).collect();
    (xs, ys)
}

#[test]
fn loess_matches_normal_equation_oracle() {
    let mut rng = StdRng::seed_from_u64(5);
    let (xs, ys) = random_points(&mut rng, 200);
    let robust: Vec<f64> = (0..200).map(|_| rng.gen_range(0.2..1.0)).collect();
    for span in [5, 31, 120] {
        for degree in [0, 1] {
            for w in [None, Some(robust.as_slice())] {
                let fit = loess(&xs, &ys, span, degree, w).unwrap();
                for (i, &x) in xs.iter().enumerate() {
                    let want = oracle::loess_at(&xs, &ys, span, degree, w, x);
                    assert!(
                        (fit[i] - want).abs() <= 1e-10,
                        "span {span} degree {degree} weighted {} at {i}: {} vs {want}",
                        w.is_some(),
                        fit[i]
                    );
                }
            }
        }
    }
}

#[test]
fn loess_reproduces_lines() {
    let mut rng = StdRng::seed_from_u64(8);
    let (xs, _) = random_points(&mut rng, 200);
    let ys: Vec<f64> = xs.iter().map(|x| 2.5 - 0.75 * x).collect();
    for span in [2, 3, 10, 199, 200, 260] {
        let fit = loess(&xs, &ys, span, 1, None).unwrap();
        for (f, y) in fit.iter().zip(&ys) {
            assert!((f - y).abs() <= 1e-12, "span {span}: {f} vs {y}");
        }
    }
}
