use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikit_core::spi::{spi_from_kernels, SpiParams};
use spikit_core::stats::{
    corpus_stats, correlation_p_value, pearson, pearson_permutation_p, preservation_rate,
    regularized_incomplete_beta, StatsError,
};
use statrs::distribution::{Beta, ContinuousCDF, StudentsT};

fn t_table_p(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    2.0 * (1.0 - dist.cdf(t.abs()))
}

#[test]
fn fixtures() {
    let c = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
    assert!((c.r - 1.0).abs() < 1e-12);
    let c = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
    assert!((c.r + 1.0).abs() < 1e-12);
    let c = pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
    assert!((c.r - 0.5).abs() < 1e-12);
    assert!((c.p - t_table_p(0.5, 3)).abs() < 1e-9);
}

#[test]
fn p_against_student_t() {
    let p = correlation_p_value(0.3, 100);
    let oracle = t_table_p(0.3, 100);
    assert!(((p - oracle) / oracle).abs() < 0.05, "{p} vs {oracle}");
    assert!((p - 0.0024257334625830316).abs() < 1e-9);
    for n in [4, 5, 10, 30, 250] {
        for r in [-0.9, -0.4, 0.05, 0.2, 0.6, 0.95] {
            let p = correlation_p_value(r, n);
            assert!((p - t_table_p(r, n)).abs() < 1e-8, "n={n} r={r}");
        }
    }
}

#[test]
fn incomplete_beta_against_statrs() {
    for (a, b) in [(0.5, 0.5), (2.0, 3.0), (49.0, 0.5), (1.5, 7.0)] {
        let dist = Beta::new(a, b).unwrap();
        for x in [0.01, 0.2, 0.5, 0.8, 0.99] {
            let v = regularized_incomplete_beta(a, b, x);
            assert!((v - dist.cdf(x)).abs() < 1e-10, "a={a} b={b} x={x}");
        }
    }
}

#[test]
fn permutation_p_tracks_analytic() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let y = [2.0, 1.0, 4.0, 3.0, 7.0, 5.0, 6.0];
    let exact = pearson_permutation_p(&x, &y).unwrap();
    let analytic = pearson(&x, &y).unwrap().p;
    assert!(exact > 0.0 && exact < 0.1);
    assert!((exact - analytic).abs() < 0.05);
    assert_eq!(
        pearson_permutation_p(&[0.0; 10], &[0.0; 10]),
        Err(StatsError::TooManyForExact(10))
    );
}

#[test]
fn error_cases() {
    assert_eq!(
        pearson(&[1.0, 2.0], &[1.0, 2.0]),
        Err(StatsError::TooFewPoints(2))
    );
    assert!(matches!(
        pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
        Err(StatsError::LengthMismatch { .. })
    ));
    assert_eq!(
        pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
        Err(StatsError::ZeroVariance)
    );
}

#[test]
fn shuffled_null() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
    let mut y: Vec<f64> = x
        .iter()
        .map(|v| v * 0.8 + 0.2 * rng.random::<f64>())
        .collect();
    let trials = 200;
    let mut ok = 0;
    for _ in 0..trials {
        y.shuffle(&mut rng);
        let c = pearson(&x, &y).unwrap();
        if c.r.abs() < 0.1 && c.p > 0.01 {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.95 * trials as f64, "{ok}/{trials}");
}

#[test]
fn preservation_examples() {
    let p = SpiParams::default();
    let mk = |x: f64| spi_from_kernels(0.5 + x / 2.0, 0.5 - x / 2.0, &p);
    let rs = [mk(0.5), mk(-0.2), mk(0.1), mk(0.0)];
    assert_eq!(preservation_rate(&rs).unwrap(), 0.5);
    assert_eq!(preservation_rate(&rs[..1]).unwrap(), 1.0);
    assert_eq!(preservation_rate(&[mk(-0.3)]).unwrap(), 0.0);
    assert_eq!(preservation_rate(&[]), Err(StatsError::EmptyInput));
}

#[test]
fn duplicated_corpus() {
    let one = corpus_stats(&["The dog saw the cat."]).unwrap();
    assert_eq!((one.token_count, one.word_type_count), (5, 4));
    assert!((one.ttr - 0.8).abs() < 1e-15);
    let two = corpus_stats(&["The dog saw the cat.", "The dog saw the cat."]).unwrap();
    assert_eq!(two.token_count, 10);
    assert_eq!(two.word_type_count, 4);
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )
    })
}

proptest! {
    #[test]
    fn symmetric_and_bounded((x, y) in series()) {
        if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((a.r - b.r).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a.r));
            prop_assert!((0.0..=1.0).contains(&a.p));
        }
    }

    #[test]
    fn affine_invariance((x, y) in series(), scale in 0.01f64..50.0, shift in -20.0f64..20.0) {
        if let Ok(base) = pearson(&x, &y) {
            let x2: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
            let moved = pearson(&x2, &y).unwrap();
            prop_assert!((base.r - moved.r).abs() < 1e-9);
            let flipped: Vec<f64> = x.iter().map(|v| -v * scale + shift).collect();
            prop_assert!((base.r + pearson(&flipped, &y).unwrap().r).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_line((x, _) in series(), a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0], b in -5.0f64..5.0) {
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let Ok(c) = pearson(&x, &y) {
            prop_assert!((c.r - a.signum()).abs() < 1e-9);
        }
    }
}
