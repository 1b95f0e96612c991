use murmur_core::density::{m_max, oscillatory_kernel};
use murmur_core::signcheck::{
    enforced_budget, error_budget, f_series, grid_verify, kernel_max, m_d, q_sqrt,
    second_peak_probe, Sign, SignCheckConfig, DEFAULT_D, MIN_BUDGET,
};
use proptest::prelude::*;

/// Upper bound on `Σ Q(d)√d` used throughout; the certified value is below it.
const U: f64 = 3.0907;

#[test]
fn kernel_max_frozen() {
    // max_x Re[e^{−3πi/4} Li_{3/2}(e^{4πix})] = 0.8296318906... at x = 0.1513609...
    assert!((kernel_max() - 0.829_631_890_629_250_4).abs() < 1e-10);
    assert!((oscillatory_kernel(0.151_360_914_299_183_2) - 0.829_631_890_629_250_4).abs() < 1e-12);
}

#[test]
fn default_budget_is_reproduced() {
    let e = error_budget(&DEFAULT_D, U).unwrap();
    assert!((e - 0.6306).abs() < 5e-4, "E(D) = {e}");
    let cfg = SignCheckConfig::standard();
    assert!(enforced_budget(&cfg, U).unwrap() >= MIN_BUDGET);
    assert!(error_budget(&DEFAULT_D, 1.0).is_err());
}

#[test]
fn budget_shrinks_as_d_grows() {
    let mut d = vec![1u64];
    let mut last = error_budget(&d, U).unwrap();
    for extra in [2u64, 3, 5, 6, 7] {
        d.push(extra);
        let e = error_budget(&d, U).unwrap();
        assert!(e < last);
        last = e;
    }
    assert!((error_budget(&[1], U).unwrap() - (U - 1.0) * m_max()).abs() < 1e-12);
}

#[test]
fn single_term_set_cannot_certify() {
    // E({1}) exceeds M_max, so no sign is ever certified
    let cfg = SignCheckConfig {
        d: vec![1],
        s: 10_000,
        offsets: vec![(0.0, Sign::Negative), (0.25, Sign::Positive)],
        threshold: 0.0,
    };
    let cert = grid_verify(&cfg, U).unwrap();
    assert_eq!(cert.grid_size, 1);
    assert!(!cert.all_pass());
    assert!(cert.verdicts.iter().all(|v| v.worst_margin < 0.0));
}

#[test]
fn verdict_margins_match_direct_evaluation() {
    let cfg = SignCheckConfig {
        d: vec![1, 2, 3, 5, 6],
        s: 20_000,
        offsets: vec![(0.0, Sign::Negative)],
        threshold: 0.0,
    };
    let cert = grid_verify(&cfg, U).unwrap();
    let v = &cert.verdicts[0];
    // recompute the worst margin over one period by direct series
    let mut worst = f64::INFINITY;
    for k in 1..=cert.grid_size {
        let m = m_d(k as f64, &cfg.d, cfg.s).unwrap();
        worst = worst.min(-m.value - m.tail - cert.budget);
    }
    assert!(
        (v.worst_margin - worst).abs() < 1e-8,
        "{} vs {worst}",
        v.worst_margin
    );
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = SignCheckConfig::standard();
    cfg.d.push(12);
    assert!(grid_verify(&cfg, U).is_err());
    let mut cfg = SignCheckConfig::standard();
    cfg.offsets.push((1.5, Sign::Positive));
    assert!(grid_verify(&cfg, U).is_err());
    let mut cfg = SignCheckConfig::standard();
    cfg.s = 0;
    assert!(grid_verify(&cfg, U).is_err());
    assert!(second_peak_probe(2.0, 1.0, 10, 100, U).is_err());
}

#[test]
fn positive_region_is_not_certified_negative() {
    let r = second_peak_probe(0.1, 0.2, 200, 400, U).unwrap();
    assert!(r.max_value > 0.0);
    assert!(!r.certified_negative);
    assert!(
        (r.error_bound - kernel_max() * (U - (1..=200).map(|d| q_sqrt(d).unwrap()).sum::<f64>()))
            .abs()
            < 1e-9
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_within_tail_of_closed_form(x in -3.0f64..3.0) {
        let f = f_series(x, 50_000).unwrap();
        prop_assert!((f.value - oscillatory_kernel(x)).abs() <= f.tail + 1e-12);
    }

    #[test]
    fn m_d_is_periodic(t in 0.0f64..50.0) {
        let d = [1u64, 2, 3, 5];
        // lcm/2 = 15
        let a = m_d(t, &d, 5000).unwrap().value;
        let b = m_d(t + 15.0, &d, 5000).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9);
    }
}
