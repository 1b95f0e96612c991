use std::f64::consts::PI;

use murmur_core::constants::{
    euler_constant, euler_constant_first_primes, euler_constants, q_over_d_tail_bound,
    q_sum_tail_bound, qcount_partial, sum_mu2_phi_main, CompensatedSum, Constants, EulerKind,
};
use murmur_core::multfns::q_exact;
use murmur_core::special::zeta;
use proptest::prelude::*;

#[test]
fn dim_constant_frozen() {
    // ∏_p (1 − 1/(p(p+1))) = 0.70444220099916559...
    let v = euler_constant(EulerKind::DimC, 1_000_000).unwrap();
    assert!(
        (v.value - 0.704_442_200_999_165_6).abs() <= v.tail_bound + 1e-12,
        "{v:?}"
    );
    assert!(v.tail_bound < 1e-6);
}

#[test]
fn zeta_frozen() {
    assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
    assert!((zeta(1.5) - 2.612_375_348_685_488).abs() < 1e-13);
    assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-14);
    assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-12);
}

#[test]
fn brackets_contain_the_converged_value() {
    let coarse = euler_constants(&EulerKind::ALL, 10_000).unwrap();
    let fine = euler_constants(&EulerKind::ALL, 2_000_000).unwrap();
    for (c, f) in coarse.iter().zip(&fine) {
        assert!(
            c.lower() <= f.value && f.value <= c.upper(),
            "{c:?} vs {f:?}"
        );
        assert!(f.tail_bound < c.tail_bound);
    }
}

#[test]
fn products_agree_with_q_partial_sums() {
    let t = 1_000_000;
    let s = qcount_partial(t).unwrap();
    let c = Constants::standard();
    let beta_over_alpha = c.beta() / c.alpha();
    let budget = q_sum_tail_bound(t)
        + (c.beta.tail_bound / c.alpha() + c.alpha.tail_bound * c.beta() / c.alpha().powi(2));
    assert!(s.q <= beta_over_alpha + budget);
    assert!((s.q - beta_over_alpha).abs() <= 1e-5);
    let scaled = c.alpha() / c.gamma() * s.q_over_d;
    assert!((scaled - 1.0 / PI).abs() <= 1e-5 + q_over_d_tail_bound(t));
    let qs = euler_constant(EulerKind::QSum, 10_000_000).unwrap();
    assert!((qs.value - beta_over_alpha).abs() <= qs.tail_bound + budget);
    let qd = euler_constant(EulerKind::QOverD, 10_000_000).unwrap();
    let target = c.gamma() / (c.alpha() * PI);
    assert!(
        (qd.value - target).abs()
            <= 3.0 * (qd.tail_bound + c.gamma.tail_bound + c.alpha.tail_bound),
        "{qd:?} vs {target}"
    );
}

#[test]
fn q_partial_sums_match_exact_rationals() {
    let s = qcount_partial(300).unwrap();
    let mut exact = 0.0;
    let mut over = 0.0;
    let mut root = 0.0;
    for d in 1..=300u64 {
        let q = q_exact(d).unwrap();
        let f = *q.numer() as f64 / *q.denom() as f64;
        exact += f;
        over += f / d as f64;
        root += f * (d as f64).sqrt();
    }
    assert!((s.q - exact).abs() < 1e-13);
    assert!((s.q_over_d - over).abs() < 1e-13);
    assert!((s.q_sqrt_d - root).abs() < 1e-12);
}

#[test]
fn root_sum_product_approaches_limit() {
    let v = euler_constant(EulerKind::QSqrt, 1_000_000).unwrap();
    assert!((v.value - 3.0907).abs() < 1e-3, "{v:?}");
    // 10^5 primes already land near 3.09064
    let first = euler_constant_first_primes(EulerKind::QSqrt, 100_000).unwrap();
    assert!(first.value < 3.0907 && first.value > 3.08);
}

#[test]
fn asymptotic_constants_frozen() {
    let c = Constants::standard();
    let a = 4.0 / 9.0 * (2f64.powf(1.5) - 1.0) * c.beta();
    assert!((a - 6.38936).abs() < 1e-4, "a = {a}");
    assert!((2.0 / 3.0 * c.alpha() - 2.6436).abs() < 1e-4);
    // the reference b corresponds to γ over the first 100 primes
    let g100 = euler_constant_first_primes(EulerKind::Gamma, 100).unwrap();
    assert_eq!(g100.pmax, 541);
    assert!((2.0 / 3.0 * g100.value - 11.3536).abs() < 1e-4);
    assert!((2.0 / 3.0 * c.gamma() - 11.3565).abs() < 1e-4);
}

#[test]
fn main_term_shape() {
    let dim = Constants::standard().dim_c.value;
    let z = 1e6;
    assert!((sum_mu2_phi_main(z, dim) - z * z * 3.0 / (PI * PI) * dim).abs() < 1e-3);
}

#[test]
fn kind_names_round_trip() {
    for k in EulerKind::ALL {
        assert_eq!(EulerKind::parse(k.name()).unwrap(), k);
    }
    assert!(EulerKind::parse("nope").is_err());
    assert!(euler_constant(EulerKind::Alpha, 1).is_err());
    assert!(qcount_partial(0).is_err());
}

proptest! {
    #[test]
    fn compensated_sum_recovers_small_terms(n in 1usize..2000, tiny in 1e-12f64..1e-8) {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..n {
            s.add(tiny);
        }
        s.add(-1.0);
        prop_assert!((s.value() - n as f64 * tiny).abs() <= 1e-6 * n as f64 * tiny);
    }
}
