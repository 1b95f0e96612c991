use murmur_core::arith::{
    count_sqrt_mod_prime_power, count_squarefree_twisted, factor_u64, inv_mod, is_prime_u64,
    kronecker, powmod, sqrt_mod_composite, sqrt_mod_prime_power, squarefree_in_class_count,
    sum_mu2_phi, FactorSieve,
};
use murmur_core::Error;
use num_integer::Integer;
use proptest::prelude::*;

fn is_squarefree_naive(n: u64) -> bool {
    (2..).take_while(|q| q * q <= n).all(|q| n % (q * q) != 0)
}

fn phi_naive(n: u64) -> u64 {
    (1..=n).filter(|a| a.gcd(&n) == 1).count() as u64
}

#[test]
fn kronecker_known_values() {
    assert_eq!(kronecker(2, 7), 1);
    assert_eq!(kronecker(3, 7), -1);
    assert_eq!(kronecker(-1, 3), -1);
    assert_eq!(kronecker(-1, 5), 1);
    assert_eq!(kronecker(5, 8), -1);
    assert_eq!(kronecker(-3, 2), -1);
    assert_eq!(kronecker(-7, 2), 1);
    assert_eq!(kronecker(6, 9), 0);
    assert_eq!(kronecker(0, 1), 1);
    assert_eq!(kronecker(-23, 0), 0);
}

#[test]
fn kronecker_multiplicative_exhaustive() {
    for n in 1..=200i64 {
        for a in -200..=200i64 {
            let ka = kronecker(a, n);
            for b in -200..=200i64 {
                assert_eq!(
                    ka * kronecker(b, n),
                    kronecker(a * b, n),
                    "a={a} b={b} n={n}"
                );
            }
        }
    }
}

#[test]
fn kronecker_matches_euler_criterion() {
    for p in (3..500u64).filter(|&p| is_prime_u64(p)) {
        for a in 0..p {
            let e = powmod(a, (p - 1) / 2, p);
            let want = if e == 0 {
                0
            } else if e == 1 {
                1
            } else {
                -1
            };
            assert_eq!(kronecker(a as i64, p as i64), want, "a={a} p={p}");
        }
    }
}

#[test]
fn sieve_functions_match_naive() {
    let sieve = FactorSieve::new(3000).unwrap();
    for n in 1..=3000u64 {
        let sf = is_squarefree_naive(n);
        assert_eq!(sieve.is_squarefree(n).unwrap(), sf);
        let mu = sieve.mu(n).unwrap();
        assert_eq!(mu * mu, sf as i32);
        assert_eq!(sieve.euler_phi(n).unwrap(), phi_naive(n));
        let product: u64 = sieve
            .factor(n)
            .unwrap()
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product();
        assert_eq!(product, n);
    }
}

#[test]
fn divisor_sum_of_phi_is_identity() {
    let sieve = FactorSieve::new(10_000).unwrap();
    for n in 1..=10_000u64 {
        let s: u64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| sieve.euler_phi(d).unwrap())
            .sum();
        assert_eq!(s, n);
    }
}

#[test]
fn eta_depends_on_radical_only() {
    let sieve = FactorSieve::new(10_000).unwrap();
    for m in 1..=10_000u64 {
        let rad = sieve.radical(m).unwrap();
        assert_eq!(sieve.eta(m).unwrap(), sieve.eta(rad).unwrap());
    }
}

#[test]
fn twisted_count_matches_enumeration() {
    let sieve = FactorSieve::new(1000).unwrap();
    for m in 1..=50u64 {
        let mut running = 0;
        for z in 1..=1000u64 {
            if z.gcd(&m) == 1 && is_squarefree_naive(z) {
                running += 1;
            }
            if z % 37 == 0 || z == 1000 {
                assert_eq!(
                    count_squarefree_twisted(&sieve, z, m).unwrap(),
                    running,
                    "z={z} m={m}"
                );
            }
        }
    }
}

#[test]
fn sum_mu2_phi_small_values() {
    let sieve = FactorSieve::new(2000).unwrap();
    // 1 + 1 + 2 + 4 + 2 + 6 = 16 over the square-free n ≤ 7
    assert_eq!(sum_mu2_phi(&sieve, 7).unwrap(), 16);
    let naive: u128 = (1..=2000u64)
        .filter(|&n| is_squarefree_naive(n))
        .map(|n| phi_naive(n) as u128)
        .sum();
    assert_eq!(sum_mu2_phi(&sieve, 2000).unwrap(), naive);
}

#[test]
fn sieve_limits_are_enforced() {
    let sieve = FactorSieve::new(100).unwrap();
    assert!(matches!(sieve.factor(101), Err(Error::OutOfRange { .. })));
    assert!(matches!(
        sum_mu2_phi(&sieve, 101),
        Err(Error::OutOfRange { .. })
    ));
    assert!(matches!(
        squarefree_in_class_count(&sieve, 10, 5, 2, 4),
        Err(Error::Domain(_))
    ));
}

#[test]
fn sqrt_counts_match_enumeration() {
    for (p, e) in [
        (2u64, 1u32),
        (2, 2),
        (2, 3),
        (2, 5),
        (3, 1),
        (3, 3),
        (5, 2),
        (7, 2),
        (11, 1),
        (13, 2),
    ] {
        let m = p.pow(e);
        for a in -(m as i128)..(2 * m as i128) {
            let want: Vec<u64> = (0..m)
                .filter(|&x| ((x * x) as i128 - a).rem_euclid(m as i128) == 0)
                .collect();
            let mut got = sqrt_mod_prime_power(a, p, e);
            got.sort_unstable();
            assert_eq!(got, want, "a={a} mod {p}^{e}");
            assert_eq!(count_sqrt_mod_prime_power(a, p, e), want.len() as u64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn factor_u64_reconstructs(n in 1u64..u64::MAX / 2) {
        let f = factor_u64(n);
        let mut prod: u128 = 1;
        for &(p, e) in &f {
            prop_assert!(is_prime_u64(p));
            prod *= (p as u128).pow(e);
        }
        prop_assert_eq!(prod, n as u128);
        prop_assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn inverse_is_inverse(a in 1u64..1_000_000, m in 2u64..1_000_000) {
        match inv_mod(a, m) {
            Some(x) => prop_assert_eq!((a as u128 * x as u128) % m as u128, 1),
            None => prop_assert!(a.gcd(&m) > 1),
        }
    }

    #[test]
    fn composite_roots_square_to_target(a in -5000i128..5000, m in 1u64..3000) {
        let f = factor_u64(m);
        let roots = sqrt_mod_composite(a, &f);
        let naive = (0..m).filter(|&x| ((x * x) as i128 - a).rem_euclid(m as i128) == 0).count();
        prop_assert_eq!(roots.len(), naive);
        for x in roots {
            prop_assert_eq!(((x as i128) * (x as i128) - a).rem_euclid(m as i128), 0);
        }
    }

    #[test]
    fn class_count_matches_enumeration(x in 1u64..5000, y in 0u64..2000, m in 1u64..50, a in 0u64..50) {
        prop_assume!(a.gcd(&m) == 1);
        let sieve = FactorSieve::new(7000).unwrap();
        let want = (x..=x + y).filter(|&n| n % m == a % m && is_squarefree_naive(n)).count() as u64;
        prop_assert_eq!(squarefree_in_class_count(&sieve, x, y, a, m).unwrap(), want);
    }
}
