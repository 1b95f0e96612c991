//! Remainder sets `R_{r,d}`, the multiplicative functions `θ_r`, `φ°_{r,d}`,
//! `ν`, `Q`, the triple sum `Θ_r`, and the character sums `S_{d,n,r}`.
//!
//! Every closed form ships with a brute-force evaluation of its defining sum.

use num_integer::Integer;

use crate::arith::{factor_u64, inv_mod, is_prime_u64, kronecker, FactorSieve};
use crate::constants::CompensatedSum;
use crate::error::{domain, Result};
use crate::Rational;

/// Residues `N mod d²` for which `d² | r²N − 4P` with `(r²N² − 4PN)/d² ≡ 0, 1 (mod 4)`
/// is solvable by square-free `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemainderSet {
    pub r: u64,
    pub d: u64,
    pub p: u64,
    /// Sorted residues modulo `d²`.
    pub residues: Vec<u64>,
}

impl RemainderSet {
    pub fn admissible(&self) -> bool {
        !self.residues.is_empty()
    }
}

fn v2(n: u64) -> u32 {
    n.trailing_zeros()
}

fn check_prime(p: u64) -> Result<()> {
    if p <= 2 || !is_prime_u64(p) {
        return domain(format!("P must be an odd prime, got {p}"));
    }
    Ok(())
}

/// `|R_{r,d}|` from the case table; zero means the pair is not admissible.
pub fn residue_count(r: u64, d: u64) -> usize {
    let g = r.gcd(&d);
    match g {
        1 if (r * d) % 2 == 1 => 1,
        1 if r % 2 == 0 => 1,
        2 if v2(d) == 1 => 1,
        2 if d % 4 == 0 => 2,
        _ => 0,
    }
}

pub fn is_admissible(r: u64, d: u64) -> bool {
    residue_count(r, d) > 0
}

fn inv(a: i128, m: u64) -> u64 {
    inv_mod(a.rem_euclid(m as i128) as u64, m).expect("unit by construction")
}

/// `R_{r,d}` from the congruence analysis. Requires `d² ≤ 4P`.
pub fn remainder_set(r: u64, d: u64, p: u64) -> Result<RemainderSet> {
    check_prime(p)?;
    if r == 0 || d == 0 {
        return domain("r and d must be positive");
    }
    if (d as u128) * (d as u128) > 4 * p as u128 {
        return domain(format!("d² ≤ 4P fails for d = {d}, P = {p}"));
    }
    let m = d * d;
    let pp = p as i128;
    let mut residues = Vec::new();
    if m == 1 {
        residues.push(0);
    } else if r % 2 == 1 {
        if d % 2 == 1 && r.gcd(&d) == 1 {
            let ri = inv((r as i128) * (r as i128), m) as i128;
            residues.push(((4 * pp) % m as i128 * ri % m as i128) as u64);
        }
    } else {
        let l = r / 2;
        if d % 2 == 1 {
            if l.gcd(&d) == 1 {
                let li = inv((l as i128) * (l as i128), m) as i128;
                residues.push((pp % m as i128 * li % m as i128) as u64);
            }
        } else {
            let b = d / 2;
            if l.gcd(&b) == 1 {
                let l2 = (l as i128) * (l as i128);
                let b2 = (b as i128) * (b as i128);
                let mi = m as i128;
                let first = || (pp % mi * inv(l2, m) as i128 % mi) as u64;
                let second = || (pp % mi * inv(l2 - b2, m) as i128 % mi) as u64;
                match (l % 2, b % 2) {
                    (1, 1) => residues.push(first()),
                    (0, 1) => residues.push(second()),
                    (1, 0) => {
                        residues.push(first());
                        residues.push(second());
                    }
                    _ => {}
                }
            }
        }
    }
    residues.sort_unstable();
    residues.dedup();
    Ok(RemainderSet { r, d, p, residues })
}

fn square_free_compatible(n: u64, modulus: u64) -> bool {
    // a class mod `modulus` contains square-free numbers iff no p² | gcd(n, modulus)
    // with p² | modulus
    factor_u64(modulus)
        .iter()
        .all(|&(q, e)| e < 2 || n % (q * q) != 0)
}

/// `R_{r,d}` by scanning one period `N mod 4d²` of the defining conditions.
pub fn remainder_set_bruteforce(r: u64, d: u64, p: u64) -> Result<Vec<u64>> {
    check_prime(p)?;
    if r == 0 || d == 0 {
        return domain("r and d must be positive");
    }
    let m = d * d;
    let period = 4 * m;
    let (r2, pp, mi) = ((r * r) as i128, p as i128, m as i128);
    let mut out = Vec::new();
    for n in 0..period {
        let ni = n as i128;
        let lin = r2 * ni - 4 * pp;
        if lin % mi != 0 || !square_free_compatible(n, period) {
            continue;
        }
        let s = ni * (lin / mi);
        if s.rem_euclid(4) <= 1 {
            out.push(n % m);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `s = (r²N² − 4PN)/d² mod 2` for `N ≡ n (mod 4d²)`.
pub fn s_parity(r: u64, d: u64, p: u64, n: u64) -> Option<u64> {
    let m = (d * d) as i128;
    let lin = (r * r) as i128 * n as i128 - 4 * p as i128;
    (lin % m == 0).then(|| (n as i128 * (lin / m)).rem_euclid(2) as u64)
}

fn check_v2(m: u64, what: &str) -> Result<()> {
    if m == 0 {
        return domain(format!("{what} must be positive"));
    }
    if matches!(v2(m), 1 | 2) {
        return domain(format!("v_2({what}) ∈ {{1, 2}} for {what} = {m}"));
    }
    Ok(())
}

/// `θ_r(m) = Σ_{a mod m} (a/m)((ar² − 4P)/m)` by direct summation.
pub fn theta_bruteforce(r: u64, m: u64, p: u64) -> Result<i64> {
    check_v2(m, "m")?;
    let r2 = (r * r) as i64;
    let mi = m as i64;
    let mut acc = 0i64;
    for a in 0..mi {
        let x = kronecker(a, mi);
        if x != 0 {
            acc += (x * kronecker(a * r2 - 4 * p as i64, mi)) as i64;
        }
    }
    Ok(acc)
}

fn theta_prime_power(r: u64, q: u64, e: u32) -> i64 {
    let pe1 = q.pow(e - 1) as i64;
    if q == 2 {
        return if r % 2 == 0 {
            0
        } else if e % 2 == 0 {
            pe1
        } else {
            -pe1
        };
    }
    let qi = q as i64;
    match (r % q == 0, e % 2 == 0) {
        (false, false) => -pe1,
        (false, true) => pe1 * (qi - 2),
        (true, false) => 0,
        (true, true) => pe1 * (qi - 1),
    }
}

/// `θ_r(m)` from the multiplicative closed form; falls back to the defining
/// sum when `P | m`.
pub fn theta(r: u64, m: u64, p: u64) -> Result<i64> {
    check_v2(m, "m")?;
    if m % p == 0 {
        return theta_bruteforce(r, m, p);
    }
    Ok(theta_closed(r, m))
}

/// The multiplicative closed form, extended to `v_2(m) ∈ {1, 2}` by the same
/// prime-power formula (the convention of the `Θ_r` Euler product).
fn theta_closed(r: u64, m: u64) -> i64 {
    factor_u64(m)
        .into_iter()
        .map(|(q, e)| theta_prime_power(r, q, e))
        .product()
}

fn is_square(n: u64) -> bool {
    let s = num_integer::Roots::sqrt(&n);
    s * s == n
}

fn check_g(d: u64, g: u64) -> Result<()> {
    check_v2(g, "g")?;
    if factor_u64(g).iter().any(|&(q, _)| d % q != 0) {
        return domain(format!("g = {g} has a prime not dividing d = {d}"));
    }
    Ok(())
}

/// `φ°_{r,d}(g)` from the five-case closed form. Non-admissible pairs give 0.
pub fn phi_circ(r: u64, d: u64, g: u64) -> Result<i64> {
    check_g(d, g)?;
    Ok(phi_circ_closed(r, d, g))
}

/// The five-case closed form, also applied at `v_2(g) = 2`.
fn phi_circ_closed(r: u64, d: u64, g: u64) -> i64 {
    if !is_admissible(r, d) || !is_square(g) {
        return 0;
    }
    let phi = crate::arith::phi_from_factors(&factor_u64(g)) as i64;
    let two_d = v2(d);
    if two_d == 0 || (two_d == 1 && g % 2 == 1) {
        phi
    } else if two_d == 1 && v2(r) == 1 {
        0
    } else {
        2 * phi
    }
}

/// `φ°_{r,d}(g)` by summing over `a mod d²g` with `a mod d² ∈ R_{r,d}`.
pub fn phi_circ_bruteforce(r: u64, d: u64, g: u64, p: u64) -> Result<i64> {
    check_g(d, g)?;
    weighted_class_sum(r, d, g, p)
}

/// `Σ_{a mod d²m, a mod d² ∈ R_{r,d}} (a/m)(((r²a − 4P)/d²)/m)` by direct summation.
pub fn weirdsum_bruteforce(r: u64, d: u64, m: u64, p: u64) -> Result<i64> {
    check_v2(m, "m")?;
    weighted_class_sum(r, d, m, p)
}

fn weighted_class_sum(r: u64, d: u64, m: u64, p: u64) -> Result<i64> {
    let set = remainder_set(r, d, p)?;
    let d2 = (d * d) as i64;
    let r2 = (r * r) as i64;
    let mi = m as i64;
    let mut acc = 0i64;
    for &t in &set.residues {
        for v in 0..mi {
            let a = t as i64 + v * d2;
            let s = (r2 * a - 4 * p as i64) / d2;
            acc += (kronecker(a, mi) * kronecker(s, mi)) as i64;
        }
    }
    Ok(acc)
}

/// `φ°_{r,d}(g)·θ_r(m')` with `g = (d^∞, m)` and `m' = m/g`.
pub fn weirdsum(r: u64, d: u64, m: u64, p: u64) -> Result<i64> {
    check_v2(m, "m")?;
    let (g, rest) = split_smooth(m, d);
    Ok(phi_circ(r, d, g)? * theta(r, rest, p)?)
}

/// `(g, m/g)` with `g` the largest divisor of `m` supported on primes of `d`.
fn split_smooth(m: u64, d: u64) -> (u64, u64) {
    let mut g = 1;
    let mut rest = m;
    loop {
        let c = rest.gcd(&d);
        if c == 1 {
            break;
        }
        while rest % c == 0 {
            rest /= c;
            g *= c;
        }
    }
    (g, rest)
}

fn q_local(q: u64) -> Rational {
    let p = q as i128;
    let p2 = p * p;
    Rational::new(p2, p2 * p2 - 2 * p2 - p + 1)
}

/// `Q(d) = μ²(d) ∏_{p|d} p²/(p⁴ − 2p² − p + 1)`.
pub fn q_exact(d: u64) -> Result<Rational> {
    if d == 0 {
        return domain("d must be positive");
    }
    let f = factor_u64(d);
    if f.iter().any(|&(_, e)| e > 1) {
        return Ok(Rational::from_integer(0));
    }
    Ok(f.iter()
        .fold(Rational::from_integer(1), |acc, &(q, _)| acc * q_local(q)))
}

/// `ν(r) = ∏_{p|r} (1 + p²/(p⁴ − 2p² − p + 1))`, exactly.
pub fn nu_exact(r: u64) -> Result<Rational> {
    if r == 0 {
        return domain("r must be positive");
    }
    let one = Rational::from_integer(1);
    Ok(factor_u64(r)
        .iter()
        .fold(one, |acc, &(q, _)| acc * (one + q_local(q))))
}

pub fn nu(r: u64) -> Result<f64> {
    let v = nu_exact(r)?;
    Ok(*v.numer() as f64 / *v.denom() as f64)
}

/// `Σ Θ_r(m, d, g)` over admissible `d ≤ Z` and `mg ≤ Z'` with `(m, d) = 1`,
/// `g | d^∞`, where `Θ_r = (η/φ)(d²mg)·θ_r(m)φ°(g)/(mgd)`.
///
/// Terms with `v_2(m)` or `v_2(g)` in `{1, 2}` enter through the closed forms;
/// the Euler product `B·ν(r)` is only reached with them included.
pub fn theta_sum_partial(r: u64, z: u64, zp: u64, p: u64) -> Result<f64> {
    check_prime(p)?;
    if r == 0 || z == 0 || zp == 0 {
        return domain("r and the cutoffs must be positive");
    }
    let sieve = FactorSieve::new(z.max(zp).max(2))?;
    // w(m) = θ_r(m) / (m² ∏_{p|m}(1 − p^{−2})), zero where θ_r is undefined
    let mut w = vec![0.0f64; zp as usize + 1];
    for m in 1..=zp {
        let th = if m % p == 0 {
            theta_bruteforce(r, m, p)?
        } else {
            theta_closed(r, m)
        };
        if th == 0 {
            continue;
        }
        let f = sieve.factor(m)?;
        let local: f64 = f.iter().map(|&(q, _)| 1.0 - 1.0 / (q * q) as f64).product();
        w[m as usize] = th as f64 / ((m * m) as f64 * local);
    }
    let mut acc = CompensatedSum::default();
    for d in 1..=z {
        if !is_admissible(r, d) {
            continue;
        }
        let primes: Vec<u64> = sieve.factor(d)?.iter().map(|&(q, _)| q).collect();
        let local: f64 = primes.iter().map(|&q| 1.0 - 1.0 / (q * q) as f64).product();
        let c_d = 1.0 / ((d * d * d) as f64 * local);
        let squares = smooth_squares(&primes, zp);
        let mut gs = Vec::with_capacity(squares.len());
        for g in squares {
            let pc = phi_circ_closed(r, d, g);
            if pc != 0 {
                gs.push((g, pc as f64 / (g as f64 * g as f64)));
            }
        }
        for m in 1..=zp {
            let wm = w[m as usize];
            if wm == 0.0 || m.gcd(&d) != 1 {
                continue;
            }
            for &(g, wg) in &gs {
                if m * g <= zp {
                    acc.add(c_d * wm * wg);
                }
            }
        }
    }
    Ok(acc.value())
}

/// Squares `g ≤ limit` whose prime factors all lie in `primes`, sorted.
fn smooth_squares(primes: &[u64], limit: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for &q in primes {
        let q2 = q * q;
        let mut next = Vec::new();
        for &g in &out {
            let mut x = g;
            while let Some(y) = x.checked_mul(q2).filter(|&y| y <= limit) {
                next.push(y);
                x = y;
            }
        }
        out.extend(next);
    }
    out.sort_unstable();
    out
}

/// `S_{d,n,r}`: the sum of `μ²(N)(N/n)(((r²N − 4P)/d²)/n)` over
/// `N ∈ [X, X+Y]`, `N mod d² ∈ R_{r,d}`, `P ∤ N`.
pub fn s_dnr(sieve: &FactorSieve, d: u64, n: u64, r: u64, x: u64, y: u64, p: u64) -> Result<i64> {
    check_prime(p)?;
    if n == 0 {
        return domain("n must be positive");
    }
    let hi = x + y;
    if 4 * p as u128 <= (r * r) as u128 * hi as u128 {
        return domain(format!(
            "4P > r²(X+Y) fails for P = {p}, r = {r}, X+Y = {hi}"
        ));
    }
    let set = remainder_set(r, d, p)?;
    let d2 = d * d;
    let ni = n as i64;
    let mut acc = 0i64;
    for &t in &set.residues {
        let mut big_n = x + (t + d2 - x % d2) % d2;
        while big_n <= hi {
            if big_n % p != 0 && big_n > 0 && sieve.is_squarefree(big_n)? {
                let s = ((r * r) as i64 * big_n as i64 - 4 * p as i64) / d2 as i64;
                acc += (kronecker(big_n as i64, ni) * kronecker(s, ni)) as i64;
            }
            big_n += d2;
        }
    }
    Ok(acc)
}

/// Main term `Y/ζ(2)·(η/φ)(d²n)·φ°_{r,d}(g)θ_r(n')` of `S_{d,n,r}`.
pub fn s_dnr_main_term(d: u64, n: u64, r: u64, y: u64, p: u64) -> Result<f64> {
    check_v2(n, "n")?;
    let (g, rest) = split_smooth(n, d);
    let val = phi_circ(r, d, g)? * theta(r, rest, p)?;
    let m = d * d * n;
    let local: f64 = factor_u64(m)
        .iter()
        .map(|&(q, _)| 1.0 - 1.0 / (q * q) as f64)
        .product();
    let eta_over_phi = 1.0 / (m as f64 * local);
    Ok(y as f64 / crate::constants::ZETA2 * eta_over_phi * val as f64)
}

/// Error envelope `√(Xn)/d + d·n^{3/2}` of the main-term approximation.
pub fn s_dnr_envelope(d: u64, n: u64, x: u64) -> f64 {
    ((x * n) as f64).sqrt() / d as f64 + d as f64 * (n as f64).powf(1.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_examples() {
        let s = remainder_set(1, 1, 5).unwrap();
        assert_eq!(s.residues, [0]);
        let s = remainder_set(1, 3, 5).unwrap();
        assert_eq!(s.residues, [2]);
        let s = remainder_set(2, 4, 7).unwrap();
        assert_eq!(s.residues.len(), 2);
        assert_eq!(s.residues, remainder_set_bruteforce(2, 4, 7).unwrap());
        assert!(remainder_set(1, 5, 5).is_err());
        assert!(remainder_set(1, 3, 9).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(1, 3, 5).unwrap(), -1);
        assert_eq!(theta(1, 9, 5).unwrap(), 3);
        assert_eq!(theta(3, 9, 5).unwrap(), 6);
        assert_eq!(theta_bruteforce(3, 9, 5).unwrap(), 6);
        assert!(theta(1, 2, 5).is_err());
        assert!(theta(1, 12, 5).is_err());
    }

    #[test]
    fn phi_circ_examples() {
        assert_eq!(phi_circ(1, 3, 1).unwrap(), 1);
        assert_eq!(phi_circ(2, 4, 1).unwrap(), 2);
        assert_eq!(phi_circ(1, 3, 9).unwrap(), 6);
        assert_eq!(phi_circ(2, 2, 16).unwrap(), 0);
        assert_eq!(phi_circ(4, 2, 16).unwrap(), 16);
        assert!(phi_circ(1, 3, 5).is_err());
        assert!(phi_circ(2, 2, 4).is_err());
    }

    #[test]
    fn nu_and_q() {
        assert_eq!(nu_exact(1).unwrap(), Rational::from_integer(1));
        assert_eq!(nu_exact(2).unwrap(), Rational::new(11, 7));
        assert_eq!(q_exact(1).unwrap(), Rational::from_integer(1));
        assert_eq!(q_exact(2).unwrap(), Rational::new(4, 7));
        assert_eq!(q_exact(4).unwrap(), Rational::from_integer(0));
    }

    #[test]
    fn theta_sum_trivial_cutoff() {
        assert_eq!(theta_sum_partial(1, 1, 1, 5).unwrap(), 1.0);
    }

    #[test]
    fn smooth_square_generation() {
        assert_eq!(smooth_squares(&[2, 3], 200), [1, 4, 9, 16, 36, 64, 81, 144]);
    }
}
