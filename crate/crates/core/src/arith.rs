//! Integer substrate: smallest-prime-factor sieve, factorization beyond the
//! sieve, Kronecker symbols, square roots modulo prime powers, and the
//! elementary multiplicative functions and square-free counts.

use num_integer::Integer;

use crate::error::{domain, Error, Result};
use crate::Rational;

/// Smallest-prime-factor table for `2..=limit`.
///
/// Immutable after construction, so it can be shared across threads.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return domain(format!("sieve limit must be at least 2, got {limit}"));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Resource(format!(
                "sieve limit {limit} does not fit 32-bit factor entries"
            )));
        }
        let len = limit as usize + 1;
        let mut spf: Vec<u32> = Vec::new();
        spf.try_reserve_exact(len)
            .map_err(|e| Error::Resource(format!("sieve of size {limit}: {e}")))?;
        spf.resize(len, 0);
        let mut i = 2usize;
        while i < len {
            if spf[i] == 0 {
                spf[i] = i as u32;
                if let Some(start) = i.checked_mul(i) {
                    let mut j = start;
                    while j < len {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
            i += 1;
        }
        Ok(FactorSieve { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.limit {
            Err(Error::OutOfRange {
                what: "n",
                value: n,
                limit: self.limit,
            })
        } else {
            Ok(())
        }
    }

    /// Smallest prime factor of `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n < 2 {
            return domain("spf is defined for n >= 2");
        }
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(n >= 2 && self.spf[n as usize] as u64 == n)
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (2..=self.limit).filter(move |&n| self.spf[n as usize] as u64 == n)
    }

    /// Prime factorization of `1 <= n <= limit` as `(p, e)` pairs, `p` increasing.
    pub fn factor(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        if n == 0 {
            return domain("cannot factor 0");
        }
        Ok(self.factor_small(n))
    }

    fn factor_small(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Factorization of any `n >= 1`: table lookup inside the sieve range,
    /// otherwise trial division by sieved primes followed by a deterministic
    /// primality test and Pollard rho on any composite cofactor.
    pub fn factor_any(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 {
            return domain("cannot factor 0");
        }
        if n <= self.limit {
            return Ok(self.factor_small(n));
        }
        let mut rest = n;
        let mut out: Vec<(u64, u32)> = Vec::new();
        let mut p = 2u64;
        while p <= self.limit && p * p <= rest {
            if self.spf[p as usize] as u64 == p && rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            p += 1;
        }
        if rest > 1 {
            if rest <= self.limit {
                out.extend(self.factor_small(rest));
            } else {
                for (q, e) in factor_u64(rest) {
                    out.push((q, e));
                }
            }
        }
        out.sort_unstable();
        Ok(merge_factors(out))
    }

    pub fn mu(&self, n: u64) -> Result<i32> {
        self.check(n)?;
        if n == 0 {
            return domain("mu(0) is undefined");
        }
        let mut s = 1;
        for (_, e) in self.factor_small(n) {
            if e > 1 {
                return Ok(0);
            }
            s = -s;
        }
        Ok(s)
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n == 0 {
            return domain("phi(0) is undefined");
        }
        Ok(phi_from_factors(&self.factor_small(n)))
    }

    pub fn is_squarefree(&self, n: u64) -> Result<bool> {
        Ok(self.mu(n)? != 0)
    }

    /// `η(m) = m/ψ(m) = ∏_{p|m} p/(p+1)`.
    pub fn eta(&self, m: u64) -> Result<Rational> {
        self.check(m)?;
        if m == 0 {
            return domain("eta(0) is undefined");
        }
        Ok(eta_from_factors(&self.factor_small(m)))
    }

    /// Largest square-free divisor of `n`.
    pub fn radical(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n == 0 {
            return domain("rad(0) is undefined");
        }
        Ok(self.factor_small(n).iter().map(|&(p, _)| p).product())
    }
}

fn merge_factors(sorted: Vec<(u64, u32)>) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::with_capacity(sorted.len());
    for (p, e) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == p => last.1 += e,
            _ => out.push((p, e)),
        }
    }
    out
}

pub fn phi_from_factors(f: &[(u64, u32)]) -> u64 {
    f.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

pub fn eta_from_factors(f: &[(u64, u32)]) -> Rational {
    let mut r = Rational::from_integer(1);
    for &(p, _) in f {
        r *= Rational::new(p as i128, p as i128 + 1);
    }
    r
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Full factorization of a 64-bit integer without a sieve.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes: Vec<u64> = Vec::new();
    let mut rest = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while rest % p == 0 {
            primes.push(p);
            rest /= p;
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    merge_factors(primes.into_iter().map(|p| (p, 1)).collect())
}

/// Kronecker symbol `(a/n)` for all integers, by binary reciprocity.
pub fn kronecker(a: i64, n: i64) -> i32 {
    const TAB2: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];
    let mut a = a as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v % 2 == 0 {
        1
    } else {
        TAB2[(a & 7) as usize]
    };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b > 1 { 0 } else { k };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB2[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// One square root of a quadratic residue `a` modulo an odd prime `p`.
fn tonelli_shanks(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if powmod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(powmod(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(a, q, p);
    let mut r = powmod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulmod(t2, t2, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(r)
}

/// Roots of `y² ≡ u (mod p^f)` for `u` a unit.
fn unit_sqrt_prime_power(u: u64, p: u64, f: u32) -> Vec<u64> {
    let m = p.pow(f);
    let u = u % m;
    if p == 2 {
        return match f {
            1 => vec![1],
            2 => {
                if u % 4 == 1 {
                    vec![1, 3]
                } else {
                    vec![]
                }
            }
            _ => {
                if u % 8 != 1 {
                    return vec![];
                }
                let mut r = 1u64;
                for j in 3..f {
                    let modj = 1u64 << (j + 1);
                    if (mulmod(r, r, modj) + modj - u % modj) % modj != 0 {
                        r += 1 << (j - 1);
                    }
                }
                let half = m / 2;
                let mut v = vec![r % m, (m - r) % m, (r + half) % m, (m - r + half) % m];
                v.sort_unstable();
                v.dedup();
                v
            }
        };
    }
    let Some(mut r) = tonelli_shanks(u % p, p) else {
        return vec![];
    };
    // Newton lifting doubles the p-adic precision each step.
    let mut prec = 1u32;
    while prec < f {
        prec = (2 * prec).min(f);
        let mp = p.pow(prec);
        let fx = (mulmod(r, r, mp) + mp - u % mp) % mp;
        let inv = inv_mod(2 * r % mp, mp).expect("2r is a unit");
        r = (r + mp - mulmod(fx, inv, mp)) % mp;
    }
    let mut v = vec![r, (m - r) % m];
    v.sort_unstable();
    v.dedup();
    v
}

/// All `x mod p^e` with `x² ≡ a (mod p^e)`.
pub fn sqrt_mod_prime_power(a: i128, p: u64, e: u32) -> Vec<u64> {
    let m = p.pow(e);
    let a = a.rem_euclid(m as i128) as u64;
    if a == 0 {
        let step = p.pow(e.div_ceil(2));
        return (0..p.pow(e / 2)).map(|j| j * step).collect();
    }
    let mut v = 0u32;
    let mut u = a;
    while u % p == 0 {
        u /= p;
        v += 1;
    }
    if v % 2 == 1 {
        return vec![];
    }
    let f = e - v;
    let mf = p.pow(f);
    let scale = p.pow(v / 2);
    let mut out = Vec::new();
    for y0 in unit_sqrt_prime_power(u, p, f) {
        for t in 0..scale {
            out.push(mulmod(scale, y0 + t * mf, m));
        }
    }
    out.sort_unstable();
    out
}

/// Number of `x mod p^e` with `x² ≡ a (mod p^e)`, without listing them.
pub fn count_sqrt_mod_prime_power(a: i128, p: u64, e: u32) -> u64 {
    let m = p.pow(e) as i128;
    let a = a.rem_euclid(m) as u64;
    if a == 0 {
        return p.pow(e / 2);
    }
    let mut v = 0u32;
    let mut u = a;
    while u % p == 0 {
        u /= p;
        v += 1;
    }
    if v % 2 == 1 {
        return 0;
    }
    let f = e - v;
    let units = if p == 2 {
        match f {
            1 => 1,
            2 => (u % 4 == 1) as u64 * 2,
            _ => (u % 8 == 1) as u64 * 4,
        }
    } else {
        (1 + kronecker(u as i64 % p as i64, p as i64)) as u64
    };
    units * p.pow(v / 2)
}

/// All `x mod m` with `x² ≡ a (mod m)`, where `m = ∏ p^e` is given factored.
pub fn sqrt_mod_composite(a: i128, factors: &[(u64, u32)]) -> Vec<u64> {
    let mut roots = vec![0u64];
    let mut modulus = 1u64;
    for &(p, e) in factors {
        let q = p.pow(e);
        let local = sqrt_mod_prime_power(a, p, e);
        if local.is_empty() {
            return vec![];
        }
        let inv = inv_mod(modulus % q, q).expect("coprime prime powers");
        let next = modulus * q;
        let mut combined = Vec::with_capacity(roots.len() * local.len());
        for &r in &roots {
            for &s in &local {
                let t = mulmod((s + q - r % q) % q, inv, q);
                combined.push((r + modulus * t) % next);
            }
        }
        roots = combined;
        modulus = next;
    }
    roots.sort_unstable();
    roots
}

/// `Σ_{n ≤ Z} μ²(n) φ(n)`, exactly.
pub fn sum_mu2_phi(sieve: &FactorSieve, z: u64) -> Result<u128> {
    sieve.check(z)?;
    let mut acc: u128 = 0;
    for n in 1..=z {
        let f = sieve.factor_small(n);
        if f.iter().all(|&(_, e)| e == 1) {
            acc += phi_from_factors(&f) as u128;
        }
    }
    Ok(acc)
}

/// Number of square-free `N ≤ Z` coprime to `m`.
pub fn count_squarefree_twisted(sieve: &FactorSieve, z: u64, m: u64) -> Result<u64> {
    sieve.check(z)?;
    if m == 0 {
        return domain("modulus must be positive");
    }
    let mut count = 0;
    for n in 1..=z {
        if n.gcd(&m) == 1 && sieve.factor_small(n).iter().all(|&(_, e)| e == 1) {
            count += 1;
        }
    }
    Ok(count)
}

/// Number of square-free `N ∈ [X, X+Y]` with `N ≡ a (mod m)`.
pub fn squarefree_in_class_count(
    sieve: &FactorSieve,
    x: u64,
    y: u64,
    a: u64,
    m: u64,
) -> Result<u64> {
    if m == 0 {
        return domain("modulus must be positive");
    }
    if a.gcd(&m) != 1 {
        return domain(format!("gcd({a}, {m}) > 1"));
    }
    let hi = x
        .checked_add(y)
        .ok_or_else(|| Error::Domain("X + Y overflows".into()))?;
    sieve.check(hi)?;
    let lo = x.max(1);
    let r = a % m;
    let first = lo + (r + m - lo % m) % m;
    let mut count = 0;
    let mut n = first;
    while n <= hi {
        if sieve.factor_small(n).iter().all(|&(_, e)| e == 1) {
            count += 1;
        }
        n += m;
    }
    Ok(count)
}
