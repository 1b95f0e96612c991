//! Class numbers of imaginary quadratic orders.
//!
//! `d` is always the absolute value of the discriminant `-d`. Three routes:
//!
//! * [`gauss_h_bruteforce`] lists reduced primitive forms directly; it is the
//!   oracle for everything else.
//! * [`forms_count`] counts all reduced forms (primitive or not) of
//!   discriminant `-d` by counting square roots of `-d` modulo `4a` for each
//!   leading coefficient `a`, in roughly `O(√d)` time. [`hurwitz_h1`] and
//!   [`gauss_h`] are built on it.
//! * [`class_number_via_L`] evaluates the truncated Dirichlet class number
//!   formula in floating point, as a cross-check only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_integer::{Integer, Roots};
use num_traits::{ToPrimitive, Zero};

use crate::arith::{
    count_sqrt_mod_prime_power, factor_u64, kronecker, sqrt_mod_composite, FactorSieve,
};
use crate::error::{domain, Error, Result};
use crate::Rational;

/// True when `-d` is a discriminant, i.e. `-d ≡ 0, 1 (mod 4)`.
pub fn is_discriminant(d: u64) -> bool {
    d > 0 && (d % 4 == 0 || d % 4 == 3)
}

fn check_disc(d: u64) -> Result<()> {
    if !is_discriminant(d) {
        return domain(format!(
            "-{d} is not a discriminant (needs -d ≡ 0, 1 mod 4)"
        ));
    }
    Ok(())
}

/// Number of reduced primitive forms `(a, b, c)` with `b² - 4ac = -d`,
/// `|b| ≤ a ≤ c`, and `b ≥ 0` whenever `|b| = a` or `a = c`.
///
/// Direct enumeration over `b` and divisors `a` of `(b² + d)/4`; about
/// `d/7` divisibility tests.
pub fn gauss_h_bruteforce(d: u64) -> Result<u64> {
    check_disc(d)?;
    let mut h = 0;
    let bmax = (d / 3).sqrt();
    let mut b = d % 2;
    while b <= bmax {
        let n = (b * b + d) / 4;
        let amax = n.sqrt();
        for a in b.max(1)..=amax {
            if n % a != 0 {
                continue;
            }
            let c = n / a;
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            h += if b == 0 || a == b || a == c { 1 } else { 2 };
        }
        b += 2;
    }
    Ok(h)
}

/// Number of reduced forms of discriminant `-d`, primitive or not, each
/// counted once.
///
/// For `4a² ≤ d` every root `b mod 2a` of `b² ≡ -d (mod 4a)` gives a reduced
/// form, so only the number of roots is needed; that number is multiplicative
/// in the modulus. For `4a² > d` the roots are listed and the `c ≥ a`
/// condition is checked one by one.
pub fn forms_count(d: u64) -> Result<u64> {
    check_disc(d)?;
    let amax = (d / 3).sqrt();
    let small = FactorSieve::new(amax.max(2))?;
    Ok(forms_count_with(d, &small))
}

fn forms_count_with(d: u64, small: &FactorSieve) -> u64 {
    let amax = (d / 3).sqrt();
    let neg = -(d as i128);
    let mut total = 0u64;
    let mut fac: Vec<(u64, u32)> = Vec::with_capacity(12);
    for a in 1..=amax {
        fac.clear();
        let mut two = 2u32;
        for (p, e) in small.factor(a).expect("a within local sieve") {
            if p == 2 {
                two += e;
            } else {
                fac.push((p, e));
            }
        }
        fac.insert(0, (2, two));
        if 4 * a * a <= d {
            let mut roots = 1u64;
            for &(p, e) in &fac {
                roots *= count_sqrt_mod_prime_power(neg, p, e);
                if roots == 0 {
                    break;
                }
            }
            // roots mod 4a pair up as x, x + 2a
            total += roots / 2;
        } else {
            for x in sqrt_mod_composite(neg, &fac) {
                if x >= 2 * a {
                    continue;
                }
                let b = if x > a {
                    x as i64 - 2 * a as i64
                } else {
                    x as i64
                };
                let c = ((b * b) as u64 + d) / (4 * a);
                if c > a || (c == a && b >= 0) {
                    total += 1;
                }
            }
        }
    }
    total
}

/// All `f ≥ 1` with `f² | d`.
fn square_divisors(d: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factor_u64(d) {
        let base = out.clone();
        let mut pk = 1;
        for _ in 0..e / 2 {
            pk *= p;
            out.extend(base.iter().map(|&f| f * pk));
        }
    }
    out.sort_unstable();
    out
}

fn mobius_of_small(f: u64) -> i64 {
    let mut s = 1;
    for (_, e) in factor_u64(f) {
        if e > 1 {
            return 0;
        }
        s = -s;
    }
    s
}

/// Gauss class number `h(-d)`: reduced primitive forms, by Möbius inversion
/// of [`forms_count`] over square divisors.
pub fn gauss_h(d: u64) -> Result<u64> {
    check_disc(d)?;
    let mut h: i64 = 0;
    for f in square_divisors(d) {
        let q = d / (f * f);
        if !is_discriminant(q) {
            continue;
        }
        let mu = mobius_of_small(f);
        if mu != 0 {
            h += mu * forms_count(q)? as i64;
        }
    }
    Ok(h as u64)
}

/// `h(-d)` with the automorphism weights: `1/3` at `d = 3`, `1/2` at `d = 4`.
/// Zero when `-d` is not a discriminant.
pub fn h_weighted(d: u64) -> Result<Rational> {
    if !is_discriminant(d) {
        return Ok(Rational::zero());
    }
    Ok(match d {
        3 => Rational::new(1, 3),
        4 => Rational::new(1, 2),
        _ => Rational::from_integer(gauss_h(d)? as i128),
    })
}

/// Hurwitz class number `H_1(-d)`: all forms of discriminant `-d` up to
/// `SL_2(Z)`, with classes of multiples of `x² + y²` and `x² + xy + y²`
/// weighted `1/2` and `1/3`. Zero when `-d ≡ 2, 3 (mod 4)`.
pub fn hurwitz_h1(d: u64) -> Result<Rational> {
    if d == 0 {
        return domain("H_1(0) is not a class number");
    }
    if !is_discriminant(d) {
        return Ok(Rational::zero());
    }
    let mut h = Rational::from_integer(forms_count(d)? as i128);
    h -= bottom_correction(d);
    Ok(h)
}

/// Weight deficit from classes of `f(x² + y²)` and `f(x² + xy + y²)`.
fn bottom_correction(d: u64) -> Rational {
    let mut c = Rational::zero();
    if d % 4 == 0 && is_square(d / 4) {
        c += Rational::new(1, 2);
    }
    if d % 3 == 0 && is_square(d / 3) {
        c += Rational::new(2, 3);
    }
    c
}

fn is_square(n: u64) -> bool {
    let r = n.sqrt();
    r * r == n
}

/// `H_1(-d)` rebuilt from the primitive brute-force count as
/// `Σ_{f² | d} h_w(-d/f²)`. Independent of [`forms_count`].
pub fn hurwitz_h1_from_gauss(d: u64) -> Result<Rational> {
    let mut acc = Rational::zero();
    if !is_discriminant(d) {
        return Ok(acc);
    }
    for f in square_divisors(d) {
        let q = d / (f * f);
        if !is_discriminant(q) {
            continue;
        }
        acc += match q {
            3 => Rational::new(1, 3),
            4 => Rational::new(1, 2),
            _ => Rational::from_integer(gauss_h_bruteforce(q)? as i128),
        };
    }
    Ok(acc)
}

/// Truncation rule for the class number series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LTruncationPolicy {
    Fixed(u64),
    /// `T = ceil(Y^(5/6) P^(5/12) X^(-1/12))` for an interval `[X, X+Y]`.
    IntervalScaled {
        x: f64,
        y: f64,
        p: f64,
    },
}

impl LTruncationPolicy {
    pub fn cutoff(&self) -> u64 {
        match *self {
            LTruncationPolicy::Fixed(t) => t.max(1),
            LTruncationPolicy::IntervalScaled { x, y, p } => {
                (y.powf(5.0 / 6.0) * p.powf(5.0 / 12.0) * x.powf(-1.0 / 12.0))
                    .ceil()
                    .max(1.0) as u64
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LEstimate {
    pub value: f64,
    /// Bound on `|h(-d) - value|`.
    pub bound: f64,
    pub cutoff: u64,
}

/// `(√d/π) Σ_{n ≤ T} (-d/n)/n`, an approximation of `h(-d)` for `d > 4`.
///
/// The bound uses partial summation with the character-sum estimate
/// `|Σ_{n ≤ x} χ(n)| ≤ min(√d ln d + √d, d/2)`, giving a tail of at most
/// twice that over `T`.
#[allow(non_snake_case)]
pub fn class_number_via_L(d: u64, policy: LTruncationPolicy) -> Result<LEstimate> {
    check_disc(d)?;
    if d <= 4 {
        return domain("the L-series route needs d > 4");
    }
    let t = policy.cutoff();
    let neg = -(d as i64);
    let mut s = 0.0f64;
    let mut comp = 0.0f64;
    for n in 1..=t {
        let k = kronecker(neg, n as i64);
        if k != 0 {
            // Kahan summation keeps 10^7-term sums honest.
            let term = k as f64 / n as f64 - comp;
            let next = s + term;
            comp = (next - s) - term;
            s = next;
        }
    }
    let df = d as f64;
    let scale = df.sqrt() / std::f64::consts::PI;
    let char_sum = (df.sqrt() * df.ln() + df.sqrt()).min(df / 2.0);
    Ok(LEstimate {
        value: scale * s,
        bound: scale * 2.0 * char_sum / t as f64 + 1e-12 * scale * (t as f64).ln().max(1.0),
        cutoff: t,
    })
}

const CACHE_MAGIC: &[u8; 5] = b"MURH1";
const CACHE_VERSION: u32 = 1;

/// Exact `H_1(-d)` for every `d` in `[dmin, dmax]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HurwitzTable {
    dmin: u64,
    dmax: u64,
    values: Vec<Rational>,
}

/// Largest table width [`hurwitz_sieve`] accepts.
pub const MAX_TABLE_WIDTH: u64 = 50_000_000;

impl HurwitzTable {
    pub fn dmin(&self) -> u64 {
        self.dmin
    }

    pub fn dmax(&self) -> u64 {
        self.dmax
    }

    pub fn covers(&self, d: u64) -> bool {
        (self.dmin..=self.dmax).contains(&d)
    }

    pub fn get(&self, d: u64) -> Result<Rational> {
        if !self.covers(d) {
            return Err(Error::OutOfRange {
                what: "discriminant",
                value: d,
                limit: self.dmax,
            });
        }
        Ok(self.values[(d - self.dmin) as usize])
    }

    /// Layout (little endian): magic `MURH1`, `u32` version, `u64` dmin,
    /// `u64` dmax, `u64` record count, then records of
    /// (`u32` zeros skipped, `i64` numerator, `u32` denominator), then a
    /// `u32` count of trailing zeros.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.dmin.to_le_bytes())?;
        w.write_all(&self.dmax.to_le_bytes())?;
        let nonzero = self.values.iter().filter(|v| !v.is_zero()).count() as u64;
        w.write_all(&nonzero.to_le_bytes())?;
        let mut zeros = 0u32;
        for v in &self.values {
            if v.is_zero() {
                zeros += 1;
                continue;
            }
            let num = v
                .numer()
                .to_i64()
                .ok_or_else(|| Error::Format("numerator overflow".into()))?;
            let den = v
                .denom()
                .to_u32()
                .ok_or_else(|| Error::Format("denominator overflow".into()))?;
            w.write_all(&zeros.to_le_bytes())?;
            w.write_all(&num.to_le_bytes())?;
            w.write_all(&den.to_le_bytes())?;
            zeros = 0;
        }
        w.write_all(&zeros.to_le_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CACHE_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let dmin = read_u64(&mut r)?;
        let dmax = read_u64(&mut r)?;
        if dmax < dmin || dmax - dmin > MAX_TABLE_WIDTH {
            return Err(Error::Format(format!("bad range [{dmin}, {dmax}]")));
        }
        let len = (dmax - dmin + 1) as usize;
        let records = read_u64(&mut r)?;
        let mut values = Vec::with_capacity(len);
        for _ in 0..records {
            let zeros = read_u32(&mut r)? as usize;
            let mut num = [0u8; 8];
            r.read_exact(&mut num)?;
            let num = i64::from_le_bytes(num);
            let den = read_u32(&mut r)?;
            if den == 0 || values.len() + zeros + 1 > len {
                return Err(Error::Format("corrupt record".into()));
            }
            values.resize(values.len() + zeros, Rational::zero());
            values.push(Rational::new(num as i128, den as i128));
        }
        let trailing = read_u32(&mut r)? as usize;
        values.resize(values.len() + trailing, Rational::zero());
        if values.len() != len {
            return Err(Error::Format(format!(
                "expected {len} entries, found {}",
                values.len()
            )));
        }
        Ok(HurwitzTable { dmin, dmax, values })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Tabulate `H_1(-d)` over `[dmin, dmax]`, one form count per discriminant.
pub fn hurwitz_sieve(dmin: u64, dmax: u64) -> Result<HurwitzTable> {
    if dmin == 0 || dmax < dmin {
        return domain(format!("bad range [{dmin}, {dmax}]"));
    }
    if dmax - dmin > MAX_TABLE_WIDTH {
        return Err(Error::Resource(format!(
            "table width {} exceeds {MAX_TABLE_WIDTH}",
            dmax - dmin
        )));
    }
    let small = FactorSieve::new((dmax / 3).sqrt().max(2))?;
    let mut values = Vec::with_capacity((dmax - dmin + 1) as usize);
    for d in dmin..=dmax {
        values.push(if is_discriminant(d) {
            Rational::from_integer(forms_count_with(d, &small) as i128) - bottom_correction(d)
        } else {
            Rational::zero()
        });
    }
    Ok(HurwitzTable { dmin, dmax, values })
}

/// Anything that can answer `H_1(-d)` exactly.
pub trait ClassNumberSource {
    fn h1(&self, d: u64) -> Result<Rational>;
}

impl ClassNumberSource for HurwitzTable {
    /// A discriminant outside the table is a resource error.
    fn h1(&self, d: u64) -> Result<Rational> {
        self.get(d).map_err(|_| {
            Error::Resource(format!(
                "H_1(-{d}) needed but the table covers [{}, {}]",
                self.dmin, self.dmax
            ))
        })
    }
}

/// Computes every value on demand with [`hurwitz_h1`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectClassNumbers;

impl ClassNumberSource for DirectClassNumbers {
    fn h1(&self, d: u64) -> Result<Rational> {
        hurwitz_h1(d)
    }
}

const SPARSE_VERSION: u32 = 2;

/// Memoizing source for scattered discriminants, persisted as a sparse
/// `MURH1` file (version 2: `u64` count, then `u64` d, `i64` numerator,
/// `u32` denominator per record, sorted by `d`).
#[derive(Debug, Default)]
pub struct SparseHurwitzCache {
    values: std::sync::Mutex<std::collections::BTreeMap<u64, Rational>>,
}

impl SparseHurwitzCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let map = self.values.lock().expect("cache lock");
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&SPARSE_VERSION.to_le_bytes())?;
        w.write_all(&(map.len() as u64).to_le_bytes())?;
        for (&d, v) in map.iter() {
            let num = v
                .numer()
                .to_i64()
                .ok_or_else(|| Error::Format("numerator overflow".into()))?;
            let den = v
                .denom()
                .to_u32()
                .ok_or_else(|| Error::Format("denominator overflow".into()))?;
            w.write_all(&d.to_le_bytes())?;
            w.write_all(&num.to_le_bytes())?;
            w.write_all(&den.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != SPARSE_VERSION {
            return Err(Error::Format(format!(
                "expected sparse version {SPARSE_VERSION}, found {version}"
            )));
        }
        let count = read_u64(&mut r)?;
        let mut map = std::collections::BTreeMap::new();
        for _ in 0..count {
            let d = read_u64(&mut r)?;
            let mut num = [0u8; 8];
            r.read_exact(&mut num)?;
            let num = i64::from_le_bytes(num);
            let den = read_u32(&mut r)?;
            if den == 0 {
                return Err(Error::Format("zero denominator".into()));
            }
            map.insert(d, Rational::new(num as i128, den as i128));
        }
        Ok(SparseHurwitzCache {
            values: std::sync::Mutex::new(map),
        })
    }
}

impl ClassNumberSource for SparseHurwitzCache {
    fn h1(&self, d: u64) -> Result<Rational> {
        if let Some(v) = self.values.lock().expect("cache lock").get(&d) {
            return Ok(*v);
        }
        let v = hurwitz_h1(d)?;
        self.values.lock().expect("cache lock").insert(d, v);
        Ok(v)
    }
}
