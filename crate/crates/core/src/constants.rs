//! Euler-product constants with certified truncation tails, partial sums of
//! `Q(d)`, and the main terms of the elementary summatory identities.
//!
//! Tails use `π(t) < 1.26·t/ln t` (valid for `t > 1`), which gives
//! `Σ_{p > N} p^{−s} ≤ 1.26·s·N^{1−s} / ((s−1)·ln N)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::arith::FactorSieve;
use crate::error::{domain, Result};

pub const ZETA2: f64 = PI * PI / 6.0;

/// Prime-counting constant in `π(t) < C·t/ln t`.
const PI_BOUND: f64 = 1.26;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Calls `f` on every prime `p ≤ limit` in increasing order.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    f(2);
    let root = (limit as f64).sqrt() as u64 + 1;
    let base: Vec<u64> = {
        let mut small = vec![true; root as usize + 1];
        let mut out = Vec::new();
        for i in 2..=root as usize {
            if small[i] {
                if i > 2 {
                    out.push(i as u64);
                }
                let mut j = i * i;
                while j <= root as usize {
                    small[j] = false;
                    j += i;
                }
            }
        }
        out
    };
    // odd-only segments: index i stands for lo + 2i
    const SEG: u64 = 1 << 18;
    let mut seg = vec![true; SEG as usize];
    let mut lo = 3u64;
    while lo <= limit {
        let hi = (lo + 2 * SEG - 2).min(limit);
        let len = ((hi - lo) / 2 + 1) as usize;
        seg[..len].fill(true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut start = (p * p).max(lo.div_ceil(p) * p);
            if start % 2 == 0 {
                start += p;
            }
            let mut j = ((start - lo) / 2) as usize;
            while j < len {
                seg[j] = false;
                j += p as usize;
            }
        }
        for (i, &is_p) in seg[..len].iter().enumerate() {
            if is_p {
                f(lo + 2 * i as u64);
            }
        }
        lo = hi + 2;
    }
}

/// `Σ_{p > N} p^{−s}` upper bound for `s > 1`, `N ≥ 2`.
pub fn prime_power_tail(s: f64, n: u64) -> f64 {
    let nf = n.max(2) as f64;
    PI_BOUND * s * nf.powf(1.0 - s) / ((s - 1.0) * nf.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EulerKind {
    /// `α = 2π ∏ (p⁴ − 2p² − p + 1)/(p⁴ − 2p² + p)`
    Alpha,
    /// `β = 2π ∏ (p³ + p² − 1)/(p(p² + p − 1))`
    Beta,
    /// `γ = 12 ∏ p(p + 1)/(p² + p − 1)`
    Gamma,
    /// `A = ∏ (1 + p/((p+1)²(p−1)))`
    A,
    /// `B = ∏ (p⁴ − 2p² − p + 1)/(p² − 1)²`
    B,
    /// `∏ (1 − 1/(p² + p))`
    DimC,
    /// `Δ = ζ(2)^{−1} ∏ (1 + (2p − 1)/(p⁴ − 2p² − p + 1))`
    Delta,
    /// `Σ_d Q(d) = ∏ (1 + Q(p))`
    QSum,
    /// `Σ_d Q(d)/d = ∏ (1 + Q(p)/p)`
    QOverD,
    /// `Σ_d Q(d)√d = ∏ (1 + Q(p)√p)`
    QSqrt,
}

impl EulerKind {
    pub const ALL: [EulerKind; 10] = [
        EulerKind::Alpha,
        EulerKind::Beta,
        EulerKind::Gamma,
        EulerKind::A,
        EulerKind::B,
        EulerKind::DimC,
        EulerKind::Delta,
        EulerKind::QSum,
        EulerKind::QOverD,
        EulerKind::QSqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EulerKind::Alpha => "alpha",
            EulerKind::Beta => "beta",
            EulerKind::Gamma => "gamma",
            EulerKind::A => "A",
            EulerKind::B => "B",
            EulerKind::DimC => "dimC",
            EulerKind::Delta => "Delta",
            EulerKind::QSum => "sum_Q",
            EulerKind::QOverD => "sum_Q_over_d",
            EulerKind::QSqrt => "sum_Q_sqrt_d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        EulerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .map_or_else(|| domain(format!("unknown Euler product kind {s:?}")), Ok)
    }

    fn scalar(self) -> f64 {
        match self {
            EulerKind::Alpha | EulerKind::Beta => 2.0 * PI,
            EulerKind::Gamma => 12.0,
            EulerKind::Delta => 1.0 / ZETA2,
            _ => 1.0,
        }
    }

    /// `f(p) − 1` for the local factor `f(p)`.
    pub fn deviation(self, p: u64) -> f64 {
        let p = p as f64;
        let p2 = p * p;
        let q_den = p2 * p2 - 2.0 * p2 - p + 1.0;
        match self {
            EulerKind::Alpha => (1.0 - 2.0 * p) / (p2 * p2 - 2.0 * p2 + p),
            EulerKind::Beta => (p - 1.0) / (p2 * p + p2 - p),
            EulerKind::Gamma => 1.0 / (p2 + p - 1.0),
            EulerKind::A => p / ((p + 1.0) * (p + 1.0) * (p - 1.0)),
            EulerKind::B => -p / ((p2 - 1.0) * (p2 - 1.0)),
            EulerKind::DimC => -1.0 / (p2 + p),
            EulerKind::Delta => (2.0 * p - 1.0) / q_den,
            EulerKind::QSum => p2 / q_den,
            EulerKind::QOverD => p / q_den,
            EulerKind::QSqrt => p2 * p.sqrt() / q_den,
        }
    }

    /// `(C, e)` with `|f(p) − 1| ≤ C·p^{−e}` for every prime `p ≥ q ≥ 3`.
    fn deviation_bound(self, q: f64) -> (f64, f64) {
        // 1/(p⁴ − 2p² − p + 1) ≤ w/p⁴ for p ≥ q
        let w = 1.0 / (1.0 - 2.0 / (q * q) - 1.0 / (q * q * q));
        match self {
            EulerKind::Alpha => (2.0 / (1.0 - 2.0 / (q * q)), 3.0),
            EulerKind::Beta | EulerKind::Gamma | EulerKind::A | EulerKind::DimC => (1.0, 2.0),
            EulerKind::B => (1.0 / (1.0 - 1.0 / (q * q)).powi(2), 3.0),
            EulerKind::Delta => (2.0 * w, 3.0),
            EulerKind::QSum => (w, 2.0),
            EulerKind::QOverD => (w, 3.0),
            EulerKind::QSqrt => (w, 1.5),
        }
    }

    /// Certified bound on `|log ∏_{p > pmax} f(p)|`.
    pub fn log_tail_bound(self, pmax: u64) -> f64 {
        let q = (pmax + 1).max(3) as f64;
        let (c, e) = self.deviation_bound(q);
        let x_max = c * q.powf(-e);
        // |log(1 + x)| ≤ |x|/(1 − |x|)
        c * prime_power_tail(e, pmax) / (1.0 - x_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerProductValue {
    pub kind: EulerKind,
    pub value: f64,
    /// Largest prime included in the product.
    pub pmax: u64,
    /// Certified bound on `|limit − value|`.
    pub tail_bound: f64,
}

impl EulerProductValue {
    pub fn lower(&self) -> f64 {
        self.value - self.tail_bound
    }

    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

fn finish(kind: EulerKind, log_sum: f64, pmax: u64) -> EulerProductValue {
    let value = kind.scalar() * log_sum.exp();
    let l = kind.log_tail_bound(pmax);
    EulerProductValue {
        kind,
        value,
        pmax,
        tail_bound: value.abs() * l.exp_m1(),
    }
}

/// Several products over the primes `p ≤ pmax` in one sieve pass.
pub fn euler_constants(kinds: &[EulerKind], pmax: u64) -> Result<Vec<EulerProductValue>> {
    if pmax < 2 {
        return domain(format!("pmax must be at least 2, got {pmax}"));
    }
    let mut sums = vec![CompensatedSum::default(); kinds.len()];
    let mut last = 2;
    for_each_prime(pmax, |p| {
        last = p;
        for (s, k) in sums.iter_mut().zip(kinds) {
            s.add(k.deviation(p).ln_1p());
        }
    });
    Ok(kinds
        .iter()
        .zip(&sums)
        .map(|(&k, s)| finish(k, s.value(), last))
        .collect())
}

pub fn euler_constant(kind: EulerKind, pmax: u64) -> Result<EulerProductValue> {
    Ok(euler_constants(&[kind], pmax)?[0])
}

/// The product over the first `count` primes.
pub fn euler_constant_first_primes(kind: EulerKind, count: u64) -> Result<EulerProductValue> {
    if count == 0 {
        return domain("prime count must be positive");
    }
    // p_n < n(ln n + ln ln n) for n ≥ 6
    let n = count.max(6) as f64;
    let limit = (n * (n.ln() + n.ln().ln())).ceil() as u64;
    let mut sum = CompensatedSum::default();
    let mut seen = 0u64;
    let mut last = 2;
    for_each_prime(limit, |p| {
        if seen < count {
            seen += 1;
            last = p;
            sum.add(kind.deviation(p).ln_1p());
        }
    });
    Ok(finish(kind, sum.value(), last))
}

/// Converged constants shared by the density and sign-check modules.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub alpha: EulerProductValue,
    pub beta: EulerProductValue,
    pub gamma: EulerProductValue,
    pub a: EulerProductValue,
    pub b: EulerProductValue,
    pub dim_c: EulerProductValue,
    pub delta: EulerProductValue,
    pub q_sum: EulerProductValue,
    pub q_over_d: EulerProductValue,
    pub q_sqrt: EulerProductValue,
}

pub const STANDARD_PMAX: u64 = 10_000_000;

impl Constants {
    pub fn compute(pmax: u64) -> Result<Self> {
        let v = euler_constants(&EulerKind::ALL, pmax)?;
        Ok(Constants {
            alpha: v[0],
            beta: v[1],
            gamma: v[2],
            a: v[3],
            b: v[4],
            dim_c: v[5],
            delta: v[6],
            q_sum: v[7],
            q_over_d: v[8],
            q_sqrt: v[9],
        })
    }

    /// Constants at `p ≤ 10^7`, computed once per process.
    pub fn standard() -> &'static Constants {
        static CELL: OnceLock<Constants> = OnceLock::new();
        CELL.get_or_init(|| Constants::compute(STANDARD_PMAX).expect("pmax is valid"))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value
    }
    pub fn beta(&self) -> f64 {
        self.beta.value
    }
    pub fn gamma(&self) -> f64 {
        self.gamma.value
    }
}

/// `Q(p) = p²/(p⁴ − 2p² − p + 1)` in floating point.
pub fn q_prime(p: u64) -> f64 {
    EulerKind::QSum.deviation(p)
}

/// Partial sums of `Q(d)`, `Q(d)/d` and `Q(d)√d` over `d ≤ T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPartialSums {
    pub t: u64,
    pub q: f64,
    pub q_over_d: f64,
    pub q_sqrt_d: f64,
}

/// `C` with `Q(d) ≤ C/d²` for every `d`.
pub fn q_over_d2_constant() -> f64 {
    // max(1, p²Q(p)) over p ≤ 1000, then (1 + 3/p²) beyond
    let mut c = 1.0;
    for_each_prime(1000, |p| {
        c *= (q_prime(p) * (p * p) as f64).max(1.0);
    });
    c * (3.0 / 1000.0f64).exp()
}

/// Certified bound on `Σ_{d > T} Q(d)`.
pub fn q_sum_tail_bound(t: u64) -> f64 {
    q_over_d2_constant() / t.max(1) as f64
}

/// Certified bound on `Σ_{d > T} Q(d)/d`.
pub fn q_over_d_tail_bound(t: u64) -> f64 {
    let t = t.max(1) as f64;
    q_over_d2_constant() / (2.0 * t * t)
}

/// `Σ_{d ≤ T} Q(d)` (and its `1/d`, `√d` twists), summed in compensated floating point.
pub fn qcount_partial(t: u64) -> Result<QPartialSums> {
    if t == 0 {
        return domain("T must be positive");
    }
    let mut out = QPartialSums {
        t,
        q: 1.0,
        q_over_d: 1.0,
        q_sqrt_d: 1.0,
    };
    if t == 1 {
        return Ok(out);
    }
    let sieve = FactorSieve::new(t)?;
    let mut s0 = CompensatedSum::default();
    let mut s1 = CompensatedSum::default();
    let mut s2 = CompensatedSum::default();
    s0.add(1.0);
    s1.add(1.0);
    s2.add(1.0);
    for d in 2..=t {
        let f = sieve.factor(d)?;
        if f.iter().any(|&(_, e)| e > 1) {
            continue;
        }
        let q: f64 = f.iter().map(|&(p, _)| q_prime(p)).product();
        let df = d as f64;
        s0.add(q);
        s1.add(q / df);
        s2.add(q * df.sqrt());
    }
    out.q = s0.value();
    out.q_over_d = s1.value();
    out.q_sqrt_d = s2.value();
    Ok(out)
}

/// `Z²/(2ζ(2)) · ∏(1 − 1/(p² + p))`, the main term of `Σ_{n ≤ Z} μ²(n)φ(n)`.
pub fn sum_mu2_phi_main(z: f64, dim_c: f64) -> f64 {
    z * z / (2.0 * ZETA2) * dim_c
}

/// `Z·η(m)/ζ(2)`, the main term of the square-free count coprime to `m`.
pub fn squarefree_twisted_main(z: f64, eta_m: f64) -> f64 {
    z * eta_m / ZETA2
}

/// `(Y/ζ(2))·η(m)/φ(m)`, the main term of the square-free count in a residue class.
pub fn squarefree_in_class_main(y: f64, eta_m: f64, phi_m: f64) -> f64 {
    y / ZETA2 * eta_m / phi_m
}
