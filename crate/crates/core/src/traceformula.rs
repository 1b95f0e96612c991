//! Traces of `(−1)^{k/2} T_P ∘ W_N` on square-free levels, normalized to
//! `Σ_f √P λ_f(P) ε(f)`, and their interval and dyadic averages.

use num_traits::{ToPrimitive, Zero};

use crate::arith::{factor_u64, is_prime_u64, phi_from_factors};
use crate::classnumbers::{h_weighted, ClassNumberSource};
use crate::density::{chebyshev_u, dyadic_density, murmuration_density, DensityConfig};
use crate::error::{domain, Result};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceParams {
    pub n: u64,
    pub p: u64,
    pub k: u32,
}

impl TraceParams {
    pub fn new(n: u64, p: u64, k: u32) -> Result<Self> {
        if n == 0 || factor_u64(n).iter().any(|&(_, e)| e > 1) {
            return domain(format!("N must be square-free and positive, got {n}"));
        }
        if p <= 2 || !is_prime_u64(p) {
            return domain(format!("P must be an odd prime, got {p}"));
        }
        if n % p == 0 {
            return domain(format!("P = {p} divides N = {n}"));
        }
        if k < 2 || k % 2 == 1 {
            return domain(format!("k must be even and at least 2, got {k}"));
        }
        Ok(TraceParams { n, p, k })
    }

    /// `(−1)^{k/2−1}`.
    fn sign(&self) -> i128 {
        if (self.k / 2) % 2 == 1 {
            1
        } else {
            -1
        }
    }

    /// `r` with `r²N < 4P`.
    fn r_range(&self) -> impl Iterator<Item = u64> + '_ {
        (1..).take_while(move |&r| (r * r) as u128 * (self.n as u128) < 4 * self.p as u128)
    }

    /// `U_{k−2}(r√N/(2√P))`.
    fn chebyshev(&self, r: u64) -> f64 {
        chebyshev_u(
            self.k - 2,
            r as f64 * (self.n as f64 / self.p as f64).sqrt() / 2.0,
        )
    }
}

/// Exact for `k = 2`; floating point once Chebyshev factors enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceValue {
    Exact(Rational),
    Float(f64),
}

impl TraceValue {
    pub fn to_f64(self) -> f64 {
        match self {
            TraceValue::Exact(q) => q.to_f64().expect("finite rational"),
            TraceValue::Float(x) => x,
        }
    }

    pub fn exact(self) -> Option<Rational> {
        match self {
            TraceValue::Exact(q) => Some(q),
            TraceValue::Float(_) => None,
        }
    }
}

/// `H_1(−4PN)/2 + (−1)^{k/2−1} Σ_{r²N < 4P} U_{k−2}(r√N/(2√P)) H_1(r²N² − 4PN)
/// − δ_{k=2}(P + 1)`, plus the `N = 1` correction `−(−1)^{k/2}P^{−(k−2)/2}`.
pub fn trace_tp_wn(params: TraceParams, source: &impl ClassNumberSource) -> Result<TraceValue> {
    let TraceParams { n, p, k } = params;
    let pn = p * n;
    let head = source.h1(4 * pn)? / Rational::from_integer(2);
    let sign = params.sign();
    if k == 2 {
        let mut acc = head - Rational::from_integer(p as i128 + 1);
        for r in params.r_range() {
            acc += Rational::from_integer(sign) * source.h1(4 * pn - r * r * n * n)?;
        }
        if n == 1 {
            acc += Rational::from_integer(1);
        }
        return Ok(TraceValue::Exact(acc));
    }
    let mut acc = head.to_f64().expect("finite rational");
    for r in params.r_range() {
        let h = source
            .h1(4 * pn - r * r * n * n)?
            .to_f64()
            .expect("finite rational");
        acc += sign as f64 * params.chebyshev(r) * h;
    }
    if n == 1 {
        acc += sign as f64 * (p as f64).powf(-((k - 2) as f64) / 2.0);
    }
    Ok(TraceValue::Float(acc))
}

/// Square divisors `d` with `d² | m`.
fn square_divisors(m: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (q, e) in factor_u64(m) {
        let base = out.clone();
        let mut qp = 1;
        for _ in 0..e / 2 {
            qp *= q;
            out.extend(base.iter().map(|&d| d * qp));
        }
    }
    out
}

/// The class-number form `h(−4PN)/2 + h(−PN)/2 − δ_{k=2}P + (−1)^{k/2−1}
/// Σ_r U_{k−2}(r√N/(2√P)) Σ_{d² | 4P − r²N} h(−N(4P − r²N)/d²)` with weighted
/// `h` at `−3`, `−4`. For `N > 1` it exceeds [`trace_tp_wn`] by `δ_{k=2}`.
pub fn trace_h_form(params: TraceParams) -> Result<TraceValue> {
    let TraceParams { n, p, k } = params;
    let half = Rational::new(1, 2);
    let head = (h_weighted(4 * p * n)? + h_weighted(p * n)?) * half;
    let sign = Rational::from_integer(params.sign());
    let mut inner = Vec::new();
    for r in params.r_range() {
        let m = 4 * p - r * r * n;
        let mut h = Rational::zero();
        for d in square_divisors(m) {
            h += h_weighted(n * m / (d * d))?;
        }
        inner.push((r, h));
    }
    if k == 2 {
        let mut acc = head - Rational::from_integer(p as i128);
        for (_, h) in inner {
            acc += sign * h;
        }
        return Ok(TraceValue::Exact(acc));
    }
    let mut acc = head.to_f64().expect("finite rational");
    for (r, h) in inner {
        acc += (sign * h).to_f64().expect("finite rational") * params.chebyshev(r);
    }
    Ok(TraceValue::Float(acc))
}

/// `(k − 1)φ(N)/12`.
pub fn dimension_main(n: u64, k: u32) -> Result<Rational> {
    if n == 0 || k % 2 == 1 {
        return domain(format!("need N ≥ 1 and k even, got N = {n}, k = {k}"));
    }
    let phi = phi_from_factors(&factor_u64(n)) as i128;
    Ok(Rational::new((k as i128 - 1) * phi, 12))
}

/// One row of an empirical average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceReport {
    pub n_low: u64,
    pub n_high: u64,
    pub p: u64,
    pub k: u32,
    /// `Σ trace` over square-free `N` in range with `P ∤ N`.
    pub numerator: f64,
    /// `Σ (k − 1)φ(N)/12` over the same `N`.
    pub denominator: f64,
    /// `numerator/denominator`; NaN when no level contributes.
    pub average: f64,
    pub predicted: f64,
    pub residual: f64,
    /// Dimension-weighted mean of `M_k(P/N)` over the contributing levels.
    pub window_predicted: f64,
    pub window_residual: f64,
    pub levels: u64,
}

impl TraceReport {
    pub fn is_empty(&self) -> bool {
        self.levels == 0
    }
}

fn average_over(
    n_low: u64,
    n_high: u64,
    p: u64,
    k: u32,
    source: &impl ClassNumberSource,
    density: &DensityConfig,
    predicted: f64,
) -> Result<TraceReport> {
    TraceParams::new(1, p, k)?;
    let mut num = 0.0;
    let mut den = Rational::zero();
    let mut window = 0.0;
    let mut levels = 0;
    for n in n_low.max(1)..=n_high {
        if n % p == 0 || factor_u64(n).iter().any(|&(_, e)| e > 1) {
            continue;
        }
        let params = TraceParams::new(n, p, k)?;
        num += trace_tp_wn(params, source)?.to_f64();
        let dim = dimension_main(n, k)?;
        window += dim.to_f64().expect("finite rational")
            * murmuration_density(density, p as f64 / n as f64)?.value;
        den += dim;
        levels += 1;
    }
    let denominator = den.to_f64().expect("finite rational");
    let (average, window_predicted) = if levels == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (num / denominator, window / denominator)
    };
    Ok(TraceReport {
        n_low,
        n_high,
        p,
        k,
        numerator: num,
        denominator,
        average,
        predicted,
        residual: average - predicted,
        window_predicted,
        window_residual: average - window_predicted,
        levels,
    })
}

/// Average over `N ∈ [X, X + Y]` against `M_k(P/X)`.
pub fn interval_average(
    x: u64,
    y: u64,
    p: u64,
    k: u32,
    source: &impl ClassNumberSource,
    density: &DensityConfig,
) -> Result<TraceReport> {
    if x == 0 || y >= x {
        return domain(format!("need 0 < Y < X, got X = {x}, Y = {y}"));
    }
    let cfg = DensityConfig { k, ..*density };
    let predicted = murmuration_density(&cfg, p as f64 / x as f64)?.value;
    average_over(x, x + y, p, k, source, &cfg, predicted)
}

/// Average over `N ∈ [X, cX]` against the dyadic density at `P/X`.
pub fn dyadic_average(
    x: u64,
    c: f64,
    p: u64,
    k: u32,
    source: &impl ClassNumberSource,
    density: &DensityConfig,
) -> Result<TraceReport> {
    if x == 0 || !(c > 1.0 && c.is_finite()) {
        return domain(format!("need X > 0 and c > 1, got X = {x}, c = {c}"));
    }
    let cfg = DensityConfig { k, ..*density };
    let predicted = dyadic_density(&cfg, c, p as f64 / x as f64)?;
    average_over(
        x,
        (c * x as f64).floor() as u64,
        p,
        k,
        source,
        &cfg,
        predicted,
    )
}

/// Largest discriminant `|D|` any level in `[n_low, n_high]` needs at prime `P`.
pub fn max_discriminant(n_high: u64, p: u64) -> u64 {
    4 * p * n_high
}
