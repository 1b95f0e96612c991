//! Certified sign changes of the `y^{1/4}` series through a finite truncation
//! set `D`: `M_D(T) = Σ_{d∈D} Q(d)√d f(T/d)` is periodic, and the rest of the
//! series is bounded by `E(D) = (Σ_{all d} Q(d)√d − Σ_{d∈D} Q(d)√d)·M_max`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;

use crate::arith::factor_u64;
use crate::constants::{euler_constant, CompensatedSum, EulerKind};
use crate::density::{m_max, oscillatory_kernel};
use crate::error::{domain, Result};
use crate::multfns::q_exact;
use crate::Rational;

/// The truncation set with period `∏_{2<p≤13} p = 15015`.
pub const DEFAULT_D: [u64; 25] = [
    1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 21, 22, 26, 30, 33, 35, 39, 42, 55, 65, 66, 70, 77, 78,
];

/// The budget the sign-check threshold is never allowed to drop below.
pub const MIN_BUDGET: f64 = 0.6306;

/// Primes below this bound enter the certified upper bound on `Σ Q(d)√d`.
pub const SQRT_SUM_PMAX: u64 = 100_000_000;

/// Float slack added to every margin.
pub const FLOAT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignCheckConfig {
    pub d: Vec<u64>,
    /// Inner series cutoff.
    pub s: u64,
    /// Grid offsets `o` with the sign `M_D(k + o)` must have.
    pub offsets: Vec<(f64, Sign)>,
    /// Lower bound on the error budget.
    pub threshold: f64,
}

impl SignCheckConfig {
    /// `D` as above, `S = 10^6`, offsets `0, 1/2` negative and `0.162` positive.
    pub fn standard() -> Self {
        SignCheckConfig {
            d: DEFAULT_D.to_vec(),
            s: 1_000_000,
            offsets: vec![
                (0.0, Sign::Negative),
                (0.5, Sign::Negative),
                (0.162, Sign::Positive),
            ],
            threshold: MIN_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.is_empty() {
            return domain("D must be nonempty");
        }
        for &d in &self.d {
            if d == 0 || factor_u64(d).iter().any(|&(_, e)| e > 1) {
                return domain(format!(
                    "D must hold square-free positive integers, got {d}"
                ));
            }
        }
        if self.s == 0 {
            return domain("S must be positive");
        }
        if let Some(&(o, _)) = self.offsets.iter().find(|(o, _)| !(0.0..1.0).contains(o)) {
            return domain(format!("offsets must lie in [0, 1), got {o}"));
        }
        Ok(())
    }
}

/// A value with a bound on the discarded part of its series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail: f64,
}

/// `|Σ_{s>S} e^{iθs}s^{−3/2}| ≤ min(2/√S, S^{−3/2}/|sin(θ/2)|)`.
fn inner_tail(theta: f64, s: u64) -> f64 {
    let sf = s as f64;
    let plain = 2.0 / sf.sqrt();
    let sn = (theta / 2.0).sin().abs();
    if sn > 0.0 {
        plain.min(sf.powf(-1.5) / sn)
    } else {
        plain
    }
}

/// `Σ_{s ≤ S} cos(4πxs − 3π/4)s^{−3/2}` with its tail bound.
pub fn f_series(x: f64, s: u64) -> Result<SeriesValue> {
    if s == 0 {
        return domain("S must be positive");
    }
    let theta = 4.0 * PI * (x - 0.5 * (2.0 * x).round());
    let mut acc = CompensatedSum::default();
    for n in 1..=s {
        let nf = n as f64;
        acc.add((theta * nf - 0.75 * PI).cos() * nf.powf(-1.5));
    }
    Ok(SeriesValue {
        value: acc.value(),
        tail: inner_tail(theta, s),
    })
}

/// `Q(d)√d` in floating point.
pub fn q_sqrt(d: u64) -> Result<f64> {
    let q = q_exact(d)?;
    Ok(*q.numer() as f64 / *q.denom() as f64 * (d as f64).sqrt())
}

/// `M_D(T) = Σ_{d∈D} Q(d)√d f(T/d)` with the inner sums cut at `S`.
pub fn m_d(t: f64, d_set: &[u64], s: u64) -> Result<SeriesValue> {
    let mut value = CompensatedSum::default();
    let mut tail = 0.0;
    for &d in d_set {
        let w = q_sqrt(d)?;
        let f = f_series(t / d as f64, s)?;
        value.add(w * f.value);
        tail += w * f.tail;
    }
    Ok(SeriesValue {
        value: value.value(),
        tail,
    })
}

/// `P(D) = lcm(D)/2`.
pub fn period(d_set: &[u64]) -> Result<Rational> {
    if d_set.is_empty() {
        return domain("D must be nonempty");
    }
    let l = d_set.iter().fold(1u64, |acc, &d| acc.lcm(&d));
    Ok(Rational::new(l as i128, 2))
}

/// `E(D) = (U − Σ_{d∈D} Q(d)√d)·M_max` for an upper bound `U` on `Σ Q(d)√d`.
pub fn error_budget(d_set: &[u64], full_sum_upper: f64) -> Result<f64> {
    let mut inside = CompensatedSum::default();
    for &d in d_set {
        inside.add(q_sqrt(d)?);
    }
    let rest = full_sum_upper - inside.value();
    if rest < 0.0 {
        return domain(format!(
            "upper bound {full_sum_upper} is below the partial sum {} over D",
            inside.value()
        ));
    }
    Ok(rest * m_max())
}

/// Certified upper bound on `Σ_d Q(d)√d` from the product over `p < 10^8`.
pub fn certified_sqrt_sum_upper() -> Result<f64> {
    Ok(euler_constant(EulerKind::QSqrt, SQRT_SUM_PMAX)?.upper())
}

/// The budget actually enforced: the larger of the threshold and `E(D)`.
pub fn enforced_budget(cfg: &SignCheckConfig, full_sum_upper: f64) -> Result<f64> {
    Ok(error_budget(&cfg.d, full_sum_upper)?.max(cfg.threshold))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffsetVerdict {
    pub offset: f64,
    pub expected: Sign,
    /// `min_k (sign·M_D(k + o) − budget − inner tail − slack)`.
    pub worst_margin: f64,
    pub worst_k: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignCheckCertificate {
    pub period: Rational,
    pub budget: f64,
    /// Grid points per offset.
    pub grid_size: u64,
    pub verdicts: Vec<OffsetVerdict>,
}

impl SignCheckCertificate {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// `f((j + 2o)/(2d))` truncated at `S`, for `j = 0..d`, with tails.
///
/// `f(T/d)` at `T = k + o` only depends on `2k mod d`. Splitting the inner
/// sum by `s mod d` turns the `d` evaluations into one pass over `s` and a
/// `d × d` transform.
fn lattice_values(d: u64, o: f64, s: u64) -> Vec<SeriesValue> {
    let du = d as usize;
    let step = Complex64::from_polar(1.0, 4.0 * PI * o / d as f64);
    let mut g = vec![Complex64::new(0.0, 0.0); du];
    let mut e = Complex64::new(1.0, 0.0);
    for n in 1..=s {
        e *= step;
        if n % 4096 == 0 {
            e = Complex64::from_polar(1.0, 4.0 * PI * o * n as f64 / d as f64);
        }
        g[(n % d) as usize] += e * (n as f64).powf(-1.5);
    }
    let rot = Complex64::from_polar(1.0, -0.75 * PI);
    (0..du)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, gm) in g.iter().enumerate() {
                let ph = 2.0 * PI * ((j * m) % du) as f64 / d as f64;
                acc += gm * Complex64::from_polar(1.0, ph);
            }
            let theta = 2.0 * PI * (j as f64 + 2.0 * o) / d as f64;
            SeriesValue {
                value: (rot * acc).re,
                tail: inner_tail(theta, s),
            }
        })
        .collect()
}

/// Scans `T = k + o`, `k = 1..=P(D)`, for every offset and records the worst
/// margin against the enforced budget.
pub fn grid_verify(cfg: &SignCheckConfig, full_sum_upper: f64) -> Result<SignCheckCertificate> {
    cfg.validate()?;
    let per = period(&cfg.d)?;
    let budget = enforced_budget(cfg, full_sum_upper)?;
    let grid = (per.ceil().to_integer()) as u64;
    let weights = cfg
        .d
        .iter()
        .map(|&d| q_sqrt(d))
        .collect::<Result<Vec<_>>>()?;
    let mut verdicts = Vec::new();
    for &(o, expected) in &cfg.offsets {
        let tables: Vec<Vec<SeriesValue>> =
            cfg.d.iter().map(|&d| lattice_values(d, o, cfg.s)).collect();
        let mut worst = f64::INFINITY;
        let mut worst_k = 0;
        for k in 1..=grid {
            let mut value = CompensatedSum::default();
            let mut tail = 0.0;
            for ((&d, w), table) in cfg.d.iter().zip(&weights).zip(&tables) {
                let v = table[((2 * k) % d) as usize];
                value.add(w * v.value);
                tail += w * v.tail;
            }
            let margin = expected.factor() * value.value() - budget - tail - FLOAT_SLACK;
            if margin < worst {
                worst = margin;
                worst_k = k;
            }
        }
        verdicts.push(OffsetVerdict {
            offset: o,
            expected,
            worst_margin: worst,
            worst_k,
            pass: worst > 0.0,
        });
    }
    Ok(SignCheckCertificate {
        period: per,
        budget,
        grid_size: grid,
        verdicts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondPeakReport {
    pub lo: f64,
    pub hi: f64,
    /// Largest value of `M_{D'}` found on `[lo, hi]`.
    pub max_value: f64,
    pub argmax: f64,
    /// `max f · (U − Σ_{d ≤ dmax} Q(d)√d)`.
    pub error_bound: f64,
    /// `max_value + error_bound < 0`.
    pub certified_negative: bool,
}

/// `max_x f(x)`, located by a scan of one period and golden-section refinement.
pub fn kernel_max() -> f64 {
    let n = 20_000;
    let (mut best, mut bx) = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let x = 0.5 * i as f64 / n as f64;
        let v = oscillatory_kernel(x);
        if v > best {
            (best, bx) = (v, x);
        }
    }
    let h = 0.5 / n as f64;
    golden_max(oscillatory_kernel, bx - h, bx + h).1
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Dense scan of `M_{D'}` with `D' = {d ≤ dmax}` on `[lo, hi]`, using the
/// closed form of `f`.
pub fn second_peak_probe(
    lo: f64,
    hi: f64,
    dmax: u64,
    samples: usize,
    full_sum_upper: f64,
) -> Result<SecondPeakReport> {
    if !(hi > lo) || samples < 2 {
        return domain("need lo < hi and at least two samples");
    }
    let mut terms = Vec::new();
    let mut inside = CompensatedSum::default();
    for d in 1..=dmax {
        let w = q_sqrt(d)?;
        if w != 0.0 {
            terms.push((d as f64, w));
            inside.add(w);
        }
    }
    let m = |t: f64| {
        let mut acc = CompensatedSum::default();
        for &(d, w) in &terms {
            acc.add(w * oscillatory_kernel(t / d));
        }
        acc.value()
    };
    let step = (hi - lo) / (samples - 1) as f64;
    let (mut best, mut bt) = (f64::NEG_INFINITY, lo);
    for i in 0..samples {
        let t = lo + step * i as f64;
        let v = m(t);
        if v > best {
            (best, bt) = (v, t);
        }
    }
    let (argmax, refined) = golden_max(m, (bt - step).max(lo), (bt + step).min(hi));
    let (max_value, argmax) = if refined > best {
        (refined, argmax)
    } else {
        (best, bt)
    };
    let rest = full_sum_upper - inside.value();
    if rest < 0.0 {
        return domain("upper bound is below the partial sum");
    }
    let error_bound = kernel_max() * rest;
    Ok(SecondPeakReport {
        lo,
        hi,
        max_value,
        argmax,
        error_bound,
        certified_negative: max_value + error_bound < 0.0,
    })
}
