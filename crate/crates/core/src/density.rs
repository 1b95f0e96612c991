//! The murmuration density `M_k(y)`: Chebyshev form, Bessel double series,
//! `y^{1/4}` asymptotic, dyadic and smoothed averages, and the antiderivative
//! recursion for `∫ J_K(x)/x⁴`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::arith::factor_u64;
use crate::constants::{CompensatedSum, Constants};
use crate::error::{domain, Error, Result};
use crate::multfns::nu;
use crate::quad::{integrate, QuadConfig};
use crate::special::{
    bessel_j, hankel_coefficients, hankel_threshold, polylog_unit, zeta, zeta_tail,
};

/// `U_n(x)` by the three-term recurrence; `x` is clamped to `[−1, 1]`.
pub fn chebyshev_u(n: u32, x: f64) -> f64 {
    let x = x.clamp(-1.0, 1.0);
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return 1.0;
    }
    for _ in 1..n {
        (prev, cur) = (cur, 2.0 * x * cur - prev);
    }
    cur
}

#[derive(Debug, Clone, Copy)]
pub struct DensityConfig {
    /// Even weight `k ≥ 2`.
    pub k: u32,
    /// The Bessel form sums `d ≤ max(dmax, 2√y)` directly; larger `d` use the
    /// closed form of the `s`-sum.
    pub dmax: u64,
    /// Cutoff for `d` in the `y^{1/4}` asymptotic series.
    pub asym_dmax: u64,
    pub quad_tol: f64,
    pub constants: Constants,
}

impl DensityConfig {
    /// Defaults with the process-wide constants at `p ≤ 10^7`.
    pub fn new(k: u32) -> Result<Self> {
        Self::with_constants(k, *Constants::standard())
    }

    pub fn with_constants(k: u32, constants: Constants) -> Result<Self> {
        let cfg = DensityConfig {
            k,
            dmax: 24,
            asym_dmax: 5000,
            quad_tol: 1e-10,
            constants,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.k % 2 == 1 {
            return domain(format!("k must be even and at least 2, got {}", self.k));
        }
        if self.dmax == 0 || self.asym_dmax == 0 {
            return domain("series cutoffs must be positive");
        }
        if !(self.quad_tol > 0.0) {
            return domain("quad_tol must be positive");
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if (self.k / 2) % 2 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    fn quad(&self) -> QuadConfig {
        QuadConfig {
            abs_tol: self.quad_tol,
            rel_tol: self.quad_tol,
            max_intervals: 20_000,
        }
    }
}

/// A value with a certified bound on its truncation and constant errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn check_y(y: f64) -> Result<()> {
    if !(y >= 0.0 && y.is_finite()) {
        return domain(format!("y must be nonnegative and finite, got {y}"));
    }
    Ok(())
}

/// Chebyshev-form evaluator with `ν(r)` tabulated up to a fixed `r`.
struct Chebyshev {
    k: u32,
    sign: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    nu: Vec<f64>,
}

impl Chebyshev {
    fn new(cfg: &DensityConfig, ymax: f64) -> Result<Self> {
        cfg.validate()?;
        let rmax = (2.0 * ymax.sqrt()).floor() as u64 + 1;
        let nu = (0..=rmax)
            .map(|r| if r == 0 { Ok(0.0) } else { nu(r) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chebyshev {
            k: cfg.k,
            sign: cfg.sign(),
            alpha: cfg.constants.alpha(),
            beta: cfg.constants.beta(),
            gamma: cfg.constants.gamma(),
            nu,
        })
    }

    /// `(r-sum, value)`; the r-sum is returned for the error budget.
    fn eval(&self, y: f64) -> (f64, f64) {
        let km1 = (self.k - 1) as f64;
        let sy = y.sqrt();
        let mut acc = CompensatedSum::default();
        let mut r = 1u64;
        while (r * r) as f64 <= 4.0 * y {
            let rf = r as f64;
            let nu = self
                .nu
                .get(r as usize)
                .copied()
                .unwrap_or_else(|| nu(r).unwrap_or(0.0));
            acc.add(
                nu * (4.0 * y - rf * rf).max(0.0).sqrt() * chebyshev_u(self.k - 2, rf / (2.0 * sy)),
            );
            r += 1;
        }
        let rsum = acc.value();
        let mut v = self.sign * self.alpha / km1 * rsum + self.beta / km1 * sy;
        if self.k == 2 {
            v -= self.gamma * y;
        }
        (rsum, v)
    }
}

/// `M_k(y) = (α(−1)^{k/2−1}/(k−1)) Σ_{r ≤ 2√y} ν(r)√(4y − r²)U_{k−2}(r/(2√y))
/// + β√y/(k−1) − δ_{k=2}γy`. The bound covers the Euler-product tails.
pub fn murmuration_density(cfg: &DensityConfig, y: f64) -> Result<DensityValue> {
    check_y(y)?;
    let ch = Chebyshev::new(cfg, y)?;
    let (rsum, value) = ch.eval(y);
    let c = &cfg.constants;
    let km1 = (cfg.k - 1) as f64;
    let mut tail = c.alpha.tail_bound / km1 * rsum.abs() + c.beta.tail_bound / km1 * y.sqrt();
    if cfg.k == 2 {
        tail += c.gamma.tail_bound * y;
    }
    Ok(DensityValue {
        value,
        tail_bound: tail + 1e-14 * (1.0 + value.abs()),
    })
}

fn q_float(d: u64) -> f64 {
    let f = factor_u64(d);
    if f.iter().any(|&(_, e)| e > 1) {
        return 0.0;
    }
    f.iter()
        .map(|&(p, _)| crate::constants::q_prime(p))
        .product()
}

/// `Σ_{s ≥ 1} J_n(as)/s` for `a ≥ 2π`: direct terms up to the Hankel
/// threshold, then the Hankel expansion summed through polylogarithm tails.
/// Returns `(value, remainder bound)`.
fn bessel_s_sum(n: u32, a: f64) -> Result<(f64, f64)> {
    let x0 = hankel_threshold(n);
    let s0 = (x0 / a).ceil().max(1.0) as u64;
    let mut direct = CompensatedSum::default();
    for s in 1..=s0 {
        direct.add(bessel_j(n, a * s as f64) / s as f64);
    }
    // Hankel terms a_j (i/z)^j until they drop below 1e−17 at z = a(s0+1)
    let zmin = a * (s0 + 1) as f64;
    let coeffs = hankel_coefficients(n, 80);
    let mut terms = 0;
    let mut omitted = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        let mag = c.abs() / zmin.powi(j as i32);
        if mag < 1e-17 || (j > 0 && mag > coeffs[j - 1].abs() / zmin.powi(j as i32 - 1)) {
            omitted = mag;
            break;
        }
        terms = j + 1;
    }
    // T_σ(a) = Σ_{s > s0} e^{ias} s^{−σ}, σ = 3/2 + j. Low orders use
    // Li_σ(e^{ia}) minus the partial sum; high orders, where that difference
    // amplifies rounding by a_j/a^j, are summed directly to s1.
    let s1 = 64 * s0;
    let direct_from = (0..terms)
        .find(|&j| (s1 as f64).powf(-0.5 - j as f64) / (0.5 + j as f64) < 1e-16)
        .unwrap_or(terms);
    let mut partial = vec![Complex64::new(0.0, 0.0); terms];
    for s in 1..=s1 {
        let sf = s as f64;
        let e = Complex64::from_polar(1.0, a * sf);
        let mut w = sf.powf(-1.5);
        for (j, p) in partial.iter_mut().enumerate() {
            if (s <= s0 && j < direct_from) || (s > s0 && j >= direct_from) {
                *p += e * w;
            }
            w /= sf;
        }
    }
    let phase = Complex64::from_polar(1.0, -(n as f64 / 2.0 + 0.25) * PI);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut ipow = Complex64::new(1.0, 0.0);
    let mut err = 0.0;
    for (j, p) in partial.iter().enumerate() {
        let amp = coeffs[j].abs() / a.powi(j as i32);
        let t = if j < direct_from {
            let li = polylog_unit(1.5 + j as f64, a)?;
            err += amp * 1e-15 * (li.norm() + p.norm());
            li - p
        } else {
            err += amp * (s1 as f64).powf(-0.5 - j as f64) / (0.5 + j as f64);
            *p
        };
        acc += ipow * coeffs[j] / a.powi(j as i32) * t;
        ipow *= Complex64::new(0.0, 1.0);
    }
    let scale = (2.0 / (PI * a)).sqrt();
    let tail = scale * (phase * acc).re;
    let remainder = scale * (2.0 * omitted * zeta_tail(1.5, s0) + err) + 1e-13;
    Ok((direct.value() + tail, remainder))
}

/// `M_k(y) = α√y Σ_{d,s} Q(d)J_{k−1}(4πs√y/d)/s`.
///
/// For `d > 2√y` the `s`-sum is `1/(k−1) − δ_{k=2}π√y/d`, so the `d`-tail
/// closes through `Σ Q(d) = β/α` and `Σ Q(d)/d = γ/(απ)`.
pub fn murmuration_density_bessel(cfg: &DensityConfig, y: f64) -> Result<DensityValue> {
    check_y(y)?;
    cfg.validate()?;
    let n = cfg.k - 1;
    let km1 = n as f64;
    let sy = y.sqrt();
    let d1 = cfg.dmax.max((2.0 * sy).floor() as u64);
    let c = &cfg.constants;
    let (alpha, beta, gamma) = (c.alpha(), c.beta(), c.gamma());
    let mut head = CompensatedSum::default();
    let mut q_sum = CompensatedSum::default();
    let mut q_over_d = CompensatedSum::default();
    let mut remainder = 0.0;
    for d in 1..=d1 {
        let q = q_float(d);
        if q == 0.0 {
            continue;
        }
        let a = 4.0 * PI * sy / d as f64;
        let (s, rem) = if a < 2.0 * PI {
            let mut v = 1.0 / km1;
            if cfg.k == 2 {
                v -= a / 4.0;
            }
            (v, 1e-15)
        } else {
            bessel_s_sum(n, a)?
        };
        head.add(q * s);
        remainder += q * rem;
        q_sum.add(q);
        q_over_d.add(q / d as f64);
    }
    let mut value = alpha * sy * head.value() + sy * (beta - alpha * q_sum.value()) / km1;
    let mut tail = alpha * sy * remainder
        + c.alpha.tail_bound * sy * (head.value().abs() + q_sum.value() / km1)
        + c.beta.tail_bound * sy / km1;
    if cfg.k == 2 {
        value -= y * (gamma - alpha * PI * q_over_d.value());
        tail += y * (c.gamma.tail_bound + c.alpha.tail_bound * PI * q_over_d.value());
    }
    Ok(DensityValue {
        value,
        tail_bound: tail + 1e-13 * (1.0 + value.abs()),
    })
}

/// `Γ(−1/2)` and `ζ(3/2 − j)/j!`, the expansion of `Li_{3/2}(e^{iθ})` at `θ = 0`.
fn kernel_table() -> &'static (f64, Vec<f64>) {
    static CELL: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut coef = Vec::new();
        let mut fact = 1.0;
        for j in 0..80 {
            if j > 0 {
                fact *= j as f64;
            }
            let c = zeta(1.5 - j as f64) / fact;
            coef.push(c);
            if j > 4 && c.abs() * PI.powi(j) < 1e-19 {
                break;
            }
        }
        (-2.0 * PI.sqrt(), coef)
    })
}

/// `f(x) = Σ_s cos(4πxs − 3π/4)s^{−3/2} = Re[e^{−3πi/4} Li_{3/2}(e^{4πix})]`,
/// from the expansion at `θ = 0` on the representative `θ ∈ (−π, π]`.
pub fn oscillatory_kernel(x: f64) -> f64 {
    let (g, coef) = kernel_table();
    let theta = 4.0 * PI * (x - 0.5 * (2.0 * x).round());
    let rot = Complex64::from_polar(1.0, -0.75 * PI);
    let mut li = if theta == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::from_polar(g * theta.abs().sqrt(), -theta.signum() * PI / 4.0)
    };
    let it = Complex64::new(0.0, theta);
    let mut pw = Complex64::new(1.0, 0.0);
    for &c in coef {
        li += pw * c;
        pw *= it;
    }
    (rot * li).re
}

/// `max |f| = f(0)` in absolute value: `(√2/2)ζ(3/2)`.
pub fn m_max() -> f64 {
    SQRT_2 / 2.0 * zeta(1.5)
}

/// `Σ_{d ≤ dmax} Q(d)√d f(T/d)` with the bound `M_max·Σ_{d > dmax} Q(d)√d`.
pub fn asymptotic_series(cfg: &DensityConfig, t: f64) -> Result<DensityValue> {
    let mut acc = CompensatedSum::default();
    let mut weight = CompensatedSum::default();
    for d in 1..=cfg.asym_dmax {
        let q = q_float(d);
        if q == 0.0 {
            continue;
        }
        let w = q * (d as f64).sqrt();
        weight.add(w);
        acc.add(w * oscillatory_kernel(t / d as f64));
    }
    let rest = (cfg.constants.q_sqrt.upper() - weight.value()).max(0.0);
    Ok(DensityValue {
        value: acc.value(),
        tail_bound: rest * m_max() + 1e-13,
    })
}

/// `(−1)^{k/2−1}α/(π√2)`, the coefficient of `y^{1/4}` in the asymptotic.
pub fn asymptotic_prefactor(cfg: &DensityConfig) -> f64 {
    cfg.sign() * cfg.constants.alpha() / (PI * SQRT_2)
}

/// The leading term of `M_k(T²)`: prefactor `· √T ·` [`asymptotic_series`].
pub fn universal_asymptotic(cfg: &DensityConfig, t: f64) -> Result<DensityValue> {
    if !(t >= 0.0 && t.is_finite()) {
        return domain(format!("T must be nonnegative and finite, got {t}"));
    }
    let s = asymptotic_series(cfg, t)?;
    let scale = asymptotic_prefactor(cfg).abs() * t.sqrt();
    Ok(DensityValue {
        value: asymptotic_prefactor(cfg) * t.sqrt() * s.value,
        tail_bound: scale * s.tail_bound,
    })
}

fn kinks(y: f64, lo: f64, hi: f64) -> Vec<f64> {
    // M_k(y/u) has kinks where y/u = r²/4
    let mut out = Vec::new();
    let mut r = 1u64;
    loop {
        let u = 4.0 * y / (r * r) as f64;
        if u <= lo {
            break;
        }
        if u < hi {
            out.push(u);
        }
        r += 1;
    }
    out
}

/// `2/(c²−1) ∫_1^c u M_k(y/u) du`, split at every kink `u = 4y/r²`.
pub fn dyadic_density(cfg: &DensityConfig, c: f64, y: f64) -> Result<f64> {
    if !(c > 1.0 && c.is_finite()) {
        return domain(format!("c must exceed 1, got {c}"));
    }
    check_y(y)?;
    let ch = Chebyshev::new(cfg, y)?;
    let r = integrate(
        |u| u * ch.eval(y / u).1,
        1.0,
        c,
        &kinks(y, 1.0, c),
        cfg.quad(),
    )?;
    Ok(2.0 / (c * c - 1.0) * r.value)
}

/// `(a, b, c)` of the `k = 2`, `c = 2` closed form:
/// `a = (4/9)(2^{3/2} − 1)β`, `b = (2/3)γ`, `c = 2α/3`.
pub fn asymptotic_coefficients(constants: &Constants) -> (f64, f64, f64) {
    (
        4.0 / 9.0 * (2f64.powf(1.5) - 1.0) * constants.beta(),
        2.0 / 3.0 * constants.gamma(),
        2.0 / 3.0 * constants.alpha(),
    )
}

/// The three-branch closed form of `dyadic_density` at `k = 2`, `c = 2`, `y ∈ [0, 1]`.
pub fn dyadic_closed_form_k2(constants: &Constants, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return domain(format!("closed form needs y in [0, 1], got {y}"));
    }
    let (a, b, c) = asymptotic_coefficients(constants);
    let base = a * y.sqrt() - b * y;
    if y <= 0.25 {
        return Ok(base);
    }
    let y2 = y * y;
    let quarter = (1.0 - 2.0 * y) * (y - 0.25).sqrt();
    let asin_half = (1.0 / (2.0 * y) - 1.0).asin();
    if y <= 0.5 {
        return Ok(base + c * PI * y2 - c * quarter - 2.0 * c * y2 * asin_half);
    }
    Ok(
        base + 2.0 * c * y2 * ((1.0 / y - 1.0).asin() - asin_half) - c * quarter
            + 2.0 * c * (1.0 - y) * (2.0 * y - 1.0).sqrt(),
    )
}

/// The standard bump `exp(−1/((u − 1)(2 − u)))` on `(1, 2)`.
pub fn bump(u: f64) -> f64 {
    if u <= 1.0 || u >= 2.0 {
        0.0
    } else {
        (-1.0 / ((u - 1.0) * (2.0 - u))).exp()
    }
}

/// Window for [`smoothed_average`].
pub enum Window<'a> {
    /// `1_{[1, c]}`; evaluated through [`dyadic_density`].
    Sharp { c: f64 },
    /// A nonnegative weight supported in `[lo, hi] ⊂ (0, ∞)`.
    Smooth {
        phi: &'a dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
    },
}

/// `∫ M_k(y/u)Φ(u) u du / ∫ Φ(u) u du`.
pub fn smoothed_average(cfg: &DensityConfig, window: &Window<'_>, y: f64) -> Result<f64> {
    check_y(y)?;
    match *window {
        Window::Sharp { c } => dyadic_density(cfg, c, y),
        Window::Smooth { phi, lo, hi } => {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return domain(format!("window support [{lo}, {hi}] must lie in (0, ∞)"));
            }
            let ch = Chebyshev::new(cfg, y / lo)?;
            let cuts = kinks(y, lo, hi);
            let num = integrate(|u| ch.eval(y / u).1 * phi(u) * u, lo, hi, &cuts, cfg.quad())?;
            let den = integrate(|u| phi(u) * u, lo, hi, &[], cfg.quad())?;
            if den.value == 0.0 {
                return Err(Error::Domain("window has zero mass".into()));
            }
            Ok(num.value / den.value)
        }
    }
}

/// `∫ J_K(x)/x⁴ dx = Σ_t c_t J_t(x)/x⁴` for odd `K ≥ 5`.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselAntiderivative {
    pub k: u32,
    pub coefficients: BTreeMap<u32, f64>,
}

impl BesselAntiderivative {
    pub fn new(k: u32) -> Result<Self> {
        if k < 5 || k % 2 == 0 {
            return domain(format!("K must be odd and at least 5, got {k}"));
        }
        // terms (t, n) ↦ coefficient of J_t/x^n
        let mut terms: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        expand(k, 4, 1.0, &mut terms);
        // lower every x^{−n} to x^{−4} through J_t/x = (J_{t−1} + J_{t+1})/(2t)
        for n in (5..=k).rev() {
            let level: Vec<_> = terms
                .iter()
                .filter(|((_, m), _)| *m == n)
                .map(|(&key, &v)| (key, v))
                .collect();
            for ((t, _), v) in level {
                terms.remove(&(t, n));
                let w = v / (2 * t) as f64;
                *terms.entry((t - 1, n - 1)).or_insert(0.0) += w;
                *terms.entry((t + 1, n - 1)).or_insert(0.0) += w;
            }
        }
        let coefficients = terms
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((t, _), v)| (t, v))
            .collect();
        Ok(BesselAntiderivative { k, coefficients })
    }

    /// `J(x) = Σ c_t J_t(x)`.
    pub fn numerator(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .map(|(&t, &c)| c * bessel_j(t, x))
            .sum()
    }

    /// `J(x)/x⁴`.
    pub fn eval(&self, x: f64) -> f64 {
        self.numerator(x) / x.powi(4)
    }

    /// `∫_0^∞ J(x)/x dx = Σ c_t/t`.
    pub fn mellin_at_zero(&self) -> f64 {
        self.coefficients.iter().map(|(&t, &c)| c / t as f64).sum()
    }
}

/// Adds `w · ∫ J_m/x^n` to `terms`, for `m − n` odd and positive.
fn expand(m: u32, n: u32, w: f64, terms: &mut BTreeMap<(u32, u32), f64>) {
    if m == n + 1 {
        *terms.entry((n, n)).or_insert(0.0) -= w;
        return;
    }
    // J_m = 2(m−1)J_{m−1}/x − J_{m−2}
    expand(m - 1, n + 1, 2.0 * (m - 1) as f64 * w, terms);
    expand(m - 2, n, -w, terms);
}
