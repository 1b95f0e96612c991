//! Special functions on the real line: gamma, Riemann zeta, zeta tails, the
//! polylogarithm on the unit circle, Bessel `J_n` and its Hankel expansion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `B_{2k}/(2k)!` for `k = 1..=10`.
const BERNOULLI_OVER_FACT: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3_617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `Γ(x)` for real `x` away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// `sin(πs/2)`, exactly zero at even integers.
fn sin_half_pi(s: f64) -> f64 {
    let t = (s / 2.0).rem_euclid(2.0);
    if t.fract() == 0.0 {
        0.0
    } else {
        (PI * t).sin()
    }
}

/// Euler–Maclaurin evaluation of `Σ_{n ≥ m} n^{−s}` for `m ≥ 16`, `s ≠ 1`.
fn em_tail(s: f64, m: f64) -> f64 {
    let mut acc = m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
    // rising factorial s(s+1)...(s+2k−2) times m^{−s−2k+1}
    let mut rising = s;
    let mut pw = m.powf(-s - 1.0);
    for (k, &b) in BERNOULLI_OVER_FACT.iter().enumerate() {
        acc += b * rising * pw;
        let k2 = 2.0 * (k as f64 + 1.0);
        rising *= (s + k2 - 1.0) * (s + k2);
        pw /= m * m;
    }
    acc
}

const EM_START: u64 = 20;

/// Riemann `ζ(s)` for real `s ≠ 1`.
pub fn zeta(s: f64) -> f64 {
    if s == 1.0 {
        return f64::INFINITY;
    }
    if s < 0.0 {
        let sn = sin_half_pi(s);
        if sn == 0.0 {
            return 0.0;
        }
        let log_mag = s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_gamma(1.0 - s);
        return sn * log_mag.exp() * zeta(1.0 - s);
    }
    if s > 60.0 {
        return 1.0 + 2f64.powf(-s) + 3f64.powf(-s);
    }
    let mut acc = 0.0;
    for n in (1..EM_START).rev() {
        acc += (n as f64).powf(-s);
    }
    acc + em_tail(s, EM_START as f64)
}

/// `Σ_{n > N} n^{−s}` for `s > 1`.
pub fn zeta_tail(s: f64, n: u64) -> f64 {
    debug_assert!(s > 1.0);
    if n < EM_START {
        let mut acc = em_tail(s, EM_START as f64);
        for m in (n + 1..EM_START).rev() {
            acc += (m as f64).powf(-s);
        }
        acc
    } else {
        em_tail(s, (n + 1) as f64)
    }
}

/// `Li_σ(e^{iθ}) = Σ_{n ≥ 1} e^{inθ} n^{−σ}` for non-integer `σ`.
///
/// Uses the expansion `Γ(1−σ)(−iθ)^{σ−1} + Σ_j ζ(σ−j)(iθ)^j/j!` at the
/// representative `θ ∈ (−π, π]`. At `θ ≡ 0` the value is `ζ(σ)`, which
/// needs `σ > 1`.
pub fn polylog_unit(sigma: f64, theta: f64) -> Result<Complex64> {
    if sigma.fract() == 0.0 {
        return domain(format!("polylog order must be non-integral, got {sigma}"));
    }
    let th = theta - 2.0 * PI * (theta / (2.0 * PI)).round();
    if th == 0.0 {
        if sigma <= 1.0 {
            return domain("Li_σ(1) diverges for σ ≤ 1");
        }
        return Ok(Complex64::new(zeta(sigma), 0.0));
    }
    let a = th.abs();
    let sg = th.signum();
    let phase = -sg * PI / 2.0 * (sigma - 1.0);
    let mut sum = Complex64::from_polar(gamma(1.0 - sigma) * a.powf(sigma - 1.0), phase);
    let ln_a = a.ln();
    let mut small = 0;
    for j in 0..400u32 {
        let s = sigma - j as f64;
        let jf = j as f64;
        let mag = if s >= 0.5 {
            zeta(s) * (jf * ln_a - ln_gamma(jf + 1.0)).exp()
        } else {
            let sn = sin_half_pi(s);
            let lm = s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_gamma(1.0 - s) - ln_gamma(jf + 1.0)
                + jf * ln_a;
            sn * lm.exp() * zeta(1.0 - s)
        };
        // (iθ)^j = |θ|^j · (i·sg)^j
        let unit = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, sg),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -sg),
        };
        sum += unit * mag;
        if jf > sigma + 2.0 && mag.abs() < 1e-18 * sum.norm().max(1.0) {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(sum)
}

/// Hankel coefficients `a_m(n) = ∏_{j ≤ m}(4n² − (2j−1)²) / (m! 8^m)` for `m < count`.
pub fn hankel_coefficients(n: u32, count: usize) -> Vec<f64> {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut out = Vec::with_capacity(count);
    let mut a = 1.0;
    for m in 0..count {
        out.push(a);
        let j = (m + 1) as f64;
        a *= (mu - (2.0 * j - 1.0).powi(2)) / (8.0 * j);
    }
    out
}

/// Argument above which `bessel_j` switches to the Hankel expansion.
pub fn hankel_threshold(n: u32) -> f64 {
    (n as f64 * n as f64).max(40.0)
}

fn bessel_hankel(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    let mut m = 0u32;
    loop {
        let t = term.abs();
        if t > prev || t < 1e-17 || m > 200 {
            break;
        }
        // a_m x^{−m} with the i^m pattern folded into signs
        match m % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        prev = t;
        let j = (m + 1) as f64;
        term *= (mu - (2.0 * j - 1.0).powi(2)) / (8.0 * j * x);
        m += 1;
    }
    let chi = x - (n as f64 / 2.0 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn bessel_series(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let h = x / 2.0;
    let lead = (nf * h.ln() - ln_gamma(nf + 1.0)).exp();
    let h2 = h * h;
    let mut term = lead;
    let mut acc = lead;
    let mut k = 1.0;
    while term.abs() > 1e-18 * acc.abs() {
        term *= -h2 / (k * (nf + k));
        acc += term;
        k += 1.0;
    }
    acc
}

fn bessel_miller(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let top = (x + 8.0 * x.cbrt()).max(nf + (160.0 * nf).sqrt()) + 20.0;
    let mut m = top.ceil() as u64;
    if m % 2 == 1 {
        m += 1;
    }
    let mut next = 0.0f64; // j_{k+1}
    let mut cur = 1e-300f64; // j_k
    let mut norm = 0.0;
    let mut result = 0.0;
    if m == n as u64 {
        result = cur;
    }
    let mut k = m;
    while k > 0 {
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k == n as u64 {
            result = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
    }
    // cur is j_0; norm already holds 2Σ_{even k ≥ 2} j_k
    result / (norm + cur)
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x >= hankel_threshold(n) {
        bessel_hankel(n, x)
    } else if x * x / 4.0 <= n as f64 + 1.0 {
        bessel_series(n, x)
    } else {
        bessel_miller(n, x)
    }
}
