//! `murmur`: command-line access to the class-number, trace, density and
//! sign-check pipelines. CSV goes to `--out` or standard output.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use murmur_core::classnumbers::{
    hurwitz_sieve, ClassNumberSource, HurwitzTable, SparseHurwitzCache,
};
use murmur_core::constants::{euler_constant, qcount_partial, EulerKind};
use murmur_core::density::{
    asymptotic_coefficients, murmuration_density, murmuration_density_bessel, universal_asymptotic,
    DensityConfig, DensityValue,
};
use murmur_core::multfns::{
    phi_circ, phi_circ_bruteforce, remainder_set, remainder_set_bruteforce, theta, theta_bruteforce,
};
use murmur_core::signcheck::{
    certified_sqrt_sum_upper, grid_verify, second_peak_probe, Sign, SignCheckConfig,
};
use murmur_core::traceformula::{dyadic_average, interval_average, TraceReport};
use murmur_core::{Error, Rational};

const SPARSE_CACHE_FILE: &str = "hurwitz_sparse.bin";

#[derive(Parser)]
#[command(
    name = "murmur",
    version,
    about = "Murmuration densities and trace-formula averages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate H_1(−d) for d in [dmin, dmax] into a binary cache file.
    SieveClassnumbers {
        #[arg(long)]
        dmin: u64,
        #[arg(long)]
        dmax: u64,
        /// Output file; defaults to the cache directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average of Σ √P λ_f(P) ε(f) over square-free N in [X, X+Y].
    ///
    /// CSV columns: N_low, N_high, P, k, numerator, denominator, average,
    /// predicted, residual, window_predicted, window_residual, levels.
    TraceAverage {
        #[arg(long = "X")]
        x: u64,
        #[arg(long = "Y")]
        y: u64,
        /// One or more primes, comma separated.
        #[arg(long = "P", value_delimiter = ',', required = true)]
        p: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        common: TraceCommon,
    },
    /// Average over square-free N in [X, cX] against the dyadic density.
    ///
    /// CSV columns as for trace-average.
    DyadicAverage {
        #[arg(long = "X")]
        x: u64,
        #[arg(long)]
        c: f64,
        #[arg(long = "P", value_delimiter = ',', required = true)]
        p: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        common: TraceCommon,
    },
    /// Evaluate M_k on a grid. CSV columns: y, value, tail_bound.
    Density {
        #[arg(long)]
        k: u32,
        /// start:stop:step
        #[arg(long = "y-grid")]
        y_grid: String,
        #[arg(long, value_enum, default_value_t = Form::Chebyshev)]
        form: Form,
        /// Also write the curve as an SVG polyline.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify the sign pattern of the truncated series over one period.
    ///
    /// CSV columns: offset, expected_sign, worst_margin, worst_k, pass.
    /// Exit code 0 iff every offset passes.
    Signcheck {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,0.162")]
        offsets: Vec<f64>,
        /// Expected signs per offset, `+` or `-`.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "-,-,+",
            allow_hyphen_values = true
        )]
        signs: Vec<String>,
        #[arg(long = "S", default_value_t = 1_000_000)]
        s: u64,
        /// Truncation set; defaults to the 25-element set of period 15015.
        #[arg(long = "D", value_delimiter = ',')]
        d: Option<Vec<u64>>,
        /// Also scan [15014.5, 15015] with D' = {1..5000}.
        #[arg(long)]
        second_peak: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Euler-product constants with certified tails and the Σ Q identities.
    ///
    /// CSV columns: name, value, tail_bound, pmax.
    VerifyConstants {
        #[arg(long, default_value_t = 10_000_000)]
        pmax: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the closed forms of R_{r,d}, θ_r and φ° with brute force.
    ///
    /// CSV columns: check, cases, mismatches. Exit code 1 on any mismatch.
    VerifyMultfns {
        #[arg(long, default_value_t = 12)]
        rmax: u64,
        #[arg(long, default_value_t = 200)]
        mmax: u64,
        #[arg(long = "P", value_delimiter = ',', default_value = "5,7,11,101")]
        p: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct TraceCommon {
    /// Class-number cache: a sparse cache (read and updated) or a dense table
    /// from sieve-classnumbers (read only).
    #[arg(long = "hurwitz-cache")]
    hurwitz_cache: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Chebyshev,
    Bessel,
    Asymptotic,
}

/// `$MURMUR_CACHE_DIR`, else `$XDG_CACHE_HOME/murmur`, else `~/.cache/murmur`.
fn cache_dir() -> PathBuf {
    if let Some(d) = std::env::var_os("MURMUR_CACHE_DIR") {
        return PathBuf::from(d);
    }
    if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("murmur");
    }
    std::env::var_os("HOME")
        .map(|h| PathBuf::from(h).join(".cache").join("murmur"))
        .unwrap_or_else(|| PathBuf::from(".murmur-cache"))
}

enum Source {
    Dense(HurwitzTable),
    Sparse(SparseHurwitzCache, PathBuf),
}

impl ClassNumberSource for Source {
    fn h1(&self, d: u64) -> murmur_core::Result<Rational> {
        match self {
            Source::Dense(t) => t.h1(d),
            Source::Sparse(c, _) => c.h1(d),
        }
    }
}

impl Source {
    fn open(path: Option<&Path>) -> anyhow::Result<Self> {
        let path = path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| cache_dir().join(SPARSE_CACHE_FILE));
        if !path.exists() {
            return Ok(Source::Sparse(SparseHurwitzCache::new(), path));
        }
        match SparseHurwitzCache::load(&path) {
            Ok(c) => Ok(Source::Sparse(c, path)),
            Err(Error::Format(_)) => {
                let t = HurwitzTable::load(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Ok(Source::Dense(t))
            }
            Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
        }
    }

    fn persist(&self) -> anyhow::Result<()> {
        if let Source::Sparse(c, path) = self {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            c.save(path)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn write_reports(rows: &[TraceReport], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    w.write_record([
        "N_low",
        "N_high",
        "P",
        "k",
        "numerator",
        "denominator",
        "average",
        "predicted",
        "residual",
        "window_predicted",
        "window_residual",
        "levels",
    ])?;
    for r in rows {
        w.write_record([
            r.n_low.to_string(),
            r.n_high.to_string(),
            r.p.to_string(),
            r.k.to_string(),
            fmt(r.numerator),
            fmt(r.denominator),
            fmt(r.average),
            fmt(r.predicted),
            fmt(r.residual),
            fmt(r.window_predicted),
            fmt(r.window_residual),
            r.levels.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// An argument error; exits with the usage code 2.
fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Domain(msg.into()).into()
}

/// `start:stop:step` to grid points, with the count rounded to absorb float error.
fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| usage(format!("bad grid {spec:?}: {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(usage(format!("grid must be start:stop:step, got {spec:?}")));
    };
    if !(step > 0.0) || stop < start {
        return Err(usage(format!(
            "grid needs step > 0 and stop ≥ start, got {spec:?}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn write_svg(path: &Path, points: &[(f64, f64)], title: &str) -> anyhow::Result<()> {
    let (w, h, pad) = (800.0, 400.0, 40.0);
    let (xmin, xmax) = (
        points.first().map_or(0.0, |p| p.0),
        points.last().map_or(1.0, |p| p.0),
    );
    let ymin = points.iter().map(|p| p.1).fold(0.0f64, f64::min);
    let ymax = points.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let sx = |x: f64| pad + (x - xmin) / (xmax - xmin).max(f64::MIN_POSITIVE) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - ymin) / (ymax - ymin).max(f64::MIN_POSITIVE) * (h - 2.0 * pad);
    let poly: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(
        f,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )?;
    writeln!(f, "<title>{title}</title>")?;
    writeln!(
        f,
        r#"<line x1="{pad}" y1="{z:.2}" x2="{x2}" y2="{z:.2}" stroke="gray"/>"#,
        z = sy(0.0),
        x2 = w - pad
    )?;
    writeln!(
        f,
        r#"<polyline fill="none" stroke="black" points="{}"/>"#,
        poly.join(" ")
    )?;
    writeln!(f, "</svg>")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::SieveClassnumbers { dmin, dmax, out } => {
            let path =
                out.unwrap_or_else(|| cache_dir().join(format!("hurwitz_{dmin}_{dmax}.bin")));
            let table = hurwitz_sieve(dmin, dmax)?;
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            table.save(&path)?;
            eprintln!(
                "wrote H_1(−d) for d in [{dmin}, {dmax}] to {}",
                path.display()
            );
        }
        Command::TraceAverage { x, y, p, k, common } => {
            let source = Source::open(common.hurwitz_cache.as_deref())?;
            let cfg = DensityConfig::new(k)?;
            let rows = p
                .iter()
                .map(|&p| interval_average(x, y, p, k, &source, &cfg))
                .collect::<murmur_core::Result<Vec<_>>>()?;
            source.persist()?;
            write_reports(&rows, common.out.as_deref())?;
        }
        Command::DyadicAverage { x, c, p, k, common } => {
            let source = Source::open(common.hurwitz_cache.as_deref())?;
            let cfg = DensityConfig::new(k)?;
            let rows = p
                .iter()
                .map(|&p| dyadic_average(x, c, p, k, &source, &cfg))
                .collect::<murmur_core::Result<Vec<_>>>()?;
            source.persist()?;
            write_reports(&rows, common.out.as_deref())?;
        }
        Command::Density {
            k,
            y_grid,
            form,
            svg,
            out,
        } => {
            let cfg = DensityConfig::new(k)?;
            let grid = parse_grid(&y_grid)?;
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["y", "value", "tail_bound"])?;
            let mut points = Vec::with_capacity(grid.len());
            for y in grid {
                let v: DensityValue = match form {
                    Form::Chebyshev => murmuration_density(&cfg, y)?,
                    Form::Bessel => murmuration_density_bessel(&cfg, y)?,
                    Form::Asymptotic => universal_asymptotic(&cfg, y.sqrt())?,
                };
                w.write_record([fmt(y), fmt(v.value), fmt(v.tail_bound)])?;
                points.push((y, v.value));
            }
            w.flush()?;
            if let Some(path) = svg {
                write_svg(&path, &points, &format!("M_{k}"))?;
            }
        }
        Command::Signcheck {
            offsets,
            signs,
            s,
            d,
            second_peak,
            report,
        } => {
            if offsets.len() != signs.len() {
                return Err(usage("--offsets and --signs must have the same length"));
            }
            let offsets = offsets
                .into_iter()
                .zip(&signs)
                .map(|(o, sg)| match sg.as_str() {
                    "+" => Ok((o, Sign::Positive)),
                    "-" => Ok((o, Sign::Negative)),
                    other => Err(usage(format!("sign must be + or -, got {other:?}"))),
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let mut cfg = SignCheckConfig::standard();
            cfg.offsets = offsets;
            cfg.s = s;
            if let Some(d) = d {
                cfg.d = d;
            }
            let upper = certified_sqrt_sum_upper()?;
            let cert = grid_verify(&cfg, upper)?;
            eprintln!(
                "period {} budget {:.6} grid {}",
                cert.period, cert.budget, cert.grid_size
            );
            let mut w = csv::Writer::from_writer(sink(report.as_deref())?);
            w.write_record(["offset", "expected_sign", "worst_margin", "worst_k", "pass"])?;
            for v in &cert.verdicts {
                let sign = if v.expected == Sign::Positive {
                    "+"
                } else {
                    "-"
                };
                w.write_record([
                    v.offset.to_string(),
                    sign.to_string(),
                    fmt(v.worst_margin),
                    v.worst_k.to_string(),
                    v.pass.to_string(),
                ])?;
            }
            w.flush()?;
            if second_peak {
                let r = second_peak_probe(15014.5, 15015.0, 5000, 2001, upper)?;
                eprintln!(
                    "second peak: max {:.6} at {:.6}, error bound {:.6}, certified negative {}",
                    r.max_value, r.argmax, r.error_bound, r.certified_negative
                );
            }
            if !cert.all_pass() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::VerifyConstants { pmax, out } => {
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["name", "value", "tail_bound", "pmax"])?;
            let mut vals = Vec::new();
            for kind in EulerKind::ALL {
                let v = euler_constant(kind, pmax)?;
                w.write_record([
                    kind.name().to_string(),
                    fmt(v.value),
                    fmt(v.tail_bound),
                    v.pmax.to_string(),
                ])?;
                vals.push(v);
            }
            let get = |k: EulerKind| {
                vals.iter()
                    .find(|v| v.kind == k)
                    .expect("all kinds computed")
                    .value
            };
            let (alpha, beta, gamma) = (
                get(EulerKind::Alpha),
                get(EulerKind::Beta),
                get(EulerKind::Gamma),
            );
            let q = qcount_partial(1_000_000)?;
            let (a, b, c) =
                asymptotic_coefficients(&murmur_core::constants::Constants::compute(pmax)?);
            for (name, value) in [
                ("sum_Q_minus_beta_over_alpha", q.q - beta / alpha),
                (
                    "alpha_over_gamma_sum_Q_over_d_minus_inv_pi",
                    alpha / gamma * q.q_over_d - 1.0 / std::f64::consts::PI,
                ),
                ("dyadic_a", a),
                ("dyadic_b", b),
                ("dyadic_c", c),
            ] {
                w.write_record([
                    name.to_string(),
                    fmt(value),
                    String::new(),
                    pmax.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Command::VerifyMultfns { rmax, mmax, p, out } => {
            let mut rows = [
                ("remainder_set", 0u64, 0u64),
                ("theta", 0, 0),
                ("phi_circ", 0, 0),
            ];
            for &p in &p {
                for r in 1..=rmax {
                    let mut d = 1;
                    while d * d <= 4 * p && d <= 40 {
                        let closed = remainder_set(r, d, p)?.residues;
                        rows[0].1 += 1;
                        rows[0].2 += (closed != remainder_set_bruteforce(r, d, p)?) as u64;
                        let mut g = 1;
                        while g <= mmax {
                            if phi_circ(r, d, g).is_ok() {
                                rows[2].1 += 1;
                                rows[2].2 +=
                                    (phi_circ(r, d, g)? != phi_circ_bruteforce(r, d, g, p)?) as u64;
                            }
                            g += 1;
                        }
                        d += 1;
                    }
                    for m in 1..=mmax {
                        if let Ok(t) = theta(r, m, p) {
                            rows[1].1 += 1;
                            rows[1].2 += (t != theta_bruteforce(r, m, p)?) as u64;
                        }
                    }
                }
            }
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["check", "cases", "mismatches"])?;
            for (name, cases, bad) in rows {
                w.write_record([name.to_string(), cases.to_string(), bad.to_string()])?;
            }
            w.flush()?;
            if rows.iter().any(|r| r.2 > 0) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<Error>()
                .is_some_and(|e| matches!(e, Error::Domain(_) | Error::OutOfRange { .. }));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
