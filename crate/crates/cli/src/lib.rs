//! Command-line front end: argument parsing, output files with their
//! `run.json` manifests, and the acceptance harness.
//!
//! Exit codes: 0 success, 1 a check or computation failed, 2 bad arguments.

pub mod criteria;
pub mod manifest;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wpspine::geometry::identities::passage_sum_deviation;
use wpspine::geometry::{poisson_check_with, Derivatives};
use wpspine::sampler::{ks_against_x1, sample_d, SampleConfig};
use wpspine::series::{solve_string, variance_pipeline, xhat, AtomicWeight};
use wpspine::trees::{enumerate_anti, enumerate_delaunay, CuspMask};
use wpspine::wp_poly::{wp_volume, PiPoly, Route};
use wpspine::{Error, Exec};

use criteria::Tolerances;
use manifest::RunManifest;

pub const THREADS_ENV: &str = "WPSPINE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "wpspine", version, about = "Decorated trees, Weil-Petersson volumes and random surfaces")]
pub struct Cli {
    /// Worker threads; defaults to $WPSPINE_THREADS, then available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RouteArg {
    Anti,
    Ie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyWhat {
    Shears,
    Poisson,
    Identities,
    #[value(name = "E")]
    E,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Enumerate Delaunay (default) or anti-Delaunay trees as JSON records.
    Trees {
        #[arg(long)]
        n: usize,
        /// 0/1 string, `1` marks a cusp; label 1 first. Defaults to no cusps.
        #[arg(long)]
        cusps: Option<String>,
        #[arg(long)]
        anti: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact volume polynomial, optionally evaluated at numeric lengths.
    Volume {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cusps: Option<String>,
        #[arg(long, value_enum, default_value = "anti")]
        route: RouteArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lengths: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// String-equation and three-point-function series.
    Series {
        #[command(subcommand)]
        what: SeriesCommand,
    },
    /// Monte Carlo distance differences between cusps 1 and 2.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lengths: Vec<f64>,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Histogram CSV; the JSON summary goes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Length L of the reference law for the KS statistic (n = 3 only).
        #[arg(long)]
        ks: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
        #[arg(long, default_value_t = 10.0)]
        range: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_rejections: u64,
    },
    /// Geometry identity checks with a pass/fail table.
    Verify {
        #[arg(long, value_enum)]
        what: VerifyWhat,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Reproduce {
        /// Criterion numbers to run, default all.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<usize>>,
        /// Tolerance override `key=value`, repeatable.
        #[arg(long = "set")]
        overrides: Vec<String>,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SeriesCommand {
    /// Coefficients of R[μ] solving the string equation.
    String {
        /// Atomic weight `x1:K1,x2:K2,...`.
        #[arg(long, default_value = "1:0")]
        weights: String,
        #[arg(long, default_value_t = 8)]
        order: usize,
        /// Exact coefficients as polynomials in π².
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coefficients of the three-point function at `u`.
    Xhat {
        #[arg(long, default_value = "1:0")]
        weights: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance of D for n-cusp surfaces, CSV `n,variance,ratio`.
    Variance {
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure kinds mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Failed(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Failed(format!("serialization error: {e}"))
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Streams for command output; tests substitute buffers.
pub struct Io<'a> {
    pub stdout: &'a mut dyn std::io::Write,
    pub stderr: &'a mut dyn std::io::Write,
}

/// Parses `argv` (program name first), runs the command, returns the exit code.
pub fn dispatch<I, T>(argv: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(io.stderr, "{text}");
                return 2;
            }
            let _ = write!(io.stdout, "{text}");
            return 0;
        }
    };
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let exec = match configure_threads(cli.threads) {
        Ok(e) => e,
        Err(msg) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            return 2;
        }
    };
    match run(cli.command, &args, exec, io) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(io.stderr, "error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(io.stderr, "failed: {msg}");
            1
        }
    }
}

fn configure_threads(flag: Option<usize>) -> std::result::Result<Exec, String> {
    let requested = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?)
            }
            _ => None,
        },
    };
    if requested == Some(0) {
        return Err("thread count must be positive".into());
    }
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            // the global pool can be built once per process; later calls keep it
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(if requested == Some(1) { Exec::Sequential } else { Exec::Parallel })
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(Exec::Sequential)
    }
}

fn mask_arg(n: usize, cusps: Option<&str>) -> std::result::Result<CuspMask, Failure> {
    let mask = match cusps {
        Some(s) => CuspMask::parse(s)?,
        None => CuspMask::all_positive(n)?,
    };
    if mask.n() != n {
        return Err(Failure::Usage(format!("cusp mask has {} entries, expected {n}", mask.n())));
    }
    Ok(mask)
}

/// Writes `bytes` to `out` (manifest beside it) or to stdout (manifest on
/// stderr).
fn emit(out: Option<&PathBuf>, bytes: &[u8], mut manifest: RunManifest, io: &mut Io) -> Outcome {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, bytes)?;
            manifest.record(&path.to_string_lossy(), bytes);
            let m = serde_json::to_vec_pretty(&manifest)?;
            std::fs::write(RunManifest::path_beside(path), m)?;
        }
        None => {
            io.stdout.write_all(bytes)?;
            manifest.record("-", bytes);
            writeln!(io.stderr, "{}", serde_json::to_string(&manifest)?)?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(v: &T) -> std::result::Result<Vec<u8>, Failure> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

#[derive(Serialize)]
struct VolumeOutput {
    n: usize,
    cusps: String,
    route: String,
    polynomial: wpspine::wp_poly::PolyJson,
    display: String,
    homogeneous_degree: Option<u32>,
    value: Option<f64>,
}

#[derive(Serialize)]
struct CoefficientRow {
    k: usize,
    value: String,
}

#[derive(Serialize)]
struct SampleSummary {
    n: usize,
    lengths: Vec<f64>,
    count: u64,
    seed: u64,
    moments: [f64; 4],
    mean_std_error: f64,
    second_moment_std_error: f64,
    underflow: u64,
    overflow: u64,
    acceptance: Vec<TreeAcceptance>,
    ks: Option<f64>,
}

#[derive(Serialize)]
struct TreeAcceptance {
    tree: String,
    samples: u64,
    proposals: u64,
    rate: f64,
}

fn run(command: Command, args: &[String], exec: Exec, io: &mut Io) -> Outcome {
    match command {
        Command::Trees { n, cusps, anti, out } => {
            let mask = mask_arg(n, cusps.as_deref())?;
            let trees = if anti { enumerate_anti(n, &mask)? } else { enumerate_delaunay(n, &mask)? };
            let records: Vec<_> = trees.iter().map(|t| t.to_json()).collect();
            emit(out.as_ref(), &json_line(&records)?, RunManifest::new("trees", args, None), io)
        }
        Command::Volume { n, cusps, route, lengths, out } => {
            let mask = mask_arg(n, cusps.as_deref())?;
            let r = match route {
                RouteArg::Anti => Route::Anti,
                RouteArg::Ie => Route::InclusionExclusion,
            };
            let v = wp_volume(n, &mask, r, exec)?;
            let value = match &lengths {
                Some(l) if l.len() != n => {
                    return Err(Failure::Usage(format!("{} lengths given, expected {n}", l.len())));
                }
                Some(l) => Some(v.evaluate_numeric(l)?),
                None => None,
            };
            let record = VolumeOutput {
                n,
                cusps: mask.flags().iter().map(|&c| if c { '1' } else { '0' }).collect(),
                route: format!("{route:?}").to_lowercase(),
                polynomial: v.to_json(),
                display: v.to_string(),
                homogeneous_degree: v.homogeneous_degree(),
                value,
            };
            emit(out.as_ref(), &json_line(&record)?, RunManifest::new("volume", args, None), io)
        }
        Command::Series { what } => series(what, args, io),
        Command::Sample { n, lengths, count, seed, out, ks, bin_width, range, max_rejections } => {
            if lengths.len() != n {
                return Err(Failure::Usage(format!("{} lengths given, expected {n}", lengths.len())));
            }
            let config = SampleConfig { n, lengths: lengths.clone(), sample_count: count, seed, max_rejections, bin_width, range };
            let stats = sample_d(&config, exec)?;
            let ks_value = match ks {
                Some(l) if n == 3 => Some(ks_against_x1(&stats, l)?),
                Some(_) => return Err(Failure::Usage("--ks needs n = 3".into())),
                None => None,
            };
            let trees = wpspine::sampler::tree_probabilities(n, &lengths)?;
            let summary = SampleSummary {
                n,
                lengths,
                count: stats.count,
                seed,
                moments: [stats.moment(1), stats.moment(2), stats.moment(3), stats.moment(4)],
                mean_std_error: stats.mean_std_error(),
                second_moment_std_error: stats.second_moment_std_error(),
                underflow: stats.underflow,
                overflow: stats.overflow,
                acceptance: trees
                    .iter()
                    .zip(&stats.acceptance)
                    .map(|((t, _), a)| TreeAcceptance {
                        tree: t.canonical_code(),
                        samples: a.samples,
                        proposals: a.proposals,
                        rate: if a.proposals == 0 { f64::NAN } else { a.rate() },
                    })
                    .collect(),
                ks: ks_value,
            };
            let summary_bytes = json_line(&summary)?;
            let mut manifest = RunManifest::new("sample", args, Some(seed));
            match out {
                Some(path) => {
                    let mut csv = String::from("bin_left,bin_right,count\n");
                    for (lo, hi, c) in stats.histogram_rows() {
                        writeln!(csv, "{lo},{hi},{c}").expect("writing to a String");
                    }
                    io.stdout.write_all(&summary_bytes)?;
                    manifest.record("-", &summary_bytes);
                    emit(Some(&path), csv.as_bytes(), manifest, io)
                }
                None => emit(None, &summary_bytes, manifest, io),
            }
        }
        Command::Verify { what, seed, n, trials } => verify(what, seed, n, trials, args, exec, io),
        Command::Reproduce { only, overrides, out } => {
            let tol = Tolerances::default().with_overrides(&overrides).map_err(Failure::Usage)?;
            let ids = only.unwrap_or_else(|| (1..=11).collect());
            if let Some(bad) = ids.iter().find(|&&i| !(1..=11).contains(&i)) {
                return Err(Failure::Usage(format!("no criterion {bad}")));
            }
            let report = criteria::run_all(&ids, &tol, exec, |o| {
                let _ = writeln!(io.stdout, "{}", criteria::format_line(o));
                let _ = io.stdout.flush();
            });
            let bytes = json_line(&report)?;
            let mut manifest = RunManifest::new("reproduce", args, Some(tol.seed));
            match &out {
                Some(path) => emit(Some(path), &bytes, manifest, io)?,
                None => {
                    manifest.record("-", &bytes);
                    writeln!(io.stderr, "{}", serde_json::to_string(&manifest)?)?;
                }
            }
            let failed: Vec<String> =
                report.criteria.iter().filter(|o| !o.passed).map(|o| format!("{} ({})", o.id, o.name)).collect();
            if failed.is_empty() {
                writeln!(io.stdout, "all {} criteria passed", report.criteria.len())?;
                Ok(())
            } else {
                Err(Failure::Failed(format!("criteria failed: {}", failed.join(", "))))
            }
        }
    }
}

fn series(what: SeriesCommand, args: &[String], io: &mut Io) -> Outcome {
    match what {
        SeriesCommand::String { weights, order, exact, out } => {
            let mu = AtomicWeight::parse(&weights)?;
            let rows: Vec<CoefficientRow> = if exact {
                let r = solve_string::<PiPoly>(&mu, order)?;
                r.coeffs().iter().enumerate().map(|(k, c)| CoefficientRow { k, value: c.to_string() }).collect()
            } else {
                let r = solve_string::<wpspine::real::Real>(&mu, order)?;
                r.coeffs().iter().enumerate().map(|(k, c)| CoefficientRow { k, value: c.to_decimal_string() }).collect()
            };
            emit(out.as_ref(), &json_line(&rows)?, RunManifest::new("series string", args, None), io)
        }
        SeriesCommand::Xhat { weights, order, u, out } => {
            let mu = AtomicWeight::parse(&weights)?;
            let x = xhat(u, &mu, order)?;
            let rows: Vec<CoefficientRow> =
                x.coeffs().iter().enumerate().map(|(k, c)| CoefficientRow { k, value: c.to_decimal_string() }).collect();
            emit(out.as_ref(), &json_line(&rows)?, RunManifest::new("series xhat", args, None), io)
        }
        SeriesCommand::Variance { n_max, out } => {
            let rows = variance_pipeline(n_max)?;
            let mut csv = String::from("n,variance,ratio\n");
            for r in rows {
                writeln!(csv, "{},{},{}", r.n, r.variance, r.ratio).expect("writing to a String");
            }
            emit(out.as_ref(), csv.as_bytes(), RunManifest::new("series variance", args, None), io)
        }
    }
}

struct Row {
    check: &'static str,
    value: f64,
    tolerance: f64,
}

fn verify(what: VerifyWhat, seed: u64, n: usize, trials: usize, args: &[String], exec: Exec, io: &mut Io) -> Outcome {
    if n < 2 {
        return Err(Failure::Usage("--n must be at least 2".into()));
    }
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut exact_ok = true;
    match what {
        VerifyWhat::Shears => {
            let (_, b, o) = criteria::shear_and_poisson(&mut rng, trials, n, exec)?;
            rows.push(Row { check: "boundary corner sum + L", value: b, tolerance: tol.c10_shear });
            rows.push(Row { check: "origin constraint", value: o, tolerance: tol.c10_shear });
        }
        VerifyWhat::Poisson => {
            let (p, _, _) = criteria::shear_and_poisson(&mut rng, trials, n, exec)?;
            rows.push(Row { check: "bracket vs target", value: p, tolerance: tol.c10_poisson });
            let mut fd: f64 = 0.0;
            for _ in 0..trials.min(20) {
                let (t, lengths, d) = criteria::random_instance(&mut rng, n)?;
                let a = poisson_check_with(&t, &d, &lengths, Derivatives::Analytic)?;
                let f = poisson_check_with(&t, &d, &lengths, Derivatives::FiniteDifference)?;
                for (x, y) in a.brackets.iter().zip(&f.brackets) {
                    fd = fd.max((x.value - y.value).abs());
                }
            }
            rows.push(Row { check: "analytic vs finite difference", value: fd, tolerance: 1e-5 });
        }
        VerifyWhat::Identities => {
            rows.push(Row {
                check: "Hermite cotangent sum",
                value: criteria::hermite_deviation(&mut rng, tol.c10_hermite_samples),
                tolerance: tol.c10_hermite,
            });
            rows.push(Row {
                check: "sine-ratio average",
                value: criteria::ident1_deviation(&mut rng, exec)?,
                tolerance: tol.c10_ident1,
            });
            rows.push(Row { check: "theta chain", value: criteria::ident2_deviation()?, tolerance: tol.c10_ident2 });
            rows.push(Row {
                check: "inner vertex r^K, K<=3",
                value: criteria::inner_vertex_deviation(),
                tolerance: tol.c10_inner_vertex,
            });
            exact_ok = wpspine::geometry::identities::hypident_holds(6, 8);
        }
        VerifyWhat::E => {
            rows.push(Row { check: "closed form vs quadrature", value: criteria::quad_e_check()?, tolerance: tol.c10_quad_e });
            let mut s: f64 = 0.0;
            for k in 2..=6 {
                s = s.max(passage_sum_deviation(k, 1.4, 0.23)?);
            }
            rows.push(Row { check: "summed passage identity", value: s, tolerance: 1e-12 });
        }
    }
    let mut table = format!("{:<32} {:>12} {:>10}  result\n", "check", "max dev", "tolerance");
    let mut ok = exact_ok;
    for r in &rows {
        let pass = r.value < r.tolerance;
        ok &= pass;
        writeln!(table, "{:<32} {:>12.3e} {:>10.0e}  {}", r.check, r.value, r.tolerance, if pass { "PASS" } else { "FAIL" })
            .expect("writing to a String");
    }
    if what == VerifyWhat::Identities {
        writeln!(table, "{:<32} {:>12} {:>10}  {}", "hypident p<=6, k<=8", "exact", "-", if exact_ok { "PASS" } else { "FAIL" })
            .expect("writing to a String");
    }
    emit(None, table.as_bytes(), RunManifest::new("verify", args, Some(seed)), io)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Failed("verification failed".into()))
    }
}
