//! `jclass`: constructions, solvers, witnesses and density experiments.
//!
//! Results go to standard output as JSON lines (or CSV where requested);
//! diagnostics go to standard error under `JCLASS_LOG`. Exit status is 0 on
//! success, 1 when a search exhausts its budget and 2 on invalid input.

mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use jclass::dioph::{kronecker_solve, lemma51_witness, lemma55_witness, two_gen_solve, SearchConfig};
use jclass::harness::{
    density_report, orbit_header, probe_open_question, read_points_csv, to_json_line, write_csv, CsvRecord,
    ProbeConfig, WITNESS_HEADER,
};
use jclass::lognum::{FieldValue, LogScalar};
use jclass::tuples::{default_kronecker_alphas, AnyTuple, MatrixTuple};
use jclass::witness::{jset_membership, jset_witness, non_hc_certificate, orbit_points, MembershipVerdict};
use jclass::{Error, Execution};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "jclass", version, about = "Locally hypercyclic matrix tuples at desk scale")]
struct Cli {
    /// Run every scan on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a recipe and print its canonical form.
    Construct {
        /// Recipe JSON or @file.
        #[arg(long)]
        recipe: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-generator search: (a^k b^l) near y with k even.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        min_k: u64,
        #[arg(long, default_value_t = 0)]
        min_l: u64,
        #[arg(long, default_value_t = 1_000_000)]
        k_max: u64,
    },
    /// One-dimensional perturbed-scalar witness.
    #[command(allow_negative_numbers = true)]
    Lemma51 {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Rotated one-dimensional witness.
    #[command(allow_negative_numbers = true)]
    Lemma55 {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        theta: f64,
        /// Target as re,im.
        #[arg(long, allow_hyphen_values = true, value_parser = parse::pair)]
        w: num_complex::Complex64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
    },
    /// Kronecker approximation with the default exponents.
    #[command(allow_negative_numbers = true)]
    Kron {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true, value_parser = parse::reals)]
        y: ::std::vec::Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        k_max: u64,
    },
    /// Witness sequence for a target in the limit set of (x1, 0, ..., 0).
    #[command(allow_negative_numbers = true)]
    Witness {
        #[arg(long)]
        tuple: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        base_x1: String,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse::reals)]
        schedule: ::std::vec::Vec<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership probe through inverse orbits.
    #[command(allow_negative_numbers = true)]
    Member {
        #[arg(long)]
        tuple: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        growth_floor: u64,
        #[arg(long, default_value_t = 60)]
        budget: u64,
    },
    /// Orbit points inside a box, as CSV.
    #[command(allow_negative_numbers = true)]
    Orbit {
        #[arg(long)]
        tuple: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 200)]
        max_total: u64,
        #[arg(long = "box", default_value_t = 10.0)]
        halfwidth: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid coverage of a point CSV.
    Density {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "box", default_value_t = 10.0)]
        halfwidth: f64,
        #[arg(long, default_value_t = 0.25)]
        res: f64,
    },
    /// Non-hypercyclicity certificate.
    Certify {
        #[arg(long)]
        tuple: String,
    },
    /// Evidence on whether J-universal spanning vectors force hypercyclicity.
    #[command(allow_negative_numbers = true)]
    Probe {
        #[arg(long)]
        tuple: String,
        /// Spanning vectors separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        span: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        budget: u64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
}

enum Failure {
    Invalid(String),
    Exhausted(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Exhausted(_) => Failure::Exhausted(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Invalid(s)
    }
}

/// Outcome of a command that printed its result.
enum Done {
    Ok,
    Exhausted,
}

type Outcome = Result<Done, Failure>;

fn done(exhausted: bool) -> Done {
    if exhausted {
        Done::Exhausted
    } else {
        Done::Ok
    }
}

#[derive(Serialize)]
struct Flagged<'a, T: Serialize> {
    #[serde(flatten)]
    result: &'a T,
    exhausted: bool,
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit<T: Serialize + ?Sized>(value: &T) -> Result<(), Failure> {
    let line = to_json_line(value)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{line}").map_err(|e| Failure::Invalid(format!("stdout: {e}")))?;
    Ok(())
}

fn emit_to<T: Serialize + ?Sized>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let line = to_json_line(value)?;
    let mut w = sink(out)?;
    writeln!(w, "{line}")
        .and_then(|_| w.flush())
        .map_err(|e| Failure::Invalid(format!("write: {e}")))?;
    Ok(())
}

fn load(arg: &str) -> Result<AnyTuple, Failure> {
    Ok(AnyTuple::build(&parse::recipe(arg)?)?)
}

fn witness_cmd<S: LogScalar>(
    t: &MatrixTuple<S>,
    x1: &str,
    target: &str,
    schedule: &[f64],
    format: Format,
    out: Option<&Path>,
) -> Outcome
where
    S::Value: Serialize,
    jclass::witness::WitnessRecord<S>: CsvRecord,
{
    let x1: S::Value = parse::value(x1)?;
    let target: Vec<S::Value> = parse::vector(target)?;
    let seq = jset_witness(t, x1, &target, schedule)?;
    seq.validate(t)?;
    match format {
        Format::Json => emit_to(&seq, out)?,
        Format::Csv => {
            let w = sink(out)?;
            write_csv(&seq.records, &WITNESS_HEADER, w)?;
        }
    }
    Ok(Done::Ok)
}

fn member_cmd<S: LogScalar>(
    t: &MatrixTuple<S>,
    x: &str,
    y: &str,
    delta: f64,
    floor: u64,
    budget: u64,
    exec: Execution,
) -> Outcome
where
    S::Value: Serialize,
{
    let x: Vec<S::Value> = parse::vector(x)?;
    let y: Vec<S::Value> = parse::vector(y)?;
    let v: MembershipVerdict<S::Value> = jset_membership(t, &x, &y, delta, floor, budget, exec)?;
    let exhausted = !v.is_confirmed();
    emit(&Flagged { result: &v, exhausted })?;
    Ok(done(exhausted))
}

#[derive(Serialize)]
struct OrbitSummary<'a> {
    out: &'a Path,
    points: usize,
    dropped_overflow: u64,
    dropped_outside: u64,
}

fn orbit_cmd<S: LogScalar>(
    t: &MatrixTuple<S>,
    x: &str,
    max_total: u64,
    halfwidth: f64,
    out: Option<&Path>,
    exec: Execution,
) -> Outcome {
    let x: Vec<S::Value> = parse::vector(x)?;
    if !(halfwidth > 0.0) {
        return Err(Failure::Invalid(format!("need --box > 0, got {halfwidth}")));
    }
    let orbit = orbit_points(t, &x, max_total, halfwidth, exec)?;
    let header = orbit_header(t.dim(), S::Value::REAL_DIM == 2);
    write_csv(&orbit.points, &header, sink(out)?)?;
    if let Some(path) = out {
        emit(&OrbitSummary {
            out: path,
            points: orbit.points.len(),
            dropped_overflow: orbit.dropped_overflow,
            dropped_outside: orbit.dropped_outside,
        })?;
    }
    log::info!(
        "{} orbit points, {} outside the box, {} overflowed",
        orbit.points.len(),
        orbit.dropped_outside,
        orbit.dropped_overflow
    );
    Ok(Done::Ok)
}

fn probe_cmd<S: LogScalar>(t: &MatrixTuple<S>, span: &str, cfg: &ProbeConfig, exec: Execution) -> Outcome
where
    S::Value: Serialize,
{
    let span: Vec<Vec<S::Value>> = parse::vectors(span)?;
    if span.is_empty() {
        return Err(Failure::Invalid("empty spanning set".into()));
    }
    let report = probe_open_question(t, &span, cfg, exec)?;
    emit(&report)?;
    Ok(Done::Ok)
}

fn run(cli: Cli) -> Outcome {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Construct { recipe, out } => {
            let r = parse::recipe(&recipe)?;
            AnyTuple::build(&r)?;
            emit_to(&r, out.as_deref())?;
            Ok(Done::Ok)
        }
        Command::Solve {
            a,
            b,
            y,
            eps,
            min_k,
            min_l,
            k_max,
        } => {
            let cfg = SearchConfig {
                epsilon: eps,
                k_max,
                min_k,
                min_l,
            };
            let w = two_gen_solve(a, b, y, &cfg)?;
            emit(&w)?;
            Ok(done(w.exhausted))
        }
        Command::Lemma51 { a, x, eps } => {
            emit(&lemma51_witness(a, x, eps)?)?;
            Ok(Done::Ok)
        }
        Command::Lemma55 { a, theta, w, eps } => {
            emit(&lemma55_witness(a, theta, w, eps)?)?;
            Ok(Done::Ok)
        }
        Command::Kron { n, y, eps, k_max } => {
            if y.len() != n {
                return Err(Failure::Invalid(format!("--y needs {n} entries, got {}", y.len())));
            }
            let w = kronecker_solve(&default_kronecker_alphas(n), &y, eps, k_max)?;
            emit(&w)?;
            Ok(done(w.exhausted))
        }
        Command::Witness {
            tuple,
            base_x1,
            target,
            schedule,
            format,
            out,
        } => match load(&tuple)? {
            AnyTuple::Real(t) => witness_cmd(&t, &base_x1, &target, &schedule, format, out.as_deref()),
            AnyTuple::Complex(t) => witness_cmd(&t, &base_x1, &target, &schedule, format, out.as_deref()),
        },
        Command::Member {
            tuple,
            x,
            y,
            delta,
            growth_floor,
            budget,
        } => match load(&tuple)? {
            AnyTuple::Real(t) => member_cmd(&t, &x, &y, delta, growth_floor, budget, exec),
            AnyTuple::Complex(t) => member_cmd(&t, &x, &y, delta, growth_floor, budget, exec),
        },
        Command::Orbit {
            tuple,
            x,
            max_total,
            halfwidth,
            out,
        } => match load(&tuple)? {
            AnyTuple::Real(t) => orbit_cmd(&t, &x, max_total, halfwidth, out.as_deref(), exec),
            AnyTuple::Complex(t) => orbit_cmd(&t, &x, max_total, halfwidth, out.as_deref(), exec),
        },
        Command::Density { input, halfwidth, res } => {
            let (points, dim) = read_points_csv(&input)?;
            emit(&density_report(&points, dim, halfwidth, res, exec)?)?;
            Ok(Done::Ok)
        }
        Command::Certify { tuple } => {
            match load(&tuple)? {
                AnyTuple::Real(t) => emit(&non_hc_certificate(&t))?,
                AnyTuple::Complex(t) => emit(&non_hc_certificate(&t))?,
            }
            Ok(Done::Ok)
        }
        Command::Probe {
            tuple,
            span,
            samples,
            seed,
            budget,
            delta,
        } => {
            let cfg = ProbeConfig {
                samples,
                seed,
                budget,
                delta,
                ..ProbeConfig::default()
            };
            match load(&tuple)? {
                AnyTuple::Real(t) => probe_cmd(&t, &span, &cfg, exec),
                AnyTuple::Complex(t) => probe_cmd(&t, &span, &cfg, exec),
            }
        }
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    exhausted: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JCLASS_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Done::Ok) => ExitCode::SUCCESS,
        Ok(Done::Exhausted) => {
            log::error!("budget exhausted before the tolerance was met");
            ExitCode::from(1)
        }
        Err(f) => {
            let (msg, exhausted, code) = match &f {
                Failure::Invalid(m) => (m.as_str(), false, 2),
                Failure::Exhausted(m) => (m.as_str(), true, 1),
            };
            log::error!("{msg}");
            let _ = emit(&ErrorLine { error: msg, exhausted });
            ExitCode::from(code)
        }
    }
}
