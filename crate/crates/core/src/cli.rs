//! Command-line front end: argument parsing, thread pool, report output and
//! exit codes (0 ran, 1 input error, 2 non-convergence, 3 validation failure).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::document::{DocumentError, Problem, ProblemDocument};
use crate::gallery;
use crate::pipeline::{run, Outcome, Report, Subcommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Sample the hypotheses that can be checked numerically.
    Validate,
    /// Integrate the degree of the reduced symbol.
    Degree,
    /// Integrate the Chern-character pairing.
    Chern,
    /// Validate, integrate and apply the requested certificates.
    Certify,
    /// List built-in problems, or run one (`all` runs every entry).
    Gallery,
}

#[derive(Debug, Parser)]
#[command(name = "symdeg", version, about = "Degrees of elliptic symbol families and bifurcation dimension bounds")]
pub struct Args {
    pub command: Command,
    /// Problem document path, or `gallery:NAME` for a built-in problem.
    pub document: Option<String>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, env = "SYMDEG_THREADS")]
    pub threads: Option<usize>,
    /// Starting quadrature resolution, overriding the document.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct GalleryEntry {
    name: String,
    description: Option<String>,
    mode: Option<crate::document::Mode>,
    q: usize,
    n: usize,
    m: usize,
    expected: Option<crate::document::Expected>,
}

fn load(spec: &str) -> Result<ProblemDocument, DocumentError> {
    match spec.strip_prefix("gallery:") {
        Some(name) => gallery::document(name).ok_or_else(|| DocumentError::Schema {
            path: ".".into(),
            message: format!("no gallery entry named `{name}`"),
        }),
        None => ProblemDocument::from_path(std::path::Path::new(spec)),
    }
}

fn run_one(problem: &Problem, sub: Subcommand, args: &Args, threads: usize) -> Report {
    let mut opts = problem.document.quadrature;
    if let Some(r) = args.resolution {
        opts.resolution = r;
    }
    run(problem, sub, &opts, threads)
}

fn emit(json: &str, out: &Option<PathBuf>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, format!("{json}\n")).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{json}").map_err(|e| e.to_string())
        }
    }
}

/// Runs the CLI on explicit arguments and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Outcome::InputError.exit_code() } else { 0 };
        }
    };
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("symdeg: cannot start {threads} worker threads: {e}");
            return Outcome::InputError.exit_code();
        }
    };
    pool.install(|| dispatch(&args, threads))
}

fn dispatch(args: &Args, threads: usize) -> i32 {
    let input_error = |msg: String| {
        eprintln!("symdeg: {msg}");
        Outcome::InputError.exit_code()
    };
    let sub = match args.command {
        Command::Validate => Subcommand::Validate,
        Command::Degree => Subcommand::Degree,
        Command::Chern => Subcommand::Chern,
        Command::Certify => Subcommand::Certify,
        Command::Gallery => return gallery_command(args, threads),
    };
    let Some(spec) = &args.document else {
        return input_error("a problem document is required".into());
    };
    let problem = match load(spec).and_then(ProblemDocument::build) {
        Ok(p) => p,
        Err(e) => return input_error(e.to_string()),
    };
    let report = run_one(&problem, sub, args, threads);
    eprintln!("{}", report.summary.text);
    if let Err(e) = emit(&report.to_json(), &args.out) {
        return input_error(e);
    }
    report.summary.outcome.exit_code()
}

fn gallery_command(args: &Args, threads: usize) -> i32 {
    let docs = gallery::gallery();
    let Some(which) = &args.document else {
        let list: Vec<GalleryEntry> = docs
            .iter()
            .map(|d| GalleryEntry {
                name: d.name.clone().unwrap_or_default(),
                description: d.description.clone(),
                mode: d.mode(),
                q: d.dims.q,
                n: d.dims.n,
                m: d.dims.m,
                expected: d.expected.clone(),
            })
            .collect();
        let json = serde_json::to_string_pretty(&list).expect("gallery listing serializes");
        return match emit(&json, &args.out) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("symdeg: {e}");
                Outcome::InputError.exit_code()
            }
        };
    };
    let selected: Vec<ProblemDocument> = if which == "all" {
        docs
    } else {
        match gallery::document(which.strip_prefix("gallery:").unwrap_or(which)) {
            Some(d) => vec![d],
            None => {
                eprintln!("symdeg: no gallery entry named `{which}`");
                return Outcome::InputError.exit_code();
            }
        }
    };
    let mut outcome = Outcome::Ok;
    let mut reports = Vec::new();
    for doc in selected {
        let name = doc.name.clone().unwrap_or_default();
        let problem = doc.build().expect("gallery entries build");
        let report = run_one(&problem, Subcommand::Degree, args, threads);
        let verdict = match report.summary.matches_expected {
            Some(true) => "matches expected",
            Some(false) => {
                outcome = outcome.max(Outcome::ValidationFailed);
                "DIFFERS from expected"
            }
            None => "no expectation",
        };
        eprintln!("{name}: {} ({verdict})", report.summary.text);
        outcome = outcome.max(report.summary.outcome);
        reports.push(report);
    }
    let json = if reports.len() == 1 {
        reports[0].to_json()
    } else {
        serde_json::to_string_pretty(&reports).expect("reports serialize")
    };
    if let Err(e) = emit(&json, &args.out) {
        eprintln!("symdeg: {e}");
        return Outcome::InputError.exit_code();
    }
    outcome.exit_code()
}
