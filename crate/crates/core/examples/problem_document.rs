//! Load a problem document, echo its normalized form, and run `certify`.
//!
//! Usage: `cargo run --example problem_document -- crates/core/examples/problems/twisted-winding.json`

use std::path::PathBuf;

use symdeg::document::ProblemDocument;
use symdeg::pipeline::{run, Subcommand};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/problems/twisted-winding.json")
    });
    let doc = match ProblemDocument::from_path(&path) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(1);
        }
    };
    println!("{}", doc.to_json());
    let problem = match doc.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let report = run(&problem, Subcommand::Certify, &problem.document.quadrature, 1);
    println!("\n{}", report.summary.text);
    std::process::exit(report.summary.outcome.exit_code());
}
