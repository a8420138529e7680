//! Run every gallery entry through the full pipeline and print a table.

use std::time::Instant;

use symdeg::gallery;
use symdeg::pipeline::{run, Subcommand};

fn main() {
    println!("{:<18} {:>3} {:>3} {:>3} {:>7} {:>9} {:>9}  {}", "name", "q", "n", "m", "degree", "expected", "ms", "bound");
    for name in gallery::names() {
        let problem = gallery::problem(name).unwrap();
        let t = Instant::now();
        let report = run(&problem, Subcommand::Certify, &problem.document.quadrature, 1);
        let dims = &problem.document.dims;
        let expected = problem.document.expected.as_ref().and_then(|e| e.degree);
        println!(
            "{:<18} {:>3} {:>3} {:>3} {:>7} {:>9} {:>9.1}  {}",
            name,
            dims.q,
            dims.n,
            dims.m,
            report.snapped().map_or("-".into(), |k| k.to_string()),
            expected.map_or("-".into(), |k| k.to_string()),
            t.elapsed().as_secs_f64() * 1e3,
            report.summary.bounds.as_ref().map_or("-".into(), |b| b.text.clone()),
        );
    }
}
