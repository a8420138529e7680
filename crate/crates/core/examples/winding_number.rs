//! Winding numbers of scalar loops `S¹ → ℂ*`.
//!
//! Usage: `cargo run --example winding_number -- "(x - i*y)^3 * (2 + x)"`

use symdeg::integrate::{odd_trace_integral, IntegrationOptions};
use symdeg::maps::DirectSigma;

fn main() {
    let loops: Vec<String> = match std::env::args().nth(1) {
        Some(e) => vec![e],
        None => ["x + i*y", "(x - i*y)^2", "(x + i*y)^3 * (3 + x - i*y)", "exp(i*x) * (x + i*y)^-1"]
            .map(String::from)
            .to_vec(),
    };
    let opts = IntegrationOptions::default().with_resolution(64);
    for src in loops {
        let map = DirectSigma::parse(&[vec![src.as_str()]], &["x", "y"]).expect("expression parses");
        match odd_trace_integral(&map, 1, &opts) {
            Ok(r) => println!("{src:<32} winds {:>3}   raw {:.3e}{:+.1e}i", r.snapped.unwrap(), r.raw.re, r.raw.im),
            Err(e) => println!("{src:<32} {e}"),
        }
    }
}
