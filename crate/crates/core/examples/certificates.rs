//! Which dimension bounds a degree certifies, as the degree and the
//! parameter-space dimension vary.
//!
//! Usage: `cargo run --example certificates -- DEGREE D`

use symdeg::certify::{best_bound, certify_sw, certify_wu, HypothesisChecklist};

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<i64>().expect("integer argument"));
    let cases: Vec<(i64, usize)> = match (args.next(), args.next()) {
        (Some(deg), Some(d)) => vec![(deg, d as usize)],
        _ => vec![(1, 5), (2, 5), (3, 4), (3, 8), (6, 8), (5, 12)],
    };
    for (deg, d) in cases {
        let cl = HypothesisChecklist::all_ok(d);
        let mut certs = vec![certify_sw(deg, d, 2, &cl), certify_sw(deg, d, 4, &cl)];
        certs.extend([3, 5, 7].into_iter().map(|p| certify_wu(deg, d, p, &cl).unwrap()));
        println!("deg = {deg}, d = {d}");
        for c in &certs {
            let label = match c.prime {
                Some(p) => format!("mod {p}, q = {}", c.q),
                None => format!("mod 2, q = {}", c.q),
            };
            match (&c.bound, &c.reason) {
                (Some(b), _) => println!("  {label:<14} grants dim ≥ {b}"),
                (None, Some(r)) => println!("  {label:<14} refuses: {r}"),
                (None, None) => println!("  {label:<14} refuses"),
            }
        }
        println!("  => {}\n", best_bound(&certs).text);
    }
}
