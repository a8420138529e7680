//! Degree and Chern pairing of a family over `S²` with values in `GL(2)`,
//! the two integrals differ only by sign.

use symdeg::gallery;
use symdeg::integrate::{chern_pairing, degree};

fn main() {
    let problem = gallery::problem("su2-clutch").unwrap();
    let opts = problem.document.quadrature;
    let deg = degree(problem.sigma.as_ref(), 2, 1, &opts).unwrap();
    let ch = chern_pairing(problem.sigma.as_ref(), 2, 1, &opts).unwrap();
    println!("degree        {:?}  (constant {})", deg.snapped, deg.constant_used);
    println!("chern pairing {:?}  (constant {})", ch.snapped, ch.constant_used);
    println!("refinement trace:");
    for (res, v) in deg.resolutions_used.iter().zip(&deg.trace) {
        println!("  resolution {res:>3}: {:+.15} {:+.1e}i", v.re, v.im);
    }
}
