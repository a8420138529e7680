//! Sampled ellipticity and locality checks on a symbol family, including one
//! that loses ellipticity at a single parameter value.

use symdeg::symbol::{MultiIndex, SamplingSpec, SymbolFamily, SymbolSpec};

fn family(name: &str, a: [&str; 4]) -> (String, SymbolFamily) {
    // p(λ, x, ξ) = ξ · A(λ, x), first order on ℝ¹
    let spec = SymbolSpec {
        n: 1,
        m: 2,
        k: 1,
        lambda_vars: vec!["a".into(), "b".into(), "c".into()],
        x_vars: vec!["x".into()],
        xi_vars: vec!["xi".into()],
        coefficients: vec![(MultiIndex(vec![1]), vec![vec![a[0].into(), a[1].into()], vec![a[2].into(), a[3].into()]])],
        basepoint: vec![0.0, 0.0, 1.0],
        k_radius: 1.0,
    };
    (name.to_string(), SymbolFamily::new(spec).unwrap())
}

fn main() {
    let sampling = SamplingSpec::default();
    for (name, fam) in [
        family("rotating, cut off outside K", ["2", "(a + i*b)*bump(x^2)", "0", "1"]),
        family("degenerate at the south pole", ["1", "0", "0", "1 + c"]),
        family("λ-dependent far out", ["2 + a*x^2", "0", "0", "1"]),
    ] {
        let e = fam.check_ellipticity(&sampling);
        let l = fam.check_locality(&sampling);
        println!("{name}");
        println!(
            "  ellipticity {:<5} {} samples, min σ_min {:.3e}",
            e.pass, e.samples, e.min_singular_value
        );
        if let Some(w) = &e.witness {
            println!("    worst at λ = {:?}, x = {:?}, ξ = {:?}", w.lambda, w.x, w.xi);
        }
        println!("  locality    {:<5} max deviation {:.3e}", l.pass, l.max_deviation);
    }
}
