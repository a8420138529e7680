//! Parse an expression, then print its value and gradient at a point.
//!
//! Usage: `cargo run --example expression_dual -- "exp(i*x) * (y^2 + 1)" x=0.3 y=-1`

use symdeg::expr::{eval_dual, Expr, C64};

fn main() {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| "sin(x) * (x + i*y)^3 - bump(x^2 + y^2)".into());
    let mut bindings: Vec<(String, f64)> = args
        .map(|a| {
            let (k, v) = a.split_once('=').expect("bindings look like name=value");
            (k.to_string(), v.parse().expect("numeric value"))
        })
        .collect();

    let expr = match Expr::parse(&source) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("{source}\n{e}");
            std::process::exit(1);
        }
    };
    for v in expr.variables() {
        if !bindings.iter().any(|(k, _)| k == v) {
            bindings.push((v.to_string(), 0.5));
        }
    }
    let named: Vec<(&str, C64)> = bindings.iter().map(|(k, v)| (k.as_str(), C64::new(*v, 0.0))).collect();
    let active: Vec<&str> = named.iter().map(|(k, _)| *k).collect();
    let d = eval_dual(&expr, &named, &active).unwrap();

    println!("parsed   {expr}");
    println!("at       {bindings:?}");
    println!("value    {:.12}", d.value);
    for (k, p) in active.iter().zip(&d.partials) {
        println!("∂/∂{k:<5} {p:.12}");
    }
}
