//! Sphere areas and a few moments from the product quadrature.

use std::f64::consts::PI;

use symdeg::geometry::{build_product_grid, build_sphere_grid, sphere_area};

fn main() {
    println!("dim  resolution  nodes       area error");
    for dim in 1..=5 {
        for res in [8, 16, 24] {
            let g = build_sphere_grid(dim, res).unwrap();
            let area = g.integrate(|_| 1.0);
            println!("S^{dim}  {res:>10}  {:>8}  {:.2e}", g.len(), (area - sphere_area(dim)).abs());
        }
    }

    // ∫ x₁² over S^(d) is |S^d|/(d+1)
    let g = build_sphere_grid(3, 16).unwrap();
    let second = g.integrate(|z| z[0] * z[0]);
    println!("\n∫_S³ x₁²  = {second:.15}  (exact {:.15})", 2.0 * PI * PI / 4.0);

    let p = build_product_grid(2, 2, 12).unwrap();
    println!(
        "S² × S³: {} nodes, total dimension {}, ambient {}, volume {:.12} (exact {:.12})",
        p.len(),
        p.total_dim(),
        p.ambient_dim(),
        p.integrate(|_| 1.0),
        sphere_area(2) * sphere_area(3)
    );
}
