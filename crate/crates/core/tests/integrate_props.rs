use proptest::prelude::*;

use symdeg::expr::C64;
use symdeg::forms::CONDITION_CAP;
use symdeg::gallery;
use symdeg::geometry::build_product_grid;
use symdeg::integrate::{degree, integrate_top_form, odd_trace_integral, IntegrateError, IntegrationOptions};
use symdeg::linalg::CMatrix;
use symdeg::maps::{BlockSum, Conjugated, DirectSigma, Inverted};

fn winding(k: i64) -> DirectSigma {
    let src = if k >= 0 { format!("(x + i*y)^{k}") } else { format!("(x - i*y)^{}", -k) };
    DirectSigma::parse(&[vec![src]], &["x", "y"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn winding_numbers_are_recovered(k in -6i64..=6, shift in -0.3f64..0.3) {
        // a zero moved off the origin but still inside the disk keeps the count
        let src = if k >= 0 {
            format!("(x + i*y - {shift})^{k}")
        } else {
            format!("(x - i*y - {shift})^{}", -k)
        };
        let map = DirectSigma::parse(&[vec![src]], &["x", "y"]).unwrap();
        let r = odd_trace_integral(&map, 1, &IntegrationOptions::default().with_resolution(64)).unwrap();
        prop_assert_eq!(r.snapped, Some(k));
    }

    #[test]
    fn products_of_windings_add(a in -3i64..=3, b in -3i64..=3) {
        let opts = IntegrationOptions::default().with_resolution(32);
        let sum = BlockSum { first: winding(a), second: winding(b) };
        let r = odd_trace_integral(&sum, 1, &opts).unwrap();
        prop_assert_eq!(r.snapped, Some(a + b));
    }
}

#[test]
fn reversing_orientation_negates_the_raw_integral() {
    let p = gallery::problem("su2-clutch").unwrap();
    let grid = build_product_grid(2, 1, 12).unwrap();
    let fwd = integrate_top_form(p.sigma.as_ref(), &grid, CONDITION_CAP).unwrap();
    let back = integrate_top_form(p.sigma.as_ref(), &grid.reversed(), CONDITION_CAP).unwrap();
    assert!((fwd.value + back.value).norm() <= 1e-12 * fwd.abs_sum);
}

#[test]
fn inversion_negates_and_conjugation_preserves_degree() {
    let p = gallery::problem("su2-clutch").unwrap();
    let opts = p.document.quadrature;
    let base = degree(p.sigma.as_ref(), 2, 1, &opts).unwrap();
    let inv = degree(&Inverted(p.sigma.as_ref()), 2, 1, &opts).unwrap();
    assert_eq!(inv.snapped, base.snapped.map(|k| -k));
    let u = CMatrix::from_rows(&[
        vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
        vec![C64::new(0.5, -0.5), C64::new(1.0, 0.0)],
    ]);
    let conj = degree(&Conjugated::new(p.sigma.as_ref(), u).unwrap(), 2, 1, &opts).unwrap();
    assert!((conj.raw - base.raw).norm() < 1e-10);
}

#[test]
fn thread_count_does_not_change_a_single_bit() {
    let p = gallery::problem("laplacian-family").unwrap();
    let opts = p.document.quadrature;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| degree(p.sigma.as_ref(), 2, 2, &opts).unwrap())
    };
    let one = run(1);
    for threads in [2, 3, 5] {
        let r = run(threads);
        assert_eq!(r.raw.re.to_bits(), one.raw.re.to_bits(), "{threads} threads");
        assert_eq!(r.raw.im.to_bits(), one.raw.im.to_bits(), "{threads} threads");
    }
}

#[test]
fn slow_convergence_is_reported_not_rounded() {
    let map = DirectSigma::parse(&[vec!["(x + i*y)*(1.2 + x + i*y)"]], &["x", "y"]).unwrap();
    let opts = IntegrationOptions { max_refinements: 0, ..IntegrationOptions::default().with_resolution(4) };
    match odd_trace_integral(&map, 1, &opts) {
        Err(IntegrateError::NonConvergence(r)) => {
            assert_eq!(r.snapped, None);
            assert_eq!(r.resolutions_used.len(), 2);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
    let fine = odd_trace_integral(&map, 1, &IntegrationOptions::default().with_resolution(128)).unwrap();
    assert_eq!(fine.snapped, Some(1));
}
