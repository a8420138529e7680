use num_bigint::BigUint;
use proptest::prelude::*;

use symdeg::certify::{
    best_bound, certify_nonorientable, certify_sw, certify_wu, is_prime, wu_unit, Assertions, HypothesisChecklist,
};

const ODD_PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 17];

proptest! {
    #[test]
    fn wu_verdict_depends_only_on_the_residue(deg in -50i64..50, shift in -5i64..5, d in 2usize..40, pi in 0usize..6) {
        let p = ODD_PRIMES[pi];
        let cl = HypothesisChecklist::all_ok(d);
        let a = certify_wu(deg, d, p, &cl).unwrap();
        let b = certify_wu(deg + shift * p as i64, d, p, &cl).unwrap();
        prop_assert_eq!(a.granted(), b.granted());
        let q = 2 * (p as usize - 1);
        prop_assert_eq!(a.granted(), q <= d && deg.rem_euclid(p as i64) != 0);
        if a.granted() {
            prop_assert_eq!(a.bound, Some(d - q));
        }
    }

    #[test]
    fn sw_verdict_depends_only_on_parity(deg in -50i64..50, d in 2usize..12, q in prop_oneof![Just(2usize), Just(4)]) {
        let cl = HypothesisChecklist::all_ok(d);
        let a = certify_sw(deg, d, q, &cl);
        prop_assert_eq!(a.granted(), certify_sw(deg + 2, d, q, &cl).granted());
        prop_assert_eq!(a.granted(), deg % 2 != 0 && q <= d);
    }

    #[test]
    fn best_bound_is_the_largest_grant(deg in -9i64..9, d in 4usize..14) {
        let cl = HypothesisChecklist::all_ok(d);
        let certs = vec![
            certify_sw(deg, d, 2, &cl),
            certify_sw(deg, d, 4, &cl),
            certify_wu(deg, d, 3, &cl).unwrap(),
        ];
        let expected = certs.iter().filter(|c| c.granted()).filter_map(|c| c.bound).max();
        prop_assert_eq!(best_bound(&certs).best_bound, expected);
    }

    #[test]
    fn wu_unit_is_the_factorial_residue(pi in 0usize..6) {
        let p = ODD_PRIMES[pi];
        let r = (p - 1) / 2;
        let fact: BigUint = (1..=(2 * r - 1)).map(BigUint::from).product();
        let expected = (BigUint::from(r) * fact) % BigUint::from(p);
        prop_assert_eq!(BigUint::from(wu_unit(r, p)), expected);
        prop_assert_ne!(wu_unit(r, p), 0);
    }
}

#[test]
fn primality_agrees_with_trial_division() {
    for n in 0..500u64 {
        let slow = n >= 2 && (2..n).all(|k| n % k != 0);
        assert_eq!(is_prime(n), slow, "{n}");
    }
}

#[test]
fn non_prime_moduli_are_rejected() {
    let cl = HypothesisChecklist::all_ok(8);
    for p in [1, 2, 4, 9, 15] {
        assert!(certify_wu(1, 8, p, &cl).is_err(), "p = {p}");
    }
}

#[test]
fn failed_hypotheses_refuse_every_path() {
    let failing = HypothesisChecklist::new(8, Some(false), Some(true), &Assertions::all());
    assert!(!certify_wu(1, 8, 3, &failing).unwrap().granted());
    assert!(!certify_sw(1, 8, 2, &failing).granted());
    assert!(!certify_nonorientable(8, &failing).granted());
    let unasserted = HypothesisChecklist::new(8, Some(true), Some(true), &Assertions::default());
    let c = certify_sw(1, 8, 2, &unasserted);
    assert!(!c.granted());
    assert!(c.reason.is_some());
}

#[test]
fn unsupported_sphere_dimensions_are_refused_with_a_reason() {
    let c = certify_sw(1, 8, 6, &HypothesisChecklist::all_ok(8));
    assert!(!c.granted());
    assert!(c.reason.unwrap().contains('6'));
}

#[test]
fn nonorientable_path_gives_codimension_one() {
    // the default checklist does not claim nonorientability
    assert!(!certify_nonorientable(7, &HypothesisChecklist::all_ok(7)).granted());
    let a = Assertions { index_bundle_nonorientable: true, ..Assertions::all() };
    let c = certify_nonorientable(7, &HypothesisChecklist::new(7, Some(true), Some(true), &a));
    assert!(c.granted());
    assert_eq!(c.bound, Some(6));
}
