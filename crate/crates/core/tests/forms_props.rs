use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symdeg::expr::C64;
use symdeg::forms::{top_form, top_form_by_permutations, MaurerCartanFrame};
use symdeg::linalg::CMatrix;

mod common;
use common::permutation_top_form;

fn random_matrix(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    CMatrix::from_fn(m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_frame(seed: u64, d: usize, m: usize) -> MaurerCartanFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MaurerCartanFrame::new((0..d).map(|_| random_matrix(&mut rng, m)).collect())
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-11 * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #[test]
    fn swapping_two_slots_flips_the_sign(seed: u64, d in 2usize..6, m in 1usize..4, i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i % d, j % d);
        prop_assume!(i != j);
        let f = random_frame(seed, d, m);
        let mut g = f.clone();
        g.a.swap(i, j);
        prop_assert!(close(top_form(&g), -top_form(&f)));
    }

    #[test]
    fn repeated_slot_gives_zero(seed: u64, d in 2usize..6, m in 1usize..4) {
        let mut f = random_frame(seed, d, m);
        f.a[1] = f.a[0].clone();
        prop_assert!(top_form(&f).norm() <= 1e-11);
    }

    #[test]
    fn constant_conjugation_is_invisible(seed: u64, d in 1usize..6, m in 1usize..4) {
        let f = random_frame(seed, d, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u = &CMatrix::identity(m) + &random_matrix(&mut rng, m).scale(C64::new(0.3, 0.0));
        let u_inv = u.inverse().unwrap();
        let g = f.map(|a| &(&u * a) * &u_inv);
        prop_assert!(close(top_form(&g), top_form(&f)));
    }

    #[test]
    fn block_sums_add(seed: u64, d in 1usize..6, m1 in 1usize..3, m2 in 1usize..3) {
        let f = random_frame(seed, d, m1);
        let g = random_frame(seed.wrapping_add(1), d, m2);
        prop_assert!(close(top_form(&f.direct_sum(&g)), top_form(&f) + top_form(&g)));
    }

    #[test]
    fn subset_recursion_matches_both_permutation_sums(seed: u64, d in 1usize..6, m in 1usize..4) {
        let f = random_frame(seed, d, m);
        let dp = top_form(&f);
        prop_assert!(close(dp, top_form_by_permutations(&f)));
        prop_assert!(close(dp, permutation_top_form(&f.a)));
    }
}

#[test]
fn scalar_frames_vanish_beyond_degree_one() {
    for d in [3, 5] {
        assert_eq!(top_form(&random_frame(7, d, 1)), C64::new(0.0, 0.0));
    }
    let f = random_frame(7, 1, 1);
    assert_eq!(top_form(&f), f.a[0][(0, 0)]);
}
