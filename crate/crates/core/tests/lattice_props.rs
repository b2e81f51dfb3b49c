//! Lattice kernel: enumeration against brute force on random Lorentzian
//! lattices, invariants of the standard lattices, and the SL₂ lift.

mod common;

use common::{sorted_coords, RandomLorentzian};
use enriques_phi::lattice::intmat::Q;
use enriques_phi::lattice::{
    appendix_glue, enumerate_vectors, has_root_in_box, invariants, short_vectors_negdef, sl2_lift_check,
    standard_lattice, Invariants, QuadLattice, RationalVector,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inv(sig: (usize, usize), disc_rank: u32, parity: u8) -> Invariants {
    Invariants { signature: sig, disc_rank, parity }
}

#[test]
fn standard_lattices_have_expected_invariants() {
    let cases = [
        ("U", inv((1, 1), 0, 0)),
        ("U2", inv((1, 1), 2, 0)),
        ("E8_2", inv((0, 8), 8, 0)),
        ("K", inv((2, 2), 4, 0)),
        ("Lambda", inv((2, 10), 10, 0)),
        ("I29_2", inv((2, 9), 11, 1)),
    ];
    for (name, want) in cases {
        let lat = standard_lattice(name).unwrap();
        assert_eq!(invariants(&lat).unwrap(), want, "{name}");
    }
}

#[test]
fn glue_lattice_matches_lambda_invariants() {
    let glue = invariants(&appendix_glue()).unwrap();
    let lambda = invariants(&standard_lattice("Lambda").unwrap()).unwrap();
    assert_eq!(glue, lambda);
}

#[test]
fn unknown_lattice_name_is_rejected() {
    assert!(standard_lattice("E7").is_err());
}

#[test]
fn e8_scaled_by_two_has_240_vectors_of_norm_minus_four_and_no_roots() {
    let e8 = standard_lattice("E8_2").unwrap();
    let v = short_vectors_negdef(&e8, 4).unwrap();
    let count = |n: i64| v.iter().filter(|x| e8.norm(x) == Q::from(n)).count();
    assert_eq!(count(0), 1);
    assert_eq!(count(-2), 0);
    assert_eq!(count(-4), 240);
    // Norm −8 in E8(2) is norm −4 in E8: 2160 vectors.
    let v8 = short_vectors_negdef(&e8, 8).unwrap();
    assert_eq!(v8.iter().filter(|x| e8.norm(x) == Q::from(-8)).count(), 2160);
}

#[test]
fn scaled_hyperbolic_planes_have_no_roots() {
    let k = standard_lattice("K").unwrap();
    assert!(!has_root_in_box(&k, 4));
    assert!(has_root_in_box(&standard_lattice("U").unwrap(), 1));
}

#[test]
fn enumeration_rejects_wrong_height_length() {
    let lat = standard_lattice("U").unwrap();
    let h = RationalVector { coords: vec![Q::from(1)] };
    assert!(enumerate_vectors(&lat, Q::from(-2), Q::from(0), &h, Q::from(0), Q::from(3)).is_err());
}

#[test]
fn enumeration_in_hyperbolic_plane_matches_hand_count() {
    // U with h = (1,1): x = (a,b), x² = 2ab, ⟨x,h⟩ = a + b.
    let lat = QuadLattice::from_int_gram("U", vec![vec![0, 1], vec![1, 0]]);
    let h = RationalVector { coords: vec![Q::from(1), Q::from(1)] };
    let v = enumerate_vectors(&lat, Q::from(-2), Q::from(-2), &h, Q::from(0), Q::from(2)).unwrap();
    // Norm −2 forces ab = −1, i.e. ±(1, −1), both of height 0, which the
    // strict lower bound excludes.
    assert!(v.is_empty());
    let v = enumerate_vectors(&lat, Q::from(-2), Q::from(-2), &h, Q::from(-1), Q::from(0)).unwrap();
    assert_eq!(sorted_coords(&v), vec![vec![-1, 1], vec![1, -1]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_brute_force(
        seed in any::<u64>(),
        rank in 2usize..=5,
        norm_min in -6i64..=-1,
        span in 0i64..=6,
        h_min in -3i64..=0,
        h_len in 1i64..=4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = RandomLorentzian::sample(&mut rng, rank);
        let got = enumerate_vectors(
            &lat.lattice(), Q::from(norm_min), Q::from(norm_min + span),
            &lat.height(), Q::from(h_min), Q::from(h_min + h_len),
        ).unwrap();
        let want = lat.naive(norm_min, norm_min + span, h_min, h_min + h_len);
        prop_assert_eq!(sorted_coords(&got), want);
    }

    #[test]
    fn enumeration_is_sorted_by_height(seed in any::<u64>(), rank in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = RandomLorentzian::sample(&mut rng, rank);
        let l = lat.lattice();
        let h = lat.height();
        let v = enumerate_vectors(&l, Q::from(-4), Q::from(2), &h, Q::from(-3), Q::from(3)).unwrap();
        let heights: Vec<Q> = v.iter().map(|x| {
            x.coords.iter().zip(&l.gram).map(|(&xi, row)| {
                row.iter().zip(&h.coords).map(|(g, hj)| *g * *hj).sum::<Q>() * Q::from(xi)
            }).sum::<Q>()
        }).collect();
        prop_assert!(heights.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sl2_lifts_are_isometries_preserving_the_component(
        a in -4i64..=4, b in -4i64..=4, c in -4i64..=4,
    ) {
        // Complete (a, c) to a determinant-one matrix when possible.
        let g = num_integer::Integer::extended_gcd(&a, &c);
        prop_assume!(g.gcd == 1);
        // a·x + c·y = 1  ⇒  [[a, −y + k a], [c, x + k c]] has det 1.
        let m = [[a, -g.y + b * a], [c, g.x + b * c]];
        let lift = sl2_lift_check(m).unwrap();
        prop_assert!(lift.is_isometry);
        prop_assert!(lift.restricts_to_g);
        prop_assert!(lift.preserves_component);
    }
}

#[test]
fn sl2_lift_rejects_non_unimodular_matrices() {
    assert!(sl2_lift_check([[2, 0], [0, 1]]).is_err());
}
