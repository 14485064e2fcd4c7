mod common;

use common::{random_word, ref_det, ref_homology, ref_perm, ref_sign, std_model};
use crosscap_roots::presentation::relation_catalog;
use crosscap_roots::repr::{
    gl2_image, homology_of, perm_of, sign_of, validate_generator_table, generator_table,
    Gl2Matrix, IntMatrix, Sign,
};
use crosscap_roots::word::{parse_word, SurfaceModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn homology_agrees_with_vector_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in 2..=8 {
        let m = std_model(g);
        for _ in 0..200 {
            let w = random_word(m, &mut rng, 8);
            assert_eq!(homology_of(&w).unwrap().rows(), ref_homology(&w), "{w}");
        }
    }
}

#[test]
fn permutation_and_sign_agree_with_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for g in 2..=8 {
        let m = std_model(g);
        for _ in 0..200 {
            let w = random_word(m, &mut rng, 10);
            let p = perm_of(&w).unwrap();
            let r = ref_perm(&w);
            for k in 1..=g as usize {
                assert_eq!(p.apply(k), r[k], "{w} at {k}");
            }
            assert_eq!(sign_of(&w).value(), ref_sign(&w));
            assert_eq!(ref_det(&ref_homology(&w)), ref_sign(&w), "{w}");
        }
    }
}

#[test]
fn genus_three_images() {
    let m = std_model(3);
    let img = |s: &str| gl2_image(&parse_word(s, m).unwrap()).unwrap();
    // hand-computed from the action on mu_1, mu_2 with mu_3 = -mu_1 - mu_2
    assert_eq!(img("u1"), Gl2Matrix([[0, 1], [1, 0]]));
    assert_eq!(img("t1 t2"), Gl2Matrix([[0, 1], [-1, 1]]));
    let t1t2 = img("t1 t2");
    for k in 1..6 {
        assert!(!t1t2.pow(k).is_identity());
    }
    assert!(t1t2.pow(6).is_identity());
    assert!(img("u1^2").is_identity());
    assert!(img("y1^2").is_identity());
    assert_eq!(img("y1"), img("t1 u1"));
}

#[test]
fn relations_hold_under_every_oracle() {
    for g in 2..=9 {
        let m = std_model(g);
        for rel in relation_catalog(m) {
            assert_eq!(sign_of(&rel.lhs), sign_of(&rel.rhs), "{rel}");
            assert_eq!(perm_of(&rel.lhs).unwrap(), perm_of(&rel.rhs).unwrap(), "{rel}");
            assert_eq!(ref_homology(&rel.lhs), ref_homology(&rel.rhs), "{rel}");
        }
        assert!(validate_generator_table(&generator_table(m.genus())).is_ok());
    }
    for g in [4, 6, 8, 10] {
        for rel in relation_catalog(SurfaceModel::hybrid(g).unwrap()) {
            assert_eq!(sign_of(&rel.lhs), sign_of(&rel.rhs), "{rel}");
        }
    }
}

#[test]
fn hybrid_words_have_no_matrix_image() {
    let h = SurfaceModel::hybrid(6).unwrap();
    let w = parse_word("c1 c2 u1", h).unwrap();
    assert!(homology_of(&w).is_err());
    assert!(perm_of(&w).is_err());
    assert_eq!(sign_of(&w), Sign::Minus);
}

#[test]
fn flip_count_of_the_genus_seven_root() {
    let m = std_model(7);
    let w = parse_word("((u3 u4 u5 u6)^-2 u1)^5", m).unwrap();
    // (4 * 2 + 1) letters, five times, all of them transpositions
    assert_eq!(w.letter_count(), 45);
    assert_eq!(sign_of(&w), Sign::Minus);
}

#[test]
fn integer_matrix_arithmetic() {
    let a = IntMatrix::from_rows(vec![vec![2, 1, 0], vec![1, 1, 0], vec![0, 0, -1]]);
    assert_eq!(a.det(), -1);
    let p = a.checked_pow(5).unwrap();
    let mut q = IntMatrix::identity(3);
    for _ in 0..5 {
        q = q.checked_mul(&a).unwrap();
    }
    assert_eq!(p, q);
    let big = IntMatrix::from_rows(vec![vec![i64::MAX / 2, 3], vec![3, 1]]);
    assert!(big.checked_mul(&big).is_err());
}
