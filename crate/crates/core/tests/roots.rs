mod common;

use common::{ref_homology, ref_perm, ref_sign};
use crosscap_roots::presentation::{check_certificate, SchemaId};
use crosscap_roots::roots::{
    bezout, check_degree_parity, construct_braid_root, construct_root, is_nontrivial,
    sign_obstruction, BezoutCase, Complement, NonexistenceCase, RootCase, RootError,
    RootRequest, Target, Verdict,
};
use crosscap_roots::word::{parse_word, Genus, LetterKind, SurfaceModel, Word};
use num_integer::Integer;

fn request(g: u32, target: Target, complement: Complement) -> RootRequest {
    RootRequest {
        genus: Genus::new(g).unwrap(),
        target,
        complement,
    }
}

#[test]
fn bezout_pairs_match_extended_euclid() {
    for g in (5..=25).step_by(2) {
        let pair = bezout(Genus::new(g).unwrap(), BezoutCase::Odd).unwrap();
        check_pair(pair.p, pair.q, i64::from(g) - 2);
    }
    for g in (6..=26).step_by(2) {
        let pair = bezout(Genus::new(g).unwrap(), BezoutCase::EvenNonorientable).unwrap();
        check_pair(pair.p, pair.q, i64::from(g) - 3);
    }
    assert!(bezout(Genus::new(4).unwrap(), BezoutCase::EvenNonorientable).is_err());
    assert!(bezout(Genus::new(3).unwrap(), BezoutCase::Odd).is_err());
}

fn check_pair(p: i64, q: i64, m: i64) {
    let e = 2i64.extended_gcd(&m);
    assert_eq!(e.gcd, 1);
    // every solution of 2p + qm = 1 is (x + k m, y - 2k)
    assert_eq!(2 * p + q * m, 1);
    assert_eq!((p - e.x) % m, 0);
    assert_eq!((e.y - q) % 2, 0);
    assert_eq!(q, 1);
}

#[test]
fn worked_roots() {
    let m7 = SurfaceModel::standard(7).unwrap();
    let r = construct_root(&request(7, Target::U, Complement::Auto)).unwrap();
    assert_eq!(r.degree, 5);
    assert_eq!(r.root, parse_word("(u3 u4 u5 u6)^-2 u1", m7).unwrap());
    assert_eq!(r.case, RootCase::OddGenus);

    let m5 = SurfaceModel::standard(5).unwrap();
    let r = construct_root(&request(5, Target::Y, Complement::Auto)).unwrap();
    assert_eq!(r.degree, 3);
    assert_eq!(r.root, parse_word("(u3 u4)^-1 y1", m5).unwrap());

    let m6 = SurfaceModel::standard(6).unwrap();
    let r = construct_root(&request(6, Target::U, Complement::Nonorientable)).unwrap();
    assert_eq!(r.degree, 3);
    assert_eq!(r.root, parse_word("(u3^2 u4 u5)^-1 u1", m6).unwrap());

    let h4 = SurfaceModel::hybrid(4).unwrap();
    let r = construct_root(&request(4, Target::U, Complement::Orientable)).unwrap();
    assert_eq!(r.degree, 3);
    assert_eq!(r.root, parse_word("(c1 c2)^4 u1^-1", h4).unwrap());
}

#[test]
fn constructed_roots_pass_reference_oracles() {
    for g in 4..=12 {
        for target in [Target::U, Target::Y] {
            for complement in [Complement::Nonorientable, Complement::Orientable] {
                let Ok(r) = construct_root(&request(g, target, complement)) else {
                    continue;
                };
                assert_eq!(check_certificate(&r.certificate), Ok(true));
                let powered = r.root.power(i64::from(r.degree)).unwrap();
                assert_eq!(r.certificate.start, powered);
                assert_eq!(r.certificate.end, r.target);
                assert_eq!(r.degree % 2, 1);
                assert_eq!(ref_sign(&powered), -1);
                if r.root.model().is_hybrid() {
                    assert_eq!(r.report.homology, Verdict::NotApplicable);
                    assert_eq!(r.report.permutation, Verdict::NotApplicable);
                    assert!(r.certificate.schemas_used().contains(&SchemaId::R7Chain));
                } else {
                    assert_eq!(ref_perm(&powered), ref_perm(&r.target));
                    assert_eq!(ref_homology(&powered), ref_homology(&r.target));
                }
                assert!(r.report.all_ok(), "{g} {target:?} {complement:?}");
                assert!(is_nontrivial(&r.root, &r.target, r.degree));
            }
        }
    }
}

#[test]
fn nonexistence_cases() {
    for target in [Target::U, Target::Y] {
        assert!(matches!(
            construct_root(&request(2, target, Complement::Auto)),
            Err(RootError::Nonexistence { case: NonexistenceCase::GenusTwo, machine_certified: true, .. })
        ));
        assert!(matches!(
            construct_root(&request(3, target, Complement::Auto)),
            Err(RootError::Nonexistence { case: NonexistenceCase::GenusThree, .. })
        ));
        assert!(matches!(
            construct_root(&request(4, target, Complement::Nonorientable)),
            Err(RootError::Nonexistence {
                case: NonexistenceCase::GenusFourNonorientable,
                machine_certified: false,
                ..
            })
        ));
        assert!(matches!(
            construct_root(&request(7, target, Complement::Orientable)),
            Err(RootError::InvalidRequest(_))
        ));
    }
}

#[test]
fn parity_obstruction() {
    let m = SurfaceModel::standard(6).unwrap();
    for t in ["u1", "y1"] {
        let w = parse_word(t, m).unwrap();
        for d in 1..=11 {
            assert_eq!(sign_obstruction(&w, d), d % 2 == 0);
            assert_eq!(check_degree_parity(d), d % 2 == 1);
        }
    }
    assert!(!sign_obstruction(&parse_word("t1", m).unwrap(), 2));
}

#[test]
fn nontriviality_rejects_powers_of_the_target() {
    let m = SurfaceModel::standard(5).unwrap();
    let u = parse_word("u1", m).unwrap();
    assert!(!is_nontrivial(&u, &u, 3));
    assert!(!is_nontrivial(&Word::identity(m), &u, 3));
    assert!(is_nontrivial(&parse_word("(u3 u4)^-1 u1", m).unwrap(), &u, 3));
}

#[test]
fn braid_roots() {
    for n in 5..=8 {
        for i in 1..n {
            let r = construct_braid_root(n, i).unwrap();
            assert_eq!(r.degree % 2, 1);
            assert!(r
                .root
                .syllables()
                .iter()
                .all(|s| s.letter.kind == LetterKind::Transposition));
            assert_eq!(r.target.to_string(), format!("u{i}"));
            assert!(r.report.all_ok(), "n = {n}, i = {i}");
            assert_eq!(r.translated_from.is_some(), i > 1);
        }
    }
    assert_eq!(construct_braid_root(5, 1).unwrap().degree, 3);
    assert_eq!(construct_braid_root(6, 1).unwrap().degree, 3);
    for n in 2..=4 {
        for i in 1..n {
            assert!(matches!(
                construct_braid_root(n, i),
                Err(RootError::Nonexistence { case: NonexistenceCase::FewPunctures, .. })
            ));
        }
    }
    assert!(matches!(construct_braid_root(6, 6), Err(RootError::InvalidRequest(_))));
    assert!(matches!(construct_braid_root(6, 0), Err(RootError::InvalidRequest(_))));
}
