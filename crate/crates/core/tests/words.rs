use crosscap_roots::word::{parse_word, Letter, SurfaceModel, Syllable, Word, WordError};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = SurfaceModel> {
    prop_oneof![
        (2u32..=9).prop_map(|g| SurfaceModel::standard(g).unwrap()),
        (2u32..=5).prop_map(|k| SurfaceModel::hybrid(2 * k).unwrap()),
    ]
}

fn letter_strategy(model: SurfaceModel) -> BoxedStrategy<Letter> {
    let g = model.genus().get();
    match model {
        SurfaceModel::Standard(_) => (0u8..3, 1..g)
            .prop_map(|(k, i)| match k {
                0 => Letter::t(i),
                1 => Letter::u(i),
                _ => Letter::y(i),
            })
            .boxed(),
        SurfaceModel::Hybrid(_) => prop_oneof![
            Just(Letter::t(1)),
            Just(Letter::u(1)),
            Just(Letter::y(1)),
            (1..=g - 2).prop_map(Letter::c),
        ]
        .boxed(),
    }
}

fn word_in(model: SurfaceModel) -> impl Strategy<Value = Word> {
    let syl = (letter_strategy(model), prop_oneof![-4i64..=-1, 1i64..=4])
        .prop_map(|(l, e)| Syllable::new(l, e));
    prop::collection::vec(syl, 0..12)
        .prop_map(move |s| Word::from_syllables(model, s).unwrap())
}

fn model_and_words(n: usize) -> impl Strategy<Value = (SurfaceModel, Vec<Word>)> {
    model_strategy().prop_flat_map(move |m| (Just(m), prop::collection::vec(word_in(m), n)))
}

proptest! {
    #[test]
    fn display_parse_round_trip((m, ws) in model_and_words(1)) {
        let w = &ws[0];
        prop_assert_eq!(&parse_word(&w.to_string(), m).unwrap(), w);
    }

    #[test]
    fn words_stay_reduced((_m, ws) in model_and_words(2)) {
        let w = ws[0].compose(&ws[1]).unwrap();
        for pair in w.syllables().windows(2) {
            prop_assert_ne!(pair[0].letter, pair[1].letter);
        }
        prop_assert!(w.syllables().iter().all(|s| s.exp != 0));
    }

    #[test]
    fn group_laws((m, ws) in model_and_words(3)) {
        let (a, b, c) = (&ws[0], &ws[1], &ws[2]);
        let id = Word::identity(m);
        prop_assert_eq!(
            a.compose(b).unwrap().compose(c).unwrap(),
            a.compose(&b.compose(c).unwrap()).unwrap()
        );
        prop_assert_eq!(&a.compose(&id).unwrap(), a);
        prop_assert_eq!(&id.compose(a).unwrap(), a);
        prop_assert!(a.compose(&a.invert()).unwrap().is_identity());
        prop_assert_eq!(&a.invert().invert(), a);
        prop_assert_eq!(
            a.compose(b).unwrap().invert(),
            b.invert().compose(&a.invert()).unwrap()
        );
    }

    #[test]
    fn power_matches_repeated_product((_m, ws) in model_and_words(1), n in -6i64..=6) {
        let w = &ws[0];
        let base = if n >= 0 { w.clone() } else { w.invert() };
        let mut expected = Word::identity(w.model());
        for _ in 0..n.unsigned_abs() {
            expected = expected.compose(&base).unwrap();
        }
        prop_assert_eq!(w.power(n).unwrap(), expected);
    }

    #[test]
    fn parenthesized_powers_parse((m, ws) in model_and_words(2), n in -4i64..=4) {
        let (a, b) = (&ws[0], &ws[1]);
        if !a.is_identity() && !b.is_identity() && n != 0 {
            let text = format!("(({a}) {b})^{n}");
            let expected = a.compose(b).unwrap().power(n).unwrap();
            prop_assert_eq!(parse_word(&text, m).unwrap(), expected);
        }
    }
}

#[test]
fn grammar_examples() {
    let m = SurfaceModel::standard(7).unwrap();
    let w = parse_word("((u3 u4 u5 u6)^-2 u1)^5", m).unwrap();
    assert_eq!(w.letter_count(), 45);
    assert_eq!(parse_word("1", m).unwrap(), Word::identity(m));
    assert_eq!(Word::identity(m).to_string(), "1");
    assert_eq!(parse_word("u1 u1^-1", m).unwrap(), Word::identity(m));
    assert_eq!(parse_word("t2^3 t2^-1", m).unwrap().to_string(), "t2^2");
}

#[test]
fn rejects_malformed_input() {
    let s = SurfaceModel::standard(5).unwrap();
    assert!(matches!(parse_word("u5", s), Err(WordError::IndexOutOfRange { .. })));
    assert!(parse_word("u0", s).is_err());
    assert!(matches!(parse_word("c1", s), Err(WordError::NotAdmissible { .. })));
    assert!(parse_word("u1u2", s).is_err());
    assert!(parse_word("(u1", s).is_err());
    assert!(parse_word("", s).is_err());
    assert!(parse_word("u1^", s).is_err());
    let h = SurfaceModel::hybrid(6).unwrap();
    assert!(matches!(parse_word("u2", h), Err(WordError::NotAdmissible { .. })));
    assert!(parse_word("c4 c1 y1^-1", h).is_ok());
    assert!(matches!(parse_word("c5", h), Err(WordError::IndexOutOfRange { .. })));
    assert!(matches!(SurfaceModel::hybrid(5), Err(WordError::InvalidHybrid(5))));
    assert!(matches!(SurfaceModel::standard(1), Err(WordError::InvalidGenus(1))));
}
