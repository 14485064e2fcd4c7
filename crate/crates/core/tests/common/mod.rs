//! Helpers shared by the integration tests: random words and reference
//! implementations of the three representations that act on vectors and
//! arrays directly instead of going through the library's matrix tables.

#![allow(dead_code)]

use crosscap_roots::presentation::{
    instantiate, relation_catalog, Derivation, Direction, FreeOp, RelationInstance, RewriteStep,
};
use crosscap_roots::word::{Letter, LetterKind, SurfaceModel, Syllable, Word};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn std_model(g: u32) -> SurfaceModel {
    SurfaceModel::standard(g).unwrap()
}

pub fn alphabet(model: SurfaceModel) -> Vec<Letter> {
    let g = model.genus().get();
    match model {
        SurfaceModel::Standard(_) => (1..g)
            .flat_map(|i| [Letter::t(i), Letter::u(i), Letter::y(i)])
            .collect(),
        SurfaceModel::Hybrid(_) => {
            let mut v = vec![Letter::t(1), Letter::u(1), Letter::y(1)];
            v.extend((1..=g - 2).map(Letter::c));
            v
        }
    }
}

pub fn random_syllables<R: Rng>(model: SurfaceModel, rng: &mut R, max_len: usize) -> Vec<Syllable> {
    let letters = alphabet(model);
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let l = *letters.choose(rng).unwrap();
            let mut e = rng.gen_range(1..=3);
            if rng.gen_bool(0.5) {
                e = -e;
            }
            Syllable::new(l, e)
        })
        .collect()
}

pub fn random_word<R: Rng>(model: SurfaceModel, rng: &mut R, max_len: usize) -> Word {
    Word::from_syllables(model, random_syllables(model, rng, max_len)).unwrap()
}

/// Unit letters with signs, in reading order.
pub fn letters_of(w: &Word) -> Vec<(Letter, i64)> {
    let mut out = Vec::new();
    for s in w.syllables() {
        for _ in 0..s.exp.unsigned_abs() {
            out.push((s.letter, s.exp.signum()));
        }
    }
    out
}

/// Reference sign: -1 for every crosscap transposition or slide letter.
pub fn ref_sign(w: &Word) -> i64 {
    let flips = letters_of(w)
        .iter()
        .filter(|(l, _)| matches!(l.kind, LetterKind::Transposition | LetterKind::Slide))
        .count();
    if flips % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Reference crosscap permutation as an image array on 1..=g (index 0 unused).
/// The word acts right to left, like a composite of functions.
pub fn ref_perm(w: &Word) -> Vec<usize> {
    let g = w.model().genus().get() as usize;
    let mut images: Vec<usize> = (0..=g).collect();
    // images[k] = P(k); P(ab)(k) = P(a)(P(b)(k))
    for (l, _) in letters_of(w).into_iter().rev() {
        if matches!(l.kind, LetterKind::Transposition | LetterKind::Slide) {
            let i = l.index as usize;
            for v in images.iter_mut() {
                if *v == i {
                    *v = i + 1;
                } else if *v == i + 1 {
                    *v = i;
                }
            }
        }
    }
    images
}

/// Acts with one unit letter on a coefficient vector over mu_1..mu_g.
fn act(v: &mut [i64], l: Letter, sign: i64) {
    let i = l.index as usize - 1;
    let (a, b) = (v[i], v[i + 1]);
    let twist = |v: &mut [i64], inverse: bool| {
        let (a, b) = (v[i], v[i + 1]);
        if inverse {
            v[i] = 2 * a - b;
            v[i + 1] = a;
        } else {
            v[i] = b;
            v[i + 1] = 2 * b - a;
        }
    };
    match l.kind {
        LetterKind::Transposition => {
            v[i] = b;
            v[i + 1] = a;
        }
        LetterKind::Twist => twist(v, sign < 0),
        LetterKind::Slide => {
            // y = t u, y^-1 = u^-1 t^-1
            if sign > 0 {
                v.swap(i, i + 1);
                twist(v, false);
            } else {
                twist(v, true);
                v.swap(i, i + 1);
            }
        }
        LetterKind::Chain => panic!("no homology action for chain letters"),
    }
}

/// Reference homology matrix in the basis mu_1..mu_{g-1}, computed by
/// pushing basis vectors through the letters and eliminating mu_g with
/// mu_g = -(mu_1 + ... + mu_{g-1}).
pub fn ref_homology(w: &Word) -> Vec<Vec<i64>> {
    let g = w.model().genus().get() as usize;
    let n = g - 1;
    let letters = letters_of(w);
    let mut cols = Vec::new();
    for j in 0..n {
        let mut v = vec![0i64; g];
        v[j] = 1;
        for (l, s) in letters.iter().rev() {
            act(&mut v, *l, *s);
        }
        cols.push((0..n).map(|r| v[r] - v[g - 1]).collect::<Vec<_>>());
    }
    (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

/// Integer determinant by cofactor expansion (fine for n <= 8).
pub fn ref_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0;
    for c in 0..n {
        if m[0][c] == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, x)| *x).collect())
            .collect();
        let sign = if c % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][c] * ref_det(&minor);
    }
    total
}

/// Inserts `lhs lhs^-1` at `pos` with nested free insertions.
pub fn insert_conjugate_pair(d: &mut Derivation, pos: usize, block: &[Syllable]) {
    for (k, s) in block.iter().enumerate() {
        d.apply(RewriteStep::free(FreeOp::Insert, pos + k, s.letter, s.exp))
            .unwrap();
    }
}

/// Random walk: from `start`, repeatedly insert a relator at a random
/// position and free-reduce. Returns the derivation; its certificate proves
/// `start = final state`.
pub fn random_walk<R: Rng>(model: SurfaceModel, start: &Word, rng: &mut R, moves: usize) -> Derivation {
    let catalog = relation_catalog(model);
    let mut d = Derivation::new(model, start.syllables().to_vec()).unwrap();
    if catalog.is_empty() {
        return d;
    }
    for _ in 0..moves {
        let rel: &RelationInstance = catalog.choose(rng).unwrap();
        let forward = rng.gen_bool(0.5);
        let (from, _) = if forward { (&rel.lhs, &rel.rhs) } else { (&rel.rhs, &rel.lhs) };
        if from.is_identity() {
            continue;
        }
        let pos = rng.gen_range(0..=d.state().len());
        insert_conjugate_pair(&mut d, pos, from.syllables());
        let dir = if forward { Direction::Forward } else { Direction::Backward };
        d.apply(RewriteStep::relation(pos, rel.key.clone(), dir)).unwrap();
        d.reduce().unwrap();
    }
    d
}

pub fn relation(model: SurfaceModel, key: &crosscap_roots::presentation::RelationKey) -> RelationInstance {
    instantiate(model, key).unwrap()
}
