//! Nonexistence of roots at genus 2 and 3.
//!
//! Genus 2 is settled by brute force in the Klein four-group. Genus 3 goes
//! through the isomorphism with GL(2, Z): a root of an involution is a
//! torsion element, torsion elements fall into finitely many conjugacy
//! classes, and each class is checked against the target.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repr::{gl2_image, Gl2Matrix, ReprError};
use crate::word::{Letter, LetterKind, SurfaceModel, Word};

/// Default entry bound for the GL(2, Z) torsion scan.
pub const DEFAULT_SCAN_BOUND: i64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmallGenusError {
    #[error("expected a Standard(3) word, got {0}")]
    WrongModel(SurfaceModel),
    #[error("target must be u1 or y1, got {0}")]
    BadTarget(String),
    #[error("maximum degree must be odd and >= 3, got {0}")]
    BadDegree(u32),
    #[error("scan bound must be >= 1, got {0}")]
    BadBound(i64),
    #[error(transparent)]
    Repr(#[from] ReprError),
}

/// Element of M(N_2) = Z_2 + Z_2 generated by `t = t_1` and `y = y_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KleinFour {
    One,
    T,
    Y,
    /// `t y`, the image of the crosscap transposition `u_1 = t_1^-1 y_1`.
    TY,
}

impl KleinFour {
    pub const ALL: [KleinFour; 4] = [KleinFour::One, KleinFour::T, KleinFour::Y, KleinFour::TY];

    fn bits(self) -> u8 {
        match self {
            KleinFour::One => 0,
            KleinFour::T => 1,
            KleinFour::Y => 2,
            KleinFour::TY => 3,
        }
    }

    fn from_bits(b: u8) -> Self {
        KleinFour::ALL[usize::from(b & 3)]
    }

    pub fn times(self, other: KleinFour) -> KleinFour {
        KleinFour::from_bits(self.bits() ^ other.bits())
    }

    pub fn pow(self, n: u32) -> KleinFour {
        (0..n).fold(KleinFour::One, |acc, _| acc.times(self))
    }

    /// Image of a Standard(2) word.
    pub fn of_word(w: &Word) -> Option<KleinFour> {
        match w.model() {
            SurfaceModel::Standard(g) if g.get() == 2 => {}
            _ => return None,
        }
        let mut acc = KleinFour::One;
        for s in w.syllables() {
            let e = match s.letter.kind {
                LetterKind::Twist => KleinFour::T,
                LetterKind::Slide => KleinFour::Y,
                LetterKind::Transposition => KleinFour::TY,
                LetterKind::Chain => return None,
            };
            if s.exp % 2 != 0 {
                acc = acc.times(e);
            }
        }
        Some(acc)
    }
}

impl fmt::Display for KleinFour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KleinFour::One => "1",
            KleinFour::T => "t",
            KleinFour::Y => "y",
            KleinFour::TY => "ty",
        })
    }
}

/// All `(x, d)` with `x^d = target` and `2 <= d <= 4`.
pub fn mn2_root_search(target: KleinFour) -> Vec<(KleinFour, u32)> {
    let mut out = Vec::new();
    for d in 2..=4 {
        for x in KleinFour::ALL {
            if x.pow(d) == target {
                out.push((x, d));
            }
        }
    }
    out
}

/// Solutions of [`mn2_root_search`] where `x` is not a power of `target`.
pub fn mn2_nontrivial_roots(target: KleinFour) -> Vec<(KleinFour, u32)> {
    let powers = [KleinFour::One, target];
    mn2_root_search(target)
        .into_iter()
        .filter(|(x, _)| !powers.contains(x))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gl2Order {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Gl2Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gl2Order::Finite(n) => write!(f, "{n}"),
            Gl2Order::Infinite => write!(f, "infinite"),
        }
    }
}

pub fn gl2_order(m: &Gl2Matrix) -> Gl2Order {
    m.order().map_or(Gl2Order::Infinite, Gl2Order::Finite)
}

/// A conjugator `P` with entries in `[-bound, bound]` and `P a P^-1 = b`.
pub fn find_conjugator(a: &Gl2Matrix, b: &Gl2Matrix, bound: i64) -> Option<Gl2Matrix> {
    if a.det() != b.det() || a.trace() != b.trace() {
        return None;
    }
    // P a = b P, P = [[p, q], [r, s]]
    let [[a11, a12], [a21, a22]] = a.0;
    let [[b11, b12], _] = b.0;
    let ok = |p: &Gl2Matrix| *p * *a == *b * *p;
    let range = -bound..=bound;
    for p in range.clone() {
        for q in range.clone() {
            // first row: p a11 + q a21 = b11 p + b12 r ; p a12 + q a22 = b11 q + b12 s
            if b12 != 0 {
                let rn = p * a11 + q * a21 - b11 * p;
                let sn = p * a12 + q * a22 - b11 * q;
                if rn % b12 != 0 || sn % b12 != 0 {
                    continue;
                }
                let (r, s) = (rn / b12, sn / b12);
                if r.abs() > bound || s.abs() > bound {
                    continue;
                }
                if let Some(c) = Gl2Matrix::new(p, q, r, s) {
                    if ok(&c) {
                        return Some(c);
                    }
                }
            } else {
                if p * a11 + q * a21 != b11 * p || p * a12 + q * a22 != b11 * q {
                    continue;
                }
                for r in range.clone() {
                    for s in range.clone() {
                        if let Some(c) = Gl2Matrix::new(p, q, r, s) {
                            if ok(&c) {
                                return Some(c);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionClass {
    pub order: u32,
    pub representative: Gl2Matrix,
    pub det: i64,
    pub trace: i64,
    /// Number of scanned matrices found conjugate to the representative.
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionClassTable {
    pub entry_bound: i64,
    pub conjugator_bound: i64,
    pub classes: Vec<TorsionClass>,
    pub torsion_elements: usize,
    pub max_order: u32,
}

impl TorsionClassTable {
    pub fn classes_of_order(&self, order: u32) -> impl Iterator<Item = &TorsionClass> {
        self.classes.iter().filter(move |c| c.order == order)
    }

    /// Index of the class containing `m`, by bounded conjugator search.
    pub fn class_of(&self, m: &Gl2Matrix) -> Option<usize> {
        let order = m.order()?;
        self.classes.iter().position(|c| {
            c.order == order && find_conjugator(&c.representative, m, self.conjugator_bound).is_some()
        })
    }
}

fn scan_key(m: &Gl2Matrix) -> (i64, [[i64; 2]; 2]) {
    (m.max_abs_entry(), m.0)
}

/// Enumerates all of GL(2, Z) with entries in `[-bound, bound]`, keeps the
/// torsion elements and groups them into conjugacy classes using
/// conjugators with entries in `[-2 bound, 2 bound]`.
pub fn gl2_torsion_scan(entry_bound: i64) -> Result<TorsionClassTable, SmallGenusError> {
    gl2_torsion_scan_with(entry_bound, 2 * entry_bound)
}

pub fn gl2_torsion_scan_with(
    entry_bound: i64,
    conjugator_bound: i64,
) -> Result<TorsionClassTable, SmallGenusError> {
    if entry_bound < 1 {
        return Err(SmallGenusError::BadBound(entry_bound));
    }
    let range: Vec<i64> = (-entry_bound..=entry_bound).collect();
    let mut torsion: Vec<Gl2Matrix> = range
        .par_iter()
        .flat_map_iter(|&a| {
            let range = &range;
            range.iter().flat_map(move |&b| {
                range.iter().flat_map(move |&c| {
                    range
                        .iter()
                        .filter_map(move |&d| Gl2Matrix::new(a, b, c, d))
                        .filter(|m| m.order().is_some())
                })
            })
        })
        .collect();
    torsion.sort_by_key(scan_key);

    let mut classes: Vec<TorsionClass> = Vec::new();
    let mut assignment: Vec<Option<usize>> = vec![None; torsion.len()];
    // Representatives are the smallest elements of each class; members of a
    // known class are matched in parallel, new classes are opened in order.
    let mut next = 0;
    while next < torsion.len() {
        let m = torsion[next];
        let idx = classes.len();
        classes.push(TorsionClass {
            order: m.order().expect("torsion"),
            representative: m,
            det: m.det(),
            trace: m.trace(),
            members: 0,
        });
        let rep = m;
        let hits: Vec<usize> = (next..torsion.len())
            .into_par_iter()
            .filter(|&k| assignment[k].is_none())
            .filter(|&k| find_conjugator(&rep, &torsion[k], conjugator_bound).is_some())
            .collect();
        for k in hits {
            assignment[k] = Some(idx);
        }
        classes[idx].members = assignment.iter().filter(|a| **a == Some(idx)).count();
        next = (next..torsion.len())
            .find(|&k| assignment[k].is_none())
            .unwrap_or(torsion.len());
    }
    classes.sort_by_key(|c| (c.order, c.det, scan_key(&c.representative)));
    let max_order = classes.iter().map(|c| c.order).max().unwrap_or(1);
    Ok(TorsionClassTable {
        entry_bound,
        conjugator_bound,
        torsion_elements: torsion.len(),
        classes,
        max_order,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCheck {
    pub degree: u32,
    pub class_order: u32,
    pub representative: Gl2Matrix,
    /// `R^d` for the class representative `R`.
    pub power: Gl2Matrix,
    pub power_conjugate_to_target: bool,
    /// When `R^d` is conjugate to the target and `R^d = R`, every root in
    /// the class equals the target itself.
    pub only_trivial: bool,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G3Verdict {
    NoNontrivialRoot,
    CandidateFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct G3Certification {
    pub target: String,
    pub target_image: Gl2Matrix,
    pub max_degree: u32,
    pub assumptions: Vec<String>,
    pub table: TorsionClassTable,
    pub checks: Vec<ClassCheck>,
    /// Order of the image of `t1 t2`, and whether det of its cube is +1.
    pub twist_chain_order: Gl2Order,
    pub order_six_cubes_have_det_plus_one: bool,
    pub verdict: G3Verdict,
}

pub const G3_FAITHFUL: &str =
    "M(N_3) -> GL(2,Z) given by the action on H_1(N_3; R) is an isomorphism";
pub const G3_CLASSIFICATION: &str =
    "every finite-order element of GL(2,Z) is conjugate to an element with entries in the scan box";

/// Certifies that `target` (u1 or y1 in Standard(3)) has no nontrivial root
/// of any odd degree `3..=max_degree`.
pub fn certify_no_root_g3(
    target: &Word,
    max_degree: u32,
    entry_bound: i64,
) -> Result<G3Certification, SmallGenusError> {
    match target.model() {
        SurfaceModel::Standard(g) if g.get() == 3 => {}
        other => return Err(SmallGenusError::WrongModel(other)),
    }
    let is_target = [Letter::u(1), Letter::y(1)]
        .iter()
        .any(|l| target.syllables() == [crate::word::Syllable::new(*l, 1)]);
    if !is_target {
        return Err(SmallGenusError::BadTarget(target.to_string()));
    }
    if max_degree < 3 || max_degree % 2 == 0 {
        return Err(SmallGenusError::BadDegree(max_degree));
    }
    let u = gl2_image(target)?;
    debug_assert!((u * u).is_identity());
    let table = gl2_torsion_scan(entry_bound)?;
    let target_class = table.class_of(&u);

    let mut checks = Vec::new();
    let mut candidate = false;
    for d in (3..=max_degree).step_by(2) {
        for class in &table.classes {
            let r = class.representative;
            let power = r.pow(u64::from(d));
            let conj = target_class.is_some() && table.class_of(&power) == target_class;
            let only_trivial = conj && power == r;
            let reason = if !conj {
                let o = power.order().unwrap_or(0);
                if power.det() != u.det() {
                    format!("det(R^{d}) = {} but det(target) = {}", power.det(), u.det())
                } else if o != 2 {
                    format!("R^{d} has order {o}, target has order 2")
                } else {
                    format!("R^{d} lies in a different class of involutions")
                }
            } else if only_trivial {
                "R^d = R, so any root X in this class satisfies X = X^d = target".into()
            } else {
                candidate = true;
                "R^d is conjugate to the target: candidate root".into()
            };
            checks.push(ClassCheck {
                degree: d,
                class_order: class.order,
                representative: r,
                power,
                power_conjugate_to_target: conj,
                only_trivial,
                reason,
            });
        }
    }

    let model = target.model();
    let t1t2 = gl2_image(&Word::from_letters(model, [Letter::t(1), Letter::t(2)]).expect("valid letters"))?;
    let order_six_cubes_have_det_plus_one = table
        .classes_of_order(6)
        .all(|c| c.representative.pow(3).det() == 1);

    let verdict = if candidate || target_class.is_none() || table.max_order != 6 {
        G3Verdict::CandidateFound
    } else {
        G3Verdict::NoNontrivialRoot
    };
    Ok(G3Certification {
        target: target.to_string(),
        target_image: u,
        max_degree,
        assumptions: vec![
            G3_FAITHFUL.to_string(),
            G3_CLASSIFICATION.to_string(),
            format!(
                "conjugacy decided by bounded search (entries <= {}, conjugators <= {})",
                table.entry_bound, table.conjugator_bound
            ),
        ],
        table,
        checks,
        twist_chain_order: gl2_order(&t1t2),
        order_six_cubes_have_det_plus_one,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    #[test]
    fn klein_four_axioms() {
        for a in KleinFour::ALL {
            assert_eq!(a.times(a), KleinFour::One);
            assert_eq!(a.times(KleinFour::One), a);
            for b in KleinFour::ALL {
                assert_eq!(a.times(b), b.times(a));
                for c in KleinFour::ALL {
                    assert_eq!(a.times(b).times(c), a.times(b.times(c)));
                }
            }
        }
        assert_eq!(KleinFour::T.times(KleinFour::Y), KleinFour::TY);
    }

    #[test]
    fn genus_two_search() {
        assert_eq!(mn2_root_search(KleinFour::TY), vec![(KleinFour::TY, 3)]);
        assert!(mn2_nontrivial_roots(KleinFour::TY).is_empty());
        assert_eq!(mn2_root_search(KleinFour::T), vec![(KleinFour::T, 3)]);
        let squares: Vec<_> = mn2_root_search(KleinFour::One)
            .into_iter()
            .filter(|(_, d)| *d == 2)
            .map(|(x, _)| x)
            .collect();
        assert_eq!(squares, KleinFour::ALL.to_vec());
        for t in [KleinFour::Y, KleinFour::TY] {
            assert!(mn2_nontrivial_roots(t).is_empty());
        }
    }

    #[test]
    fn klein_image_of_words() {
        let m = SurfaceModel::standard(2).unwrap();
        let u = parse_word("u1", m).unwrap();
        assert_eq!(KleinFour::of_word(&u), Some(KleinFour::TY));
        let ty = parse_word("t1^-1 y1", m).unwrap();
        assert_eq!(KleinFour::of_word(&ty), Some(KleinFour::TY));
    }

    #[test]
    fn orders() {
        let m = SurfaceModel::standard(3).unwrap();
        assert_eq!(gl2_order(&Gl2Matrix::IDENTITY), Gl2Order::Finite(1));
        assert_eq!(gl2_order(&gl2_image(&parse_word("t1 t2", m).unwrap()).unwrap()), Gl2Order::Finite(6));
        assert_eq!(gl2_order(&gl2_image(&parse_word("u1", m).unwrap()).unwrap()), Gl2Order::Finite(2));
        assert_eq!(gl2_order(&gl2_image(&parse_word("t1", m).unwrap()).unwrap()), Gl2Order::Infinite);
    }

    #[test]
    fn conjugator_search() {
        let a = Gl2Matrix::new(0, -1, 1, 1).unwrap();
        let p = Gl2Matrix::new(2, 1, 1, 1).unwrap();
        let b = p * a * p.inverse();
        let c = find_conjugator(&a, &b, 3).unwrap();
        assert_eq!(c * a * c.inverse(), b);
        let refl = Gl2Matrix::new(1, 0, 0, -1).unwrap();
        let swap = Gl2Matrix::new(0, 1, 1, 0).unwrap();
        assert!(find_conjugator(&refl, &swap, 6).is_none());
    }

    #[test]
    fn small_scans() {
        let t1 = gl2_torsion_scan(1).unwrap();
        assert!(t1
            .classes
            .iter()
            .any(|c| c.order == 1 && c.representative.is_identity()));
        let t3 = gl2_torsion_scan(3).unwrap();
        assert_eq!(t3.max_order, 6);
        assert_eq!(t3.classes_of_order(6).count(), 1);
        assert!(gl2_torsion_scan(0).is_err());
    }

    #[test]
    fn certification_rejects_bad_input() {
        let m4 = SurfaceModel::standard(4).unwrap();
        assert!(certify_no_root_g3(&parse_word("u1", m4).unwrap(), 3, 2).is_err());
        let m3 = SurfaceModel::standard(3).unwrap();
        assert!(certify_no_root_g3(&parse_word("t1", m3).unwrap(), 3, 2).is_err());
        assert!(certify_no_root_g3(&parse_word("u1", m3).unwrap(), 4, 2).is_err());
    }

    #[test]
    fn genus_three_cube_roots() {
        let m = SurfaceModel::standard(3).unwrap();
        for t in ["u1", "y1"] {
            let cert = certify_no_root_g3(&parse_word(t, m).unwrap(), 3, 3).unwrap();
            assert_eq!(cert.verdict, G3Verdict::NoNontrivialRoot, "{t}");
            assert!(cert.order_six_cubes_have_det_plus_one);
        }
    }
}
