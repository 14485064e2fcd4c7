//! Roots of crosscap transpositions and crosscap slides.
//!
//! Every constructed root comes with a certificate generated from a fixed
//! template: expand the power, sort the commuting letters, replace blocks
//! equal to the boundary twist, and merge the remaining exponents.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::{
    chain_block, check_certificate, even_rotation_block, odd_rotation_block, Certificate,
    CertificateError, Derivation, Direction, FreeOp, RelationKey, RewriteStep, SchemaId,
};
use crate::repr::{homology_of, perm_of, sign_of, Permutation, Sign};
use crate::word::{Genus, Letter, LetterKind, SurfaceModel, Syllable, Word, WordError};

/// Solution of `2p + q m = 1` for the odd modulus `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BezoutPair {
    pub p: i64,
    pub q: i64,
    pub modulus: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BezoutCase {
    /// modulus g - 2
    Odd,
    /// modulus g - 3
    EvenNonorientable,
}

/// Canonical Bezout pair with `q = 1`.
pub fn bezout(genus: Genus, case: BezoutCase) -> Result<BezoutPair, RootError> {
    let g = i64::from(genus.get());
    let modulus = match case {
        BezoutCase::Odd if g >= 5 && g % 2 == 1 => g - 2,
        BezoutCase::EvenNonorientable if g >= 6 && g % 2 == 0 => g - 3,
        _ => {
            return Err(RootError::InvalidRequest(format!(
                "no Bezout case {case:?} at genus {g}"
            )))
        }
    };
    Ok(BezoutPair {
        p: (1 - modulus) / 2,
        q: 1,
        modulus,
    })
}

/// A root degree `d` is possible only if `d` is odd: the target has sign -1
/// while `sign(x^d) = sign(x)^d` is +1 for even `d`.
pub fn check_degree_parity(d: u32) -> bool {
    d % 2 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Crosscap transposition `u_1`.
    U,
    /// Crosscap slide `y_1`.
    Y,
}

impl Target {
    pub fn letter(self, index: u32) -> Letter {
        match self {
            Target::U => Letter::u(index),
            Target::Y => Letter::y(index),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::U => "u",
            Target::Y => "y",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Complement {
    Auto,
    Nonorientable,
    Orientable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootRequest {
    pub genus: Genus,
    pub target: Target,
    pub complement: Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootCase {
    OddGenus,
    EvenNonorientable,
    EvenOrientable,
}

impl RootCase {
    pub fn degree(self, g: u32) -> u32 {
        match self {
            RootCase::OddGenus => g - 2,
            RootCase::EvenNonorientable => g - 3,
            RootCase::EvenOrientable => g - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_ok(self) -> bool {
        self != Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub sign: Verdict,
    pub permutation: Verdict,
    pub homology: Verdict,
    pub certificate: Verdict,
    pub nontriviality: Verdict,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        [
            self.sign,
            self.permutation,
            self.homology,
            self.certificate,
            self.nontriviality,
        ]
        .into_iter()
        .all(Verdict::is_ok)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootResult {
    pub case: RootCase,
    pub target: Word,
    pub root: Word,
    pub degree: u32,
    pub bezout: Option<BezoutPair>,
    pub certificate: Certificate,
    pub report: VerificationReport,
    pub assumptions: Vec<String>,
    /// Set for braid roots obtained by conjugating the `u_1` construction.
    pub translated_from: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonexistenceCase {
    GenusTwo,
    GenusThree,
    GenusFourNonorientable,
    FewPunctures,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("no nontrivial root exists: {citation}")]
    Nonexistence {
        case: NonexistenceCase,
        citation: String,
        machine_certified: bool,
    },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("certificate construction failed: {0}")]
    Certificate(#[from] CertificateError),
}

pub const CITE_G2: &str =
    "crosscap slides and crosscap transpositions are primitive in M(N_2) = Z_2 + Z_2 (certified by exhaustive search)";
pub const CITE_G3: &str =
    "crosscap transpositions and slides have no nontrivial roots in M(N_3) = GL(2,Z) (certified via torsion classification)";
pub const CITE_G4: &str =
    "g = 4 with nonorientable complement: nonexistent per paper, not machine-certified";
pub const CITE_BRAID: &str =
    "an elementary braid in M(S_0^n) has a nontrivial root if and only if n >= 5";

fn nonexistence(case: NonexistenceCase) -> RootError {
    let (citation, machine_certified) = match case {
        NonexistenceCase::GenusTwo => (CITE_G2, true),
        NonexistenceCase::GenusThree => (CITE_G3, true),
        NonexistenceCase::GenusFourNonorientable => (CITE_G4, false),
        NonexistenceCase::FewPunctures => (CITE_BRAID, false),
    };
    RootError::Nonexistence {
        case,
        citation: citation.to_string(),
        machine_certified,
    }
}

/// Resolves which existence case a request falls into.
pub fn resolve_case(req: &RootRequest) -> Result<RootCase, RootError> {
    let g = req.genus.get();
    if req.complement == Complement::Orientable && g % 2 == 1 {
        return Err(RootError::InvalidRequest(format!(
            "genus {g} is odd, so the complement of the Klein bottle is nonorientable"
        )));
    }
    match g {
        2 => return Err(nonexistence(NonexistenceCase::GenusTwo)),
        3 => return Err(nonexistence(NonexistenceCase::GenusThree)),
        _ => {}
    }
    Ok(match (g % 2, req.complement) {
        (1, _) => RootCase::OddGenus,
        (_, Complement::Orientable) => RootCase::EvenOrientable,
        _ if g == 4 => return Err(nonexistence(NonexistenceCase::GenusFourNonorientable)),
        _ => RootCase::EvenNonorientable,
    })
}

fn inverse_block(block: &[Syllable]) -> Vec<Syllable> {
    block.iter().rev().map(|s| s.inverse()).collect()
}

fn repeat_block(block: &[Syllable], n: usize) -> Vec<Syllable> {
    let mut out = Vec::with_capacity(block.len() * n);
    for _ in 0..n {
        out.extend_from_slice(block);
    }
    out
}

/// Moves every syllable of `mover` to the right end, swapping it past the
/// other letters, then reduces.
fn sort_to_right(d: &mut Derivation, mover: Letter) -> Result<(), RootError> {
    loop {
        let state = d.state();
        let Some(i) = (0..state.len().saturating_sub(1))
            .find(|&i| state[i].letter == mover && state[i + 1].letter != mover)
        else {
            break;
        };
        d.split_unit(i + 1)?;
        d.swap(i)?;
    }
    d.reduce()?;
    Ok(())
}

/// Root word, degree and derivation `root^degree -> target` for one case.
struct Construction {
    root: Vec<Syllable>,
    degree: u32,
    derivation: Derivation,
    bezout: Option<BezoutPair>,
}

fn construct_standard(
    genus: Genus,
    target: Target,
    case: RootCase,
) -> Result<Construction, RootError> {
    let g = genus.get();
    let model = SurfaceModel::Standard(genus);
    let (block, schema, pair) = match case {
        RootCase::OddGenus => (
            odd_rotation_block(g),
            SchemaId::R6ClosedOdd,
            bezout(genus, BezoutCase::Odd)?,
        ),
        RootCase::EvenNonorientable => (
            even_rotation_block(g),
            SchemaId::R6ClosedEven,
            bezout(genus, BezoutCase::EvenNonorientable)?,
        ),
        RootCase::EvenOrientable => unreachable!("hybrid case handled separately"),
    };
    let x = target.letter(1);
    let m = pair.modulus as usize;
    let reps = pair.p.unsigned_abs() as usize;
    debug_assert!(pair.p < 0 && pair.q == 1);

    // root = C^p x with p < 0
    let mut root = repeat_block(&inverse_block(&block), reps);
    root.push(Syllable::new(x, pair.q));

    let mut d = Derivation::new(model, repeat_block(&root, m))?;
    // (C^p x)^m -> C^{pm} x^m
    sort_to_right(&mut d, x)?;

    // each C^{-m} becomes x^{-2}
    let boundary = RelationKey::ints(schema, &[]);
    let square_swap = RelationKey::ints(SchemaId::UsquaredYsquared, &[1]);
    for _ in 0..reps {
        let pos = usize::from(d.state().first().map(|s| s.letter) == Some(x));
        d.apply(RewriteStep::free(FreeOp::Insert, pos, x, -2))?;
        if target == Target::Y {
            d.apply(RewriteStep::relation(pos + 1, square_swap.clone(), Direction::Backward))?;
        }
        d.apply(RewriteStep::relation(pos + 1, boundary.clone(), Direction::Forward))?;
        d.reduce()?;
    }
    Ok(Construction {
        root,
        degree: case.degree(g),
        derivation: d,
        bezout: Some(pair),
    })
}

fn construct_hybrid(genus: Genus, target: Target) -> Result<Construction, RootError> {
    let g = genus.get();
    let model = SurfaceModel::hybrid(g)?;
    let x = target.letter(1);
    let chain = chain_block(g);
    let m = (g - 1) as usize;

    // root = (c_1 ... c_{g-2})^g x^-1
    let mut root = repeat_block(&chain, g as usize);
    root.push(Syllable::new(x, -1));

    let mut d = Derivation::new(model, repeat_block(&root, m))?;
    sort_to_right(&mut d, x)?;

    // D^{g(g-1)} = (D^{2g-2})^{g/2} -> u_1^g
    let boundary = RelationKey::ints(SchemaId::R7Chain, &[]);
    let square_swap = RelationKey::ints(SchemaId::UsquaredYsquared, &[1]);
    for _ in 0..g / 2 {
        let pos = usize::from(d.state().first().map(|s| s.letter.kind) != Some(LetterKind::Chain));
        d.apply(RewriteStep::relation(pos, boundary.clone(), Direction::Backward))?;
        if target == Target::Y {
            d.apply(RewriteStep::relation(pos, square_swap.clone(), Direction::Forward))?;
        }
        d.reduce()?;
    }
    Ok(Construction {
        root,
        degree: RootCase::EvenOrientable.degree(g),
        derivation: d,
        bezout: None,
    })
}

/// True iff `root` is provably not a power of `target`.
///
/// Standard words: the crosscap permutation of `root` is not a power of the
/// target's permutation. Hybrid words: the root contains a chain letter.
pub fn is_nontrivial(root: &Word, target: &Word, _degree: u32) -> bool {
    if root.model().is_hybrid() {
        return root.contains_kind(LetterKind::Chain);
    }
    let (Ok(pr), Ok(pt)) = (perm_of(root), perm_of(target)) else {
        return false;
    };
    let order = pt.order();
    let mut power = Permutation::identity(pt.degree());
    for _ in 0..order {
        if power == pr {
            return false;
        }
        power = power.compose(&pt);
    }
    true
}

/// Runs every applicable oracle on `root^degree = target`.
pub fn verify_root(
    root: &Word,
    degree: u32,
    target: &Word,
    certificate: Option<&Certificate>,
) -> Result<VerificationReport, RootError> {
    let powered = root.power(i64::from(degree))?;
    let sign = Verdict::from_bool(
        sign_of(root).pow(u64::from(degree)) == sign_of(target) && sign_of(&powered) == sign_of(target),
    );
    let (permutation, homology) = if root.model().is_hybrid() {
        (Verdict::NotApplicable, Verdict::NotApplicable)
    } else {
        let perm = Verdict::from_bool(perm_of(&powered).ok() == perm_of(target).ok());
        let hom = match (homology_of(&powered), homology_of(target)) {
            (Ok(a), Ok(b)) => Verdict::from_bool(a == b),
            _ => Verdict::Fail,
        };
        (perm, hom)
    };
    let certificate = match certificate {
        None => Verdict::NotApplicable,
        Some(c) => Verdict::from_bool(
            c.start == powered && &c.end == target && check_certificate(c) == Ok(true),
        ),
    };
    Ok(VerificationReport {
        sign,
        permutation,
        homology,
        certificate,
        nontriviality: Verdict::from_bool(is_nontrivial(root, target, degree)),
    })
}

fn assumptions_for(cert: &Certificate) -> Vec<String> {
    cert.schemas_used()
        .into_iter()
        .filter_map(SchemaId::assumption)
        .map(str::to_string)
        .collect()
}

fn finish(
    case: RootCase,
    target: Word,
    c: Construction,
    translated_from: Option<u32>,
) -> Result<RootResult, RootError> {
    let model = c.derivation.model();
    let root = Word::from_syllables(model, c.root)?;
    let certificate = c.derivation.finish()?;
    let report = verify_root(&root, c.degree, &target, Some(&certificate))?;
    let mut assumptions = assumptions_for(&certificate);
    if model.is_hybrid() {
        assumptions.push(
            "hybrid model: no homology or permutation oracle; verified by certificate and sign character"
                .into(),
        );
    }
    Ok(RootResult {
        case,
        target,
        root,
        degree: c.degree,
        bezout: c.bezout,
        certificate,
        report,
        assumptions,
        translated_from,
    })
}

/// Builds and verifies a root of `u_1` or `y_1`.
pub fn construct_root(req: &RootRequest) -> Result<RootResult, RootError> {
    let case = resolve_case(req)?;
    let (c, model) = match case {
        RootCase::EvenOrientable => (
            construct_hybrid(req.genus, req.target)?,
            SurfaceModel::hybrid(req.genus.get())?,
        ),
        _ => (
            construct_standard(req.genus, req.target, case)?,
            SurfaceModel::Standard(req.genus),
        ),
    };
    let target = Word::letter(model, req.target.letter(1))?;
    finish(case, target, c, None)
}

/// Root of the elementary braid `sigma_i` in M(S_0^n), reported through its
/// image `u_i` in M(N_n).
///
/// For `i > 1` the `u_1` root is conjugated by `R^(i-1)` with
/// `R = u_1 ... u_{n-1}`, using `R u_j R^-1 = u_{j+1}`.
pub fn construct_braid_root(n: u32, index: u32) -> Result<RootResult, RootError> {
    if n < 2 {
        return Err(RootError::InvalidRequest("need at least 2 punctures".into()));
    }
    if index < 1 || index > n - 1 {
        return Err(RootError::InvalidRequest(format!(
            "braid index {index} out of range 1..={}",
            n - 1
        )));
    }
    if n <= 4 {
        return Err(nonexistence(NonexistenceCase::FewPunctures));
    }
    let genus = Genus::new(n)?;
    let model = SurfaceModel::Standard(genus);
    let case = if n % 2 == 1 {
        RootCase::OddGenus
    } else {
        RootCase::EvenNonorientable
    };
    let base = construct_standard(genus, Target::U, case)?;
    let target = Word::letter(model, Letter::u(index))?;
    if index == 1 {
        return finish(case, target, base, None);
    }

    let k = (index - 1) as usize;
    let rotation: Vec<Syllable> = (1..n).map(|j| Syllable::new(Letter::u(j), 1)).collect();
    let r = rotation.len();
    let conj = repeat_block(&rotation, k);
    let conj_inv = inverse_block(&conj);
    let mut copy = conj.clone();
    copy.extend_from_slice(&base.root);
    copy.extend_from_slice(&conj_inv);
    let degree = base.degree as usize;

    let mut d = Derivation::new(model, repeat_block(&copy, degree))?;
    // (R^k W R^-k)^d -> R^k W^d R^-k
    let inner_len = base.root.len() * degree;
    for c in 1..degree {
        let junction = 2 * k * r + base.root.len() * c;
        for step in 0..k * r {
            let pos = junction - 1 - step;
            let s = d.state()[pos];
            d.apply(RewriteStep::free(FreeOp::Delete, pos, s.letter, s.exp))?;
        }
    }
    debug_assert_eq!(d.state().len(), 2 * k * r + inner_len);
    // W^d -> u_1
    d.embed(&base.derivation, k * r)?;
    // R^k u_1 R^-k -> u_{1+k} R^k R^-k
    for level in 0..k {
        let j = 1 + level as u32;
        let start = (k - 1 - level) * r;
        rotate_past(&mut d, start, j, n)?;
    }
    d.reduce()?;

    let root = Word::from_syllables(model, copy)?;
    let c = Construction {
        root: root.syllables().to_vec(),
        degree: base.degree,
        derivation: d,
        bezout: base.bezout,
    };
    finish(case, target, c, Some(1))
}

/// With `R = u_1 ... u_{n-1}` at `start` followed by `u_j`, rewrites
/// `R u_j` into `u_{j+1} R` using R1 and R2.
fn rotate_past(d: &mut Derivation, start: usize, j: u32, n: u32) -> Result<(), RootError> {
    let j_us = j as usize;
    // u_j sits at start + n - 1; move it left past u_{n-1}, ..., u_{j+2}
    for l in (j + 2..n).rev() {
        d.swap(start + l as usize - 1)?;
    }
    // u_j u_{j+1} u_j -> u_{j+1} u_j u_{j+1}
    d.apply(RewriteStep::relation(
        start + j_us - 1,
        RelationKey::ints(SchemaId::R2, &[j]),
        Direction::Forward,
    ))?;
    // move u_{j+1} left past u_{j-1}, ..., u_1
    for l in (1..j).rev() {
        d.swap(start + l as usize - 1)?;
    }
    Ok(())
}

/// Sign of the root raised to its degree against the target's sign.
pub fn sign_obstruction(target: &Word, degree: u32) -> bool {
    let target_sign = sign_of(target);
    target_sign == Sign::Minus && !check_degree_parity(degree)
}
