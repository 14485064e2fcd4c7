//! Relation schemas, their instances, and replayable rewrite certificates.
//!
//! A certificate starts from a free-reduced word and replays a list of steps
//! over a syllable sequence that is allowed to be unreduced in between. Steps
//! address syllables by index into the current sequence; indices are
//! recomputed after every step. A relation step replaces an exact occurrence
//! of one side of a relation instance by the other side; a free step inserts
//! or deletes a cancelling pair of syllables, or merges/splits exponents.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::word::{reduce_syllables, Letter, LetterKind, SurfaceModel, Syllable, Word, WordError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemaId {
    /// `u_i u_j = u_j u_i`, |i-j| > 1.
    R1,
    /// `u_i u_{i+1} u_i = u_{i+1} u_i u_{i+1}`.
    R2,
    /// `(u_1 ... u_{g-1})^g = 1`.
    R3,
    /// `t_i u_j = u_j t_i`, |i-j| > 1.
    R4a,
    /// `y_i u_j = u_j y_i`, |i-j| > 1.
    R4b,
    /// `(u_1^2 u_2 ... u_{g-1})^{g-1} = 1`.
    R5,
    /// `u_1^2 = (u_3 ... u_{g-1})^{g-2}`, g >= 5 odd.
    R6ClosedOdd,
    /// `u_1^2 = (u_3^2 u_4 ... u_{g-1})^{g-3}`, g >= 6 even.
    R6ClosedEven,
    /// `u_1^2 = (c_1 ... c_{g-2})^{2g-2}` in the hybrid model.
    R7Chain,
    /// `y_i = t_i u_i`.
    SlideDef,
    /// `u_i^2 = y_i^2`.
    UsquaredYsquared,
    /// `x c_k = c_k x` for x in {t_1, u_1, y_1} (hybrid model).
    ChainCommute,
    /// Genus 2: `t_1^2 = 1`, `y_1^2 = 1`, `(t_1 y_1)^2 = 1`.
    KleinG2,
    /// Genus 3: `u_1^2 = 1` and `(t_1 t_2)^6 = 1`.
    TrivialBoundaryG3,
}

impl SchemaId {
    pub const ALL: [SchemaId; 14] = [
        SchemaId::R1,
        SchemaId::R2,
        SchemaId::R3,
        SchemaId::R4a,
        SchemaId::R4b,
        SchemaId::R5,
        SchemaId::R6ClosedOdd,
        SchemaId::R6ClosedEven,
        SchemaId::R7Chain,
        SchemaId::SlideDef,
        SchemaId::UsquaredYsquared,
        SchemaId::ChainCommute,
        SchemaId::KleinG2,
        SchemaId::TrivialBoundaryG3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaId::R1 => "R1",
            SchemaId::R2 => "R2",
            SchemaId::R3 => "R3",
            SchemaId::R4a => "R4a",
            SchemaId::R4b => "R4b",
            SchemaId::R5 => "R5",
            SchemaId::R6ClosedOdd => "R6closed-odd",
            SchemaId::R6ClosedEven => "R6closed-even",
            SchemaId::R7Chain => "R7chain",
            SchemaId::SlideDef => "SlideDef",
            SchemaId::UsquaredYsquared => "UsquaredYsquared",
            SchemaId::ChainCommute => "ChainCommute",
            SchemaId::KleinG2 => "KleinG2",
            SchemaId::TrivialBoundaryG3 => "TrivialBoundaryG3",
        }
    }

    /// Schemas taken as axioms about subsurfaces rather than derived from
    /// the closed-surface relations. Reports list them as assumptions.
    pub fn assumption(self) -> Option<&'static str> {
        match self {
            SchemaId::R6ClosedOdd => Some(
                "boundary-twist schema R6closed-odd: u1^2 = t_delta = (u3 ... u_{g-1})^{g-2} taken as an axiom",
            ),
            SchemaId::R6ClosedEven => Some(
                "boundary-twist schema R6closed-even: u1^2 = t_delta = (u3^2 u4 ... u_{g-1})^{g-3} taken as an axiom",
            ),
            SchemaId::R7Chain => Some(
                "chain schema R7chain: u1^2 = t_dK = (c1 ... c_{g-2})^{2g-2} taken as an axiom",
            ),
            SchemaId::ChainCommute => Some(
                "ChainCommute: t1, u1, y1 commute with chain twists (disjoint supports, geometric input)",
            ),
            SchemaId::TrivialBoundaryG3 => {
                Some("genus 3: t_delta = 1, i.e. u1^2 = 1 and (t1 t2)^6 = 1")
            }
            _ => None,
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemaId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemaId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown schema `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Int(u32),
    Gen(Letter),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(n) => write!(f, "{n}"),
            Param::Gen(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for Param {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.starts_with(|c: char| c.is_ascii_digit()) {
            s.parse().map(Param::Int).map_err(|_| format!("bad parameter `{s}`"))
        } else {
            s.parse().map(Param::Gen).map_err(|e: WordError| e.to_string())
        }
    }
}

/// Schema plus parameters; identifies one relation instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationKey {
    pub schema: SchemaId,
    pub params: Vec<Param>,
}

impl RelationKey {
    pub fn new(schema: SchemaId, params: Vec<Param>) -> Self {
        RelationKey { schema, params }
    }

    pub fn ints(schema: SchemaId, ints: &[u32]) -> Self {
        RelationKey::new(schema, ints.iter().map(|&i| Param::Int(i)).collect())
    }
}

impl fmt::Display for RelationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.schema)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("{schema} is not available in {model}")]
    WrongModel { schema: SchemaId, model: SurfaceModel },
    #[error("{key}: {reason}")]
    BadParams { key: String, reason: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A concrete equation `lhs = rhs` obtained from a schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub key: RelationKey,
    pub lhs: Word,
    pub rhs: Word,
}

impl RelationInstance {
    pub fn model(&self) -> SurfaceModel {
        self.lhs.model()
    }
}

impl fmt::Display for RelationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} = {}", self.key, self.lhs, self.rhs)
    }
}

fn units(letters: impl IntoIterator<Item = Letter>) -> Vec<Syllable> {
    letters.into_iter().map(|l| Syllable::new(l, 1)).collect()
}

fn repeat(block: &[Syllable], n: u32) -> Vec<Syllable> {
    let mut out = Vec::with_capacity(block.len() * n as usize);
    for _ in 0..n {
        out.extend_from_slice(block);
    }
    out
}

/// The block `u_3 ... u_{g-1}` rotating mu_3, ..., mu_g.
pub fn odd_rotation_block(g: u32) -> Vec<Syllable> {
    units((3..g).map(Letter::u))
}

/// The block `u_3^2 u_4 ... u_{g-1}` rotating mu_4, ..., mu_g around mu_3.
pub fn even_rotation_block(g: u32) -> Vec<Syllable> {
    let mut block = vec![Syllable::new(Letter::u(3), 2)];
    block.extend(units((4..g).map(Letter::u)));
    block
}

/// The chain block `c_1 ... c_{g-2}` of the hybrid model.
pub fn chain_block(g: u32) -> Vec<Syllable> {
    units((1..=g - 2).map(Letter::c))
}

/// Instantiates a relation, checking the schema's side conditions.
pub fn instantiate(model: SurfaceModel, key: &RelationKey) -> Result<RelationInstance, RelationError> {
    let g = model.genus().get();
    let bad = |reason: &str| RelationError::BadParams {
        key: key.to_string(),
        reason: reason.to_string(),
    };
    let wrong_model = || RelationError::WrongModel {
        schema: key.schema,
        model,
    };
    let ints = || -> Result<Vec<u32>, RelationError> {
        key.params
            .iter()
            .map(|p| match p {
                Param::Int(n) => Ok(*n),
                Param::Gen(_) => Err(bad("expected integer parameters")),
            })
            .collect()
    };
    let arity = |n: usize| -> Result<Vec<u32>, RelationError> {
        let v = ints()?;
        if v.len() != n {
            return Err(bad(&format!("expected {n} parameter(s)")));
        }
        Ok(v)
    };
    let in_range = |i: u32| i >= 1 && i < g;
    let standard_only = || {
        if model.is_hybrid() {
            Err(wrong_model())
        } else {
            Ok(())
        }
    };

    let (lhs, rhs): (Vec<Syllable>, Vec<Syllable>) = match key.schema {
        SchemaId::R1 => {
            standard_only()?;
            let v = arity(2)?;
            let (i, j) = (v[0], v[1]);
            if !(in_range(i) && in_range(j)) || i >= j || j - i < 2 {
                return Err(bad("need 1 <= i < j <= g-1 with j - i > 1"));
            }
            (units([Letter::u(i), Letter::u(j)]), units([Letter::u(j), Letter::u(i)]))
        }
        SchemaId::R2 => {
            standard_only()?;
            let i = arity(1)?[0];
            if i < 1 || i + 1 > g - 1 {
                return Err(bad("need 1 <= i <= g-2"));
            }
            let (a, b) = (Letter::u(i), Letter::u(i + 1));
            (units([a, b, a]), units([b, a, b]))
        }
        SchemaId::R3 => {
            standard_only()?;
            arity(0)?;
            (repeat(&units((1..g).map(Letter::u)), g), vec![])
        }
        SchemaId::R4a | SchemaId::R4b => {
            standard_only()?;
            let v = arity(2)?;
            let (i, j) = (v[0], v[1]);
            if !(in_range(i) && in_range(j)) || i.abs_diff(j) < 2 {
                return Err(bad("need 1 <= i, j <= g-1 with |i - j| > 1"));
            }
            let x = if key.schema == SchemaId::R4a {
                Letter::t(i)
            } else {
                Letter::y(i)
            };
            (units([x, Letter::u(j)]), units([Letter::u(j), x]))
        }
        SchemaId::R5 => {
            standard_only()?;
            arity(0)?;
            let mut block = vec![Syllable::new(Letter::u(1), 2)];
            block.extend(units((2..g).map(Letter::u)));
            (repeat(&block, g - 1), vec![])
        }
        SchemaId::R6ClosedOdd => {
            standard_only()?;
            arity(0)?;
            if g < 5 || g % 2 == 0 {
                return Err(bad("needs odd genus >= 5"));
            }
            (
                vec![Syllable::new(Letter::u(1), 2)],
                repeat(&odd_rotation_block(g), g - 2),
            )
        }
        SchemaId::R6ClosedEven => {
            standard_only()?;
            arity(0)?;
            if g < 6 || g % 2 == 1 {
                return Err(bad("needs even genus >= 6"));
            }
            (
                vec![Syllable::new(Letter::u(1), 2)],
                repeat(&even_rotation_block(g), g - 3),
            )
        }
        SchemaId::R7Chain => {
            if !model.is_hybrid() {
                return Err(wrong_model());
            }
            arity(0)?;
            (
                vec![Syllable::new(Letter::u(1), 2)],
                repeat(&chain_block(g), 2 * g - 2),
            )
        }
        SchemaId::SlideDef => {
            let i = arity(1)?[0];
            if !in_range(i) || (model.is_hybrid() && i != 1) {
                return Err(bad("index out of range"));
            }
            (units([Letter::y(i)]), units([Letter::t(i), Letter::u(i)]))
        }
        SchemaId::UsquaredYsquared => {
            let i = arity(1)?[0];
            if !in_range(i) || (model.is_hybrid() && i != 1) {
                return Err(bad("index out of range"));
            }
            (
                vec![Syllable::new(Letter::u(i), 2)],
                vec![Syllable::new(Letter::y(i), 2)],
            )
        }
        SchemaId::ChainCommute => {
            if !model.is_hybrid() {
                return Err(wrong_model());
            }
            let (x, k) = match key.params.as_slice() {
                [Param::Gen(x), Param::Int(k)] => (*x, *k),
                _ => return Err(bad("expected parameters `<t1|u1|y1> <k>`")),
            };
            if x.index != 1 || x.kind == LetterKind::Chain {
                return Err(bad("first parameter must be t1, u1 or y1"));
            }
            if k < 1 || k > g - 2 {
                return Err(bad("chain index out of range"));
            }
            (units([x, Letter::c(k)]), units([Letter::c(k), x]))
        }
        SchemaId::KleinG2 => {
            standard_only()?;
            if g != 2 {
                return Err(bad("only valid at genus 2"));
            }
            match arity(1)?[0] {
                1 => (vec![Syllable::new(Letter::t(1), 2)], vec![]),
                2 => (vec![Syllable::new(Letter::y(1), 2)], vec![]),
                3 => (repeat(&units([Letter::t(1), Letter::y(1)]), 2), vec![]),
                _ => return Err(bad("variant must be 1, 2 or 3")),
            }
        }
        SchemaId::TrivialBoundaryG3 => {
            standard_only()?;
            if g != 3 {
                return Err(bad("only valid at genus 3"));
            }
            match arity(1)?[0] {
                1 => (vec![Syllable::new(Letter::u(1), 2)], vec![]),
                2 => (repeat(&units([Letter::t(1), Letter::t(2)]), 6), vec![]),
                _ => return Err(bad("variant must be 1 or 2")),
            }
        }
    };
    Ok(RelationInstance {
        key: key.clone(),
        lhs: Word::from_syllables(model, lhs)?,
        rhs: Word::from_syllables(model, rhs)?,
    })
}

/// Every relation instance valid in `model`, in a fixed order.
pub fn relation_catalog(model: SurfaceModel) -> Vec<RelationInstance> {
    let g = model.genus().get();
    let mut keys = Vec::new();
    match model {
        SurfaceModel::Standard(_) => {
            for i in 1..g {
                for j in i + 2..g {
                    keys.push(RelationKey::ints(SchemaId::R1, &[i, j]));
                }
            }
            for i in 1..g.saturating_sub(1) {
                keys.push(RelationKey::ints(SchemaId::R2, &[i]));
            }
            keys.push(RelationKey::ints(SchemaId::R3, &[]));
            for schema in [SchemaId::R4a, SchemaId::R4b] {
                for i in 1..g {
                    for j in 1..g {
                        if i.abs_diff(j) > 1 {
                            keys.push(RelationKey::ints(schema, &[i, j]));
                        }
                    }
                }
            }
            keys.push(RelationKey::ints(SchemaId::R5, &[]));
            if g >= 5 && g % 2 == 1 {
                keys.push(RelationKey::ints(SchemaId::R6ClosedOdd, &[]));
            }
            if g >= 6 && g % 2 == 0 {
                keys.push(RelationKey::ints(SchemaId::R6ClosedEven, &[]));
            }
            for i in 1..g {
                keys.push(RelationKey::ints(SchemaId::SlideDef, &[i]));
            }
            for i in 1..g {
                keys.push(RelationKey::ints(SchemaId::UsquaredYsquared, &[i]));
            }
            if g == 2 {
                for n in 1..=3 {
                    keys.push(RelationKey::ints(SchemaId::KleinG2, &[n]));
                }
            }
            if g == 3 {
                for n in 1..=2 {
                    keys.push(RelationKey::ints(SchemaId::TrivialBoundaryG3, &[n]));
                }
            }
        }
        SurfaceModel::Hybrid(_) => {
            keys.push(RelationKey::ints(SchemaId::R7Chain, &[]));
            keys.push(RelationKey::ints(SchemaId::SlideDef, &[1]));
            keys.push(RelationKey::ints(SchemaId::UsquaredYsquared, &[1]));
            for x in [Letter::t(1), Letter::u(1), Letter::y(1)] {
                for k in 1..=g - 2 {
                    keys.push(RelationKey::new(
                        SchemaId::ChainCommute,
                        vec![Param::Gen(x), Param::Int(k)],
                    ));
                }
            }
        }
    }
    keys.iter()
        .map(|k| instantiate(model, k).expect("catalog keys satisfy their side conditions"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Replace an occurrence of the left-hand side by the right-hand side.
    Forward,
    Backward,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeOp {
    /// Insert `l^e l^-e` before position `pos`.
    Insert,
    /// Delete `l^e l^-e` starting at `pos`.
    Delete,
    /// `l^e l^b` at `pos` becomes `l^(e+b)`.
    Merge,
    /// `l^a` at `pos` becomes `l^e l^(a-e)`.
    Split,
}

impl FreeOp {
    fn as_str(self) -> &'static str {
        match self {
            FreeOp::Insert => "insert",
            FreeOp::Delete => "delete",
            FreeOp::Merge => "merge",
            FreeOp::Split => "split",
        }
    }

    fn inverse(self) -> Self {
        match self {
            FreeOp::Insert => FreeOp::Delete,
            FreeOp::Delete => FreeOp::Insert,
            FreeOp::Merge => FreeOp::Split,
            FreeOp::Split => FreeOp::Merge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RewriteStep {
    Relation {
        pos: usize,
        key: RelationKey,
        dir: Direction,
    },
    Free {
        op: FreeOp,
        pos: usize,
        letter: Letter,
        exp: i64,
    },
}

impl RewriteStep {
    pub fn relation(pos: usize, key: RelationKey, dir: Direction) -> Self {
        RewriteStep::Relation { pos, key, dir }
    }

    pub fn free(op: FreeOp, pos: usize, letter: Letter, exp: i64) -> Self {
        RewriteStep::Free { op, pos, letter, exp }
    }

    pub fn pos(&self) -> usize {
        match self {
            RewriteStep::Relation { pos, .. } | RewriteStep::Free { pos, .. } => *pos,
        }
    }

    /// The step undoing this one.
    pub fn inverse(&self) -> Self {
        match self {
            RewriteStep::Relation { pos, key, dir } => RewriteStep::Relation {
                pos: *pos,
                key: key.clone(),
                dir: dir.flipped(),
            },
            RewriteStep::Free { op, pos, letter, exp } => RewriteStep::Free {
                op: op.inverse(),
                pos: *pos,
                letter: *letter,
                exp: *exp,
            },
        }
    }

    pub fn shifted(&self, offset: usize) -> Self {
        let mut s = self.clone();
        match &mut s {
            RewriteStep::Relation { pos, .. } | RewriteStep::Free { pos, .. } => *pos += offset,
        }
        s
    }
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteStep::Relation { pos, key, dir } => {
                let d = match dir {
                    Direction::Forward => "fwd",
                    Direction::Backward => "bwd",
                };
                write!(f, "step {pos} {key} {d}")
            }
            RewriteStep::Free { op, pos, letter, exp } => {
                write!(f, "free {} {pos} {letter} {exp}", op.as_str())
            }
        }
    }
}

impl FromStr for RewriteStep {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<&str> = line.split(' ').collect();
        let pos_of = |t: &str| t.parse::<usize>().map_err(|_| format!("bad position `{t}`"));
        match tokens.as_slice() {
            ["step", pos, schema, rest @ ..] if !rest.is_empty() => {
                let (dir, params) = rest.split_last().unwrap();
                let dir = match *dir {
                    "fwd" => Direction::Forward,
                    "bwd" => Direction::Backward,
                    other => return Err(format!("bad direction `{other}`")),
                };
                let params = params
                    .iter()
                    .map(|p| p.parse::<Param>())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RewriteStep::Relation {
                    pos: pos_of(pos)?,
                    key: RelationKey::new(schema.parse()?, params),
                    dir,
                })
            }
            ["free", op, pos, letter, exp] => {
                let op = match *op {
                    "insert" => FreeOp::Insert,
                    "delete" => FreeOp::Delete,
                    "merge" => FreeOp::Merge,
                    "split" => FreeOp::Split,
                    other => return Err(format!("bad free operation `{other}`")),
                };
                let letter: Letter = letter.parse().map_err(|e: WordError| e.to_string())?;
                let exp: i64 = exp.parse().map_err(|_| format!("bad exponent `{exp}`"))?;
                Ok(RewriteStep::Free {
                    op,
                    pos: pos_of(pos)?,
                    letter,
                    exp,
                })
            }
            _ => Err(format!("unrecognised step `{line}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("step {step}: position {pos} out of range (sequence length {len})")]
    StepOutOfRange { step: usize, pos: usize, len: usize },
    #[error("step {step}: occurrence mismatch, expected `{expected}`, found `{actual}`")]
    Mismatch {
        step: usize,
        expected: String,
        actual: String,
    },
    #[error("step {step}: {reason}")]
    InvalidStep { step: usize, reason: String },
    #[error("start and end live in different models ({0} vs {1})")]
    ModelMismatch(SurfaceModel, SurfaceModel),
    #[error("certificate line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn render(syllables: &[Syllable]) -> String {
    if syllables.is_empty() {
        return "1".into();
    }
    syllables
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Applies one step to a syllable sequence. `step_no` is only used in errors.
pub fn apply_step(
    model: SurfaceModel,
    state: &mut Vec<Syllable>,
    step: &RewriteStep,
    step_no: usize,
) -> Result<(), CertificateError> {
    let len = state.len();
    let out_of_range = |pos: usize| CertificateError::StepOutOfRange { step: step_no, pos, len };
    let invalid = |reason: String| CertificateError::InvalidStep { step: step_no, reason };
    let expect = |pos: usize, expected: &[Syllable], state: &[Syllable]| {
        let end = pos + expected.len();
        if end > state.len() {
            return Err(out_of_range(end.saturating_sub(1).max(pos)));
        }
        if &state[pos..end] != expected {
            return Err(CertificateError::Mismatch {
                step: step_no,
                expected: render(expected),
                actual: render(&state[pos..end]),
            });
        }
        Ok(())
    };

    match step {
        RewriteStep::Relation { pos, key, dir } => {
            let pos = *pos;
            if pos > len {
                return Err(out_of_range(pos));
            }
            let inst = instantiate(model, key).map_err(|e| invalid(e.to_string()))?;
            let (from, to) = match dir {
                Direction::Forward => (&inst.lhs, &inst.rhs),
                Direction::Backward => (&inst.rhs, &inst.lhs),
            };
            expect(pos, from.syllables(), state)?;
            state.splice(pos..pos + from.syllables().len(), to.syllables().iter().copied());
        }
        RewriteStep::Free { op, pos, letter, exp } => {
            let (pos, letter, exp) = (*pos, *letter, *exp);
            model
                .check_letter(letter)
                .map_err(|e| invalid(e.to_string()))?;
            if exp == 0 {
                return Err(invalid("zero exponent".into()));
            }
            match op {
                FreeOp::Insert => {
                    if pos > len {
                        return Err(out_of_range(pos));
                    }
                    state.splice(
                        pos..pos,
                        [Syllable::new(letter, exp), Syllable::new(letter, -exp)],
                    );
                }
                FreeOp::Delete => {
                    expect(
                        pos,
                        &[Syllable::new(letter, exp), Syllable::new(letter, -exp)],
                        state,
                    )?;
                    state.drain(pos..pos + 2);
                }
                FreeOp::Merge => {
                    if pos + 1 >= len {
                        return Err(out_of_range(pos + 1));
                    }
                    expect(pos, &[Syllable::new(letter, exp)], state)?;
                    let next = state[pos + 1];
                    if next.letter != letter {
                        return Err(CertificateError::Mismatch {
                            step: step_no,
                            expected: format!("{letter}^*"),
                            actual: next.to_string(),
                        });
                    }
                    let sum = exp + next.exp;
                    if sum == 0 {
                        return Err(invalid("merge would cancel; use delete".into()));
                    }
                    state.splice(pos..pos + 2, [Syllable::new(letter, sum)]);
                }
                FreeOp::Split => {
                    if pos >= len {
                        return Err(out_of_range(pos));
                    }
                    let cur = state[pos];
                    if cur.letter != letter {
                        return Err(CertificateError::Mismatch {
                            step: step_no,
                            expected: format!("{letter}^*"),
                            actual: cur.to_string(),
                        });
                    }
                    let rest = cur.exp - exp;
                    if rest == 0 {
                        return Err(invalid("split would leave a zero exponent".into()));
                    }
                    state.splice(
                        pos..pos + 1,
                        [Syllable::new(letter, exp), Syllable::new(letter, rest)],
                    );
                }
            }
        }
    }
    Ok(())
}

/// Free steps (merges and deletions) that bring `syllables` to reduced form.
pub fn reduction_steps(syllables: &[Syllable]) -> Vec<RewriteStep> {
    let mut state = syllables.to_vec();
    let mut steps = Vec::new();
    let mut i = 0;
    while i + 1 < state.len() {
        let (a, b) = (state[i], state[i + 1]);
        if a.letter != b.letter {
            i += 1;
            continue;
        }
        if a.exp + b.exp == 0 {
            steps.push(RewriteStep::free(FreeOp::Delete, i, a.letter, a.exp));
            state.drain(i..i + 2);
            i = i.saturating_sub(1);
        } else {
            steps.push(RewriteStep::free(FreeOp::Merge, i, a.letter, a.exp));
            state.splice(i..i + 2, [Syllable::new(a.letter, a.exp + b.exp)]);
        }
    }
    steps
}

/// Steps that undo `steps`, in reverse order.
pub fn reverse_steps(steps: &[RewriteStep]) -> Vec<RewriteStep> {
    steps.iter().rev().map(RewriteStep::inverse).collect()
}

/// A replayable proof that `start = end` in the group presented by the schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub start: Word,
    pub end: Word,
    pub steps: Vec<RewriteStep>,
}

impl Certificate {
    pub fn model(&self) -> SurfaceModel {
        self.start.model()
    }

    /// Replays the steps and returns the final syllable sequence.
    pub fn replay(&self) -> Result<Vec<Syllable>, CertificateError> {
        if self.start.model() != self.end.model() {
            return Err(CertificateError::ModelMismatch(
                self.start.model(),
                self.end.model(),
            ));
        }
        let model = self.model();
        let mut state = self.start.syllables().to_vec();
        for (k, step) in self.steps.iter().enumerate() {
            apply_step(model, &mut state, step, k + 1)?;
        }
        Ok(state)
    }

    /// The certificate read backwards: proves `end = start`.
    pub fn reversed(&self) -> Certificate {
        Certificate {
            start: self.end.clone(),
            end: self.start.clone(),
            steps: reverse_steps(&self.steps),
        }
    }

    /// Distinct schemas used by relation steps, in first-use order.
    pub fn schemas_used(&self) -> Vec<SchemaId> {
        let mut out = Vec::new();
        for step in &self.steps {
            if let RewriteStep::Relation { key, .. } = step {
                if !out.contains(&key.schema) {
                    out.push(key.schema);
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self, CertificateError> {
        text.parse()
    }
}

/// True iff replaying `cert` turns its start into exactly its end.
pub fn check_certificate(cert: &Certificate) -> Result<bool, CertificateError> {
    let state = cert.replay()?;
    Ok(state.as_slice() == cert.end.syllables())
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let model = self.model();
        writeln!(f, "model {}", model.keyword())?;
        writeln!(f, "genus {}", model.genus())?;
        writeln!(f, "start {}", self.start)?;
        writeln!(f, "end {}", self.end)?;
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        Ok(())
    }
}

impl FromStr for Certificate {
    type Err = CertificateError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate();
        let mut header = |name: &str| -> Result<(usize, String), CertificateError> {
            let (n, line) = lines.next().ok_or(CertificateError::Parse {
                line: 0,
                msg: format!("missing `{name}` line"),
            })?;
            let rest = line
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or(CertificateError::Parse {
                    line: n + 1,
                    msg: format!("expected `{name} ...`"),
                })?;
            Ok((n + 1, rest.to_string()))
        };
        let (_, model_kw) = header("model")?;
        let (gline, genus) = header("genus")?;
        let genus: u32 = genus.parse().map_err(|_| CertificateError::Parse {
            line: gline,
            msg: "bad genus".into(),
        })?;
        let model = SurfaceModel::from_keyword(&model_kw, genus).map_err(|e| {
            CertificateError::Parse {
                line: 1,
                msg: e.to_string(),
            }
        })?;
        let (sline, start) = header("start")?;
        let (eline, end) = header("end")?;
        let start = Word::parse(&start, model).map_err(|e| CertificateError::Parse {
            line: sline,
            msg: e.to_string(),
        })?;
        let end = Word::parse(&end, model).map_err(|e| CertificateError::Parse {
            line: eline,
            msg: e.to_string(),
        })?;
        let mut steps = Vec::new();
        for (n, line) in lines {
            steps.push(line.parse().map_err(|msg| CertificateError::Parse { line: n + 1, msg })?);
        }
        Ok(Certificate { start, end, steps })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommuteError {
    #[error("position {0} has no right neighbour")]
    NotAdjacent(usize),
    #[error("`{0}` and `{1}` are not single letters; split them first")]
    NotUnit(Syllable, Syllable),
    #[error("no commutation relation for {0} and {1} in {2}")]
    NotCommuting(Letter, Letter, SurfaceModel),
}

/// The relation `a b = b a` for two commuting positive letters, together
/// with whether its left-hand side reads `a b`.
fn commutation_key(model: SurfaceModel, a: Letter, b: Letter) -> Option<(RelationKey, bool)> {
    use LetterKind::*;
    let key = |x: Letter, y: Letter| -> Option<RelationKey> {
        match (x.kind, y.kind) {
            (Transposition, Transposition) if x.index < y.index => {
                Some(RelationKey::ints(SchemaId::R1, &[x.index, y.index]))
            }
            (Twist, Transposition) => Some(RelationKey::ints(SchemaId::R4a, &[x.index, y.index])),
            (Slide, Transposition) => Some(RelationKey::ints(SchemaId::R4b, &[x.index, y.index])),
            (Twist | Transposition | Slide, Chain) => Some(RelationKey::new(
                SchemaId::ChainCommute,
                vec![Param::Gen(x), Param::Int(y.index)],
            )),
            _ => None,
        }
    };
    for (k, lhs_is_ab) in [(key(a, b), true), (key(b, a), false)] {
        if let Some(k) = k {
            if instantiate(model, &k).is_ok() {
                return Some((k, lhs_is_ab));
            }
        }
    }
    None
}

/// Steps swapping the adjacent unit syllables at `pos` and `pos + 1`.
///
/// Letters with negative exponents are handled by conjugating with an
/// inserted cancelling pair, so the output uses only the positive-letter
/// relations R1, R4a, R4b and ChainCommute plus free steps.
pub fn commute_disjoint(
    model: SurfaceModel,
    state: &[Syllable],
    pos: usize,
) -> Result<Vec<RewriteStep>, CommuteError> {
    if pos + 1 >= state.len() {
        return Err(CommuteError::NotAdjacent(pos));
    }
    let (x, y) = (state[pos], state[pos + 1]);
    if x.exp.abs() != 1 || y.exp.abs() != 1 {
        return Err(CommuteError::NotUnit(x, y));
    }
    if commutation_key(model, x.letter, y.letter).is_none() {
        return Err(CommuteError::NotCommuting(x.letter, y.letter, model));
    }
    let steps = swap_units(model, x, y);
    Ok(steps.into_iter().map(|s| s.shifted(pos)).collect())
}

/// Step rewriting the positive pair `first second` into `second first` at `pos`.
fn positive_swap(model: SurfaceModel, first: Letter, second: Letter, pos: usize) -> RewriteStep {
    let (key, lhs_is_fs) =
        commutation_key(model, first, second).expect("caller checked the pair commutes");
    let dir = if lhs_is_fs {
        Direction::Forward
    } else {
        Direction::Backward
    };
    RewriteStep::relation(pos, key, dir)
}

fn swap_units(model: SurfaceModel, x: Syllable, y: Syllable) -> Vec<RewriteStep> {
    let (a, b) = (x.letter, y.letter);
    match (x.exp > 0, y.exp > 0) {
        (true, true) => vec![positive_swap(model, a, b, 0)],
        // a^-1 b -> a^-1 b a a^-1 -> a^-1 a b a^-1 -> b a^-1
        (false, true) => vec![
            RewriteStep::free(FreeOp::Insert, 2, a, 1),
            positive_swap(model, b, a, 1),
            RewriteStep::free(FreeOp::Delete, 0, a, -1),
        ],
        // a b^-1 -> b^-1 b a b^-1 -> b^-1 a b b^-1 -> b^-1 a
        (true, false) => vec![
            RewriteStep::free(FreeOp::Insert, 0, b, -1),
            positive_swap(model, b, a, 1),
            RewriteStep::free(FreeOp::Delete, 2, b, 1),
        ],
        // a^-1 b^-1 -> b^-1 b a^-1 b^-1 -> b^-1 a^-1 b b^-1 -> b^-1 a^-1
        (false, false) => {
            let mut steps = vec![RewriteStep::free(FreeOp::Insert, 0, b, -1)];
            steps.extend(
                swap_units(model, Syllable::new(b, 1), Syllable::new(a, -1))
                    .into_iter()
                    .map(|s| s.shifted(1)),
            );
            steps.push(RewriteStep::free(FreeOp::Delete, 2, b, 1));
            steps
        }
    }
}

/// Incremental certificate builder. Every step is applied as it is added,
/// so a finished derivation always replays.
#[derive(Debug, Clone)]
pub struct Derivation {
    model: SurfaceModel,
    initial: Vec<Syllable>,
    state: Vec<Syllable>,
    steps: Vec<RewriteStep>,
}

impl Derivation {
    /// Starts from an arbitrary (possibly unreduced) syllable sequence.
    pub fn new(model: SurfaceModel, initial: Vec<Syllable>) -> Result<Self, WordError> {
        for s in &initial {
            model.check_letter(s.letter)?;
            if s.exp == 0 {
                return Err(WordError::Syntax {
                    pos: 0,
                    msg: "zero exponent".into(),
                });
            }
        }
        Ok(Derivation {
            model,
            state: initial.clone(),
            initial,
            steps: Vec::new(),
        })
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    pub fn state(&self) -> &[Syllable] {
        &self.state
    }

    pub fn steps(&self) -> &[RewriteStep] {
        &self.steps
    }

    pub fn apply(&mut self, step: RewriteStep) -> Result<(), CertificateError> {
        apply_step(self.model, &mut self.state, &step, self.steps.len() + 1)?;
        self.steps.push(step);
        Ok(())
    }

    pub fn apply_all<I: IntoIterator<Item = RewriteStep>>(
        &mut self,
        steps: I,
    ) -> Result<(), CertificateError> {
        for s in steps {
            self.apply(s)?;
        }
        Ok(())
    }

    /// Replays the steps of another derivation on the window starting at `offset`.
    pub fn embed(&mut self, inner: &Derivation, offset: usize) -> Result<(), CertificateError> {
        let end = offset + inner.initial.len();
        if end > self.state.len() || self.state[offset..end] != inner.initial[..] {
            return Err(CertificateError::Mismatch {
                step: self.steps.len() + 1,
                expected: render(&inner.initial),
                actual: render(&self.state[offset.min(self.state.len())..end.min(self.state.len())]),
            });
        }
        self.apply_all(inner.steps.iter().map(|s| s.shifted(offset)))
    }

    /// Fully free-reduces the current state.
    pub fn reduce(&mut self) -> Result<(), CertificateError> {
        let steps = reduction_steps(&self.state);
        self.apply_all(steps)
    }

    /// Swaps the unit syllables at `pos` and `pos + 1`.
    pub fn swap(&mut self, pos: usize) -> Result<(), CertificateError> {
        let steps = commute_disjoint(self.model, &self.state, pos).map_err(|e| {
            CertificateError::InvalidStep {
                step: self.steps.len() + 1,
                reason: e.to_string(),
            }
        })?;
        self.apply_all(steps)
    }

    /// Splits a unit letter off the front of the syllable at `pos`, if needed.
    pub fn split_unit(&mut self, pos: usize) -> Result<(), CertificateError> {
        let s = self.state.get(pos).copied().ok_or(CertificateError::StepOutOfRange {
            step: self.steps.len() + 1,
            pos,
            len: self.state.len(),
        })?;
        if s.exp.abs() > 1 {
            self.apply(RewriteStep::free(FreeOp::Split, pos, s.letter, s.exp.signum()))?;
        }
        Ok(())
    }

    /// Certificate from the reduced initial word to the current state, which
    /// must be reduced. The prefix expanding the reduced start into the
    /// initial sequence is generated here.
    pub fn finish(self) -> Result<Certificate, CertificateError> {
        let reduced = reduce_syllables(self.state.iter().copied()).map_err(|e| {
            CertificateError::InvalidStep {
                step: self.steps.len(),
                reason: e.to_string(),
            }
        })?;
        if reduced != self.state {
            return Err(CertificateError::InvalidStep {
                step: self.steps.len(),
                reason: format!("final sequence `{}` is not reduced", render(&self.state)),
            });
        }
        let invalid = |e: WordError| CertificateError::InvalidStep {
            step: 0,
            reason: e.to_string(),
        };
        let start = Word::from_syllables(self.model, self.initial.iter().copied()).map_err(invalid)?;
        let end = Word::from_syllables(self.model, self.state).map_err(invalid)?;
        let mut steps = reverse_steps(&reduction_steps(&self.initial));
        steps.extend(self.steps);
        Ok(Certificate { start, end, steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::parse_word;

    fn std(g: u32) -> SurfaceModel {
        SurfaceModel::standard(g).unwrap()
    }

    fn count(cat: &[RelationInstance], id: SchemaId) -> usize {
        cat.iter().filter(|r| r.key.schema == id).count()
    }

    #[test]
    fn catalog_examples() {
        let c4 = relation_catalog(std(4));
        let r2: Vec<_> = c4.iter().filter(|r| r.key.schema == SchemaId::R2).collect();
        assert_eq!(r2.len(), 2);
        assert_eq!(r2[0].lhs.to_string(), "u1 u2 u1");
        assert_eq!(r2[0].rhs.to_string(), "u2 u1 u2");
        assert_eq!(r2[1].lhs.to_string(), "u2 u3 u2");
        assert_eq!(count(&relation_catalog(std(3)), SchemaId::R1), 0);
        assert_eq!(count(&relation_catalog(std(5)), SchemaId::R1), 3);
    }

    #[test]
    fn catalog_is_deterministic_and_model_specific() {
        assert_eq!(relation_catalog(std(7)), relation_catalog(std(7)));
        let h = SurfaceModel::hybrid(6).unwrap();
        let cat = relation_catalog(h);
        assert_eq!(count(&cat, SchemaId::ChainCommute), 12);
        assert_eq!(count(&cat, SchemaId::R7Chain), 1);
        assert!(cat.iter().all(|r| r.model() == h));
        assert_eq!(count(&relation_catalog(std(5)), SchemaId::R6ClosedOdd), 1);
        assert_eq!(count(&relation_catalog(std(6)), SchemaId::R6ClosedEven), 1);
        assert_eq!(count(&relation_catalog(std(4)), SchemaId::R6ClosedEven), 0);
    }

    #[test]
    fn side_conditions_are_enforced() {
        let m = std(5);
        assert!(instantiate(m, &RelationKey::ints(SchemaId::R1, &[1, 2])).is_err());
        assert!(instantiate(m, &RelationKey::ints(SchemaId::R1, &[3, 1])).is_err());
        assert!(instantiate(m, &RelationKey::ints(SchemaId::R6ClosedEven, &[])).is_err());
        assert!(instantiate(std(6), &RelationKey::ints(SchemaId::R6ClosedOdd, &[])).is_err());
        assert!(instantiate(m, &RelationKey::ints(SchemaId::R7Chain, &[])).is_err());
        assert!(instantiate(m, &RelationKey::ints(SchemaId::KleinG2, &[1])).is_err());
        let h = SurfaceModel::hybrid(4).unwrap();
        assert!(instantiate(h, &RelationKey::ints(SchemaId::SlideDef, &[2])).is_err());
        assert!(instantiate(
            h,
            &RelationKey::new(SchemaId::ChainCommute, vec![Param::Gen(Letter::u(1)), Param::Int(3)])
        )
        .is_err());
    }

    #[test]
    fn r6_odd_certificate() {
        let m = std(5);
        let start = parse_word("u1^2", m).unwrap();
        let end = parse_word("(u3 u4)^3", m).unwrap();
        let cert = Certificate {
            start,
            end,
            steps: vec![RewriteStep::relation(
                0,
                RelationKey::ints(SchemaId::R6ClosedOdd, &[]),
                Direction::Forward,
            )],
        };
        assert_eq!(check_certificate(&cert), Ok(true));
        assert_eq!(check_certificate(&cert.reversed()), Ok(true));
    }

    #[test]
    fn trivial_certificates() {
        let m = std(5);
        let w = parse_word("u1 t2 y3^-2", m).unwrap();
        let refl = Certificate {
            start: w.clone(),
            end: w,
            steps: vec![],
        };
        assert_eq!(check_certificate(&refl), Ok(true));
        let distinct = Certificate {
            start: parse_word("u1", m).unwrap(),
            end: parse_word("u2", m).unwrap(),
            steps: vec![],
        };
        assert_eq!(check_certificate(&distinct), Ok(false));
    }

    #[test]
    fn mismatch_and_range_errors() {
        let m = std(5);
        let w = parse_word("u1 u2", m).unwrap();
        let cert = Certificate {
            start: w.clone(),
            end: w.clone(),
            steps: vec![RewriteStep::relation(
                0,
                RelationKey::ints(SchemaId::R1, &[1, 3]),
                Direction::Forward,
            )],
        };
        match check_certificate(&cert) {
            Err(CertificateError::Mismatch { step, expected, actual }) => {
                assert_eq!(step, 1);
                assert_eq!(expected, "u1 u3");
                assert_eq!(actual, "u1 u2");
            }
            other => panic!("unexpected {other:?}"),
        }
        let cert = Certificate {
            start: w.clone(),
            end: w,
            steps: vec![RewriteStep::free(FreeOp::Delete, 5, Letter::u(1), 1)],
        };
        assert!(matches!(
            check_certificate(&cert),
            Err(CertificateError::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn commute_examples() {
        let m = std(5);
        let w = parse_word("u1 u3", m).unwrap();
        let steps = commute_disjoint(m, w.syllables(), 0).unwrap();
        assert_eq!(
            steps,
            vec![RewriteStep::relation(0, RelationKey::ints(SchemaId::R1, &[1, 3]), Direction::Forward)]
        );

        let m6 = std(6);
        let w = parse_word("y1 u4", m6).unwrap();
        let steps = commute_disjoint(m6, w.syllables(), 0).unwrap();
        assert_eq!(steps.len(), 1);
        assert!(matches!(&steps[0], RewriteStep::Relation { key, .. } if key.schema == SchemaId::R4b));

        let h = SurfaceModel::hybrid(6).unwrap();
        let w = parse_word("u1 c2", h).unwrap();
        let steps = commute_disjoint(h, w.syllables(), 0).unwrap();
        assert_eq!(steps.len(), 1);
        assert!(
            matches!(&steps[0], RewriteStep::Relation { key, .. } if key.schema == SchemaId::ChainCommute)
        );

        let w = parse_word("u1 u2", m).unwrap();
        assert!(matches!(
            commute_disjoint(m, w.syllables(), 0),
            Err(CommuteError::NotCommuting(..))
        ));
        assert!(matches!(
            commute_disjoint(m, w.syllables(), 1),
            Err(CommuteError::NotAdjacent(1))
        ));
    }

    #[test]
    fn commute_handles_every_sign_pattern() {
        let m = std(6);
        for text in ["u1 u4", "u1^-1 u4", "u1 u4^-1", "u1^-1 u4^-1", "u5^-1 t2", "u2^-1 y5^-1"] {
            let w = parse_word(text, m).unwrap();
            let mut d = Derivation::new(m, w.syllables().to_vec()).unwrap();
            d.swap(0).unwrap();
            let mut expected = w.syllables().to_vec();
            expected.swap(0, 1);
            assert_eq!(d.state(), expected.as_slice(), "{text}");
        }
    }

    #[test]
    fn derivation_with_unreduced_start() {
        let m = std(5);
        let initial = vec![
            Syllable::new(Letter::u(2), 1),
            Syllable::new(Letter::u(2), -1),
            Syllable::new(Letter::u(1), 1),
            Syllable::new(Letter::u(3), 1),
        ];
        let mut d = Derivation::new(m, initial).unwrap();
        d.swap(2).unwrap();
        d.reduce().unwrap();
        let cert = d.finish().unwrap();
        assert_eq!(cert.start.to_string(), "u1 u3");
        assert_eq!(cert.end.to_string(), "u3 u1");
        assert_eq!(check_certificate(&cert), Ok(true));
    }

    #[test]
    fn file_format_round_trip() {
        let m = SurfaceModel::hybrid(4).unwrap();
        let cert = Certificate {
            start: parse_word("u1 c2", m).unwrap(),
            end: parse_word("c2 u1", m).unwrap(),
            steps: vec![
                RewriteStep::relation(
                    0,
                    RelationKey::new(SchemaId::ChainCommute, vec![Param::Gen(Letter::u(1)), Param::Int(2)]),
                    Direction::Forward,
                ),
                RewriteStep::free(FreeOp::Insert, 2, Letter::c(1), -3),
                RewriteStep::free(FreeOp::Delete, 2, Letter::c(1), -3),
            ],
        };
        let text = cert.to_text();
        assert_eq!(
            text,
            "model hybrid\ngenus 4\nstart u1 c2\nend c2 u1\nstep 0 ChainCommute u1 2 fwd\nfree insert 2 c1 -3\nfree delete 2 c1 -3\n"
        );
        let back = Certificate::from_text(&text).unwrap();
        assert_eq!(back, cert);
        assert_eq!(back.to_text(), text);
        assert!(Certificate::from_text("model standard\ngenus 5\nstart u1\n").is_err());
        assert!(Certificate::from_text("model standard\ngenus 5\nstart u1\nend u1\nstep x R1 fwd\n").is_err());
    }
}
