//! Generator alphabets, words with signed exponents, and the word grammar.
//!
//! A [`Word`] is always stored free-reduced as a run-length encoded list of
//! [`Syllable`]s. The identity is the empty word and prints as `1`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("genus must be at least 2, got {0}")]
    InvalidGenus(u32),
    #[error("hybrid model needs an even genus >= 4, got {0}")]
    InvalidHybrid(u32),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("letter {letter} is out of range for {model}")]
    IndexOutOfRange { letter: Letter, model: SurfaceModel },
    #[error("letter {letter} is not admissible in {model}")]
    NotAdmissible { letter: Letter, model: SurfaceModel },
    #[error("model mismatch: {0} vs {1}")]
    ModelMismatch(SurfaceModel, SurfaceModel),
    #[error("exponent overflow")]
    ExponentOverflow,
}

/// Genus of the closed nonorientable surface, always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genus(u32);

impl Genus {
    pub fn new(g: u32) -> Result<Self, WordError> {
        if g < 2 {
            return Err(WordError::InvalidGenus(g));
        }
        Ok(Genus(g))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn is_odd(self) -> bool {
        self.0 % 2 == 1
    }
}

impl fmt::Display for Genus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which curve configuration the letters of a word live on.
///
/// `Standard` is the usual chain of crosscaps with curves alpha_1..alpha_{g-1}.
/// `Hybrid` keeps only the Klein bottle with a hole around mu_1, mu_2 and a
/// chain c_1..c_{g-2} of two-sided curves in its orientable complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceModel {
    Standard(Genus),
    Hybrid(Genus),
}

impl SurfaceModel {
    pub fn standard(g: u32) -> Result<Self, WordError> {
        Ok(SurfaceModel::Standard(Genus::new(g)?))
    }

    pub fn hybrid(g: u32) -> Result<Self, WordError> {
        let genus = Genus::new(g)?;
        if g < 4 || g % 2 != 0 {
            return Err(WordError::InvalidHybrid(g));
        }
        Ok(SurfaceModel::Hybrid(genus))
    }

    pub fn genus(self) -> Genus {
        match self {
            SurfaceModel::Standard(g) | SurfaceModel::Hybrid(g) => g,
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, SurfaceModel::Hybrid(_))
    }

    /// Short keyword used in certificate files and reports.
    pub fn keyword(self) -> &'static str {
        match self {
            SurfaceModel::Standard(_) => "standard",
            SurfaceModel::Hybrid(_) => "hybrid",
        }
    }

    pub fn from_keyword(keyword: &str, g: u32) -> Result<Self, WordError> {
        match keyword {
            "standard" => SurfaceModel::standard(g),
            "hybrid" => SurfaceModel::hybrid(g),
            other => Err(WordError::Syntax {
                pos: 0,
                msg: format!("unknown model `{other}`"),
            }),
        }
    }

    pub fn check_letter(self, letter: Letter) -> Result<(), WordError> {
        let g = self.genus().get();
        let i = letter.index;
        match self {
            SurfaceModel::Standard(_) => {
                if letter.kind == LetterKind::Chain {
                    return Err(WordError::NotAdmissible { letter, model: self });
                }
                if i == 0 || i > g - 1 {
                    return Err(WordError::IndexOutOfRange { letter, model: self });
                }
            }
            SurfaceModel::Hybrid(_) => match letter.kind {
                LetterKind::Chain => {
                    if i == 0 || i > g - 2 {
                        return Err(WordError::IndexOutOfRange { letter, model: self });
                    }
                }
                _ => {
                    if i != 1 {
                        return Err(WordError::NotAdmissible { letter, model: self });
                    }
                }
            },
        }
        Ok(())
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceModel::Standard(g) => write!(f, "Standard({g})"),
            SurfaceModel::Hybrid(g) => write!(f, "Hybrid({g})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LetterKind {
    /// `t_i`: Dehn twist about alpha_i.
    Twist,
    /// `u_i`: crosscap transposition of mu_i and mu_{i+1}.
    Transposition,
    /// `y_i`: crosscap slide of mu_{i+1} along alpha_i.
    Slide,
    /// `c_i`: Dehn twist about the i-th chain curve (hybrid model only).
    Chain,
}

impl LetterKind {
    pub fn symbol(self) -> char {
        match self {
            LetterKind::Twist => 't',
            LetterKind::Transposition => 'u',
            LetterKind::Slide => 'y',
            LetterKind::Chain => 'c',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            't' => Some(LetterKind::Twist),
            'u' => Some(LetterKind::Transposition),
            'y' => Some(LetterKind::Slide),
            'c' => Some(LetterKind::Chain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub kind: LetterKind,
    pub index: u32,
}

impl Letter {
    pub const fn new(kind: LetterKind, index: u32) -> Self {
        Letter { kind, index }
    }

    pub const fn t(index: u32) -> Self {
        Letter::new(LetterKind::Twist, index)
    }

    pub const fn u(index: u32) -> Self {
        Letter::new(LetterKind::Transposition, index)
    }

    pub const fn y(index: u32) -> Self {
        Letter::new(LetterKind::Slide, index)
    }

    pub const fn c(index: u32) -> Self {
        Letter::new(LetterKind::Chain, index)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.symbol(), self.index)
    }
}

impl FromStr for Letter {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let kind = chars
            .next()
            .and_then(LetterKind::from_symbol)
            .ok_or_else(|| WordError::Syntax {
                pos: 0,
                msg: format!("expected a generator, found `{s}`"),
            })?;
        let digits = chars.as_str();
        let index = parse_posint(digits).ok_or_else(|| WordError::Syntax {
            pos: 1,
            msg: format!("bad generator index in `{s}`"),
        })?;
        Ok(Letter::new(kind, index))
    }
}

fn parse_posint(s: &str) -> Option<u32> {
    if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// A letter raised to a nonzero exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub letter: Letter,
    pub exp: i64,
}

impl Syllable {
    pub const fn new(letter: Letter, exp: i64) -> Self {
        Syllable { letter, exp }
    }

    pub fn inverse(self) -> Self {
        Syllable::new(self.letter, -self.exp)
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 1 {
            write!(f, "{}", self.letter)
        } else {
            write!(f, "{}^{}", self.letter, self.exp)
        }
    }
}

/// Free reduction of an arbitrary syllable sequence: merges equal neighbours
/// and drops zero exponents.
pub fn reduce_syllables<I: IntoIterator<Item = Syllable>>(
    syllables: I,
) -> Result<Vec<Syllable>, WordError> {
    let mut out: Vec<Syllable> = Vec::new();
    for s in syllables {
        if s.exp == 0 {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.letter == s.letter => {
                last.exp = last
                    .exp
                    .checked_add(s.exp)
                    .ok_or(WordError::ExponentOverflow)?;
                if last.exp == 0 {
                    out.pop();
                }
            }
            _ => out.push(s),
        }
    }
    Ok(out)
}

/// Free-reduced word over the alphabet of a [`SurfaceModel`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    model: SurfaceModel,
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity(model: SurfaceModel) -> Self {
        Word {
            model,
            syllables: Vec::new(),
        }
    }

    /// Builds a word from syllables, checking admissibility and reducing.
    pub fn from_syllables<I: IntoIterator<Item = Syllable>>(
        model: SurfaceModel,
        syllables: I,
    ) -> Result<Self, WordError> {
        let syllables: Vec<Syllable> = syllables.into_iter().collect();
        for s in &syllables {
            model.check_letter(s.letter)?;
        }
        Ok(Word {
            model,
            syllables: reduce_syllables(syllables)?,
        })
    }

    pub fn letter(model: SurfaceModel, letter: Letter) -> Result<Self, WordError> {
        Word::from_syllables(model, [Syllable::new(letter, 1)])
    }

    /// Product of the given letters, each to the first power.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(
        model: SurfaceModel,
        letters: I,
    ) -> Result<Self, WordError> {
        Word::from_syllables(model, letters.into_iter().map(|l| Syllable::new(l, 1)))
    }

    pub fn parse(text: &str, model: SurfaceModel) -> Result<Self, WordError> {
        parse_word(text, model)
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters counted with multiplicity.
    pub fn letter_count(&self) -> u64 {
        self.syllables.iter().map(|s| s.exp.unsigned_abs()).sum()
    }

    pub fn contains_kind(&self, kind: LetterKind) -> bool {
        self.syllables.iter().any(|s| s.letter.kind == kind)
    }

    /// Unit letters `(letter, +-1)` in order.
    pub fn expanded(&self) -> Vec<(Letter, i64)> {
        self.syllables
            .iter()
            .flat_map(|s| std::iter::repeat_n((s.letter, s.exp.signum()), s.exp.unsigned_abs() as usize))
            .collect()
    }

    pub fn compose(&self, other: &Word) -> Result<Word, WordError> {
        if self.model != other.model {
            return Err(WordError::ModelMismatch(self.model, other.model));
        }
        Ok(Word {
            model: self.model,
            syllables: reduce_syllables(
                self.syllables.iter().chain(other.syllables.iter()).copied(),
            )?,
        })
    }

    pub fn invert(&self) -> Word {
        Word {
            model: self.model,
            syllables: self.syllables.iter().rev().map(|s| s.inverse()).collect(),
        }
    }

    pub fn power(&self, n: i64) -> Result<Word, WordError> {
        let base = if n < 0 { self.invert() } else { self.clone() };
        let mut acc = Word::identity(self.model);
        let mut sq = base;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.compose(&sq)?;
            }
            k >>= 1;
            if k > 0 {
                sq = sq.compose(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Replaces every slide `y_i^e` by `(t_i u_i)^e`.
    pub fn normalize_slides(&self) -> Word {
        let mut out = Vec::with_capacity(self.syllables.len());
        for s in &self.syllables {
            if s.letter.kind != LetterKind::Slide {
                out.push(*s);
                continue;
            }
            let i = s.letter.index;
            let (first, second) = if s.exp > 0 {
                (Syllable::new(Letter::t(i), 1), Syllable::new(Letter::u(i), 1))
            } else {
                (Syllable::new(Letter::u(i), -1), Syllable::new(Letter::t(i), -1))
            };
            for _ in 0..s.exp.unsigned_abs() {
                out.push(first);
                out.push(second);
            }
        }
        Word {
            model: self.model,
            syllables: reduce_syllables(out).expect("slide expansion keeps exponents bounded"),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (k, s) in self.syllables.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Free reduction of a word; words are kept reduced, so this is a copy.
pub fn free_reduce(w: &Word) -> Word {
    w.clone()
}

/// Parses a word expression such as `((u3 u4)^-2 u1)^5` in the given model.
///
/// `1` on its own denotes the identity.
pub fn parse_word(text: &str, model: SurfaceModel) -> Result<Word, WordError> {
    if text.trim() == "1" {
        return Ok(Word::identity(model));
    }
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        model,
    };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error("empty word (write `1` for the identity)"));
    }
    let syllables = parser.word()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.error("unexpected character"));
    }
    Ok(Word {
        model,
        syllables: reduce_syllables(syllables)?,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    model: SurfaceModel,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> WordError {
        WordError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        self.pos > start
    }

    fn word(&mut self) -> Result<Vec<Syllable>, WordError> {
        let mut out = Vec::new();
        let mut prev_bare_gen = false;
        loop {
            let had_ws = self.skip_ws();
            match self.peek() {
                None | Some(b')') => break,
                Some(b) => {
                    if prev_bare_gen && !had_ws && b.is_ascii_alphabetic() {
                        return Err(self.error("adjacent generators need whitespace"));
                    }
                }
            }
            let (term, bare) = self.term()?;
            out.extend(term);
            prev_bare_gen = bare;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Vec<Syllable>, bool), WordError> {
        let (atom, is_gen) = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.int()?;
            let word = Word {
                model: self.model,
                syllables: reduce_syllables(atom)?,
            };
            return Ok((word.power(n)?.syllables, false));
        }
        Ok((atom, is_gen))
    }

    fn atom(&mut self) -> Result<(Vec<Syllable>, bool), WordError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.word()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok((inner, false))
            }
            Some(b) if LetterKind::from_symbol(b as char).is_some() => {
                let kind = LetterKind::from_symbol(b as char).unwrap();
                let start = self.pos;
                self.pos += 1;
                let index = self.posint()?;
                let letter = Letter::new(kind, index);
                self.model.check_letter(letter).map_err(|e| match e {
                    WordError::IndexOutOfRange { .. } | WordError::NotAdmissible { .. } => e,
                    _ => WordError::Syntax {
                        pos: start,
                        msg: e.to_string(),
                    },
                })?;
                Ok((vec![Syllable::new(letter, 1)], true))
            }
            _ => Err(self.error("expected a generator or `(`")),
        }
    }

    fn posint(&mut self) -> Result<u32, WordError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        parse_posint(digits).ok_or(WordError::Syntax {
            pos: start,
            msg: "expected a positive integer".into(),
        })
    }

    fn int(&mut self) -> Result<i64, WordError> {
        let negative = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let n = i64::from(self.posint()?);
        Ok(if negative { -n } else { n })
    }
}
