//! Exact representations of words: the sign character, the permutation of
//! crosscaps, and the action on H_1(N_g; R).
//!
//! Homology is written in the basis mu_1, ..., mu_{g-1} of crosscap classes,
//! where mu_g = -(mu_1 + ... + mu_{g-1}). Generator matrices are first built
//! on the lattice spanned by all g crosscap classes and then pushed down to
//! this basis. Matrices act on column vectors and a word maps to the product
//! of its letters' matrices in reading order.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::word::{Genus, Letter, LetterKind, SurfaceModel, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReprError {
    #[error("{0} words have no {1} representation")]
    UnsupportedModel(SurfaceModel, &'static str),
    #[error("integer overflow while multiplying homology matrices")]
    Overflow,
    #[error("expected a word in Standard(3), got {0}")]
    NotGenusThree(SurfaceModel),
    #[error("generator table failed validation: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn pow(self, n: u64) -> Sign {
        if self == Sign::Minus && n % 2 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Determinant of the homology action: -1 for every transposition or slide
/// letter, +1 for twists.
pub fn sign_of(w: &Word) -> Sign {
    let flips: u64 = w
        .syllables()
        .iter()
        .filter(|s| matches!(s.letter.kind, LetterKind::Transposition | LetterKind::Slide))
        .map(|s| s.exp.unsigned_abs())
        .sum();
    Sign::Minus.pow(flips)
}

/// Permutation of `{1, ..., n}` stored 0-based; `images[i]` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Transposition of the 1-based points `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut p = Permutation::identity(n);
        p.images.swap(i - 1, j - 1);
        p
    }

    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// Image of the 1-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1] + 1
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    pub fn pow(&self, n: i64) -> Permutation {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Permutation::identity(self.degree());
        for _ in 0..n.unsigned_abs() {
            acc = acc.compose(&base);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycles of length > 1, 1-based, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start + 1];
            seen[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                seen[cur] = true;
                cycle.push(cur + 1);
                cur = self.images[cur];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// 1-based points moved by the permutation.
    pub fn support(&self) -> Vec<usize> {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, j)| i != *j)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn order(&self) -> u64 {
        self.cycles()
            .iter()
            .map(|c| c.len() as u64)
            .fold(1, |acc, l| acc / gcd(acc, l) * l)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(ToString::to_string).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

/// Action of a word on the crosscaps mu_1, ..., mu_g.
pub fn perm_of(w: &Word) -> Result<Permutation, ReprError> {
    let model = w.model();
    if model.is_hybrid() {
        return Err(ReprError::UnsupportedModel(model, "permutation"));
    }
    let n = model.genus().get() as usize;
    let mut acc = Permutation::identity(n);
    for s in w.syllables() {
        let i = s.letter.index as usize;
        let p = match s.letter.kind {
            LetterKind::Transposition | LetterKind::Slide => Permutation::transposition(n, i, i + 1),
            _ => continue,
        };
        if s.exp % 2 != 0 {
            acc = acc.compose(&p);
        }
    }
    Ok(acc)
}

/// Dense square matrix of exact integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntMatrix { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        IntMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.n + col]
    }

    fn set(&mut self, row: usize, col: usize, v: i64) {
        self.entries[row * self.n + col] = v;
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).map(<[i64]>::to_vec).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.n)
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, ReprError> {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = vec![0i64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let prod = a.checked_mul(rhs.entries[k * n + j]).ok_or(ReprError::Overflow)?;
                    out[i * n + j] = out[i * n + j].checked_add(prod).ok_or(ReprError::Overflow)?;
                }
            }
        }
        Ok(IntMatrix { n, entries: out })
    }

    pub fn checked_pow(&self, mut e: u64) -> Result<IntMatrix, ReprError> {
        let mut acc = IntMatrix::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        let n = self.n;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<i128> = self.entries.iter().map(|&x| i128::from(x)).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                let Some(swap) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                    return 0;
                };
                for c in 0..n {
                    a.swap(k * n + c, swap * n + c);
                }
                sign = -sign;
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * pivot - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = pivot;
        }
        sign * a[n * n - 1]
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .map(|x| x.to_string().len())
            .max()
            .unwrap_or(1);
        for (r, row) in self.rows().iter().enumerate() {
            if r > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Homology matrices of the standard generators at one genus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorTable {
    genus: Genus,
    twist: Vec<IntMatrix>,
    twist_inv: Vec<IntMatrix>,
    transposition: Vec<IntMatrix>,
    slide: Vec<IntMatrix>,
}

impl GeneratorTable {
    pub fn genus(&self) -> Genus {
        self.genus
    }

    /// Matrix of `letter^sign` for `sign` = +-1.
    pub fn matrix(&self, letter: Letter, inverse: bool) -> Option<&IntMatrix> {
        let i = (letter.index as usize).checked_sub(1)?;
        match letter.kind {
            LetterKind::Twist if inverse => self.twist_inv.get(i),
            LetterKind::Twist => self.twist.get(i),
            // u_i and y_i act as involutions on homology.
            LetterKind::Transposition => self.transposition.get(i),
            LetterKind::Slide => self.slide.get(i),
            LetterKind::Chain => None,
        }
    }
}

/// Lattice map on Z^g (columns = images of mu_1..mu_g) pushed down to the
/// basis mu_1..mu_{g-1}. It must fix the class mu_1 + ... + mu_g.
fn push_down(lift: &[Vec<i64>]) -> IntMatrix {
    let g = lift.len();
    let n = g - 1;
    let mut m = IntMatrix::identity(n);
    for col in 0..n {
        for row in 0..n {
            m.set(row, col, lift[row][col] - lift[g - 1][col]);
        }
    }
    m
}

fn lift_identity(g: usize) -> Vec<Vec<i64>> {
    let mut rows = vec![vec![0; g]; g];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1;
    }
    rows
}

/// Transvection along alpha_i = mu_i + mu_{i+1}. With `k = -1`:
/// mu_i -> -mu_{i+1} and mu_{i+1} -> mu_i + 2 mu_{i+1}; `k = +1` is the inverse.
fn twist_lift(g: usize, i: usize, k: i64) -> Vec<Vec<i64>> {
    let (a, b) = (i - 1, i);
    let mut rows = lift_identity(g);
    rows[a][a] = 1 + k;
    rows[b][a] = k;
    rows[a][b] = -k;
    rows[b][b] = 1 - k;
    rows
}

fn transposition_lift(g: usize, i: usize) -> Vec<Vec<i64>> {
    let (a, b) = (i - 1, i);
    let mut rows = lift_identity(g);
    rows[a][a] = 0;
    rows[b][b] = 0;
    rows[a][b] = 1;
    rows[b][a] = 1;
    rows
}

/// Builds the generator table for `genus`. The twist direction is fixed so
/// that `y_i = t_i u_i` holds on the nose.
pub fn derive_generator_matrices(genus: Genus) -> GeneratorTable {
    let g = genus.get() as usize;
    let mut twist = Vec::new();
    let mut twist_inv = Vec::new();
    let mut transposition = Vec::new();
    let mut slide = Vec::new();
    for i in 1..g {
        let t = push_down(&twist_lift(g, i, -1));
        let u = push_down(&transposition_lift(g, i));
        let y = t.checked_mul(&u).expect("small entries");
        twist_inv.push(push_down(&twist_lift(g, i, 1)));
        twist.push(t);
        transposition.push(u);
        slide.push(y);
    }
    GeneratorTable {
        genus,
        twist,
        twist_inv,
        transposition,
        slide,
    }
}

fn table_cache() -> &'static RwLock<HashMap<u32, Arc<GeneratorTable>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<GeneratorTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Cached generator table; computed once per genus.
pub fn generator_table(genus: Genus) -> Arc<GeneratorTable> {
    if let Some(t) = table_cache().read().unwrap().get(&genus.get()) {
        return Arc::clone(t);
    }
    let table = Arc::new(derive_generator_matrices(genus));
    table_cache()
        .write()
        .unwrap()
        .entry(genus.get())
        .or_insert(table)
        .clone()
}

/// Action of a Standard-model word on H_1(N_g; R).
pub fn homology_of(w: &Word) -> Result<IntMatrix, ReprError> {
    let model = w.model();
    if model.is_hybrid() {
        return Err(ReprError::UnsupportedModel(model, "homology"));
    }
    let table = generator_table(model.genus());
    let n = model.genus().get() as usize - 1;
    let mut acc = IntMatrix::identity(n);
    for s in w.syllables() {
        let m = table
            .matrix(s.letter, s.exp < 0)
            .expect("standard letters have matrices");
        acc = acc.checked_mul(&m.checked_pow(s.exp.unsigned_abs())?)?;
    }
    Ok(acc)
}

/// Checks a generator table against the relation catalog and the
/// determinant and order constraints it has to satisfy.
pub fn validate_generator_table(table: &GeneratorTable) -> Result<(), ReprError> {
    let g = table.genus();
    let model = SurfaceModel::Standard(g);
    let fail = |msg: String| Err(ReprError::Validation(msg));
    let image = |w: &Word| -> Result<IntMatrix, ReprError> {
        let n = g.get() as usize - 1;
        let mut acc = IntMatrix::identity(n);
        for s in w.syllables() {
            let m = table
                .matrix(s.letter, s.exp < 0)
                .ok_or_else(|| ReprError::Validation(format!("no matrix for {}", s.letter)))?;
            acc = acc.checked_mul(&m.checked_pow(s.exp.unsigned_abs())?)?;
        }
        Ok(acc)
    };
    for i in 1..g.get() {
        let t = table.matrix(Letter::t(i), false).unwrap();
        let t_inv = table.matrix(Letter::t(i), true).unwrap();
        if !t.checked_mul(t_inv)?.is_identity() {
            return fail(format!("t{i} inverse is wrong"));
        }
        if t.det() != 1 {
            return fail(format!("det t{i} = {}", t.det()));
        }
        for l in [Letter::u(i), Letter::y(i)] {
            let m = table.matrix(l, false).unwrap();
            if m.det() != -1 {
                return fail(format!("det {l} = {}", m.det()));
            }
            if !m.checked_mul(m)?.is_identity() {
                return fail(format!("{l} is not an involution on homology"));
            }
        }
    }
    for rel in crate::presentation::relation_catalog(model) {
        if image(&rel.lhs)? != image(&rel.rhs)? {
            return fail(format!("relation {rel} fails"));
        }
    }
    if g.get() == 3 {
        let t1t2 = Gl2Matrix::try_from(image(&Word::from_letters(model, [Letter::t(1), Letter::t(2)]).unwrap())?)?;
        if t1t2.order() != Some(6) {
            return fail("t1 t2 does not have order 6 at genus 3".into());
        }
        let u1 = Gl2Matrix::try_from(image(&Word::letter(model, Letter::u(1)).unwrap())?)?;
        if u1.order() != Some(2) {
            return fail("u1 does not have order 2 at genus 3".into());
        }
    }
    Ok(())
}

/// 2x2 integer matrix with determinant +-1, i.e. an element of GL(2, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gl2Matrix(pub [[i64; 2]; 2]);

impl Gl2Matrix {
    pub const IDENTITY: Gl2Matrix = Gl2Matrix([[1, 0], [0, 1]]);

    /// `None` unless the determinant is +-1.
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Option<Self> {
        let m = Gl2Matrix([[a, b], [c, d]]);
        matches!(m.det(), 1 | -1).then_some(m)
    }

    pub fn det(&self) -> i64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> i64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs_entry(&self) -> i64 {
        self.0.iter().flatten().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Gl2Matrix {
        let [[a, b], [c, d]] = self.0;
        let det = self.det();
        Gl2Matrix([[d * det, -b * det], [-c * det, a * det]])
    }

    pub fn pow(&self, n: u64) -> Gl2Matrix {
        let mut acc = Gl2Matrix::IDENTITY;
        for _ in 0..n {
            acc = acc * *self;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == Gl2Matrix::IDENTITY
    }

    /// Multiplicative order if it is at most 6, the largest finite order in
    /// GL(2, Z).
    pub fn order(&self) -> Option<u32> {
        let mut acc = *self;
        for k in 1..=6 {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc * *self;
        }
        None
    }
}

impl Mul for Gl2Matrix {
    type Output = Gl2Matrix;

    fn mul(self, rhs: Gl2Matrix) -> Gl2Matrix {
        let (a, b) = (self.0, rhs.0);
        Gl2Matrix([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl TryFrom<IntMatrix> for Gl2Matrix {
    type Error = ReprError;

    fn try_from(m: IntMatrix) -> Result<Self, Self::Error> {
        if m.dim() != 2 {
            return Err(ReprError::Validation(format!("expected a 2x2 matrix, got {}x{}", m.dim(), m.dim())));
        }
        Gl2Matrix::new(m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1))
            .ok_or_else(|| ReprError::Validation("determinant is not +-1".into()))
    }
}

impl fmt::Display for Gl2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Image of a Standard(3) word in GL(2, Z) via its homology action.
pub fn gl2_image(w: &Word) -> Result<Gl2Matrix, ReprError> {
    match w.model() {
        SurfaceModel::Standard(g) if g.get() == 3 => Gl2Matrix::try_from(homology_of(w)?),
        other => Err(ReprError::NotGenusThree(other)),
    }
}
