//! Transition matrices, allowable words and cylinder sets of `Σ_A^+`.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::IntMatrix;

/// A letter of the alphabet `{1, …, n}`.
pub type Letter = u16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SftError {
    #[error("transition matrix is empty")]
    Empty,
    #[error("transition matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("entry A[{row},{col}] = {value} is not 0 or 1")]
    EntryOutOfRange { row: usize, col: usize, value: i64 },
    #[error("{kind} {index} of the transition matrix is zero")]
    ZeroRowOrColumn { kind: &'static str, index: usize },
    #[error("letter {letter} is outside the alphabet 1..={n}")]
    UnknownLetter { letter: usize, n: usize },
    #[error("word {word} is not allowable")]
    UnallowableWord { word: Word },
    #[error("clopen sets are defined over different transition matrices")]
    MatrixMismatch,
    #[error("cannot refine a depth-{depth} clopen set to depth {target}")]
    RefineBelowDepth { depth: usize, target: usize },
    #[error("cylinder word {word} has length {len}, expected {depth}")]
    WrongLength { word: Word, len: usize, depth: usize },
}

/// The 0/1 matrix `A` defining the subshift and `O_A`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<bool>,
    irreducible: bool,
}

impl TransitionMatrix {
    /// Validates a raw integer grid. Rows are listed top to bottom.
    pub fn new(rows: &[Vec<i64>]) -> Result<Self, SftError> {
        let n = rows.len();
        if n == 0 {
            return Err(SftError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SftError::NonSquare { row: r + 1, len: row.len(), expected: n });
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => return Err(SftError::EntryOutOfRange { row: r + 1, col: c + 1, value: v }),
                }
            }
        }
        for i in 0..n {
            if !(0..n).any(|j| entries[i * n + j]) {
                return Err(SftError::ZeroRowOrColumn { kind: "row", index: i + 1 });
            }
        }
        for j in 0..n {
            if !(0..n).any(|i| entries[i * n + j]) {
                return Err(SftError::ZeroRowOrColumn { kind: "column", index: j + 1 });
            }
        }
        let irreducible = strongly_connected(n, &entries);
        Ok(TransitionMatrix { n, entries, irreducible })
    }

    /// The all-ones `n × n` matrix (the full shift, `O_A = O_n`).
    pub fn full(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        TransitionMatrix { n, entries: vec![true; n * n], irreducible: true }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// `A[a, b]` for 1-based letters.
    pub fn get(&self, a: Letter, b: Letter) -> bool {
        let (a, b) = (a as usize, b as usize);
        assert!(a >= 1 && a <= self.n && b >= 1 && b <= self.n, "letter out of range");
        self.entries[(a - 1) * self.n + (b - 1)]
    }

    /// Whether `b` may follow a word ending in `last`; the empty word is
    /// followed by every letter.
    pub fn follows(&self, last: Option<Letter>, b: Letter) -> bool {
        match last {
            None => true,
            Some(a) => self.get(a, b),
        }
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone {
        1..=self.n as Letter
    }

    /// Letters that may follow a word with the given terminus.
    pub fn followers(&self, last: Option<Letter>) -> impl Iterator<Item = Letter> + '_ {
        self.letters().filter(move |&b| self.follows(last, b))
    }

    pub fn check_letter(&self, letter: usize) -> Result<Letter, SftError> {
        if letter >= 1 && letter <= self.n {
            Ok(letter as Letter)
        } else {
            Err(SftError::UnknownLetter { letter, n: self.n })
        }
    }

    pub fn is_allowable(&self, w: &Word) -> bool {
        w.0.iter().all(|&x| (x as usize) >= 1 && (x as usize) <= self.n) && w.0.windows(2).all(|p| self.get(p[0], p[1]))
    }

    pub fn check_word(&self, w: &Word) -> Result<(), SftError> {
        for &x in &w.0 {
            self.check_letter(x as usize)?;
        }
        if self.is_allowable(w) {
            Ok(())
        } else {
            Err(SftError::UnallowableWord { word: w.clone() })
        }
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_fn(
            self.n,
            self.n,
            |r, c| {
                if self.entries[r * self.n + c] {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            },
        )
    }

    pub fn power(&self, len: u32) -> IntMatrix {
        self.to_int_matrix().pow(len)
    }

    /// `(A^len)[a, b]`: the number of words `u` of length `len` with
    /// `A[a, u_1] = 1` and last letter `b`.
    pub fn count_paths(&self, a: Letter, b: Letter, len: u32) -> BigInt {
        self.power(len)[(a as usize - 1, b as usize - 1)].clone()
    }

    /// All allowable words of length `k`, in lexicographic order.
    pub fn enumerate_paths(&self, k: usize) -> Vec<Word> {
        let mut level = vec![Word::empty()];
        for _ in 0..k {
            let mut next = Vec::with_capacity(level.len() * 2);
            for w in &level {
                for b in self.followers(w.last()) {
                    next.push(w.with(b));
                }
            }
            level = next;
        }
        level
    }

    /// Visits every allowable word of length `k` in lexicographic order
    /// without allocating them.
    pub fn for_each_path(&self, k: usize, mut f: impl FnMut(&[Letter])) {
        fn walk(m: &TransitionMatrix, buf: &mut Vec<Letter>, k: usize, f: &mut dyn FnMut(&[Letter])) {
            if buf.len() == k {
                f(buf);
                return;
            }
            let last = buf.last().copied();
            for b in m.letters() {
                if m.follows(last, b) {
                    buf.push(b);
                    walk(m, buf, k, f);
                    buf.pop();
                }
            }
        }
        walk(self, &mut Vec::with_capacity(k), k, &mut f);
    }

    /// `|P_k|` via matrix powers.
    pub fn count_words(&self, k: usize) -> BigInt {
        if k == 0 {
            return BigInt::one();
        }
        let p = self.power(k as u32 - 1);
        let mut total = BigInt::zero();
        for r in 0..self.n {
            for c in 0..self.n {
                total += &p[(r, c)];
            }
        }
        total
    }
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TransitionMatrix(")?;
        for r in 0..self.n {
            if r > 0 {
                f.write_str(" ")?;
            }
            for c in 0..self.n {
                f.write_str(if self.entries[r * self.n + c] { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

fn strongly_connected(n: usize, entries: &[bool]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for u in 0..n {
                let edge = if forward { entries[v * n + u] } else { entries[u * n + v] };
                if edge && !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    };
    reach(true) && reach(false)
}

/// A finite string over the alphabet. The empty word is allowed.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The terminus `t(w)`; `None` for the empty word.
    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn with(&self, b: Letter) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(b);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k.min(self.0.len())].to_vec())
    }

    pub fn suffix_from(&self, k: usize) -> Word {
        Word(self.0[k.min(self.0.len())..].to_vec())
    }

    pub fn without_last(&self) -> Word {
        let k = self.0.len().saturating_sub(1);
        Word(self.0[..k].to_vec())
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Letters concatenated without separators; only unambiguous for n ≤ 9.
    pub fn compact(&self) -> String {
        use core::fmt::Write;
        if self.0.is_empty() {
            return String::from("e");
        }
        let mut s = String::new();
        for &x in &self.0 {
            let _ = write!(s, "{x}");
        }
        s
    }
}

impl Borrow<[Letter]> for Word {
    fn borrow(&self) -> &[Letter] {
        &self.0
    }
}

impl From<&[Letter]> for Word {
    fn from(v: &[Letter]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(v: [Letter; N]) -> Self {
        Word(v.to_vec())
    }
}

/// Comma-separated letters, `e` for the empty word.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A clopen subset of `Σ_A^+`, given as a union of cylinders `[w]` over
/// allowable words of one common length.
#[derive(Clone)]
pub struct ClopenSet {
    matrix: Arc<TransitionMatrix>,
    depth: usize,
    members: BTreeSet<Word>,
}

impl ClopenSet {
    pub fn new(
        matrix: &Arc<TransitionMatrix>,
        depth: usize,
        members: impl IntoIterator<Item = Word>,
    ) -> Result<Self, SftError> {
        let mut set = BTreeSet::new();
        for w in members {
            if w.len() != depth {
                return Err(SftError::WrongLength { len: w.len(), word: w, depth });
            }
            matrix.check_word(&w)?;
            set.insert(w);
        }
        Ok(ClopenSet { matrix: Arc::clone(matrix), depth, members: set })
    }

    /// The whole space, as the cylinder of the empty word.
    pub fn whole(matrix: &Arc<TransitionMatrix>) -> Self {
        ClopenSet { matrix: Arc::clone(matrix), depth: 0, members: BTreeSet::from([Word::empty()]) }
    }

    pub fn empty(matrix: &Arc<TransitionMatrix>) -> Self {
        ClopenSet { matrix: Arc::clone(matrix), depth: 0, members: BTreeSet::new() }
    }

    pub fn cylinder(matrix: &Arc<TransitionMatrix>, w: Word) -> Result<Self, SftError> {
        let depth = w.len();
        ClopenSet::new(matrix, depth, [w])
    }

    /// Union of cylinders of possibly different lengths.
    pub fn from_cylinders(
        matrix: &Arc<TransitionMatrix>,
        words: impl IntoIterator<Item = Word>,
    ) -> Result<Self, SftError> {
        let mut acc = ClopenSet::empty(matrix);
        for w in words {
            acc = acc.union(&ClopenSet::cylinder(matrix, w)?)?;
        }
        Ok(acc)
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn members(&self) -> &BTreeSet<Word> {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Whether every sequence beginning with `w` lies in the set.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        if w.len() >= self.depth {
            self.members.contains(&w.prefix(self.depth))
        } else {
            refine_words(&self.matrix, BTreeSet::from([w.clone()]), w.len(), self.depth)
                .iter()
                .all(|x| self.members.contains(x))
        }
    }

    /// Same set, written with cylinders of length `depth`.
    pub fn refine(&self, depth: usize) -> Result<ClopenSet, SftError> {
        if depth < self.depth {
            return Err(SftError::RefineBelowDepth { depth: self.depth, target: depth });
        }
        Ok(ClopenSet {
            matrix: Arc::clone(&self.matrix),
            depth,
            members: refine_words(&self.matrix, self.members.clone(), self.depth, depth),
        })
    }

    /// The representation of minimal depth.
    pub fn canonical(&self) -> ClopenSet {
        if self.members.is_empty() {
            return ClopenSet::empty(&self.matrix);
        }
        let mut depth = self.depth;
        let mut members = self.members.clone();
        while depth > 0 {
            let mut groups: BTreeMap<Word, usize> = BTreeMap::new();
            for w in &members {
                *groups.entry(w.without_last()).or_default() += 1;
            }
            let complete = groups.iter().all(|(p, &count)| count == self.matrix.followers(p.last()).count());
            if !complete {
                break;
            }
            members = groups.into_keys().collect();
            depth -= 1;
        }
        ClopenSet { matrix: Arc::clone(&self.matrix), depth, members }
    }

    fn common_depth(&self, other: &ClopenSet) -> Result<(ClopenSet, ClopenSet), SftError> {
        if !same_matrix(&self.matrix, &other.matrix) {
            return Err(SftError::MatrixMismatch);
        }
        let d = self.depth.max(other.depth);
        Ok((self.refine(d)?, other.refine(d)?))
    }

    pub fn union(&self, other: &ClopenSet) -> Result<ClopenSet, SftError> {
        let (mut a, b) = self.common_depth(other)?;
        a.members.extend(b.members);
        Ok(a.canonical())
    }

    pub fn intersection(&self, other: &ClopenSet) -> Result<ClopenSet, SftError> {
        let (a, b) = self.common_depth(other)?;
        let members = a.members.intersection(&b.members).cloned().collect();
        Ok(ClopenSet { members, ..a }.canonical())
    }

    pub fn difference(&self, other: &ClopenSet) -> Result<ClopenSet, SftError> {
        let (a, b) = self.common_depth(other)?;
        let members = a.members.difference(&b.members).cloned().collect();
        Ok(ClopenSet { members, ..a }.canonical())
    }

    pub fn complement(&self) -> ClopenSet {
        ClopenSet::whole(&self.matrix).difference(self).expect("same matrix")
    }

    /// Set equality after refinement to a common depth.
    pub fn same_set(&self, other: &ClopenSet) -> Result<bool, SftError> {
        let (a, b) = self.common_depth(other)?;
        Ok(a.members == b.members)
    }

    pub fn is_disjoint(&self, other: &ClopenSet) -> Result<bool, SftError> {
        let (a, b) = self.common_depth(other)?;
        Ok(a.members.is_disjoint(&b.members))
    }

    /// Pairwise disjoint with union the whole space.
    pub fn is_partition(parts: &[ClopenSet]) -> Result<bool, SftError> {
        let Some(first) = parts.first() else {
            return Ok(false);
        };
        let matrix = Arc::clone(&first.matrix);
        if parts.iter().any(|p| !same_matrix(&p.matrix, &matrix)) {
            return Err(SftError::MatrixMismatch);
        }
        let depth = parts.iter().map(|p| p.depth).max().unwrap_or(0);
        let mut seen = BTreeSet::new();
        for p in parts {
            for w in p.refine(depth)?.members {
                if !seen.insert(w) {
                    return Ok(false);
                }
            }
        }
        let whole = ClopenSet::whole(&matrix).refine(depth)?;
        Ok(seen == whole.members)
    }
}

impl PartialEq for ClopenSet {
    fn eq(&self, other: &Self) -> bool {
        self.same_set(other).unwrap_or(false)
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClopenSet(depth {}, {{", self.depth)?;
        for (i, w) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("})")
    }
}

/// Cylinder notation: `{1-, 2-}` (or `{-}` for the whole space).
impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if w.is_empty() {
                f.write_str("-")?;
            } else {
                write!(f, "{}-", w.compact())?;
            }
        }
        f.write_str("}")
    }
}

pub(crate) fn same_matrix(a: &Arc<TransitionMatrix>, b: &Arc<TransitionMatrix>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn refine_words(matrix: &TransitionMatrix, mut words: BTreeSet<Word>, from: usize, to: usize) -> BTreeSet<Word> {
    for _ in from..to {
        let mut next = BTreeSet::new();
        for w in &words {
            for b in matrix.followers(w.last()) {
                next.insert(w.with(b));
            }
        }
        words = next;
    }
    words
}
