//! Geometric endomorphisms `s_i ↦ t_i = Σ_p s_{ν_p} s_{μ_p}*` of `O_A`.
//!
//! A presentation carries a depth `k`, at least the longest `μ`-word. After
//! expanding every pair to `μ`-length `k` the `μ`-words of one generator are
//! distinct, so each `t_i` restricts to a partial homeomorphism `μx ↦ νx` of
//! the shift space and the whole tuple induces a partial self-map `Ψ̇` of the
//! finite path set. Internally the pairs are kept in the coarse form of
//! [`Element::coarse`], which keeps composed powers small.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::algebra::{monomial_is_zero, AlgebraError, Element, Monomial};
use crate::sft::{same_matrix, ClopenSet, Letter, SftError, TransitionMatrix, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error(transparent)]
    Word(#[from] SftError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("expected images for {expected} generators, got {got}")]
    WrongGeneratorCount { expected: usize, got: usize },
    #[error("requested depth {depth} is below the longest μ-word ({needed})")]
    DepthTooSmall { depth: usize, needed: usize },
    #[error("generator {generator}: μ-word {mu} occurs twice after normalization")]
    DuplicateMuAfterNormalization { generator: Letter, mu: Word },
    #[error("endomorphism fails the Cuntz-Krieger relations: {0}")]
    InvalidEndomorphism(String),
    #[error("endomorphisms are defined over different transition matrices")]
    MatrixMismatch,
    #[error("generator {generator}: image is not a sum of distinct monomials with unit coefficients")]
    NotAPresentation { generator: Letter },
}

/// Outcome of the three Cuntz-Krieger checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validity {
    /// `t_i t_i* t_i = t_i`, per generator.
    pub partial_isometry: Vec<bool>,
    /// `t_i* t_i = Σ_j A[i,j] t_j t_j*`, per generator.
    pub source_relation: Vec<bool>,
    /// `Σ_i t_i t_i* = 1`.
    pub unit: bool,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        self.unit && self.partial_isometry.iter().all(|&b| b) && self.source_relation.iter().all(|&b| b)
    }

    /// Human-readable list of failed checks.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &ok) in self.partial_isometry.iter().enumerate() {
            if !ok {
                out.push(format!("t{} is not a partial isometry", i + 1));
            }
        }
        for (i, &ok) in self.source_relation.iter().enumerate() {
            if !ok {
                out.push(format!("t{0}* t{0} != sum_j A[{0},j] t_j t_j*", i + 1));
            }
        }
        if !self.unit {
            out.push(String::from("sum_i t_i t_i* != 1"));
        }
        out
    }
}

#[derive(Clone)]
pub struct GeometricEndomorphism {
    matrix: Arc<TransitionMatrix>,
    raw: Vec<Vec<(Word, Word)>>,
    pairs: Vec<Vec<(Word, Word)>>,
    k: usize,
    images: Vec<Element>,
    validity: Validity,
}

/// Expands `(ν, μ)` to `μ`-length `depth`, dropping zero monomials.
fn expand_pair(m: &TransitionMatrix, nu: &Word, mu: &Word, depth: usize, out: &mut Vec<(Word, Word)>) {
    if monomial_is_zero(m, nu, mu) {
        return;
    }
    if mu.len() >= depth {
        out.push((nu.clone(), mu.clone()));
        return;
    }
    for j in m.letters() {
        if m.follows(nu.last(), j) && m.follows(mu.last(), j) {
            expand_pair(m, &nu.with(j), &mu.with(j), depth, out);
        }
    }
}

impl GeometricEndomorphism {
    /// Normalizes the raw pairs to a common `μ`-length (the longest raw `μ`,
    /// or `depth` if given) and runs the Cuntz-Krieger checks.
    pub fn build(
        matrix: &Arc<TransitionMatrix>,
        raw: Vec<Vec<(Word, Word)>>,
        depth: Option<usize>,
    ) -> Result<Self, EndoError> {
        let n = matrix.n();
        if raw.len() != n {
            return Err(EndoError::WrongGeneratorCount { expected: n, got: raw.len() });
        }
        for (nu, mu) in raw.iter().flatten() {
            matrix.check_word(nu)?;
            matrix.check_word(mu)?;
        }
        let needed = raw.iter().flatten().map(|(_, mu)| mu.len()).max().unwrap_or(0);
        let k = depth.unwrap_or(needed);
        if k < needed {
            return Err(EndoError::DepthTooSmall { depth: k, needed });
        }
        let mut images = Vec::with_capacity(n);
        for gen_raw in &raw {
            images.push(
                Element::from_terms(matrix, gen_raw.iter().map(|(nu, mu)| (nu.clone(), mu.clone(), 1)))?.coarse(),
            );
        }
        let pairs = presentation_pairs(matrix, &images)?;
        let validity = check_relations(matrix, &images)?;
        Ok(GeometricEndomorphism { matrix: Arc::clone(matrix), raw, pairs, k, images, validity })
    }

    /// `t_i = s_i`.
    pub fn identity(matrix: &Arc<TransitionMatrix>) -> Self {
        let raw = matrix.letters().map(|i| alloc::vec![(Word::new(alloc::vec![i]), Word::empty())]).collect();
        GeometricEndomorphism::build(matrix, raw, None).expect("identity presentation is well formed")
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Common `μ`-length of the normalized presentation.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Pairs as entered, for generator `i` (1-based).
    pub fn raw_pairs(&self, i: Letter) -> &[(Word, Word)] {
        &self.raw[i as usize - 1]
    }

    /// Coarse `(ν, μ)` pairs of `t_i`, sorted by `μ`.
    pub fn pairs(&self, i: Letter) -> &[(Word, Word)] {
        &self.pairs[i as usize - 1]
    }

    /// Pairs of `t_i` expanded to the common `μ`-length `k`.
    pub fn normalized_pairs(&self, i: Letter) -> Vec<(Word, Word)> {
        let mut out = Vec::new();
        for (nu, mu) in self.pairs(i) {
            expand_pair(&self.matrix, nu, mu, self.k, &mut out);
        }
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }

    /// All coarse pairs as `(generator, ν, μ)`.
    pub fn all_pairs(&self) -> impl Iterator<Item = (Letter, &Word, &Word)> + '_ {
        self.pairs.iter().enumerate().flat_map(|(g, ps)| ps.iter().map(move |(nu, mu)| ((g + 1) as Letter, nu, mu)))
    }

    pub fn image(&self, i: Letter) -> &Element {
        &self.images[i as usize - 1]
    }

    pub fn validity(&self) -> &Validity {
        &self.validity
    }

    pub fn is_valid(&self) -> bool {
        self.validity.is_valid()
    }

    fn require_valid(&self) -> Result<(), EndoError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(EndoError::InvalidEndomorphism(self.validity.failures().join("; ")))
        }
    }

    /// The same endomorphism presented at a larger common depth.
    pub fn at_depth(&self, depth: usize) -> Result<Self, EndoError> {
        GeometricEndomorphism::build(&self.matrix, self.pairs.clone(), Some(depth))
    }

    /// Substitutes `s_i ↦ t_i` and `s_i* ↦ t_i*`.
    pub fn apply(&self, x: &Element) -> Result<Element, EndoError> {
        self.require_valid()?;
        self.apply_cached(x, &mut BTreeMap::new())
    }

    fn apply_cached(&self, x: &Element, cache: &mut BTreeMap<Word, Element>) -> Result<Element, EndoError> {
        if !same_matrix(&self.matrix, x.matrix()) {
            return Err(EndoError::MatrixMismatch);
        }
        let mut out = Element::zero(&self.matrix);
        for (mono, c) in x.terms() {
            let left = self.word_image(&mono.nu, cache);
            let right = self.word_image(&mono.mu, cache).adjoint();
            out = out.try_add(&left.try_mul(&right)?.scale(c))?;
        }
        Ok(out.coarse())
    }

    /// `t_{w_1} ⋯ t_{w_m}`, memoized on prefixes.
    fn word_image(&self, w: &Word, cache: &mut BTreeMap<Word, Element>) -> Element {
        if w.is_empty() {
            return Element::one(&self.matrix);
        }
        if let Some(e) = cache.get(w) {
            return e.clone();
        }
        let head = self.word_image(&w.without_last(), cache);
        let last = self.image(w.last().expect("nonempty"));
        let e = head.try_mul(last).expect("same matrix");
        cache.insert(w.clone(), e.clone());
        e
    }

    /// `E ∘ F`: the endomorphism `s_i ↦ E(t_i^F)`, at the smallest depth
    /// covering its pairs.
    pub fn compose(&self, other: &GeometricEndomorphism) -> Result<Self, EndoError> {
        self.require_valid()?;
        other.require_valid()?;
        if !same_matrix(&self.matrix, &other.matrix) {
            return Err(EndoError::MatrixMismatch);
        }
        let mut cache = BTreeMap::new();
        let mut raw = Vec::with_capacity(self.n());
        for i in self.matrix.letters() {
            let e = self.apply_cached(other.image(i), &mut cache)?;
            let mut ps = Vec::with_capacity(e.num_terms());
            for (mono, c) in e.terms() {
                if c != 1 {
                    return Err(EndoError::NotAPresentation { generator: i });
                }
                ps.push((mono.nu.clone(), mono.mu.clone()));
            }
            raw.push(ps);
        }
        GeometricEndomorphism::build(&self.matrix, raw, None)
    }

    /// `E^n`, with `E^0` the identity.
    pub fn power(&self, n: u32) -> Result<Self, EndoError> {
        self.require_valid()?;
        let mut acc = GeometricEndomorphism::identity(&self.matrix);
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// Generator-wise equality of the images in `O_A`.
    pub fn same_images(&self, other: &GeometricEndomorphism) -> Result<bool, EndoError> {
        if !same_matrix(&self.matrix, &other.matrix) {
            return Err(EndoError::MatrixMismatch);
        }
        for (a, b) in self.images.iter().zip(&other.images) {
            if !a.equals(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Supports of the range projections `t_i t_i*`.
    pub fn range_supports(&self) -> Result<Vec<ClopenSet>, EndoError> {
        self.images.iter().map(|t| Ok(t.try_mul(&t.adjoint())?.support()?)).collect()
    }

    pub fn path_map(&self) -> PartialPathMap {
        PartialPathMap::new(self)
    }
}

fn check_relations(matrix: &Arc<TransitionMatrix>, images: &[Element]) -> Result<Validity, EndoError> {
    let ranges: Vec<Element> = images.iter().map(|t| t.try_mul(&t.adjoint())).collect::<Result<_, _>>()?;
    let mut partial_isometry = Vec::with_capacity(images.len());
    let mut source_relation = Vec::with_capacity(images.len());
    for (i, t) in images.iter().enumerate() {
        partial_isometry.push(ranges[i].try_mul(t)?.equals(t)?);
        let lhs = t.adjoint().try_mul(t)?;
        let mut rhs = Element::zero(matrix);
        for j in matrix.letters() {
            if matrix.get((i + 1) as Letter, j) {
                rhs = rhs.try_add(&ranges[j as usize - 1])?;
            }
        }
        source_relation.push(lhs.equals(&rhs)?);
    }
    let total = ranges.iter().try_fold(Element::zero(matrix), |acc, r| acc.try_add(r))?;
    let unit = total.equals(&Element::one(matrix))?;
    Ok(Validity { partial_isometry, source_relation, unit })
}

/// Pairs of coarse images, checking unit coefficients and that no two pairs
/// of one generator share a `μ`-word once expanded to a common length.
fn presentation_pairs(m: &TransitionMatrix, images: &[Element]) -> Result<Vec<Vec<(Word, Word)>>, EndoError> {
    let mut all = Vec::with_capacity(images.len());
    for (g, t) in images.iter().enumerate() {
        let generator = (g + 1) as Letter;
        let mut by_mu: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
        for (mono, c) in t.terms() {
            if c != 1 {
                return Err(EndoError::DuplicateMuAfterNormalization { generator, mu: mono.mu.clone() });
            }
            by_mu.entry(mono.mu.clone()).or_default().push(mono.nu.clone());
        }
        for (mu, nus) in &by_mu {
            for (a, nu) in nus.iter().enumerate() {
                for other in &nus[a + 1..] {
                    if m.letters()
                        .any(|j| m.follows(nu.last(), j) && m.follows(other.last(), j) && m.follows(mu.last(), j))
                    {
                        return Err(EndoError::DuplicateMuAfterNormalization { generator, mu: mu.clone() });
                    }
                }
            }
            for p in 0..mu.len() {
                if let Some(outer) = by_mu.get(&mu.prefix(p)) {
                    if outer.iter().any(|nu| m.follows(nu.last(), mu.letters()[p])) {
                        return Err(EndoError::DuplicateMuAfterNormalization { generator, mu: mu.clone() });
                    }
                }
            }
        }
        let mut ps: Vec<(Word, Word)> =
            by_mu.into_iter().flat_map(|(mu, nus)| nus.into_iter().map(move |nu| (nu, mu.clone()))).collect();
        ps.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        all.push(ps);
    }
    Ok(all)
}

impl fmt::Debug for GeometricEndomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GeometricEndomorphism(k = {}, valid = {})", self.k, self.is_valid())?;
        for (g, ps) in self.pairs.iter().enumerate() {
            write!(f, "  t{}:", g + 1)?;
            for (nu, mu) in ps {
                write!(f, " {}", Monomial::new(nu.clone(), mu.clone()))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The partial map `Ψ̇` on allowable words.
///
/// Let `w` have last letter `i` and `|w| ≥ max(k, 1)`. If some pair `(ν, μ)`
/// of `t_i` has `μ` a prefix of `w` and `νw[|μ|..]` is allowable, then
/// `Ψ̇(w)` is `νw[|μ|..]` with its last letter removed, provided that is
/// nonempty. Otherwise `w` is outside the domain. Expanding a pair to a longer
/// `μ` does not change this map, so it depends only on the endomorphism and
/// on `k`.
#[derive(Clone, Debug)]
pub struct PartialPathMap {
    matrix: Arc<TransitionMatrix>,
    k: usize,
    table: Vec<BTreeMap<Word, Vec<Word>>>,
}

impl PartialPathMap {
    pub fn new(e: &GeometricEndomorphism) -> Self {
        let table = e
            .pairs
            .iter()
            .map(|ps| {
                let mut t: BTreeMap<Word, Vec<Word>> = BTreeMap::new();
                for (nu, mu) in ps {
                    t.entry(mu.clone()).or_default().push(nu.clone());
                }
                t
            })
            .collect();
        PartialPathMap { matrix: Arc::clone(&e.matrix), k: e.k, table }
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn depth(&self) -> usize {
        self.k
    }

    /// `(generator, ν, μ)` for every pair of the presentation.
    pub fn pairs(&self) -> impl Iterator<Item = (Letter, &Word, &Word)> + '_ {
        self.table.iter().enumerate().flat_map(|(g, t)| {
            t.iter().flat_map(move |(mu, nus)| nus.iter().map(move |nu| ((g + 1) as Letter, nu, mu)))
        })
    }

    /// The pair used to evaluate `Ψ̇(w)`, if `w` is in the domain.
    pub fn matched_pair(&self, w: &Word) -> Option<(&Word, &Word)> {
        if !self.matrix.is_allowable(w) {
            return None;
        }
        self.matched_letters(w.letters())
    }

    /// As [`matched_pair`](Self::matched_pair), for a word already known
    /// to be allowable.
    pub fn matched_letters(&self, w: &[Letter]) -> Option<(&Word, &Word)> {
        let i = *w.last()?;
        if w.len() < self.k.max(1) {
            return None;
        }
        let table = &self.table[i as usize - 1];
        for p in 0..=self.k {
            let Some((mu, nus)) = table.get_key_value(&w[..p]) else {
                continue;
            };
            for nu in nus {
                let fits = p == w.len() || self.matrix.follows(nu.last(), w[p]);
                if fits && nu.len() + w.len() - p >= 2 {
                    return Some((nu, mu));
                }
            }
        }
        None
    }

    /// `|Ψ̇(w)|` for an allowable `w`, or `None` outside the domain.
    pub fn image_len(&self, w: &[Letter]) -> Option<usize> {
        self.matched_letters(w).map(|(nu, mu)| nu.len() + w.len() - mu.len() - 1)
    }

    pub fn dot_apply(&self, w: &Word) -> Option<Word> {
        let (nu, mu) = self.matched_pair(w)?;
        let mut letters = Vec::with_capacity(nu.len() + w.len() - mu.len());
        letters.extend_from_slice(nu.letters());
        letters.extend_from_slice(&w.letters()[mu.len()..]);
        letters.pop();
        Some(Word::new(letters))
    }

    /// Exhaustive injectivity check on all domain words of length `≤ max_len`.
    pub fn check_injective(&self, max_len: usize) -> Result<(), (Word, Word)> {
        let mut seen: BTreeMap<Word, Word> = BTreeMap::new();
        for len in 1..=max_len {
            for w in self.matrix.enumerate_paths(len) {
                if let Some(img) = self.dot_apply(&w) {
                    if let Some(prev) = seen.insert(img, w.clone()) {
                        return Err((prev, w));
                    }
                }
            }
        }
        Ok(())
    }
}
