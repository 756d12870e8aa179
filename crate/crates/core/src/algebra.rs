//! Exact calculus on finite integer combinations of monomials `s_ν s_μ*`.
//!
//! The Cuntz-Krieger relations `s_i* s_i = Σ_j A[i,j] s_j s_j*` and
//! `Σ_i s_i s_i* = 1` reduce every product of two monomials to a sum of
//! monomials:
//!
//! * `s_μ* s_{μρ} = s_ρ` (the first letter of `ρ` automatically follows `t(μ)`),
//! * `s_{αρ}* s_α = s_ρ*`,
//! * `s_μ* s_μ = Q_{t(μ)} = Σ_{j follows t(μ)} s_j s_j*`, and `1` for `μ = ∅`,
//! * everything else is zero.
//!
//! A monomial `s_ν s_μ*` is zero exactly when no letter follows both `t(ν)`
//! and `t(μ)`, and it expands as `Σ_j s_{νj} s_{μj}*` over those letters.
//! Expanding every term until all `μ` have one common length gives a normal
//! form: distinct monomials at a fixed `μ`-length have disjoint supports in
//! the groupoid model, so they are linearly independent.
//!
//! The expansion `(ν, μ) → {(νj, μj)}` organizes all monomials into a forest,
//! and deep normal forms are exponentially large. Products and equality
//! therefore work with the coarse form instead: first expand only those terms
//! that have another term below them, then merge every complete family of
//! children carrying one coefficient back into its parent. The result is
//! unique for each element of `O_A`.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Bound;
use core::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::sft::{same_matrix, ClopenSet, Letter, SftError, TransitionMatrix, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("elements are defined over different transition matrices")]
    MatrixMismatch,
    #[error("normalization depth {depth} is below the longest μ-word ({needed})")]
    DepthTooSmall { depth: usize, needed: usize },
    #[error("element is not a projection with unit coefficients")]
    NotAProjection,
    #[error(transparent)]
    Word(#[from] SftError),
}

/// `s_ν s_μ*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub nu: Word,
    pub mu: Word,
}

impl Monomial {
    pub fn new(nu: Word, mu: Word) -> Self {
        Monomial { nu, mu }
    }

    pub fn adjoint(&self) -> Monomial {
        Monomial { nu: self.mu.clone(), mu: self.nu.clone() }
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} <- {})", self.nu, self.mu)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.nu.is_empty(), self.mu.is_empty()) {
            (true, true) => f.write_str("1"),
            (false, true) => write!(f, "s_{}", self.nu.compact()),
            (true, false) => write!(f, "s_{}*", self.mu.compact()),
            (false, false) => write!(f, "s_{} s_{}*", self.nu.compact(), self.mu.compact()),
        }
    }
}

/// Letters following both termini (the empty word is followed by everything).
fn common_followers(m: &TransitionMatrix, a: Option<Letter>, b: Option<Letter>) -> Vec<Letter> {
    m.letters().filter(|&j| m.follows(a, j) && m.follows(b, j)).collect()
}

pub(crate) fn monomial_is_zero(m: &TransitionMatrix, nu: &Word, mu: &Word) -> bool {
    !m.letters().any(|j| m.follows(nu.last(), j) && m.follows(mu.last(), j))
}

/// Product of two nonzero monomials as a list of (nonzero) monomials.
fn monomial_product(m: &TransitionMatrix, x: &Monomial, y: &Monomial) -> Vec<Monomial> {
    let (nu, mu) = (&x.nu, &x.mu);
    let (alpha, beta) = (&y.nu, &y.mu);
    let mut out = Vec::new();
    let mut push = |nu: Word, mu: Word| {
        if !monomial_is_zero(m, &nu, &mu) {
            out.push(Monomial { nu, mu });
        }
    };
    if alpha.len() > mu.len() && alpha.starts_with(mu) {
        let rho = alpha.suffix_from(mu.len());
        let head = rho.first().expect("nonempty remainder");
        if m.follows(nu.last(), head) {
            push(nu.concat(&rho), beta.clone());
        }
    } else if mu.len() > alpha.len() && mu.starts_with(alpha) {
        let rho = mu.suffix_from(alpha.len());
        let head = rho.first().expect("nonempty remainder");
        if m.follows(beta.last(), head) {
            push(nu.clone(), beta.concat(&rho));
        }
    } else if mu == alpha {
        let outer = common_followers(m, nu.last(), beta.last());
        let inner: Vec<Letter> = outer.iter().copied().filter(|&j| m.follows(mu.last(), j)).collect();
        if inner.len() == outer.len() {
            push(nu.clone(), beta.clone());
        } else {
            for j in inner {
                push(nu.with(j), beta.with(j));
            }
        }
    }
    out
}

/// A finite integer combination of monomials over a fixed matrix.
#[derive(Clone)]
pub struct Element {
    matrix: Arc<TransitionMatrix>,
    terms: BTreeMap<Monomial, i64>,
}

impl Element {
    pub fn zero(matrix: &Arc<TransitionMatrix>) -> Self {
        Element { matrix: Arc::clone(matrix), terms: BTreeMap::new() }
    }

    pub fn one(matrix: &Arc<TransitionMatrix>) -> Self {
        let mut e = Element::zero(matrix);
        e.terms.insert(Monomial::new(Word::empty(), Word::empty()), 1);
        e
    }

    /// `s_i`.
    pub fn generator(matrix: &Arc<TransitionMatrix>, i: Letter) -> Result<Self, AlgebraError> {
        matrix.check_letter(i as usize)?;
        Element::monomial(matrix, Word::new(alloc::vec![i]), Word::empty())
    }

    /// `s_ν s_μ*`, or zero when no letter follows both termini.
    pub fn monomial(matrix: &Arc<TransitionMatrix>, nu: Word, mu: Word) -> Result<Self, AlgebraError> {
        Element::from_terms(matrix, [(nu, mu, 1)])
    }

    /// `Σ c · s_ν s_μ*`, combining like terms.
    pub fn from_terms(
        matrix: &Arc<TransitionMatrix>,
        terms: impl IntoIterator<Item = (Word, Word, i64)>,
    ) -> Result<Self, AlgebraError> {
        let mut e = Element::zero(matrix);
        for (nu, mu, c) in terms {
            matrix.check_word(&nu)?;
            matrix.check_word(&mu)?;
            if !monomial_is_zero(matrix, &nu, &mu) {
                e.add_term(Monomial { nu, mu }, c);
            }
        }
        Ok(e)
    }

    fn add_term(&mut self, mono: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        match self.terms.entry(mono) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == 0 {
                    slot.remove();
                }
            }
        }
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_mu_len(&self) -> usize {
        self.terms.keys().map(|m| m.mu.len()).max().unwrap_or(0)
    }

    fn check_same(&self, other: &Element) -> Result<(), AlgebraError> {
        if same_matrix(&self.matrix, &other.matrix) {
            Ok(())
        } else {
            Err(AlgebraError::MatrixMismatch)
        }
    }

    pub fn adjoint(&self) -> Element {
        Element { matrix: Arc::clone(&self.matrix), terms: self.terms.iter().map(|(m, &c)| (m.adjoint(), c)).collect() }
    }

    pub fn try_add(&self, other: &Element) -> Result<Element, AlgebraError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Element) -> Result<Element, AlgebraError> {
        self.try_add(&other.scale(-1))
    }

    pub fn scale(&self, c: i64) -> Element {
        let mut out = Element::zero(&self.matrix);
        if c != 0 {
            for (m, &v) in &self.terms {
                out.terms.insert(m.clone(), v * c);
            }
        }
        out
    }

    /// Product, returned in coarse form.
    pub fn try_mul(&self, other: &Element) -> Result<Element, AlgebraError> {
        self.check_same(other)?;
        let m = &*self.matrix;
        let mut by_nu: BTreeMap<&Word, Vec<(&Monomial, i64)>> = BTreeMap::new();
        for (y, &b) in &other.terms {
            by_nu.entry(&y.nu).or_default().push((y, b));
        }
        let mut out: BTreeMap<Monomial, i64> = BTreeMap::new();
        let mut emit = |x: &Monomial, a: i64, ys: &[(&Monomial, i64)]| {
            for &(y, b) in ys {
                for mono in monomial_product(m, x, y) {
                    *out.entry(mono).or_insert(0) += a * b;
                }
            }
        };
        for (x, &a) in &self.terms {
            for p in 0..=x.mu.len() {
                if let Some(ys) = by_nu.get(&x.mu.prefix(p)) {
                    emit(x, a, ys);
                }
            }
            let lower: (Bound<&Word>, Bound<&Word>) = (Bound::Excluded(&x.mu), Bound::Unbounded);
            for (nu, ys) in by_nu.range::<&Word, _>(lower) {
                if !nu.starts_with(&x.mu) {
                    break;
                }
                emit(x, a, ys);
            }
        }
        out.retain(|_, c| *c != 0);
        Ok(Element { matrix: Arc::clone(&self.matrix), terms: out }.coarse())
    }

    /// Expands just enough that no term lies below another in the expansion
    /// forest. Afterwards distinct terms are linearly independent.
    fn resolve_overlaps(&self) -> BTreeMap<Monomial, i64> {
        let m = &*self.matrix;
        let mut terms = self.terms.clone();
        loop {
            let mut covering = BTreeSet::new();
            for mono in terms.keys() {
                let (mut nu, mut mu) = (mono.nu.clone(), mono.mu.clone());
                while !nu.is_empty() && !mu.is_empty() && nu.last() == mu.last() {
                    nu = nu.without_last();
                    mu = mu.without_last();
                    let parent = Monomial { nu: nu.clone(), mu: mu.clone() };
                    if terms.contains_key(&parent) {
                        covering.insert(parent);
                    }
                }
            }
            if covering.is_empty() {
                break;
            }
            for parent in covering {
                let c = terms.remove(&parent).expect("collected from keys");
                for j in common_followers(m, parent.nu.last(), parent.mu.last()) {
                    let child = Monomial { nu: parent.nu.with(j), mu: parent.mu.with(j) };
                    *terms.entry(child).or_insert(0) += c;
                }
            }
            terms.retain(|_, c| *c != 0);
        }
        terms
    }

    /// The coarse canonical form.
    pub fn coarse(&self) -> Element {
        let m = &*self.matrix;
        let mut terms = self.resolve_overlaps();
        loop {
            let mut families: BTreeMap<Monomial, Vec<(Letter, i64)>> = BTreeMap::new();
            for (mono, &c) in &terms {
                if let (Some(a), Some(b)) = (mono.nu.last(), mono.mu.last()) {
                    if a == b {
                        let parent = Monomial { nu: mono.nu.without_last(), mu: mono.mu.without_last() };
                        families.entry(parent).or_default().push((a, c));
                    }
                }
            }
            let mut merged = false;
            for (parent, children) in families {
                let c = children[0].1;
                if children.iter().any(|&(_, d)| d != c) {
                    continue;
                }
                let expected = common_followers(m, parent.nu.last(), parent.mu.last());
                if expected.len() != children.len() || expected.iter().zip(&children).any(|(x, y)| *x != y.0) {
                    continue;
                }
                for (j, _) in children {
                    terms.remove(&Monomial { nu: parent.nu.with(j), mu: parent.mu.with(j) });
                }
                terms.insert(parent, c);
                merged = true;
            }
            if !merged {
                break;
            }
        }
        Element { matrix: Arc::clone(&self.matrix), terms }
    }

    /// Expands every term until all `μ`-words have length `depth` (default:
    /// the longest `μ` present), combining like terms.
    pub fn normalize(&self, depth: Option<usize>) -> Result<Element, AlgebraError> {
        let needed = self.max_mu_len();
        let depth = depth.unwrap_or(needed);
        if depth < needed {
            return Err(AlgebraError::DepthTooSmall { depth, needed });
        }
        let m = &*self.matrix;
        let mut out: BTreeMap<Monomial, i64> = BTreeMap::new();
        let mut stack: Vec<(Monomial, i64)> = self.terms.iter().map(|(k, &c)| (k.clone(), c)).collect();
        while let Some((mono, c)) = stack.pop() {
            if mono.mu.len() >= depth {
                *out.entry(mono).or_insert(0) += c;
                continue;
            }
            for j in common_followers(m, mono.nu.last(), mono.mu.last()) {
                stack.push((Monomial { nu: mono.nu.with(j), mu: mono.mu.with(j) }, c));
            }
        }
        out.retain(|_, c| *c != 0);
        Ok(Element { matrix: Arc::clone(&self.matrix), terms: out })
    }

    /// Equality in `O_A`.
    pub fn equals(&self, other: &Element) -> Result<bool, AlgebraError> {
        Ok(self.try_sub(other)?.resolve_overlaps().is_empty())
    }

    pub fn is_partial_isometry(&self) -> bool {
        let xxx = self.try_mul(&self.adjoint()).and_then(|p| p.try_mul(self)).expect("same matrix");
        xxx.equals(self).expect("same matrix")
    }

    pub fn is_projection(&self) -> bool {
        self.equals(&self.adjoint()).expect("same matrix")
            && self.try_mul(self).and_then(|sq| sq.equals(self)).expect("same matrix")
    }

    /// The clopen set of a cylinder projection `Σ s_w s_w*`.
    pub fn support(&self) -> Result<ClopenSet, AlgebraError> {
        if !self.is_projection() {
            return Err(AlgebraError::NotAProjection);
        }
        Ok(ClopenSet::from_cylinders(&self.matrix, self.cylinder_words()?)?)
    }

    /// The words `w` of the coarse form `Σ s_w s_w*`, of mixed lengths and
    /// with pairwise disjoint cylinders.
    pub fn cylinder_words(&self) -> Result<Vec<Word>, AlgebraError> {
        let p = self.coarse();
        let mut words = Vec::with_capacity(p.terms.len());
        for (mono, &c) in &p.terms {
            if mono.nu != mono.mu || c != 1 {
                return Err(AlgebraError::NotAProjection);
            }
            words.push(mono.mu.clone());
        }
        Ok(words)
    }
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other).unwrap_or(false)
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({self})")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (mono, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            if i == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let abs = c.unsigned_abs();
            if abs != 1 {
                write!(f, "{abs} ")?;
            }
            write!(f, "{mono}")?;
        }
        Ok(())
    }
}

// The operator forms panic on a matrix mismatch; use the `try_*` methods to
// get an error instead.

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.try_add(rhs).expect("elements over different matrices")
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.try_sub(rhs).expect("elements over different matrices")
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        self.try_mul(rhs).expect("elements over different matrices")
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn main_matrix() -> Arc<TransitionMatrix> {
        Arc::new(TransitionMatrix::new(&[vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 1]]).unwrap())
    }

    fn w(s: &[Letter]) -> Word {
        Word::from(s)
    }

    fn mono(a: &Arc<TransitionMatrix>, nu: &[Letter], mu: &[Letter]) -> Element {
        Element::monomial(a, w(nu), w(mu)).unwrap()
    }

    #[test]
    fn source_projection_of_generator() {
        let a = main_matrix();
        let s1 = Element::generator(&a, 1).unwrap();
        let lhs = &s1.adjoint() * &s1;
        let rhs = &mono(&a, &[1], &[1]) + &mono(&a, &[2], &[2]);
        assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn orthogonal_generators() {
        let a = main_matrix();
        let s1 = Element::generator(&a, 1).unwrap();
        let s2 = Element::generator(&a, 2).unwrap();
        assert!((&s2.adjoint() * &s1).is_zero());
    }

    #[test]
    fn product_through_source_projection() {
        // s_2 Q_1 s_3* = s_2 (s_1 s_31* + s_2 s_32*) and 31 is forbidden.
        let a = main_matrix();
        let x = mono(&a, &[2], &[1]);
        let y = mono(&a, &[1], &[3]);
        assert!((&x * &y).equals(&mono(&a, &[2, 2], &[3, 2])).unwrap());
        let z = mono(&a, &[3], &[1]);
        assert!((&z.adjoint() * &mono(&a, &[1], &[])).is_zero());
    }

    #[test]
    fn adjoint_examples() {
        let a = main_matrix();
        assert!(mono(&a, &[1], &[2]).adjoint().equals(&mono(&a, &[2], &[1])).unwrap());
        let p = mono(&a, &[1], &[1]);
        assert!(p.adjoint().equals(&p).unwrap());
        let t2 = mono(&a, &[3, 2], &[]);
        let t2_star = t2.adjoint();
        let (m, c) = t2_star.terms().next().unwrap();
        assert_eq!((m.nu.clone(), m.mu.clone(), c), (Word::empty(), w(&[3, 2]), 1));
    }

    #[test]
    fn normalize_examples() {
        let a = main_matrix();
        let x = mono(&a, &[2], &[1]);
        let n = x.normalize(Some(2)).unwrap();
        let expected = &mono(&a, &[2, 1], &[1, 1]) + &mono(&a, &[2, 2], &[1, 2]);
        assert_eq!(n.terms, expected.terms);
        assert_eq!(n.normalize(None).unwrap().terms, n.terms);
        let one = Element::one(&a).normalize(Some(1)).unwrap();
        let sum = a.letters().map(|i| mono(&a, &[i], &[i])).fold(Element::zero(&a), |acc, t| &acc + &t);
        assert_eq!(one.terms, sum.terms);
        assert_eq!(n.normalize(Some(1)).unwrap_err(), AlgebraError::DepthTooSmall { depth: 1, needed: 2 });
    }

    #[test]
    fn equality_examples() {
        let a = main_matrix();
        let x = mono(&a, &[2], &[1]);
        assert!(x.equals(&x.normalize(Some(3)).unwrap()).unwrap());
        assert!(!mono(&a, &[1], &[1]).equals(&mono(&a, &[2], &[2])).unwrap());
        let sum = a.letters().map(|i| mono(&a, &[i], &[i])).fold(Element::zero(&a), |acc, t| &acc + &t);
        assert!(Element::one(&a).equals(&sum).unwrap());
    }

    #[test]
    fn zero_monomials_are_dropped() {
        // t(1) = 1 is followed by {1,2}; t(3) = 3 by {2,3}: overlap {2}, nonzero.
        let a = main_matrix();
        assert!(!mono(&a, &[1], &[3]).is_zero());
        let b = Arc::new(TransitionMatrix::new(&[vec![1, 0], vec![0, 1]]).unwrap());
        assert!(mono(&b, &[1], &[2]).is_zero());
        assert!(Element::monomial(&a, w(&[1, 3]), Word::empty()).is_err());
    }

    #[test]
    fn support_of_projections() {
        let a = main_matrix();
        let p = mono(&a, &[1], &[1]);
        let s = p.support().unwrap();
        assert_eq!(s.depth(), 1);
        assert_eq!(s.members().iter().cloned().collect::<Vec<_>>(), vec![w(&[1])]);
        let not_proj = mono(&a, &[1], &[2]);
        assert_eq!(not_proj.support().unwrap_err(), AlgebraError::NotAProjection);
        assert!(mono(&a, &[1], &[2]).is_partial_isometry());
        assert!(!(&mono(&a, &[1], &[1]) + &mono(&a, &[1], &[1])).is_partial_isometry());
    }

    #[test]
    fn mismatch() {
        let a = main_matrix();
        let b = Arc::new(TransitionMatrix::full(3));
        assert_eq!(Element::one(&a).try_mul(&Element::one(&b)).unwrap_err(), AlgebraError::MatrixMismatch);
    }
}
