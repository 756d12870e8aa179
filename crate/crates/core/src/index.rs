//! The index of the partial path map `Ψ̇`.
//!
//! `Index_k = #(P_k ∩ Im Ψ̇) − #(P_k ∩ Dom Ψ̇)` vanishes for large `k` and the
//! index is the sum of all of them. Four routes are provided:
//!
//! * `Series`: per-length counts by enumeration, summed.
//! * `Gamma`: the boundary count `γ_m`, which equals `Σ_{k≤m} Index_k`.
//! * `Polynomial`: `γ_m` in closed form from matrix powers and the
//!   presentation alone, without touching `Ψ̇`.
//! * `Fredholm`: the truncated index of the partial permutation, counting
//!   words outside the domain against words outside an explicitly
//!   materialized image.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::endo::{GeometricEndomorphism, PartialPathMap};
use crate::linalg::IntMatrix;
use crate::sft::Letter;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("endomorphism fails the Cuntz-Krieger relations: {0}")]
    InvalidEndomorphism(String),
    #[error("{method} index did not stabilize up to length {max_depth}")]
    NoStabilization { method: IndexMethod, max_depth: usize },
    #[error("m = {m} is too small for the closed formula; the smallest admissible m is {min_m}")]
    ExponentUnderflow { m: usize, min_m: usize },
    #[error("N = {n} is below the propagation bound {propagation}")]
    PropagationTooSmall { n: usize, propagation: usize },
    #[error("index value does not fit in 64 bits")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexMethod {
    Series,
    Gamma,
    Polynomial,
    Fredholm,
}

impl IndexMethod {
    pub const ALL: [IndexMethod; 4] =
        [IndexMethod::Series, IndexMethod::Gamma, IndexMethod::Polynomial, IndexMethod::Fredholm];

    pub fn name(self) -> &'static str {
        match self {
            IndexMethod::Series => "series",
            IndexMethod::Gamma => "gamma",
            IndexMethod::Polynomial => "polynomial",
            IndexMethod::Fredholm => "fredholm",
        }
    }
}

impl fmt::Display for IndexMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional overrides; unset fields are chosen automatically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexConfig {
    /// Largest length examined by the enumerating routes.
    pub max_depth: Option<usize>,
    /// Evaluation point of the closed formula.
    pub m: Option<usize>,
    /// Range parameter of the closed formula, at least the propagation bound.
    pub n: Option<usize>,
    /// Truncation depth of the Fredholm route.
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexReport {
    pub method: IndexMethod,
    /// Presentation depth `k`.
    pub k: usize,
    pub propagation: usize,
    /// `Index_k` for each examined length.
    pub per_k: BTreeMap<usize, i64>,
    /// `Σ_{j≤m} Index_j`, keyed by `m`.
    pub partial_sums: BTreeMap<usize, i64>,
    pub stabilized_value: i64,
    /// Closed-formula evaluation, for the polynomial route.
    pub polynomial: Option<PolynomialEvaluation>,
    /// Largest length examined.
    pub depth: usize,
}

/// `a(i, j)`: how many words of length `i` map to words of length `j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LengthTransfer {
    counts: BTreeMap<(usize, usize), u64>,
    max_len: usize,
}

impl LengthTransfer {
    /// Counts all domain words of length `1..=max_len`.
    pub fn compute(map: &PartialPathMap, max_len: usize) -> Self {
        let mut t = LengthTransfer::default();
        for len in 1..=max_len {
            t.extend(map, len);
        }
        t
    }

    fn extend(&mut self, map: &PartialPathMap, len: usize) {
        map.matrix().for_each_path(len, |w| {
            if let Some(j) = map.image_len(w) {
                *self.counts.entry((len, j)).or_insert(0) += 1;
            }
        });
        self.max_len = self.max_len.max(len);
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn a(&self, i: usize, j: usize) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn delta(&self, i: usize, j: usize) -> i64 {
        self.a(i, j) as i64 - self.a(j, i) as i64
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    /// `#(P_k ∩ Im) − #(P_k ∩ Dom)`; exact once `max_len ≥ k + propagation`.
    pub fn index_at(&self, k: usize) -> i64 {
        let image: u64 = self.counts.iter().filter(|((_, j), _)| *j == k).map(|(_, &c)| c).sum();
        let domain: u64 = self.counts.iter().filter(|((i, _), _)| *i == k).map(|(_, &c)| c).sum();
        image as i64 - domain as i64
    }
}

/// `max | |ν| − |μ| − 1 |` over all pairs: how far `Ψ̇` can move a length.
pub fn propagation(e: &GeometricEndomorphism) -> usize {
    e.all_pairs().map(|(_, nu, mu)| (nu.len() as i64 - mu.len() as i64 - 1).unsigned_abs() as usize).max().unwrap_or(0)
}

/// `Index_k`, enumerating lengths `k − N ..= k + N`.
pub fn index_at(map: &PartialPathMap, k: usize, propagation: usize) -> i64 {
    let mut image = 0i64;
    for len in k.saturating_sub(propagation).max(1)..=k + propagation {
        map.matrix().for_each_path(len, |w| {
            if map.image_len(w) == Some(k) {
                image += 1;
            }
        });
    }
    let mut domain = 0i64;
    map.matrix().for_each_path(k, |w| {
        if map.image_len(w).is_some() {
            domain += 1;
        }
    });
    image - domain
}

/// `γ_m = #{|x| > m ≥ |Ψ̇x|} − #{|x| ≤ m < |Ψ̇x|}`.
pub fn gamma(map: &PartialPathMap, m: usize, propagation: usize) -> i64 {
    let mut value = 0i64;
    for len in m + 1..=m + propagation {
        map.matrix().for_each_path(len, |w| {
            if matches!(map.image_len(w), Some(j) if j <= m) {
                value += 1;
            }
        });
    }
    for len in (m + 1).saturating_sub(propagation).max(1)..=m {
        map.matrix().for_each_path(len, |w| {
            if matches!(map.image_len(w), Some(j) if j > m) {
                value -= 1;
            }
        });
    }
    value
}

/// `Σ_{j≤D} (#(P_j \ Dom) − #(P_j \ Im))` with the image materialized.
///
/// Words no longer than the longest `μ` are first dropped from the domain;
/// from that length on `Ψ̇` is injective, since the image prefix `ν j`
/// determines the pair and the generator.
pub fn fredholm_index_truncated(map: &PartialPathMap, depth: usize, propagation: usize) -> i64 {
    fredholm_per_length(map, depth, propagation).iter().sum()
}

/// Shortest length on which `Ψ̇` is injective.
pub fn injective_from(map: &PartialPathMap) -> usize {
    map.pairs().map(|(_, _, mu)| mu.len() + 1).max().unwrap_or(1).max(map.depth())
}

fn fredholm_per_length(map: &PartialPathMap, depth: usize, propagation: usize) -> Vec<i64> {
    let shortest = injective_from(map);
    let mut image: BTreeSet<Vec<Letter>> = BTreeSet::new();
    for len in shortest..=depth + propagation {
        map.matrix().for_each_path(len, |w| {
            if let Some((nu, mu)) = map.matched_letters(w) {
                if nu.len() + len - mu.len() - 1 <= depth {
                    let mut img = Vec::with_capacity(nu.len() + len - mu.len());
                    img.extend_from_slice(nu.letters());
                    img.extend_from_slice(&w[mu.len()..]);
                    img.pop();
                    image.insert(img);
                }
            }
        });
    }
    let mut out = Vec::with_capacity(depth);
    for len in 1..=depth {
        let (mut outside_dom, mut outside_im) = (0i64, 0i64);
        map.matrix().for_each_path(len, |w| {
            if len < shortest || map.matched_letters(w).is_none() {
                outside_dom += 1;
            }
            if !image.contains(w) {
                outside_im += 1;
            }
        });
        out.push(outside_dom - outside_im);
    }
    out
}

/// Both halves of the closed formula at one `(m, N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialEvaluation {
    pub m: usize,
    pub n: usize,
    /// Words leaving `P_{≤m}` downwards: `Σ_{j=1..N} Σ_{shrink ≥ j} paths of length m + j`.
    pub positive: BigInt,
    /// Words leaving `P_{≤m}` upwards: `Σ_{j=0..N−1} Σ_{stretch ≥ j+1} paths of length m − j`.
    pub negative: BigInt,
    pub value: BigInt,
}

/// Smallest `m` at which every exponent of the closed formula is positive
/// and every counted word is long enough to be in the domain.
pub fn min_polynomial_m(e: &GeometricEndomorphism, n: usize) -> usize {
    let longest_mu = e.all_pairs().map(|(_, _, mu)| mu.len()).max().unwrap_or(0);
    (e.k().max(longest_mu + 1) + n).saturating_sub(1).max(1)
}

/// Evaluates `γ_m` from the presentation and powers of `A`.
///
/// A word of length `L` matched by the pair `(ν, μ)` of `t_i` begins with
/// `μ`, continues with a letter following both `t(ν)` and `t(μ)` and ends in
/// `i`; there are `Σ_{j ∈ F(ν)∩F(μ)} A^{L−|μ|−1}[j, i]` of them, which is
/// `A^{L−|μ|}[t(μ), i]` whenever every follower of `t(μ)` also follows
/// `t(ν)`.
pub fn index_polynomial(e: &GeometricEndomorphism, m: usize, n: usize) -> Result<PolynomialEvaluation, IndexError> {
    let prop = propagation(e);
    if n < prop {
        return Err(IndexError::PropagationTooSmall { n, propagation: prop });
    }
    let min_m = min_polynomial_m(e, n);
    if m < min_m {
        return Err(IndexError::ExponentUnderflow { m, min_m });
    }
    let a = e.matrix().to_int_matrix();
    let mut powers: Vec<IntMatrix> = Vec::with_capacity(m + n + 1);
    powers.push(IntMatrix::identity(a.rows()));
    let mut positive = BigInt::zero();
    let mut negative = BigInt::zero();
    let count = |powers: &mut Vec<IntMatrix>, len: usize, nu: &crate::sft::Word, mu: &crate::sft::Word, i: Letter| {
        let exp = len - mu.len() - 1;
        while powers.len() <= exp {
            let next = &powers[powers.len() - 1] * &a;
            powers.push(next);
        }
        let matrix = e.matrix();
        let p = &powers[exp];
        matrix
            .letters()
            .filter(|&j| matrix.follows(nu.last(), j) && matrix.follows(mu.last(), j))
            .fold(BigInt::zero(), |acc, j| acc + &p[(j as usize - 1, i as usize - 1)])
    };
    for (i, nu, mu) in e.all_pairs() {
        let change = nu.len() as i64 - mu.len() as i64 - 1;
        if change < 0 {
            let shrink = (-change) as usize;
            for j in 1..=n.min(shrink) {
                positive += count(&mut powers, m + j, nu, mu, i);
            }
        } else if change > 0 {
            let stretch = change as usize;
            for j in 0..n.min(stretch) {
                negative += count(&mut powers, m - j, nu, mu, i);
            }
        }
    }
    let value = &positive - &negative;
    Ok(PolynomialEvaluation { m, n, positive, negative, value })
}

fn require_valid(e: &GeometricEndomorphism) -> Result<(), IndexError> {
    if e.is_valid() {
        Ok(())
    } else {
        Err(IndexError::InvalidEndomorphism(e.validity().failures().join("; ")))
    }
}

/// First length from which per-length counts follow the recurrence of `A`.
pub fn stable_start(e: &GeometricEndomorphism) -> usize {
    let longest_mu = e.all_pairs().map(|(_, _, mu)| mu.len()).max().unwrap_or(0);
    e.k().max(longest_mu + 1) + propagation(e)
}

/// Number of consecutive vanishing `Index_k` that certifies stabilization.
pub fn stabilization_window(e: &GeometricEndomorphism) -> usize {
    (propagation(e) + 2).max(e.n())
}

/// Default bound on the enumerated length.
pub fn default_max_depth(e: &GeometricEndomorphism) -> usize {
    stable_start(e) + stabilization_window(e) + 2 * propagation(e) + 6
}

/// Runs one route and reports the stabilized index.
///
/// Past length `S + N`, where `S = max(k, longest μ + 1)` and `N` is the
/// propagation bound, every per-length count is a fixed combination of
/// entries of powers of `A`, so `Index_k` obeys a linear recurrence of order
/// `n`. The enumerating routes therefore stop at the first run of
/// `max(N + 2, n)` zeros beyond that length, which forces all later terms to
/// vanish; the series additionally requires `γ_m` to match its partial sums
/// at the last three lengths of the run. The closed formula likewise must
/// repeat its value `n + 1` times in a row; without an explicit `m` it
/// searches upwards from the smallest admissible value.
pub fn compute_index(
    e: &GeometricEndomorphism,
    method: IndexMethod,
    config: &IndexConfig,
) -> Result<IndexReport, IndexError> {
    require_valid(e)?;
    match method {
        IndexMethod::Series => series(e, config),
        IndexMethod::Gamma => gamma_route(e, config),
        IndexMethod::Polynomial => polynomial_route(e, config),
        IndexMethod::Fredholm => fredholm_route(e, config),
    }
}

/// The index by the cheapest route that scales to deep presentations.
pub fn stabilized_index(e: &GeometricEndomorphism) -> Result<i64, IndexError> {
    Ok(compute_index(e, IndexMethod::Polynomial, &IndexConfig::default())?.stabilized_value)
}

fn report(e: &GeometricEndomorphism, method: IndexMethod, depth: usize) -> IndexReport {
    IndexReport {
        method,
        k: e.k(),
        propagation: propagation(e),
        per_k: BTreeMap::new(),
        partial_sums: BTreeMap::new(),
        stabilized_value: 0,
        polynomial: None,
        depth,
    }
}

/// First `k ≥ from` such that `per_k[k..k + window]` are all zero.
fn zero_window(per_k: &BTreeMap<usize, i64>, window: usize, from: usize, upto: usize) -> Option<usize> {
    let mut run = 0;
    for k in from.max(1)..=upto {
        if per_k.get(&k).copied() == Some(0) {
            run += 1;
            if run == window {
                return Some(k + 1 - window);
            }
        } else {
            run = 0;
        }
    }
    None
}

fn series(e: &GeometricEndomorphism, config: &IndexConfig) -> Result<IndexReport, IndexError> {
    let map = e.path_map();
    let prop = propagation(e);
    let max_depth = config.max_depth.unwrap_or_else(|| default_max_depth(e));
    let (window, start) = (stabilization_window(e), stable_start(e));
    let mut rep = report(e, IndexMethod::Series, max_depth);
    let mut transfer = LengthTransfer::default();
    let mut sum = 0i64;
    for len in 1..=max_depth + prop {
        transfer.extend(&map, len);
        let Some(k) = len.checked_sub(prop).filter(|&k| k >= 1) else {
            continue;
        };
        let value = transfer.index_at(k);
        sum += value;
        rep.per_k.insert(k, value);
        rep.partial_sums.insert(k, sum);
        if let Some(first) = zero_window(&rep.per_k, window, start, k) {
            let last = first + window - 1;
            if (last.saturating_sub(2).max(1)..=last).all(|m| gamma(&map, m, prop) == rep.partial_sums[&m]) {
                rep.stabilized_value = sum;
                rep.depth = k;
                return Ok(rep);
            }
        }
    }
    Err(IndexError::NoStabilization { method: IndexMethod::Series, max_depth })
}

fn gamma_route(e: &GeometricEndomorphism, config: &IndexConfig) -> Result<IndexReport, IndexError> {
    let map = e.path_map();
    let prop = propagation(e);
    let max_depth = config.max_depth.unwrap_or_else(|| default_max_depth(e));
    let mut rep = report(e, IndexMethod::Gamma, max_depth);
    let mut previous = 0i64;
    for m in 1..=max_depth {
        let g = gamma(&map, m, prop);
        rep.partial_sums.insert(m, g);
        rep.per_k.insert(m, g - previous);
        previous = g;
        if zero_window(&rep.per_k, stabilization_window(e), stable_start(e), m).is_some() {
            rep.stabilized_value = g;
            rep.depth = m;
            return Ok(rep);
        }
    }
    Err(IndexError::NoStabilization { method: IndexMethod::Gamma, max_depth })
}

fn polynomial_route(e: &GeometricEndomorphism, config: &IndexConfig) -> Result<IndexReport, IndexError> {
    let prop = propagation(e);
    let n = config.n.unwrap_or(prop);
    let repeats = e.n() + 1;
    let to_i64 = |v: &BigInt| v.to_i64().ok_or(IndexError::Overflow);
    let (first, last) = match config.m {
        Some(m) => (m, m),
        None => {
            let min_m = min_polynomial_m(e, n);
            (min_m, config.max_depth.unwrap_or(min_m + 2 * (e.k() + n) + 10).max(min_m))
        }
    };
    let mut values: Vec<PolynomialEvaluation> = Vec::new();
    for m in first..last + repeats {
        values.push(index_polynomial(e, m, n)?);
        let tail = &values[values.len().saturating_sub(repeats)..];
        if tail.len() == repeats && tail.iter().all(|v| v.value == tail[0].value) {
            let mut rep = report(e, IndexMethod::Polynomial, m);
            for v in tail {
                rep.partial_sums.insert(v.m, to_i64(&v.value)?);
            }
            rep.stabilized_value = to_i64(&tail[0].value)?;
            rep.polynomial = Some(tail[0].clone());
            return Ok(rep);
        }
    }
    Err(IndexError::NoStabilization { method: IndexMethod::Polynomial, max_depth: last + repeats - 1 })
}

fn fredholm_route(e: &GeometricEndomorphism, config: &IndexConfig) -> Result<IndexReport, IndexError> {
    let map = e.path_map();
    let prop = propagation(e);
    let window = stabilization_window(e);
    let depth = config.depth.or(config.max_depth).unwrap_or(stable_start(e) + window - 1);
    let per = fredholm_per_length(&map, depth, prop);
    let mut rep = report(e, IndexMethod::Fredholm, depth);
    let mut sum = 0i64;
    for (j, v) in per.iter().enumerate() {
        sum += v;
        rep.per_k.insert(j + 1, *v);
        rep.partial_sums.insert(j + 1, sum);
    }
    let tail_zero = depth + 1 >= stable_start(e) + window && per[depth - window..].iter().all(|&v| v == 0);
    if !tail_zero {
        return Err(IndexError::NoStabilization { method: IndexMethod::Fredholm, max_depth: depth });
    }
    rep.stabilized_value = sum;
    Ok(rep)
}
