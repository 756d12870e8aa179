//! K-theory of `O_A`, the map induced on `K_0` by a geometric
//! endomorphism, Lefschetz numbers and zeta functions.
//!
//! `K_0(O_A) = Z^n / (I − Aᵀ)Z^n` with generators `e_i = [s_i s_i*]`, and
//! `K_1(O_A) = ker(I − Aᵀ)`. Both are read off the Smith decomposition
//! `U (I − Aᵀ) V = D`: a vector `v` reduces to `(U v)_i mod d_i` in the
//! torsion coordinates and to `(U v)_i` in the free ones.

mod snf;
mod zeta;

pub use snf::{smith_normal_form, SmithDecomposition};
pub use zeta::{characteristic_polynomial, pade, trace_series, Poly, RationalFunction};

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::endo::{EndoError, GeometricEndomorphism};
use crate::index::{stabilized_index, IndexError};
use crate::linalg::{IntMatrix, QMatrix};
use crate::sft::{same_matrix, Letter, TransitionMatrix, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KTheoryError {
    #[error("endomorphism fails the Cuntz-Krieger relations: {0}")]
    InvalidEndomorphism(String),
    #[error("endomorphism and K-theory data use different transition matrices")]
    MatrixMismatch,
    #[error("induced map does not preserve the relation of generator {generator}")]
    WellDefinednessFailure { generator: Letter },
    #[error("generator {generator}: pair-terminus and support classes differ")]
    SupportRouteMismatch { generator: Letter },
    #[error("K_1 action must be {expected}×{expected}, got {rows}×{cols}")]
    DimensionMismatch { expected: usize, rows: usize, cols: usize },
    #[error("no rational function of degree ≤ {degree_bound} reproduces the coefficients")]
    ReconstructionInconsistent { degree_bound: usize },
    #[error("{got} coefficients supplied, at least {needed} required")]
    InsufficientCoefficients { needed: usize, got: usize },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Endo(#[from] EndoError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Class of an integer vector in `K_0`, in the coordinates of the Smith basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KZeroClass {
    pub vector: Vec<BigInt>,
    /// `(U v)_i mod d_i`, one entry per invariant factor `d_i > 1`.
    pub torsion: Vec<BigInt>,
    /// `(U v)_i`, one entry per zero invariant factor.
    pub free: Vec<BigInt>,
}

impl KZeroClass {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().chain(&self.free).all(Zero::is_zero)
    }

    /// Same class as `other`.
    pub fn same_reduction(&self, other: &KZeroClass) -> bool {
        self.torsion == other.torsion && self.free == other.free
    }
}

/// How a generator class relates to the earlier generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorRelation {
    Zero,
    Multiple { of: Letter, factor: BigInt },
    Independent,
}

#[derive(Clone, Debug)]
pub struct KTheoryData {
    matrix: Arc<TransitionMatrix>,
    relations: IntMatrix,
    smith: SmithDecomposition,
    u_inverse: IntMatrix,
    torsion: Vec<(usize, BigInt)>,
    free: Vec<usize>,
}

impl KTheoryData {
    pub fn new(matrix: &Arc<TransitionMatrix>) -> Self {
        let n = matrix.n();
        let a = matrix.to_int_matrix();
        let relations = &IntMatrix::identity(n) - &a.transpose();
        let smith = smith_normal_form(&relations);
        let inv = smith.u.to_rational().inverse().expect("unimodular");
        let u_inverse = inv.map(|x| x.to_integer());
        let mut torsion = Vec::new();
        let mut free = Vec::new();
        for (i, d) in smith.invariant_factors().enumerate() {
            if d.is_zero() {
                free.push(i);
            } else if !d.is_one() {
                torsion.push((i, d.clone()));
            }
        }
        KTheoryData { matrix: Arc::clone(matrix), relations, smith, u_inverse, torsion, free }
    }

    pub fn matrix(&self) -> &Arc<TransitionMatrix> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// `I − Aᵀ`; column `a` is the relation `e_a = Σ_j A[a, j] e_j`.
    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn smith(&self) -> &SmithDecomposition {
        &self.smith
    }

    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.smith.invariant_factors().cloned().collect()
    }

    /// Orders of the cyclic torsion summands of `K_0`.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.torsion.iter().map(|(_, d)| d.clone()).collect()
    }

    pub fn rank_k0_free(&self) -> usize {
        self.free.len()
    }

    pub fn rank_k1(&self) -> usize {
        self.free.len()
    }

    /// Basis of `K_1 = ker(I − Aᵀ)`: the columns of `V` at zero invariant factors.
    pub fn k1_basis(&self) -> Vec<Vec<BigInt>> {
        self.free.iter().map(|&i| self.smith.v.column(i)).collect()
    }

    pub fn k0_reduce(&self, v: &[BigInt]) -> KZeroClass {
        assert_eq!(v.len(), self.n(), "vector length must match the alphabet");
        let uv = self.smith.u.mul_vec(v);
        KZeroClass {
            vector: v.to_vec(),
            torsion: self.torsion.iter().map(|(i, d)| modulo(&uv[*i], d)).collect(),
            free: self.free.iter().map(|&i| uv[i].clone()).collect(),
        }
    }

    /// Class of `e_i = [s_i s_i*]`.
    pub fn generator_class(&self, i: Letter) -> KZeroClass {
        self.k0_reduce(&unit_vector(self.n(), i as usize - 1))
    }

    /// Each generator expressed through the earlier ones where possible.
    pub fn generator_relations(&self) -> Vec<GeneratorRelation> {
        let classes: Vec<KZeroClass> = self.matrix.letters().map(|i| self.generator_class(i)).collect();
        let bound = self.torsion.iter().map(|(_, d)| d.clone()).max().unwrap_or_else(BigInt::one);
        let mut out = Vec::with_capacity(classes.len());
        for (i, c) in classes.iter().enumerate() {
            if c.is_zero() {
                out.push(GeneratorRelation::Zero);
                continue;
            }
            let found = (0..i).filter(|&j| !classes[j].is_zero()).find_map(|j| {
                self.multiple_of(c, &classes[j], &bound)
                    .map(|factor| GeneratorRelation::Multiple { of: j as Letter + 1, factor })
            });
            out.push(found.unwrap_or(GeneratorRelation::Independent));
        }
        out
    }

    fn multiple_of(&self, c: &KZeroClass, base: &KZeroClass, bound: &BigInt) -> Option<BigInt> {
        let candidates: Vec<BigInt> = match base.free.iter().position(|x| !x.is_zero()) {
            Some(p) => {
                if !(&c.free[p] % &base.free[p]).is_zero() {
                    return None;
                }
                vec![&c.free[p] / &base.free[p]]
            }
            None => {
                let top = bound.to_i64().unwrap_or(1);
                (1..top).flat_map(|f| [BigInt::from(f), BigInt::from(-f)]).collect()
            }
        };
        candidates.into_iter().find(|f| {
            let v: Vec<BigInt> = c.vector.iter().zip(&base.vector).map(|(x, y)| x - f * y).collect();
            self.k0_reduce(&v).is_zero()
        })
    }

    /// `Z`, `Z^r` or `0` for the free part, and the torsion summands.
    pub fn describe_k0(&self) -> String {
        let torsion = if self.torsion.is_empty() {
            String::from("no torsion")
        } else {
            self.torsion.iter().map(|(_, d)| format!("Z/{d}")).collect::<Vec<_>>().join(" + ")
        };
        format!("{} (+ {torsion})", free_group(self.rank_k0_free()))
    }

    pub fn describe_k1(&self) -> String {
        free_group(self.rank_k1())
    }

    /// The one-line summary, e.g. `K0 = Z (+ no torsion), K1 = Z; [s2 s2*] = 0`.
    pub fn summary(&self) -> String {
        let mut out = format!("K0 = {}, K1 = {}", self.describe_k0(), self.describe_k1());
        for (i, rel) in self.generator_relations().iter().enumerate() {
            let i = i + 1;
            match rel {
                GeneratorRelation::Zero => out.push_str(&format!("; [s{i} s{i}*] = 0")),
                GeneratorRelation::Multiple { of, factor } => {
                    let coeff = if factor.is_one() {
                        String::new()
                    } else if *factor == BigInt::from(-1) {
                        String::from("−")
                    } else if factor.is_negative() {
                        format!("−{}", factor.abs())
                    } else {
                        format!("{factor}")
                    };
                    out.push_str(&format!("; [s{i} s{i}*] = {coeff}[s{of} s{of}*]"));
                }
                GeneratorRelation::Independent => {}
            }
        }
        out
    }

    /// Rational matrix of an integer map `N` on the free part of `K_0`.
    /// Column `r` is the free coordinate vector of `N · U⁻¹ e_r`.
    pub fn free_part(&self, map: &IntMatrix) -> QMatrix {
        let r = self.free.len();
        let mut out = QMatrix::zeros(r, r);
        for (col, &p) in self.free.iter().enumerate() {
            let lift = self.u_inverse.column(p);
            let image = self.k0_reduce(&map.mul_vec(&lift));
            for (row, x) in image.free.iter().enumerate() {
                out[(row, col)] = BigRational::from_integer(x.clone());
            }
        }
        out
    }
}

impl fmt::Display for KTheoryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.summary())
    }
}

pub fn k_groups(matrix: &Arc<TransitionMatrix>) -> KTheoryData {
    KTheoryData::new(matrix)
}

fn free_group(rank: usize) -> String {
    match rank {
        0 => String::from("0"),
        1 => String::from("Z"),
        r => format!("Z^{r}"),
    }
}

fn modulo(x: &BigInt, d: &BigInt) -> BigInt {
    let r = x % d;
    if r.is_negative() {
        r + d
    } else {
        r
    }
}

fn unit_vector(n: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); n];
    v[i] = BigInt::one();
    v
}

/// `Σ_{w} e_{t(w)}` over disjoint cylinder words; the empty word is the unit.
pub fn cylinder_class_vector(matrix: &TransitionMatrix, words: &[Word]) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); matrix.n()];
    for w in words {
        match w.last() {
            Some(t) => v[t as usize - 1] += 1,
            None => v.iter_mut().for_each(|x| *x += 1),
        }
    }
    v
}

/// The map on `K_0` induced by a geometric endomorphism.
#[derive(Clone, Debug)]
pub struct InducedK0 {
    /// Column `i` is the vector of `[t_i t_i*]`.
    pub matrix: IntMatrix,
    /// Action on `K_0 ⊗ Q` in the free Smith coordinates.
    pub m0: QMatrix,
}

/// `[t_i t_i*] = Σ_{(ν, μ)} Σ_{j ∈ F(t(ν)) ∩ F(t(μ))} e_j` over the pairs as entered,
/// checked against the support of `t_i t_i*` and against the relations.
pub fn induced_k0(data: &KTheoryData, e: &GeometricEndomorphism) -> Result<InducedK0, KTheoryError> {
    if !same_matrix(data.matrix(), e.matrix()) {
        return Err(KTheoryError::MatrixMismatch);
    }
    if !e.is_valid() {
        return Err(KTheoryError::InvalidEndomorphism(e.validity().failures().join("; ")));
    }
    let a = data.matrix();
    let n = a.n();
    let mut matrix = IntMatrix::zeros(n, n);
    for i in a.letters() {
        let col = i as usize - 1;
        for (nu, mu) in e.raw_pairs(i) {
            for j in a.letters().filter(|&j| a.follows(nu.last(), j) && a.follows(mu.last(), j)) {
                matrix[(j as usize - 1, col)] += 1;
            }
        }
        let t = e.image(i);
        let projection = t * &t.adjoint();
        let support = cylinder_class_vector(a, &projection.cylinder_words()?);
        if !data.k0_reduce(&matrix.column(col)).same_reduction(&data.k0_reduce(&support)) {
            return Err(KTheoryError::SupportRouteMismatch { generator: i });
        }
    }
    for g in a.letters() {
        let image = matrix.mul_vec(&data.relations().column(g as usize - 1));
        if !data.k0_reduce(&image).is_zero() {
            return Err(KTheoryError::WellDefinednessFailure { generator: g });
        }
    }
    let m0 = data.free_part(&matrix);
    Ok(InducedK0 { matrix, m0 })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LefschetzMode {
    /// The `K_1` action is given.
    Supplied(QMatrix),
    /// `tr(M_1)` is inferred from the index; not an independent check.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LefschetzReport {
    pub derived: bool,
    pub trace_k0: BigRational,
    pub trace_k1: BigRational,
    pub lefschetz: BigRational,
    /// Stabilized index, computed in derived mode only.
    pub index: Option<i64>,
}

pub fn lefschetz_number(
    data: &KTheoryData,
    e: &GeometricEndomorphism,
    mode: &LefschetzMode,
) -> Result<LefschetzReport, KTheoryError> {
    let induced = induced_k0(data, e)?;
    let trace_k0 = if induced.m0.rows() == 0 { BigRational::zero() } else { induced.m0.trace() };
    match mode {
        LefschetzMode::Supplied(m1) => {
            let expected = data.rank_k1();
            if m1.rows() != expected || m1.cols() != expected {
                return Err(KTheoryError::DimensionMismatch { expected, rows: m1.rows(), cols: m1.cols() });
            }
            let trace_k1 = if expected == 0 { BigRational::zero() } else { m1.trace() };
            Ok(LefschetzReport { derived: false, lefschetz: &trace_k0 - &trace_k1, trace_k0, trace_k1, index: None })
        }
        LefschetzMode::Derived => {
            let index = stabilized_index(e)?;
            let value = BigRational::from_integer(BigInt::from(index));
            Ok(LefschetzReport {
                derived: true,
                trace_k1: &trace_k0 - &value,
                trace_k0,
                lefschetz: value,
                index: Some(index),
            })
        }
    }
}

/// `c_0 = rank K_0 ⊗ Q − rank K_1`, `c_n` the stabilized index of `E^n`.
pub fn zeta_coefficients(data: &KTheoryData, e: &GeometricEndomorphism, n_max: u32) -> Result<Vec<i64>, KTheoryError> {
    if !e.is_valid() {
        return Err(KTheoryError::InvalidEndomorphism(e.validity().failures().join("; ")));
    }
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(data.rank_k0_free() as i64 - data.rank_k1() as i64);
    let mut power = e.clone();
    for n in 1..=n_max {
        if n > 1 {
            power = e.compose(&power)?;
        }
        out.push(stabilized_index(&power)?);
    }
    Ok(out)
}

/// Lowest-degree `p/q` with `deg p, deg q ≤ d ≤ degree_bound` matching every
/// coefficient, fitted on the first `2d + 1` and confirmed on at least two more.
pub fn zeta_reconstruct(coeffs: &[i64], degree_bound: usize) -> Result<RationalFunction, KTheoryError> {
    let values: Vec<BigRational> = coeffs.iter().map(|&c| BigRational::from_integer(BigInt::from(c))).collect();
    for d in 0..=degree_bound {
        let fit = 2 * d + 1;
        if values.len() < fit + 2 {
            return Err(KTheoryError::InsufficientCoefficients { needed: fit + 2, got: values.len() });
        }
        if let Some(r) = pade(&values[..fit], d, d) {
            if r.series(values.len()) == values {
                return Ok(r);
            }
        }
    }
    Err(KTheoryError::ReconstructionInconsistent { degree_bound })
}

/// `tr((I − tM_0)^{-1}) − tr((I − tM_1)^{-1})`.
pub fn zeta_from_traces(m0: &QMatrix, m1: &QMatrix) -> RationalFunction {
    trace_series(m0).sub(&trace_series(m1))
}
