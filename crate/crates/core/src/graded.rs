//! Finite-dimensional `Z/2`-graded vector spaces over `Q`.
//!
//! A space is a list of basis parities. Tensor products use the basis
//! `(a, b) ↦ a·dim W + b` with parity `∂a + ∂b`, and graded maps act by the
//! Koszul rule `(T₁ ⊗ T₂)(a ⊗ b) = (−1)^{∂T₁·∂b} T₁(a) ⊗ T₂(b)`.
//!
//! A pairing `(x | y) = xᵀ G y` between a first space `A` and a second
//! space `B` has shift `n` and vanishes unless `∂x + ∂y ≡ n`. For a
//! nondegenerate pairing the dual bases `x_{ε,i} ∈ A`, `x*_{n−ε,i} ∈ B`
//! satisfy `(x_{ε,i} | x*_{η,j}) = δ_{η,n−ε} δ_{ij}`, and the dual class is
//!
//! ```text
//! Δ̂′ = Σ_{ε,i} (−1)^{n−ε} x*_{n−ε,i} ⊗ x_{ε,i}  ∈ B ⊗ A.
//! ```

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::linalg::QMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("shapes do not match")]
    ShapeMismatch,
    #[error("map has odd degree")]
    NotDegreeZero,
    #[error("pairing is degenerate")]
    DegeneratePairing,
    #[error("entry ({row}, {col}) violates the grading")]
    NotHomogeneous { row: usize, col: usize },
}

fn sign(exponent: u8) -> BigRational {
    if exponent.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    parities: Vec<u8>,
}

impl GradedSpace {
    /// Even basis vectors first.
    pub fn new(d0: usize, d1: usize) -> Self {
        let mut parities = vec![0; d0];
        parities.resize(d0 + d1, 1);
        GradedSpace { parities }
    }

    pub fn from_parities(parities: Vec<u8>) -> Self {
        GradedSpace { parities: parities.into_iter().map(|p| p % 2).collect() }
    }

    pub fn dim(&self) -> usize {
        self.parities.len()
    }

    pub fn d0(&self) -> usize {
        self.indices(0).len()
    }

    pub fn d1(&self) -> usize {
        self.indices(1).len()
    }

    pub fn parity(&self, i: usize) -> u8 {
        self.parities[i]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parities
    }

    /// Basis positions of the given parity, in order.
    pub fn indices(&self, parity: u8) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.parities[i] == parity % 2).collect()
    }

    pub fn tensor(&self, other: &GradedSpace) -> GradedSpace {
        let mut parities = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.parities {
            for &b in &other.parities {
                parities.push((a + b) % 2);
            }
        }
        GradedSpace { parities }
    }
}

/// A vector supported on basis elements of one parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomogeneousVector {
    pub parity: u8,
    pub coords: Vec<BigRational>,
}

impl HomogeneousVector {
    pub fn new(space: &GradedSpace, parity: u8, coords: Vec<BigRational>) -> Result<Self, GradedError> {
        if coords.len() != space.dim() {
            return Err(GradedError::ShapeMismatch);
        }
        if let Some(i) = (0..coords.len()).find(|&i| space.parity(i) != parity % 2 && !coords[i].is_zero()) {
            return Err(GradedError::NotHomogeneous { row: i, col: 0 });
        }
        Ok(HomogeneousVector { parity: parity % 2, coords })
    }

    pub fn basis(space: &GradedSpace, i: usize) -> Self {
        let mut coords = vec![BigRational::zero(); space.dim()];
        coords[i] = BigRational::one();
        HomogeneousVector { parity: space.parity(i), coords }
    }
}

/// Outer product `a ⊗ b` in the tensor basis.
pub fn tensor_vectors(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: GradedSpace,
    target: GradedSpace,
    degree: u8,
    matrix: QMatrix,
}

impl GradedMap {
    pub fn new(source: GradedSpace, target: GradedSpace, degree: u8, matrix: QMatrix) -> Result<Self, GradedError> {
        if matrix.rows() != target.dim() || matrix.cols() != source.dim() {
            return Err(GradedError::ShapeMismatch);
        }
        let degree = degree % 2;
        for r in 0..matrix.rows() {
            for c in 0..matrix.cols() {
                if !matrix[(r, c)].is_zero() && target.parity(r) != (source.parity(c) + degree) % 2 {
                    return Err(GradedError::NotHomogeneous { row: r, col: c });
                }
            }
        }
        Ok(GradedMap { source, target, degree, matrix })
    }

    /// `blocks[ε]` maps the parity-`ε` part of the source to the
    /// parity-`ε + degree` part of the target.
    pub fn from_blocks(
        source: GradedSpace,
        target: GradedSpace,
        degree: u8,
        blocks: [QMatrix; 2],
    ) -> Result<Self, GradedError> {
        let degree = degree % 2;
        let mut matrix = QMatrix::zeros(target.dim(), source.dim());
        for (eps, block) in blocks.iter().enumerate() {
            let cols = source.indices(eps as u8);
            let rows = target.indices(eps as u8 + degree);
            if block.rows() != rows.len() || block.cols() != cols.len() {
                return Err(GradedError::ShapeMismatch);
            }
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    matrix[(r, c)] = block[(i, j)].clone();
                }
            }
        }
        Ok(GradedMap { source, target, degree, matrix })
    }

    pub fn identity(space: &GradedSpace) -> Self {
        GradedMap { source: space.clone(), target: space.clone(), degree: 0, matrix: QMatrix::identity(space.dim()) }
    }

    pub fn zero(source: &GradedSpace, target: &GradedSpace, degree: u8) -> Self {
        GradedMap {
            source: source.clone(),
            target: target.clone(),
            degree: degree % 2,
            matrix: QMatrix::zeros(target.dim(), source.dim()),
        }
    }

    pub fn source(&self) -> &GradedSpace {
        &self.source
    }

    pub fn target(&self) -> &GradedSpace {
        &self.target
    }

    pub fn degree(&self) -> u8 {
        self.degree
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.matrix
    }

    pub fn block(&self, parity: u8) -> QMatrix {
        let cols = self.source.indices(parity);
        let rows = self.target.indices(parity + self.degree);
        self.matrix.select(&rows, &cols)
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        self.matrix.mul_vec(v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> Result<GradedMap, GradedError> {
        if other.target != self.source {
            return Err(GradedError::ShapeMismatch);
        }
        Ok(GradedMap {
            source: other.source.clone(),
            target: self.target.clone(),
            degree: (self.degree + other.degree) % 2,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn pow(&self, n: u32) -> Result<GradedMap, GradedError> {
        if self.source != self.target {
            return Err(GradedError::ShapeMismatch);
        }
        let mut acc = GradedMap::identity(&self.source);
        for _ in 0..n {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// `(T₁ ⊗ T₂)(a ⊗ b) = (−1)^{∂T₁·∂b} T₁(a) ⊗ T₂(b)`.
pub fn graded_tensor_map(t1: &GradedMap, t2: &GradedMap) -> GradedMap {
    let source = t1.source.tensor(&t2.source);
    let target = t1.target.tensor(&t2.target);
    let (w_src, w_tgt) = (t2.source.dim(), t2.target.dim());
    let mut matrix = QMatrix::zeros(target.dim(), source.dim());
    for r1 in 0..t1.target.dim() {
        for c1 in 0..t1.source.dim() {
            let x = &t1.matrix[(r1, c1)];
            if x.is_zero() {
                continue;
            }
            for r2 in 0..w_tgt {
                for c2 in 0..w_src {
                    let y = &t2.matrix[(r2, c2)];
                    if y.is_zero() {
                        continue;
                    }
                    let s = sign(t1.degree * t2.source.parity(c2));
                    matrix[(r1 * w_tgt + r2, c1 * w_src + c2)] = s * x * y;
                }
            }
        }
    }
    GradedMap { source, target, degree: (t1.degree + t2.degree) % 2, matrix }
}

/// `tr(f_even) − tr(f_odd)`.
pub fn graded_trace(f: &GradedMap) -> Result<BigRational, GradedError> {
    if f.degree != 0 {
        return Err(GradedError::NotDegreeZero);
    }
    if f.source != f.target {
        return Err(GradedError::ShapeMismatch);
    }
    Ok((0..f.source.dim()).fold(BigRational::zero(), |acc, i| acc + sign(f.source.parity(i)) * &f.matrix[(i, i)]))
}

/// `(x | y) = xᵀ G y` for `x` in the first space and `y` in the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPairing {
    first: GradedSpace,
    second: GradedSpace,
    n: u8,
    form: QMatrix,
}

impl GradedPairing {
    /// Rejects entries pairing basis vectors whose parities do not sum to `n`.
    pub fn new(first: GradedSpace, second: GradedSpace, n: u8, form: QMatrix) -> Result<Self, GradedError> {
        if form.rows() != first.dim() || form.cols() != second.dim() {
            return Err(GradedError::ShapeMismatch);
        }
        let n = n % 2;
        for r in 0..form.rows() {
            for c in 0..form.cols() {
                if !form[(r, c)].is_zero() && (first.parity(r) + second.parity(c)) % 2 != n {
                    return Err(GradedError::NotHomogeneous { row: r, col: c });
                }
            }
        }
        Ok(GradedPairing { first, second, n, form })
    }

    pub fn first(&self) -> &GradedSpace {
        &self.first
    }

    pub fn second(&self) -> &GradedSpace {
        &self.second
    }

    pub fn shift(&self) -> u8 {
        self.n
    }

    pub fn form(&self) -> &QMatrix {
        &self.form
    }

    /// Pairing of parity `ε` in the first space with parity `n − ε` in the second.
    pub fn block(&self, eps: u8) -> QMatrix {
        self.form.select(&self.first.indices(eps), &self.second.indices(self.n + eps))
    }

    pub fn is_nondegenerate(&self) -> bool {
        (0..2u8).all(|eps| {
            let b = self.block(eps);
            b.rows() == b.cols() && (b.rows() == 0 || b.inverse().is_some())
        })
    }

    pub fn eval(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let gy = self.form.mul_vec(y);
        x.iter().zip(&gy).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    }
}

/// Entry `k` of `x` pairs with entry `k` of `x_star`; `x` runs through the
/// standard basis of the first space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualBases {
    pub x: Vec<HomogeneousVector>,
    pub x_star: Vec<HomogeneousVector>,
}

/// `x*_{n−ε,j}` solves `(x_{ε,i} | x*) = δ_{ij}` inside the parity-`(n−ε)` part.
pub fn dual_basis(p: &GradedPairing) -> Result<DualBases, GradedError> {
    if !p.is_nondegenerate() {
        return Err(GradedError::DegeneratePairing);
    }
    let mut x = Vec::new();
    let mut x_star = Vec::new();
    for eps in 0..2u8 {
        let block = p.block(eps);
        let rows = p.first.indices(eps);
        let cols = p.second.indices(p.n + eps);
        for (i, &r) in rows.iter().enumerate() {
            let mut rhs = vec![BigRational::zero(); rows.len()];
            rhs[i] = BigRational::one();
            let sol = block.solve(&rhs).ok_or(GradedError::DegeneratePairing)?;
            let mut coords = vec![BigRational::zero(); p.second.dim()];
            for (k, &c) in cols.iter().enumerate() {
                coords[c] = sol[k].clone();
            }
            x.push(HomogeneousVector::basis(&p.first, r));
            x_star.push(HomogeneousVector { parity: (p.n + eps) % 2, coords });
        }
    }
    Ok(DualBases { x, x_star })
}

/// An element of `second ⊗ first`: `Σ c[a, b] y_a ⊗ x_b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalTensor {
    pub n: u8,
    pub coefficients: QMatrix,
}

impl FundamentalTensor {
    pub fn as_vector(&self) -> Vec<BigRational> {
        let (rows, cols) = (self.coefficients.rows(), self.coefficients.cols());
        (0..rows * cols).map(|k| self.coefficients[(k / cols, k % cols)].clone()).collect()
    }
}

/// `Δ̂′ = Σ_{ε,i} (−1)^{n−ε} x*_{n−ε,i} ⊗ x_{ε,i}`.
pub fn dual_fundamental_class(p: &GradedPairing) -> Result<FundamentalTensor, GradedError> {
    let bases = dual_basis(p)?;
    let mut c = QMatrix::zeros(p.second.dim(), p.first.dim());
    for (x, xs) in bases.x.iter().zip(&bases.x_star) {
        let s = sign(p.n + x.parity);
        for (a, ya) in xs.coords.iter().enumerate() {
            for (b, xb) in x.coords.iter().enumerate() {
                c[(a, b)] += &s * ya * xb;
            }
        }
    }
    Ok(FundamentalTensor { n: p.n, coefficients: c })
}

/// The map `y ↦ Σ ± c[a, b] (x_b | y) y_a` on the second space, where moving
/// `y` (parity `γ`) past `x_b` and across the shift contributes
/// `(−1)^{∂x_b·γ + n·γ}`. Equals the identity for a dual class.
pub fn contract_fundamental(p: &GradedPairing, delta: &FundamentalTensor) -> QMatrix {
    let dim = p.second.dim();
    let mut out = QMatrix::zeros(dim, dim);
    for col in 0..dim {
        let y = HomogeneousVector::basis(&p.second, col);
        let gamma = y.parity;
        for b in 0..p.first.dim() {
            let xb = HomogeneousVector::basis(&p.first, b);
            let pairing = p.eval(&xb.coords, &y.coords);
            if pairing.is_zero() {
                continue;
            }
            let s = sign(xb.parity * gamma + p.n * gamma);
            for a in 0..dim {
                out[(a, col)] += &s * &delta.coefficients[(a, b)] * &pairing;
            }
        }
    }
    out
}

/// `Ind(Δ, f)`: apply `f ⊗ 1` to `Δ̂′` and contract `y ⊗ x ↦ (x | y)`.
pub fn index_pairing(p: &GradedPairing, f: &GradedMap) -> Result<BigRational, GradedError> {
    if f.degree != 0 {
        return Err(GradedError::NotDegreeZero);
    }
    if f.source != p.second || f.target != p.second {
        return Err(GradedError::ShapeMismatch);
    }
    let delta = dual_fundamental_class(p)?;
    let moved = graded_tensor_map(f, &GradedMap::identity(&p.first)).apply(&delta.as_vector());
    let cols = p.first.dim();
    Ok(moved.iter().enumerate().fold(BigRational::zero(), |acc, (k, c)| {
        let (a, b) = (k / cols, k % cols);
        acc + c * &p.form[(b, a)]
    }))
}

/// Both sides of `c ⊗ (f ⊗ g) = Σ (−1)^{∂b_i·∂f} (a_i ⊗ f) ⊗ (b_i ⊗ g)` for
/// `c = Σ a_i ⊗ b_i`, evaluated in the tensor basis.
pub fn koszul_flip_check(
    a: &[HomogeneousVector],
    b: &[HomogeneousVector],
    f: &GradedMap,
    g: &GradedMap,
) -> Result<bool, GradedError> {
    if a.len() != b.len() {
        return Err(GradedError::ShapeMismatch);
    }
    if a.iter().any(|x| x.coords.len() != f.source.dim()) || b.iter().any(|y| y.coords.len() != g.source.dim()) {
        return Err(GradedError::ShapeMismatch);
    }
    let mut c = vec![BigRational::zero(); f.source.dim() * g.source.dim()];
    let mut rhs = vec![BigRational::zero(); f.target.dim() * g.target.dim()];
    for (x, y) in a.iter().zip(b) {
        for (acc, v) in c.iter_mut().zip(tensor_vectors(&x.coords, &y.coords)) {
            *acc += v;
        }
        let s = sign(y.parity * f.degree);
        for (acc, v) in rhs.iter_mut().zip(tensor_vectors(&f.apply(&x.coords), &g.apply(&y.coords))) {
            *acc += &s * v;
        }
    }
    Ok(graded_tensor_map(f, g).apply(&c) == rhs)
}

fn random_rational<R: Rng + ?Sized>(rng: &mut R) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-4i64..=4)), BigInt::from(rng.gen_range(1i64..=3)))
}

/// Random homogeneous map of the given degree.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, source: &GradedSpace, target: &GradedSpace, degree: u8) -> GradedMap {
    let degree = degree % 2;
    let matrix = QMatrix::from_fn(target.dim(), source.dim(), |r, c| {
        if target.parity(r) == (source.parity(c) + degree) % 2 {
            random_rational(rng)
        } else {
            BigRational::zero()
        }
    });
    GradedMap { source: source.clone(), target: target.clone(), degree, matrix }
}

/// Random homogeneous vector of the given parity.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, space: &GradedSpace, parity: u8) -> HomogeneousVector {
    let coords = (0..space.dim())
        .map(|i| if space.parity(i) == parity % 2 { random_rational(rng) } else { BigRational::zero() })
        .collect();
    HomogeneousVector { parity: parity % 2, coords }
}

/// Random nondegenerate pairing with `d0, d1 ≤ max_dim` on the first space
/// and shuffled basis parities on both.
pub fn random_pairing<R: Rng + ?Sized>(rng: &mut R, max_dim: usize, n: u8) -> GradedPairing {
    let n = n % 2;
    loop {
        let d0 = rng.gen_range(0..=max_dim);
        let d1 = rng.gen_range(0..=max_dim);
        let first = shuffled_space(rng, d0, d1);
        let (e0, e1) = if n == 0 { (d0, d1) } else { (d1, d0) };
        let second = shuffled_space(rng, e0, e1);
        let form = QMatrix::from_fn(first.dim(), second.dim(), |r, c| {
            if (first.parity(r) + second.parity(c)) % 2 == n {
                random_rational(rng)
            } else {
                BigRational::zero()
            }
        });
        let p = GradedPairing { first, second, n, form };
        if p.is_nondegenerate() {
            return p;
        }
    }
}

fn shuffled_space<R: Rng + ?Sized>(rng: &mut R, d0: usize, d1: usize) -> GradedSpace {
    let mut parities = GradedSpace::new(d0, d1).parities;
    for i in (1..parities.len()).rev() {
        let j = rng.gen_range(0..=i);
        parities.swap(i, j);
    }
    GradedSpace { parities }
}

/// Identity blocks of sizes `(d0, d1)` against `(d_n, d_{n+1})`.
pub fn standard_pairing(d0: usize, d1: usize, n: u8) -> GradedPairing {
    let first = GradedSpace::new(d0, d1);
    let second = if n.is_multiple_of(2) { GradedSpace::new(d0, d1) } else { GradedSpace::new(d1, d0) };
    let form = QMatrix::from_fn(first.dim(), second.dim(), |r, c| {
        let (rp, cp) = (first.parity(r), second.parity(c));
        let ri = first.indices(rp).iter().position(|&x| x == r);
        let ci = second.indices(cp).iter().position(|&x| x == c);
        if (rp + cp) % 2 == n % 2 && ri == ci {
            q(1)
        } else {
            q(0)
        }
    });
    GradedPairing { first, second, n: n % 2, form }
}
