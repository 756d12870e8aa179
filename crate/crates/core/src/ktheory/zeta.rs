//! Rational generating functions: reconstruction from coefficients and the
//! closed form `Σ_{n≥1} tr(F^n) t^n` of a matrix.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::QMatrix;

/// Polynomial over `Q`, coefficients by increasing degree, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly(Vec<BigRational>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        Poly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0.iter().enumerate().skip(1).map(|(i, a)| a * BigRational::from_integer(BigInt::from(i))).collect(),
        )
    }

    /// Euclidean division.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.0[dd].clone();
        let mut rem = self.0.clone();
        let mut quot = vec![BigRational::zero(); rem.len().saturating_sub(dd).max(1)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let c = rem[rem.len() - 1].clone() / &lead;
            for (i, b) in divisor.0.iter().enumerate() {
                rem[shift + i] -= &c * b;
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    let mut first = true;
    for (i, c) in p.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let abs = c.abs();
        if first {
            if c.is_negative() {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if c.is_negative() { " - " } else { " + " })?;
        }
        first = false;
        let show_coeff = i == 0 || !abs.is_one();
        if show_coeff {
            write!(f, "{abs}")?;
        }
        match i {
            0 => {}
            1 => f.write_str("t")?,
            _ => write!(f, "t^{i}")?,
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self)
    }
}

/// `p(t) / q(t)` in lowest terms with `q(0) = 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalFunction {
    pub numerator: Poly,
    pub denominator: Poly,
}

impl RationalFunction {
    /// Reduces `p / q`; `q(0)` must be nonzero.
    pub fn new(p: Poly, q: Poly) -> Self {
        let g = p.gcd(&q);
        let (mut p, mut q) = if g.degree().unwrap_or(0) > 0 { (p.div_rem(&g).0, q.div_rem(&g).0) } else { (p, q) };
        let q0 = q.coeff(0);
        assert!(!q0.is_zero(), "denominator vanishes at t = 0");
        let inv = q0.recip();
        p = p.scale(&inv);
        q = q.scale(&inv);
        if p.is_zero() {
            q = Poly::constant(BigRational::one());
        }
        RationalFunction { numerator: p, denominator: q }
    }

    pub fn zero() -> Self {
        RationalFunction { numerator: Poly::default(), denominator: Poly::constant(BigRational::one()) }
    }

    /// First `len` Taylor coefficients at `t = 0`.
    pub fn series(&self, len: usize) -> Vec<BigRational> {
        let q = &self.denominator;
        let mut out: Vec<BigRational> = Vec::with_capacity(len);
        for k in 0..len {
            let mut c = self.numerator.coeff(k);
            for i in 1..=k.min(q.degree().unwrap_or(0)) {
                c -= q.coeff(i) * &out[k - i];
            }
            out.push(c / q.coeff(0));
        }
        out
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            self.numerator.mul(&other.denominator).add(&other.numerator.mul(&self.denominator)),
            self.denominator.mul(&other.denominator),
        )
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        let neg = RationalFunction {
            numerator: other.numerator.scale(&-BigRational::one()),
            denominator: other.denominator.clone(),
        };
        self.add(&neg)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |p: &Poly| -> String {
            let s = alloc::format!("{p}");
            if p.0.iter().filter(|c| !c.is_zero()).count() > 1 {
                alloc::format!("({s})")
            } else {
                s
            }
        };
        if self.denominator.degree() == Some(0) {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", wrap(&self.numerator), wrap(&self.denominator))
        }
    }
}

/// Padé approximant with `deg p ≤ dp`, `deg q ≤ dq`, `q(0) = 1`, matching
/// the first `dp + dq + 1` coefficients, if the linear system is solvable.
pub fn pade(coeffs: &[BigRational], dp: usize, dq: usize) -> Option<RationalFunction> {
    if coeffs.len() < dp + dq + 1 {
        return None;
    }
    let c = |i: isize| -> BigRational {
        if i < 0 {
            BigRational::zero()
        } else {
            coeffs[i as usize].clone()
        }
    };
    // Σ_{i=0..dq} q_i c_{k−i} = 0 for k = dp+1 ..= dp+dq, with q_0 = 1.
    let system = QMatrix::from_fn(dq, dq, |r, col| c((dp + 1 + r) as isize - (col + 1) as isize));
    let rhs: Vec<BigRational> = (0..dq).map(|r| -c((dp + 1 + r) as isize)).collect();
    let tail = if dq == 0 { Vec::new() } else { system.solve(&rhs)? };
    let mut q = vec![BigRational::one()];
    q.extend(tail);
    let q = Poly::new(q);
    let p = Poly::new(
        (0..=dp)
            .map(|k| (0..=dq.min(k)).fold(BigRational::zero(), |acc, i| acc + q.coeff(i) * c((k - i) as isize)))
            .collect(),
    );
    Some(RationalFunction::new(p, q))
}

/// `det(tI − F) = Σ c_i t^i` by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(f: &QMatrix) -> Poly {
    let n = f.rows();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = QMatrix::zeros(n, n);
    let id = QMatrix::identity(n);
    for k in 1..=n {
        let ck = &coeffs[n - k + 1];
        m = &(f * &m) + &id.map(|x| x * ck);
        let fm = f * &m;
        coeffs[n - k] = -fm.trace() / BigRational::from_integer(BigInt::from(k));
    }
    Poly::new(coeffs)
}

/// `Σ_{n≥0} tr(F^n) t^n = tr((I − tF)^{-1}) = (r·q − t·q′)/q` with
/// `q(t) = det(I − tF)`.
pub fn trace_series(f: &QMatrix) -> RationalFunction {
    let r = f.rows();
    let chi = characteristic_polynomial(f);
    // det(I − tF) = t^r χ(1/t): reverse the coefficients.
    let q = Poly::new((0..=r).map(|i| chi.coeff(r - i)).collect());
    let rr = BigRational::from_integer(BigInt::from(r));
    let t = Poly::new(vec![BigRational::zero(), BigRational::one()]);
    let numerator = q.scale(&rr).sub(&t.mul(&q.derivative()));
    RationalFunction::new(numerator, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn geometric_series() {
        let coeffs: Vec<BigRational> = [0, 1, 1, 1, 1, 1].iter().map(|&x| q(x)).collect();
        let r = pade(&coeffs, 1, 1).unwrap();
        assert_eq!(alloc::format!("{r}"), "t/(1 - t)");
        assert_eq!(r.series(9)[6..], [q(1), q(1), q(1)]);
    }

    #[test]
    fn charpoly_and_trace_series() {
        let f = QMatrix::from_rows(vec![vec![q(1), q(1)], vec![q(1), q(0)]]);
        let chi = characteristic_polynomial(&f);
        assert_eq!(chi, Poly::new(vec![q(-1), q(-1), q(1)]));
        // Lucas numbers
        let s = trace_series(&f).series(6);
        assert_eq!(s, vec![q(2), q(1), q(3), q(4), q(7), q(11)]);
    }

    #[test]
    fn gcd_reduction() {
        let p = Poly::new(vec![q(0), q(1), q(-1)]);
        let den = Poly::new(vec![q(1), q(-2), q(1)]);
        let r = RationalFunction::new(p, den);
        assert_eq!(alloc::format!("{r}"), "t/(1 - t)");
    }
}
