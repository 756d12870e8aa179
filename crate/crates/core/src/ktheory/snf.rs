//! Smith normal form over the integers.

use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::linalg::IntMatrix;

/// `U · M · V = D` with `U`, `V` unimodular and `D` diagonal,
/// `d_1 | d_2 | …`, all `d_i ≥ 0` and zeros last.
#[derive(Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub d: IntMatrix,
}

impl SmithDecomposition {
    pub fn invariant_factors(&self) -> impl Iterator<Item = &BigInt> + '_ {
        (0..self.d.rows().min(self.d.cols())).map(|i| &self.d[(i, i)])
    }

    /// Positions of the zero diagonal entries, including the rows or
    /// columns beyond the diagonal of a non-square matrix.
    pub fn zero_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.d.rows()).filter(|&i| i >= self.d.cols() || self.d[(i, i)].is_zero())
    }
}

impl fmt::Debug for SmithDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmithDecomposition {{ u: {}, d: {}, v: {} }}", self.u, self.d, self.v)
    }
}

fn add_row_multiple(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    for c in 0..m.cols() {
        let delta = q * &m[(source, c)];
        m[(target, c)] += delta;
    }
}

fn add_col_multiple(m: &mut IntMatrix, target: usize, source: usize, q: &BigInt) {
    for r in 0..m.rows() {
        let delta = q * &m[(r, source)];
        m[(r, target)] += delta;
    }
}

/// Deterministic reduction: at each step the pivot is the first entry of
/// smallest absolute value (row-major) in the remaining block.
pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    for t in 0..rows.min(cols) {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for r in t..rows {
                for c in t..cols {
                    if !d[(r, c)].is_zero() && pivot.is_none_or(|(pr, pc)| d[(r, c)].abs() < d[(pr, pc)].abs()) {
                        pivot = Some((r, c));
                    }
                }
            }
            let Some((pr, pc)) = pivot else {
                return finish(u, d, v);
            };
            d.swap_rows(t, pr);
            u.swap_rows(t, pr);
            d.swap_cols(t, pc);
            v.swap_cols(t, pc);
            let mut clean = true;
            for r in t + 1..rows {
                let q = -d[(r, t)].div_floor(&d[(t, t)]);
                add_row_multiple(&mut d, r, t, &q);
                add_row_multiple(&mut u, r, t, &q);
                clean &= d[(r, t)].is_zero();
            }
            for c in t + 1..cols {
                let q = -d[(t, c)].div_floor(&d[(t, t)]);
                add_col_multiple(&mut d, c, t, &q);
                add_col_multiple(&mut v, c, t, &q);
                clean &= d[(t, c)].is_zero();
            }
            if !clean {
                continue;
            }
            let stray = (t + 1..rows).find(|&r| (t + 1..cols).any(|c| !d[(r, c)].is_multiple_of(&d[(t, t)])));
            match stray {
                Some(r) => {
                    let one = BigInt::from(1);
                    add_row_multiple(&mut d, t, r, &one);
                    add_row_multiple(&mut u, t, r, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            let minus = BigInt::from(-1);
            for c in 0..cols {
                d[(t, c)] = &d[(t, c)] * &minus;
            }
            for c in 0..rows {
                u[(t, c)] = &u[(t, c)] * &minus;
            }
        }
    }
    finish(u, d, v)
}

fn finish(u: IntMatrix, d: IntMatrix, v: IntMatrix) -> SmithDecomposition {
    SmithDecomposition { u, v, d }
}
