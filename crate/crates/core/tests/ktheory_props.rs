mod common;

use std::sync::Arc;

use cklef_core::index::stabilized_index;
use cklef_core::ktheory::{
    cylinder_class_vector, induced_k0, lefschetz_number, smith_normal_form, zeta_coefficients, zeta_from_traces,
    zeta_reconstruct,
};
use cklef_core::linalg::{IntMatrix, QMatrix};
use cklef_core::random::{sample, SamplerConfig};
use cklef_core::{GeometricEndomorphism, KTheoryData, LefschetzMode, TransitionMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{corpus, main_example, main_matrix, matrices, matrix};

fn int_matrix(rows: usize, cols: usize, entries: &[i64]) -> IntMatrix {
    IntMatrix::from_fn(rows, cols, |r, c| BigInt::from(entries[r * cols + c]))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// `gcd` of all `k × k` minors.
fn determinantal_divisor(m: &IntMatrix, k: usize) -> BigInt {
    let mut g = BigInt::zero();
    for rows in subsets(m.rows(), k) {
        for cols in subsets(m.cols(), k) {
            g = g.gcd(&m.select(&rows, &cols).determinant());
        }
    }
    g
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn smith_contract(rows in 1usize..=5, cols in 1usize..=5, entries in proptest::collection::vec(-3i64..=3, 25)) {
        let m = int_matrix(rows, cols, &entries);
        let s = smith_normal_form(&m);
        prop_assert_eq!(&(&s.u * &m) * &s.v, s.d.clone());
        prop_assert_eq!(s.u.determinant().abs(), BigInt::one());
        prop_assert_eq!(s.v.determinant().abs(), BigInt::one());
        for r in 0..rows {
            for c in 0..cols {
                prop_assert!(r == c || s.d[(r, c)].is_zero());
            }
        }
        let factors: Vec<BigInt> = s.invariant_factors().cloned().collect();
        prop_assert!(factors.iter().all(|d| !d.is_negative()));
        for pair in factors.windows(2) {
            prop_assert!(pair[1].is_zero() || (!pair[0].is_zero() && pair[1].is_multiple_of(&pair[0])));
        }
        let mut product = BigInt::one();
        for (k, d) in factors.iter().enumerate() {
            product *= d;
            prop_assert_eq!(&product, &determinantal_divisor(&m, k + 1));
        }
    }

    #[test]
    fn relations_do_not_change_classes(seed in any::<u64>()) {
        let all = matrices();
        let a = &all[(seed % all.len() as u64) as usize];
        let k = KTheoryData::new(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = a.n();
        let v: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-5..=5))).collect();
        let x: Vec<BigInt> = (0..n).map(|_| BigInt::from(rng.gen_range(-5..=5))).collect();
        let shifted: Vec<BigInt> = v.iter().zip(k.relations().mul_vec(&x)).map(|(a, b)| a + b).collect();
        prop_assert!(k.k0_reduce(&v).same_reduction(&k.k0_reduce(&shifted)));
    }

    #[test]
    fn refinement_keeps_cylinder_classes(seed in any::<u64>(), extra in 1usize..4) {
        let all = matrices();
        let a = &all[(seed % all.len() as u64) as usize];
        let k = KTheoryData::new(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(0..3);
        let paths = a.enumerate_paths(len.max(1));
        let base = if len == 0 { cklef_core::Word::empty() } else { paths[rng.gen_range(0..paths.len())].clone() };
        let refined: Vec<_> = a
            .enumerate_paths(base.len() + extra)
            .into_iter()
            .filter(|w| w.starts_with(&base))
            .collect();
        let coarse = cylinder_class_vector(a, std::slice::from_ref(&base));
        let fine = cylinder_class_vector(a, &refined);
        prop_assert!(k.k0_reduce(&coarse).same_reduction(&k.k0_reduce(&fine)));
    }

    #[test]
    fn induced_map_is_functorial(seed in any::<u64>()) {
        let all = [main_matrix(), matrix(&[&[1, 1], &[1, 0]]), matrix(&[&[0, 1], &[1, 1]]), matrix(&[&[1]])];
        let a = &all[(seed % all.len() as u64) as usize];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (e, _) = sample(&mut rng, a, &SamplerConfig::default()).unwrap();
        let (f, _) = sample(&mut rng, a, &SamplerConfig::default()).unwrap();
        let k = KTheoryData::new(a);
        let ef = e.compose(&f).unwrap();
        let lhs = induced_k0(&k, &ef).unwrap().m0;
        let rhs = &induced_k0(&k, &e).unwrap().m0 * &induced_k0(&k, &f).unwrap().m0;
        prop_assert_eq!(lhs, rhs);
    }
}

fn trace_power(m: &QMatrix, n: u32) -> BigRational {
    if m.rows() == 0 {
        BigRational::zero()
    } else {
        m.pow(n).trace()
    }
}

#[test]
fn lefschetz_predicts_powers_on_corpus() {
    for (name, e) in corpus() {
        let k = KTheoryData::new(e.matrix());
        if k.rank_k1() > 1 {
            continue;
        }
        let m0 = induced_k0(&k, &e).unwrap().m0;
        let index = stabilized_index(&e).unwrap();
        let m1 = if k.rank_k1() == 0 {
            QMatrix::zeros(0, 0)
        } else {
            QMatrix::from_rows(vec![vec![trace_power(&m0, 1) - q(index)]])
        };
        let report = lefschetz_number(&k, &e, &LefschetzMode::Supplied(m1.clone())).unwrap();
        assert_eq!(report.lefschetz, q(index), "{name}");
        for n in 2..=4u32 {
            let predicted = trace_power(&m0, n) - trace_power(&m1, n);
            let actual = q(stabilized_index(&e.power(n).unwrap()).unwrap());
            assert_eq!(actual, predicted, "{name}, n = {n}");
        }
    }
}

#[test]
fn two_routes_agree_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in matrices() {
        let k = KTheoryData::new(&a);
        for _ in 0..5 {
            let (e, _) = sample(&mut rng, &a, &SamplerConfig::default()).unwrap();
            induced_k0(&k, &e).unwrap();
        }
    }
}

#[test]
fn main_zeta_predicts_held_out_terms() {
    let e = main_example();
    let k = KTheoryData::new(e.matrix());
    let coeffs = zeta_coefficients(&k, &e, 5).unwrap();
    assert_eq!(coeffs, vec![0, 1, 1, 1, 1, 1]);
    let z = zeta_reconstruct(&coeffs, k.rank_k0_free() + k.rank_k1()).unwrap();
    assert_eq!(z.to_string(), "t/(1 - t)");
    let longer = zeta_coefficients(&k, &e, 8).unwrap();
    let predicted: Vec<BigRational> = z.series(9);
    assert_eq!(predicted, longer.iter().map(|&c| q(c)).collect::<Vec<_>>());
    let m0 = induced_k0(&k, &e).unwrap().m0;
    assert_eq!(zeta_from_traces(&m0, &QMatrix::zeros(1, 1)), z);
}

#[test]
fn vanishing_zeta_functions() {
    let a = main_matrix();
    let k = KTheoryData::new(&a);
    let id = GeometricEndomorphism::identity(&a);
    let coeffs = zeta_coefficients(&k, &id, 5).unwrap();
    assert!(coeffs.iter().all(|&c| c == 0));
    assert!(zeta_reconstruct(&coeffs, 2).unwrap().numerator.is_zero());
    let full: Arc<TransitionMatrix> = matrix(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]);
    let k = KTheoryData::new(&full);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let (e, _) = sample(&mut rng, &full, &SamplerConfig::default()).unwrap();
        assert!(zeta_coefficients(&k, &e, 4).unwrap().iter().all(|&c| c == 0));
        let report = lefschetz_number(&k, &e, &LefschetzMode::Supplied(QMatrix::zeros(0, 0))).unwrap();
        assert!(report.lefschetz.is_zero());
    }
}
