use cklef_core::graded::{
    contract_fundamental, dual_basis, dual_fundamental_class, graded_tensor_map, graded_trace, index_pairing,
    koszul_flip_check, random_map, random_pairing, random_vector, standard_pairing, tensor_vectors, GradedMap,
    GradedSpace, HomogeneousVector,
};
use cklef_core::ktheory::trace_series;
use cklef_core::linalg::QMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn random_space(rng: &mut ChaCha8Rng, max: usize) -> GradedSpace {
    let dim = rng.gen_range(1..=max);
    GradedSpace::from_parities((0..dim).map(|_| rng.gen_range(0..2u8)).collect())
}

fn sign(e: u8) -> BigRational {
    if e.is_multiple_of(2) {
        q(1)
    } else {
        q(-1)
    }
}

fn scale(v: &[BigRational], c: &BigRational) -> Vec<BigRational> {
    v.iter().map(|x| x * c).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_maps_compose_with_koszul_sign(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a0, b0) = (random_space(&mut rng, 3), random_space(&mut rng, 3));
        let (a1, b1) = (random_space(&mut rng, 3), random_space(&mut rng, 3));
        let (a2, b2) = (random_space(&mut rng, 3), random_space(&mut rng, 3));
        let degrees: Vec<u8> = (0..4).map(|_| rng.gen_range(0..2)).collect();
        let s1 = random_map(&mut rng, &a0, &a1, degrees[0]);
        let s2 = random_map(&mut rng, &b0, &b1, degrees[1]);
        let t1 = random_map(&mut rng, &a1, &a2, degrees[2]);
        let t2 = random_map(&mut rng, &b1, &b2, degrees[3]);
        let lhs = graded_tensor_map(&t1, &t2).compose(&graded_tensor_map(&s1, &s2)).unwrap();
        let s = sign(t1.degree() * s2.degree());
        let rhs = graded_tensor_map(&t1.compose(&s1).unwrap(), &t2.compose(&s2).unwrap());
        for x in 0..a0.dim() {
            for y in 0..b0.dim() {
                let (a, b) = (HomogeneousVector::basis(&a0, x), HomogeneousVector::basis(&b0, y));
                let input = tensor_vectors(&a.coords, &b.coords);
                prop_assert_eq!(lhs.apply(&input), scale(&rhs.apply(&input), &s));
                // direct evaluation of the definition on a ⊗ b
                let direct = scale(
                    &tensor_vectors(&s1.apply(&a.coords), &s2.apply(&b.coords)),
                    &sign(s1.degree() * b.parity),
                );
                prop_assert_eq!(graded_tensor_map(&s1, &s2).apply(&input), direct);
            }
        }
    }

    #[test]
    fn dual_bases_are_biorthogonal(seed in any::<u64>(), n in 0u8..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_pairing(&mut rng, 4, n);
        let d = dual_basis(&p).unwrap();
        for (i, x) in d.x.iter().enumerate() {
            for (j, xs) in d.x_star.iter().enumerate() {
                let expected = if i == j { q(1) } else { q(0) };
                prop_assert_eq!(p.eval(&x.coords, &xs.coords), expected);
            }
            prop_assert_eq!((x.parity + d.x_star[i].parity) % 2, n);
        }
        // inverse-matrix oracle per parity block
        for eps in 0..2u8 {
            let block = p.block(eps);
            if block.rows() > 0 {
                let inv = block.inverse().unwrap();
                prop_assert!((&block * &inv).is_identity());
            }
        }
    }

    #[test]
    fn dual_class_contracts_to_identity(seed in any::<u64>(), n in 0u8..2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_pairing(&mut rng, 4, n);
        let delta = dual_fundamental_class(&p).unwrap();
        prop_assert!(contract_fundamental(&p, &delta).is_identity());
    }

    #[test]
    fn supertrace_is_cyclic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v, w) = (random_space(&mut rng, 4), random_space(&mut rng, 4));
        let f = random_map(&mut rng, &v, &w, 0);
        let g = random_map(&mut rng, &w, &v, 0);
        prop_assert_eq!(
            graded_trace(&f.compose(&g).unwrap()).unwrap(),
            graded_trace(&g.compose(&f).unwrap()).unwrap()
        );
        let id = GradedMap::identity(&v);
        prop_assert_eq!(graded_trace(&id).unwrap(), q(v.d0() as i64 - v.d1() as i64));
    }

    #[test]
    fn model_zeta_is_rational(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = GradedSpace::new(rng.gen_range(0..=3), rng.gen_range(0..=3));
        let f = random_map(&mut rng, &v, &v, 0);
        let closed = trace_series(&f.block(0)).sub(&trace_series(&f.block(1)));
        let series = closed.series(9);
        for (n, c) in series.iter().enumerate() {
            prop_assert_eq!(c, &graded_trace(&f.pow(n as u32).unwrap()).unwrap());
        }
    }
}

#[test]
fn abstract_lefschetz_on_random_pairings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let n = (trial % 2) as u8;
        let p = random_pairing(&mut rng, 4, n);
        let f = random_map(&mut rng, p.second(), p.second(), 0);
        assert_eq!(index_pairing(&p, &f).unwrap(), graded_trace(&f).unwrap(), "trial {trial}");
    }
}

#[test]
fn gauss_bonnet_and_zero_map() {
    for (d0, d1) in [(0, 1), (1, 1), (2, 1), (3, 2)] {
        for n in 0..2u8 {
            let p = standard_pairing(d0, d1, n);
            let id = GradedMap::identity(p.second());
            let euler = q(p.second().d0() as i64 - p.second().d1() as i64);
            assert_eq!(index_pairing(&p, &id).unwrap(), euler);
            let zero = GradedMap::zero(p.second(), p.second(), 0);
            assert!(index_pairing(&p, &zero).unwrap().is_zero());
        }
    }
}

#[test]
fn koszul_lemma_on_random_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..500 {
        let (v, w) = (random_space(&mut rng, 3), random_space(&mut rng, 3));
        let (v2, w2) = (random_space(&mut rng, 3), random_space(&mut rng, 3));
        let (df, dg): (u8, u8) = (rng.gen_range(0..2), rng.gen_range(0..2));
        let f = random_map(&mut rng, &v, &v2, df);
        let g = random_map(&mut rng, &w, &w2, dg);
        let terms = rng.gen_range(1..=3);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..terms {
            let (pa, pb): (u8, u8) = (rng.gen_range(0..2), rng.gen_range(0..2));
            a.push(random_vector(&mut rng, &v, pa));
            b.push(random_vector(&mut rng, &w, pb));
        }
        assert!(koszul_flip_check(&a, &b, &f, &g).unwrap());
    }
}

#[test]
fn odd_odd_flip_carries_a_sign() {
    let s = GradedSpace::new(0, 1);
    let odd_to_even = GradedMap::new(s.clone(), GradedSpace::new(1, 0), 1, QMatrix::identity(1)).unwrap();
    let b = HomogeneousVector::basis(&s, 0);
    let t = graded_tensor_map(&odd_to_even, &GradedMap::identity(&s));
    assert_eq!(t.apply(&tensor_vectors(&b.coords, &b.coords)), vec![-BigRational::one()]);
    assert!(koszul_flip_check(
        std::slice::from_ref(&b),
        std::slice::from_ref(&b),
        &odd_to_even,
        &GradedMap::identity(&s)
    )
    .unwrap());
}

#[test]
fn pairing_transpose_swaps_roles_with_sign() {
    // the transposed form pairs the second space with the first
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 0..2u8 {
        for _ in 0..20 {
            let p = random_pairing(&mut rng, 3, n);
            let t =
                cklef_core::graded::GradedPairing::new(p.second().clone(), p.first().clone(), n, p.form().transpose())
                    .unwrap();
            let delta = dual_fundamental_class(&t).unwrap();
            assert!(contract_fundamental(&t, &delta).is_identity());
            let f = random_map(&mut rng, p.first(), p.first(), 0);
            assert_eq!(index_pairing(&t, &f).unwrap(), graded_trace(&f).unwrap());
        }
    }
}
