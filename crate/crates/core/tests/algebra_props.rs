mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use cklef_core::{Element, TransitionMatrix, Word};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::matrices;

fn random_word(rng: &mut ChaCha8Rng, a: &TransitionMatrix, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let last = letters.last().copied();
        let options: Vec<_> = a.followers(last).collect();
        letters.push(options[rng.gen_range(0..options.len())]);
    }
    Word::new(letters)
}

fn random_element(rng: &mut ChaCha8Rng, a: &Arc<TransitionMatrix>) -> Element {
    let count = rng.gen_range(1..=4);
    let terms: Vec<_> =
        (0..count).map(|_| (random_word(rng, a, 3), random_word(rng, a, 3), rng.gen_range(-2i64..=2))).collect();
    Element::from_terms(a, terms).unwrap()
}

fn pick_matrix(seed: u64) -> Arc<TransitionMatrix> {
    let all = matrices();
    all[(seed % all.len() as u64) as usize].clone()
}

/// Action of `Σ c s_ν s_μ*` on a finite path `x` longer than every `μ`.
fn act(e: &Element, x: &BTreeMap<Word, i64>) -> BTreeMap<Word, i64> {
    let a = e.matrix();
    let mut out = BTreeMap::new();
    for (path, &cx) in x {
        for (m, c) in e.terms() {
            assert!(path.len() > m.mu.len());
            if path.starts_with(&m.mu) && a.follows(m.nu.last(), path.letters()[m.mu.len()]) {
                *out.entry(m.nu.concat(&path.suffix_from(m.mu.len()))).or_insert(0) += c * cx;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn delta(w: Word) -> BTreeMap<Word, i64> {
    BTreeMap::from([(w, 1)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_composed_action(seed in any::<u64>()) {
        let a = pick_matrix(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_element(&mut rng, &a);
        let y = random_element(&mut rng, &a);
        let xy = x.try_mul(&y).unwrap();
        let len = x.max_mu_len() + y.max_mu_len().max(xy.max_mu_len()) + 2;
        for path in a.enumerate_paths(len) {
            let lhs = act(&xy, &delta(path.clone()));
            let rhs = act(&x, &act(&y, &delta(path)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn multiplication_is_associative(seed in any::<u64>()) {
        let a = pick_matrix(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (random_element(&mut rng, &a), random_element(&mut rng, &a), random_element(&mut rng, &a));
        let left = x.try_mul(&y).unwrap().try_mul(&z).unwrap();
        let right = x.try_mul(&y.try_mul(&z).unwrap()).unwrap();
        prop_assert!(left.equals(&right).unwrap());
    }

    #[test]
    fn adjoint_reverses_products(seed in any::<u64>()) {
        let a = pick_matrix(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_element(&mut rng, &a), random_element(&mut rng, &a));
        let lhs = x.try_mul(&y).unwrap().adjoint();
        let rhs = y.adjoint().try_mul(&x.adjoint()).unwrap();
        prop_assert!(lhs.equals(&rhs).unwrap());
        prop_assert!(x.adjoint().adjoint().equals(&x).unwrap());
    }

    #[test]
    fn normalize_is_idempotent_and_faithful(seed in any::<u64>(), extra in 0usize..3) {
        let a = pick_matrix(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_element(&mut rng, &a);
        let depth = x.max_mu_len() + extra;
        let once = x.normalize(Some(depth)).unwrap();
        let twice = once.normalize(Some(depth)).unwrap();
        prop_assert_eq!(once.terms().collect::<Vec<_>>(), twice.terms().collect::<Vec<_>>());
        prop_assert!(once.terms().all(|(m, _)| m.mu.len() == depth));
        prop_assert!(once.equals(&x).unwrap());
        prop_assert!(x.coarse().equals(&x).unwrap());
    }
}

#[test]
fn cuntz_krieger_relations() {
    for a in matrices() {
        let gens: Vec<Element> = a.letters().map(|i| Element::generator(&a, i).unwrap()).collect();
        let mut sum = Element::zero(&a);
        for s in &gens {
            sum = &sum + &(s * &s.adjoint());
        }
        assert!(sum.equals(&Element::one(&a)).unwrap());
        for i in a.letters() {
            let s = &gens[i as usize - 1];
            let source = &s.adjoint() * s;
            let mut rhs = Element::zero(&a);
            for j in a.letters().filter(|&j| a.get(i, j)) {
                let t = &gens[j as usize - 1];
                rhs = &rhs + &(t * &t.adjoint());
            }
            assert!(source.equals(&rhs).unwrap(), "s_{i}* s_{i} over {a:?}");
        }
    }
}

#[test]
fn zero_monomials_act_as_zero() {
    let a = common::matrix(&[&[1, 1, 0], &[0, 0, 1], &[1, 0, 0]]);
    // F(1) = {1, 2} and F(2) = {3} are disjoint.
    let x = Element::monomial(&a, Word::from([1]), Word::from([1, 2])).unwrap();
    assert!(x.is_zero());
    let y = Element::from_terms(&a, [(Word::from([1]), Word::from([1, 2]), 3)]).unwrap();
    assert!(y.is_zero());
    for path in a.enumerate_paths(4) {
        assert!(act(&y, &delta(path)).is_empty());
    }
}
