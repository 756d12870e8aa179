#![allow(dead_code)]

use std::sync::Arc;

use cklef_core::random::{sample, SamplerConfig};
use cklef_core::{GeometricEndomorphism, Letter, TransitionMatrix, Word};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn w(letters: &[Letter]) -> Word {
    Word::new(letters.to_vec())
}

pub fn matrix(rows: &[&[i64]]) -> Arc<TransitionMatrix> {
    let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
    Arc::new(TransitionMatrix::new(&rows).unwrap())
}

pub fn main_matrix() -> Arc<TransitionMatrix> {
    matrix(&[&[1, 1, 0], &[1, 1, 1], &[0, 1, 1]])
}

pub fn golden() -> Arc<TransitionMatrix> {
    matrix(&[&[1, 1], &[1, 0]])
}

pub fn matrices() -> Vec<Arc<TransitionMatrix>> {
    vec![
        main_matrix(),
        matrix(&[&[1]]),
        matrix(&[&[1, 1], &[1, 1]]),
        golden(),
        matrix(&[&[0, 1], &[1, 1]]),
        matrix(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]),
        matrix(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 1]]),
    ]
}

pub fn main_example() -> GeometricEndomorphism {
    let raw = vec![
        vec![
            (w(&[1, 1]), w(&[2, 1])),
            (w(&[1, 2]), w(&[2, 2])),
            (w(&[2, 3, 3]), w(&[2, 3])),
            (w(&[2, 3, 2]), w(&[3, 2])),
            (w(&[2]), w(&[1])),
        ],
        vec![(w(&[3, 2]), w(&[]))],
        vec![(w(&[3, 3]), w(&[3]))],
    ];
    GeometricEndomorphism::build(&main_matrix(), raw, None).unwrap()
}

/// `t_1 = s_2`, `t_2 = s_1` on the full 2-shift.
pub fn flip() -> GeometricEndomorphism {
    let a = matrix(&[&[1, 1], &[1, 1]]);
    GeometricEndomorphism::build(&a, vec![vec![(w(&[2]), w(&[]))], vec![(w(&[1]), w(&[]))]], None).unwrap()
}

pub fn seeded(matrix: &Arc<TransitionMatrix>, seed: u64) -> GeometricEndomorphism {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, matrix, &SamplerConfig::default()).unwrap().0
}

/// Hand-written and seeded endomorphisms over four matrices.
pub fn corpus() -> Vec<(String, GeometricEndomorphism)> {
    let main = main_example();
    let mut out = vec![
        ("main".to_string(), main.clone()),
        ("main^2".to_string(), main.power(2).unwrap()),
        ("id main".to_string(), GeometricEndomorphism::identity(&main_matrix())),
        ("flip".to_string(), flip()),
        ("id golden".to_string(), GeometricEndomorphism::identity(&golden())),
    ];
    for (name, a) in [("golden", golden()), ("main", main_matrix()), ("[[0,1],[1,1]]", matrix(&[&[0, 1], &[1, 1]]))] {
        for seed in 0..2 {
            out.push((format!("sample {name} #{seed}"), seeded(&a, seed)));
        }
    }
    out
}
