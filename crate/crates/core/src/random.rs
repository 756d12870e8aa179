//! Rejection sampling of valid geometric endomorphisms.
//!
//! A sample partitions the shift space into cylinder unions `Z_1, …, Z_n`
//! (the ranges of the `t_i`), sets `W_i = ⋃_{A[i,j]=1} Z_j` (the sources),
//! refines cylinders until `Z_i` and `W_i` have the same multiset of
//! terminal letters, and pairs cylinders with equal terminal letters.
//! Attempts whose refinement does not balance are rejected.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::endo::GeometricEndomorphism;
use crate::sft::{Letter, TransitionMatrix, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    /// Length of the cylinders in the initial partition.
    pub partition_depth: usize,
    /// Longest cylinder word produced by refinement.
    pub max_word_len: usize,
    /// Refinement steps per generator before rejecting.
    pub max_refinements: usize,
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { partition_depth: 2, max_word_len: 4, max_refinements: 24, max_attempts: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("no valid endomorphism after {attempts} attempts")]
    Exhausted { attempts: usize },
}

/// Accepted samples and the number of attempts spent on them.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub endomorphisms: Vec<GeometricEndomorphism>,
    pub attempts: usize,
}

impl SampleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.endomorphisms.len() as f64 / self.attempts as f64
        }
    }
}

fn terminal_counts(words: &[Word], n: usize) -> Vec<i64> {
    let mut c = alloc::vec![0i64; n + 1];
    for w in words {
        c[w.last().map_or(0, |t| t as usize)] += 1;
    }
    c
}

fn refine(matrix: &TransitionMatrix, words: &mut Vec<Word>, pos: usize) {
    let w = words.swap_remove(pos);
    words.extend(matrix.followers(w.last()).map(|j| w.with(j)));
}

/// Refines `z` and `w` until their terminal-letter multisets agree, each
/// step taking a random move among those closest to balance.
fn balance<R: Rng + ?Sized>(
    rng: &mut R,
    matrix: &TransitionMatrix,
    z: &mut Vec<Word>,
    w: &mut Vec<Word>,
    config: &SamplerConfig,
) -> bool {
    let n = matrix.n();
    for _ in 0..=config.max_refinements {
        let diff: Vec<i64> = terminal_counts(z, n).iter().zip(terminal_counts(w, n)).map(|(a, b)| a - b).collect();
        if diff.iter().all(|&d| d == 0) {
            return true;
        }
        let mut best: Vec<(bool, usize)> = Vec::new();
        let mut best_dist = i64::MAX;
        for side_z in [true, false] {
            let side: &[Word] = if side_z { z } else { w };
            for t in 0..=n {
                if !side.iter().any(|x| x.last().map_or(0, |l| l as usize) == t && x.len() < config.max_word_len) {
                    continue;
                }
                let last = (t > 0).then_some(t as Letter);
                let sign = if side_z { 1 } else { -1 };
                let mut moved = diff.clone();
                moved[t] -= sign;
                for j in matrix.followers(last) {
                    moved[j as usize] += sign;
                }
                let dist: i64 = moved.iter().map(|d| d.abs()).sum();
                if dist < best_dist {
                    best_dist = dist;
                    best.clear();
                }
                if dist == best_dist {
                    best.push((side_z, t));
                }
            }
        }
        let Some(&(side_z, t)) = best.choose(rng) else {
            return false;
        };
        let side: &mut Vec<Word> = if side_z { z } else { w };
        let candidates: Vec<usize> = (0..side.len())
            .filter(|&i| side[i].last().map_or(0, |l| l as usize) == t && side[i].len() < config.max_word_len)
            .collect();
        let pos = *candidates.choose(rng).expect("move has a cylinder");
        refine(matrix, side, pos);
    }
    false
}

/// Pairs `ν ∈ z` with `μ ∈ w` of equal terminal letter, shuffled within
/// each letter. The multisets must already agree.
fn pair_cylinders<R: Rng + ?Sized>(rng: &mut R, z: &[Word], w: &[Word]) -> Vec<(Word, Word)> {
    let mut by_letter: BTreeMap<Option<Letter>, (Vec<Word>, Vec<Word>)> = BTreeMap::new();
    for nu in z {
        by_letter.entry(nu.last()).or_default().0.push(nu.clone());
    }
    for mu in w {
        by_letter.entry(mu.last()).or_default().1.push(mu.clone());
    }
    let mut out = Vec::with_capacity(z.len());
    for (_, (nus, mut mus)) in by_letter {
        mus.shuffle(rng);
        out.extend(nus.into_iter().zip(mus));
    }
    out
}

/// One attempt; `None` if the partition has an empty part or refinement
/// does not balance.
pub fn try_sample<R: Rng + ?Sized>(
    rng: &mut R,
    matrix: &Arc<TransitionMatrix>,
    config: &SamplerConfig,
) -> Option<GeometricEndomorphism> {
    let n = matrix.n();
    let cells = matrix.enumerate_paths(config.partition_depth.max(1));
    let mut parts: Vec<Vec<Word>> = alloc::vec![Vec::new(); n];
    for w in cells {
        parts[rng.gen_range(0..n)].push(w);
    }
    if parts.iter().any(Vec::is_empty) {
        return None;
    }
    let mut raw = Vec::with_capacity(n);
    for i in matrix.letters() {
        let mut z = parts[i as usize - 1].clone();
        let mut w: Vec<Word> = matrix
            .letters()
            .filter(|&j| matrix.get(i, j))
            .flat_map(|j| parts[j as usize - 1].iter().cloned())
            .collect();
        if !balance(rng, matrix, &mut z, &mut w, config) {
            return None;
        }
        raw.push(pair_cylinders(rng, &z, &w));
    }
    let e = GeometricEndomorphism::build(matrix, raw, None).ok()?;
    e.is_valid().then_some(e)
}

pub fn sample<R: Rng + ?Sized>(
    rng: &mut R,
    matrix: &Arc<TransitionMatrix>,
    config: &SamplerConfig,
) -> Result<(GeometricEndomorphism, usize), SamplerError> {
    for attempt in 1..=config.max_attempts {
        if let Some(e) = try_sample(rng, matrix, config) {
            return Ok((e, attempt));
        }
    }
    Err(SamplerError::Exhausted { attempts: config.max_attempts })
}

/// `count` samples, with the total number of attempts.
pub fn sample_batch<R: Rng + ?Sized>(
    rng: &mut R,
    matrix: &Arc<TransitionMatrix>,
    config: &SamplerConfig,
    count: usize,
) -> Result<SampleBatch, SamplerError> {
    let mut endomorphisms = Vec::with_capacity(count);
    let mut attempts = 0;
    for _ in 0..count {
        let (e, spent) = sample(rng, matrix, config)?;
        attempts += spent;
        endomorphisms.push(e);
    }
    Ok(SampleBatch { endomorphisms, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for rows in [
            alloc::vec![alloc::vec![1, 1], alloc::vec![1, 1]],
            alloc::vec![alloc::vec![1, 1, 0], alloc::vec![1, 1, 1], alloc::vec![0, 1, 1]],
            alloc::vec![alloc::vec![0, 1], alloc::vec![1, 1]],
        ] {
            let a = Arc::new(TransitionMatrix::new(&rows).unwrap());
            let batch = sample_batch(&mut rng, &a, &SamplerConfig::default(), 5).unwrap();
            assert!(batch.endomorphisms.iter().all(GeometricEndomorphism::is_valid));
            assert!(batch.acceptance_rate() > 0.0);
        }
    }
}
