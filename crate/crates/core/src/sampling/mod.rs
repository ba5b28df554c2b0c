//! Sampling of binary phenotype vectors with a fixed number of cases.
//!
//! Every individual `i` is a case with probability `pi[i]` independently of the
//! others; the samplers here draw from that product law *conditioned* on the
//! total number of cases being exactly `n1`. Four routes are provided:
//!
//! * [`BackwardTable::sample`]: exact sequential sampling from a precomputed
//!   backward table, `O(n)` per draw once the table exists.
//! * [`sample_rejection`]: draw unconstrained vectors until one has `n1` cases.
//! * [`sample_mcmc`]: Metropolis-Hastings over case/control swaps.
//! * [`sample_permutation`]: the uniform special case (constant `pi`).
//!
//! All dynamic-programming quantities are stored as natural logarithms, with
//! `f64::NEG_INFINITY` standing for probability zero.

mod logspace;
mod mcmc;
mod multiclass;
mod rejection;
mod tables;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use logspace::{log_add, log_sum, LOG_ZERO};
pub use mcmc::{sample_mcmc, McmcRun, McmcSettings};
pub use multiclass::{sample_multiclass, MultiClassConstraint};
pub use rejection::{default_max_attempts, sample_rejection, RejectionSampler};
pub use tables::{conditional_marginals, log_prob_constraint, BackwardTable, ForwardTable};

/// Random stream used by every sampler. ChaCha8 is portable and seedable, so a
/// given seed reproduces the same draws on every platform.
pub type RandomStream = ChaCha8Rng;

pub fn stream_from_seed(seed: u64) -> RandomStream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-individual case probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseProbabilities(Vec<f64>);

impl CaseProbabilities {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSettings(
                "case probability vector must not be empty".into(),
            ));
        }
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidProbability { index, value });
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for CaseProbabilities {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Exact number of cases `n1` among `n` individuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseCount {
    n: usize,
    n1: usize,
}

impl CaseCount {
    pub fn new(n: usize, n1: usize) -> Result<Self> {
        if n1 > n {
            return Err(Error::InvalidConstraint { n, n1 });
        }
        Ok(Self { n, n1 })
    }

    /// Constraint on the individuals of `pi`, checking `n1 <= pi.len()`.
    pub fn for_probs(pi: &CaseProbabilities, n1: usize) -> Result<Self> {
        Self::new(pi.len(), n1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cases(&self) -> usize {
        self.n1
    }

    pub fn controls(&self) -> usize {
        self.n - self.n1
    }
}

/// A case (1) / control (0) assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Phenotypes(Vec<u8>);

impl Phenotypes {
    /// Builds an assignment from 0/1 entries.
    pub fn new(y: Vec<u8>) -> Result<Self> {
        if let Some(pos) = y.iter().position(|&v| v > 1) {
            return Err(Error::InvalidSettings(format!(
                "phenotype at index {pos} is {}, expected 0 or 1",
                y[pos]
            )));
        }
        Ok(Self(y))
    }

    pub(crate) fn from_raw(y: Vec<u8>) -> Self {
        debug_assert!(y.iter().all(|&v| v <= 1));
        Self(y)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn cases(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn case_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(|(i, _)| i)
    }

    /// Bit string such as `0110`.
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&v| if v == 1 { '1' } else { '0' }).collect()
    }
}

/// Uniform draw over all assignments with exactly `n1` cases among `n`.
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, n1: usize, rng: &mut R) -> Result<Phenotypes> {
    if n == 0 {
        return Err(Error::InvalidSettings("n must be positive".into()));
    }
    CaseCount::new(n, n1)?;
    let mut y = vec![0u8; n];
    for i in index::sample(rng, n, n1) {
        y[i] = 1;
    }
    Ok(Phenotypes(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_probabilities() {
        let err = CaseProbabilities::new(vec![0.1, 1.2]).unwrap_err();
        assert!(matches!(err, Error::InvalidProbability { index: 1, .. }));
        assert!(CaseProbabilities::new(vec![0.1, f64::NAN]).is_err());
        assert!(CaseProbabilities::new(vec![]).is_err());
    }

    #[test]
    fn case_count_bounds() {
        assert!(CaseCount::new(5, 5).is_ok());
        assert!(CaseCount::new(5, 0).is_ok());
        assert!(matches!(
            CaseCount::new(5, 6),
            Err(Error::InvalidConstraint { n: 5, n1: 6 })
        ));
    }

    #[test]
    fn permutation_forced_cases() {
        let mut rng = stream_from_seed(3);
        let all = sample_permutation(7, 7, &mut rng).unwrap();
        assert_eq!(all.to_bit_string(), "1111111");
        let none = sample_permutation(7, 0, &mut rng).unwrap();
        assert_eq!(none.cases(), 0);
        for _ in 0..200 {
            assert_eq!(sample_permutation(9, 4, &mut rng).unwrap().cases(), 4);
        }
    }

    #[test]
    fn permutation_is_seed_deterministic() {
        let a: Vec<_> = {
            let mut rng = stream_from_seed(11);
            (0..20)
                .map(|_| sample_permutation(30, 12, &mut rng).unwrap())
                .collect()
        };
        let b: Vec<_> = {
            let mut rng = stream_from_seed(11);
            (0..20)
                .map(|_| sample_permutation(30, 12, &mut rng).unwrap())
                .collect()
        };
        assert_eq!(a, b);
    }
}
