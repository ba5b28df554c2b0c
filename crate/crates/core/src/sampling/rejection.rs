use rand::Rng;

use super::tables::{infeasible, log_prob_constraint};
use super::{CaseCount, CaseProbabilities, Phenotypes};
use crate::error::{Error, Result};

const MIN_ATTEMPTS: f64 = 1e6;
const MAX_ATTEMPTS: f64 = 1e8;

/// `max(10^6, 1000 / P(C))`, capped at `10^8`.
pub fn default_max_attempts(prob_constraint: f64) -> u64 {
    let wanted = if prob_constraint > 0.0 {
        1000.0 / prob_constraint
    } else {
        MAX_ATTEMPTS
    };
    wanted.clamp(MIN_ATTEMPTS, MAX_ATTEMPTS) as u64
}

/// Rejection sampler with `P(C)` computed once up front.
#[derive(Debug, Clone)]
pub struct RejectionSampler {
    pi: CaseProbabilities,
    n1: usize,
    max_attempts: u64,
    prob_constraint: f64,
}

impl RejectionSampler {
    /// `max_attempts = None` selects [`default_max_attempts`].
    pub fn new(pi: CaseProbabilities, c: CaseCount, max_attempts: Option<u64>) -> Result<Self> {
        let log_pc = log_prob_constraint(&pi, c)?;
        if log_pc == f64::NEG_INFINITY {
            return Err(infeasible(c.n(), c.cases()));
        }
        let prob_constraint = log_pc.exp();
        let max_attempts = max_attempts.unwrap_or_else(|| default_max_attempts(prob_constraint));
        if max_attempts == 0 {
            return Err(Error::InvalidSettings("max_attempts must be positive".into()));
        }
        Ok(Self {
            pi,
            n1: c.cases(),
            max_attempts,
            prob_constraint,
        })
    }

    pub fn max_attempts(&self) -> u64 {
        self.max_attempts
    }

    pub fn prob_constraint(&self) -> f64 {
        self.prob_constraint
    }

    /// Draws independent Bernoulli vectors until one has exactly `n1` cases.
    /// An attempt is abandoned as soon as its final count can no longer be
    /// `n1`, which only saves random draws and leaves the accepted law intact.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Phenotypes> {
        let probs = self.pi.as_slice();
        let n = probs.len();
        let mut y = vec![0u8; n];
        for _ in 0..self.max_attempts {
            let mut cases = 0usize;
            let mut complete = true;
            for (i, &p) in probs.iter().enumerate() {
                if cases > self.n1 || cases + (n - i) < self.n1 {
                    complete = false;
                    break;
                }
                let hit = rng.random::<f64>() < p;
                y[i] = hit as u8;
                cases += hit as usize;
            }
            if complete && cases == self.n1 {
                return Ok(Phenotypes::from_raw(y));
            }
        }
        Err(Error::RejectionBudgetExceeded {
            attempts: self.max_attempts,
            prob_constraint: self.prob_constraint,
            expected_attempts: 1.0 / self.prob_constraint,
        })
    }
}

pub fn sample_rejection<R: Rng + ?Sized>(
    pi: &CaseProbabilities,
    c: CaseCount,
    max_attempts: Option<u64>,
    rng: &mut R,
) -> Result<Phenotypes> {
    RejectionSampler::new(pi.clone(), c, max_attempts)?.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_from_seed;

    #[test]
    fn default_budget() {
        assert_eq!(default_max_attempts(0.5), 1_000_000);
        assert_eq!(default_max_attempts(1e-4), 10_000_000);
        assert_eq!(default_max_attempts(1e-20), 100_000_000);
        assert_eq!(default_max_attempts(0.0), 100_000_000);
    }

    #[test]
    fn binomial_mode_succeeds() {
        let pi = CaseProbabilities::uniform(10, 0.4).unwrap();
        let c = CaseCount::new(10, 4).unwrap();
        let mut rng = stream_from_seed(1);
        for _ in 0..100 {
            let y = sample_rejection(&pi, c, None, &mut rng).unwrap();
            assert_eq!(y.cases(), 4);
        }
    }

    #[test]
    fn budget_exhaustion_reports_constraint_probability() {
        // P(C) ~ 2.9e-8 on the n = 20, f0 = 0.05 toy design
        let mut v = vec![0.05; 16];
        v.extend([0.075; 3]);
        v.push(0.1);
        let pi = CaseProbabilities::new(v).unwrap();
        let c = CaseCount::new(20, 10).unwrap();
        let mut rng = stream_from_seed(2);
        match sample_rejection(&pi, c, Some(1_000_000), &mut rng) {
            Err(Error::RejectionBudgetExceeded {
                attempts,
                prob_constraint,
                ..
            }) => {
                assert_eq!(attempts, 1_000_000);
                assert!(prob_constraint > 1e-8 && prob_constraint < 1e-7);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_is_reported_before_sampling() {
        let pi = CaseProbabilities::new(vec![0.0, 0.0, 0.5]).unwrap();
        let c = CaseCount::new(3, 2).unwrap();
        let mut rng = stream_from_seed(0);
        assert!(matches!(
            sample_rejection(&pi, c, None, &mut rng),
            Err(Error::ConstraintInfeasible(_))
        ));
    }
}
