use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tables::infeasible;
use super::{CaseCount, CaseProbabilities, Phenotypes};
use crate::error::{Error, Result};

/// Iterations discarded before the first retained sample, and iterations
/// between retained samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSettings {
    pub burn_in: u64,
    pub thinning: u64,
}

impl McmcSettings {
    pub fn new(burn_in: u64, thinning: u64) -> Result<Self> {
        if burn_in == 0 || thinning == 0 {
            return Err(Error::InvalidSettings(
                "MCMC burn-in and thinning must both be at least 1".into(),
            ));
        }
        Ok(Self { burn_in, thinning })
    }

    /// Burn-in of `10^5 * n` iterations, thinning of `n`.
    pub fn default_for(n: usize) -> Self {
        let n = n.max(1) as u64;
        Self {
            burn_in: 100_000 * n,
            thinning: n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct McmcRun {
    pub samples: Vec<Phenotypes>,
    /// Set when no swap move exists (every free individual is forced), in
    /// which case every sample is the single admissible configuration.
    pub degenerate: bool,
    pub proposed: u64,
    pub accepted: u64,
}

/// Metropolis-Hastings over the assignments with `n1` cases.
///
/// Each iteration picks a case `i` and a control `j` uniformly at random and
/// swaps them with probability `min(1, (1 - pi_i) pi_j / (pi_i (1 - pi_j)))`.
/// Individuals with `pi` equal to 0 or 1 are pinned to their forced status and
/// never proposed.
pub fn sample_mcmc<R: Rng + ?Sized>(
    pi: &CaseProbabilities,
    c: CaseCount,
    settings: McmcSettings,
    n_samples: usize,
    init: Option<&Phenotypes>,
    rng: &mut R,
) -> Result<McmcRun> {
    McmcSettings::new(settings.burn_in, settings.thinning)?;
    if n_samples == 0 {
        return Err(Error::InvalidSettings("n_samples must be positive".into()));
    }
    if pi.len() != c.n() {
        return Err(Error::LengthMismatch {
            expected: c.n(),
            found: pi.len(),
        });
    }
    let probs = pi.as_slice();
    let n1 = c.cases();
    let forced_cases = probs.iter().filter(|&&p| p == 1.0).count();
    let free: Vec<usize> = (0..probs.len())
        .filter(|&i| probs[i] > 0.0 && probs[i] < 1.0)
        .collect();
    if n1 < forced_cases || n1 > forced_cases + free.len() {
        return Err(infeasible(c.n(), n1));
    }

    let mut y = match init {
        Some(init) => validate_init(init, probs, c)?,
        None => {
            let mut y: Vec<u8> = probs.iter().map(|&p| (p == 1.0) as u8).collect();
            let mut order = free.clone();
            order.shuffle(rng);
            for &i in order.iter().take(n1 - forced_cases) {
                y[i] = 1;
            }
            y
        }
    };

    // Free cases and controls; positions are swapped in place on acceptance.
    let mut cases: Vec<usize> = free.iter().copied().filter(|&i| y[i] == 1).collect();
    let mut controls: Vec<usize> = free.iter().copied().filter(|&i| y[i] == 0).collect();
    let odds: Vec<f64> = probs.iter().map(|&p| p / (1.0 - p)).collect();

    if cases.is_empty() || controls.is_empty() {
        warn!("MCMC chain is degenerate: only one admissible configuration");
        let sample = Phenotypes::from_raw(y);
        return Ok(McmcRun {
            samples: vec![sample; n_samples],
            degenerate: true,
            proposed: 0,
            accepted: 0,
        });
    }

    let mut proposed = 0u64;
    let mut accepted = 0u64;
    let mut step = |y: &mut [u8], rng: &mut R| {
        let a = rng.random_range(0..cases.len());
        let b = rng.random_range(0..controls.len());
        let (i, j) = (cases[a], controls[b]);
        let alpha = odds[j] / odds[i];
        proposed += 1;
        if alpha >= 1.0 || rng.random::<f64>() < alpha {
            y[i] = 0;
            y[j] = 1;
            cases[a] = j;
            controls[b] = i;
            accepted += 1;
        }
    };

    for _ in 0..settings.burn_in {
        step(&mut y, rng);
    }
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        for _ in 0..settings.thinning {
            step(&mut y, rng);
        }
        let sample = Phenotypes::from_raw(y.clone());
        assert_eq!(sample.cases(), n1, "MCMC chain left the constraint");
        samples.push(sample);
    }
    Ok(McmcRun {
        samples,
        degenerate: false,
        proposed,
        accepted,
    })
}

fn validate_init(init: &Phenotypes, probs: &[f64], c: CaseCount) -> Result<Vec<u8>> {
    if init.len() != probs.len() {
        return Err(Error::LengthMismatch {
            expected: probs.len(),
            found: init.len(),
        });
    }
    if init.cases() != c.cases() {
        return Err(Error::InvalidSettings(format!(
            "initial configuration has {} cases, expected {}",
            init.cases(),
            c.cases()
        )));
    }
    let y = init.as_slice();
    if let Some(i) = (0..probs.len())
        .find(|&i| (probs[i] == 1.0 && y[i] == 0) || (probs[i] == 0.0 && y[i] == 1))
    {
        return Err(Error::InvalidSettings(format!(
            "initial configuration contradicts the forced status of individual {i}"
        )));
    }
    Ok(y.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_from_seed;

    #[test]
    fn settings_validation() {
        assert!(McmcSettings::new(0, 1).is_err());
        assert!(McmcSettings::new(1, 0).is_err());
        let d = McmcSettings::default_for(20);
        assert_eq!(d, McmcSettings::new(2_000_000, 20).unwrap());
    }

    #[test]
    fn uniform_probabilities_accept_every_move() {
        let pi = CaseProbabilities::uniform(10, 0.3).unwrap();
        let c = CaseCount::new(10, 4).unwrap();
        let mut rng = stream_from_seed(4);
        let run = sample_mcmc(&pi, c, McmcSettings::new(100, 10).unwrap(), 50, None, &mut rng)
            .unwrap();
        assert_eq!(run.proposed, run.accepted);
        assert_eq!(run.samples.len(), 50);
        assert!(run.samples.iter().all(|s| s.cases() == 4));
    }

    #[test]
    fn degenerate_chain_returns_forced_configuration() {
        let pi = CaseProbabilities::new(vec![0.2, 0.5, 0.7]).unwrap();
        let mut rng = stream_from_seed(0);
        let run = sample_mcmc(
            &pi,
            CaseCount::new(3, 3).unwrap(),
            McmcSettings::new(10, 1).unwrap(),
            4,
            None,
            &mut rng,
        )
        .unwrap();
        assert!(run.degenerate);
        assert!(run.samples.iter().all(|s| s.to_bit_string() == "111"));

        let run = sample_mcmc(
            &pi,
            CaseCount::new(3, 0).unwrap(),
            McmcSettings::new(10, 1).unwrap(),
            2,
            None,
            &mut rng,
        )
        .unwrap();
        assert!(run.degenerate);
        assert!(run.samples.iter().all(|s| s.cases() == 0));
    }

    #[test]
    fn pinned_individuals_never_move() {
        let pi = CaseProbabilities::new(vec![1.0, 0.4, 0.0, 0.6, 0.5, 1.0]).unwrap();
        let c = CaseCount::new(6, 3).unwrap();
        let mut rng = stream_from_seed(8);
        let run = sample_mcmc(&pi, c, McmcSettings::new(500, 3).unwrap(), 300, None, &mut rng)
            .unwrap();
        for s in &run.samples {
            let y = s.as_slice();
            assert_eq!((y[0], y[2], y[5]), (1, 0, 1));
            assert_eq!(s.cases(), 3);
        }
    }

    #[test]
    fn infeasible_and_bad_init() {
        let pi = CaseProbabilities::new(vec![1.0, 1.0, 0.5]).unwrap();
        let mut rng = stream_from_seed(0);
        let s = McmcSettings::new(1, 1).unwrap();
        assert!(matches!(
            sample_mcmc(&pi, CaseCount::new(3, 1).unwrap(), s, 1, None, &mut rng),
            Err(Error::ConstraintInfeasible(_))
        ));
        let bad = Phenotypes::new(vec![0, 1, 1]).unwrap();
        assert!(sample_mcmc(&pi, CaseCount::new(3, 2).unwrap(), s, 1, Some(&bad), &mut rng).is_err());
        let good = Phenotypes::new(vec![1, 1, 0]).unwrap();
        assert!(sample_mcmc(&pi, CaseCount::new(3, 2).unwrap(), s, 1, Some(&good), &mut rng).is_ok());
    }
}
