use rand::Rng;

use super::{BackwardTable, CaseCount, CaseProbabilities};
use crate::error::{Error, Result};

/// Class counts and per-individual class probabilities for `K >= 2` classes.
#[derive(Debug, Clone)]
pub struct MultiClassConstraint {
    counts: Vec<usize>,
    probs: Vec<Vec<f64>>,
}

impl MultiClassConstraint {
    pub fn new(counts: Vec<usize>, probs: Vec<Vec<f64>>) -> Result<Self> {
        let k = counts.len();
        if k < 2 {
            return Err(Error::InvalidSettings("at least two classes are required".into()));
        }
        let n = probs.len();
        if counts.iter().sum::<usize>() != n {
            return Err(Error::InvalidSettings(format!(
                "class counts sum to {}, expected {n}",
                counts.iter().sum::<usize>()
            )));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != k {
                return Err(Error::LengthMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(&value) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidProbability { index: i, value });
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSettings(format!(
                    "class probabilities of individual {i} sum to {total}"
                )));
            }
        }
        Ok(Self { counts, probs })
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn probs(&self) -> &[Vec<f64>] {
        &self.probs
    }
}

/// Assigns class labels `0..K` one class at a time. Stage `k` selects exactly
/// `counts[k]` of the still unassigned individuals with the binary backward
/// sampler, using `p[i][k] / sum_{l >= k} p[i][l]` as the case probability.
/// Whoever remains after stage `K - 2` gets the last label.
pub fn sample_multiclass<R: Rng + ?Sized>(mc: &MultiClassConstraint, rng: &mut R) -> Result<Vec<usize>> {
    let k_last = mc.classes() - 1;
    let mut labels = vec![k_last; mc.n()];
    let mut remaining: Vec<usize> = (0..mc.n()).collect();

    for (k, &count) in mc.counts.iter().enumerate().take(k_last) {
        let stage_probs = remaining
            .iter()
            .map(|&i| {
                let row = &mc.probs[i];
                let tail: f64 = row[k..].iter().sum();
                if tail <= 0.0 {
                    return Err(Error::ConstraintInfeasible(format!(
                        "individual {i} has zero probability for every class from {k} on"
                    )));
                }
                Ok((row[k] / tail).min(1.0))
            })
            .collect::<Result<Vec<f64>>>()?;
        let pi = CaseProbabilities::new(stage_probs)?;
        let table = BackwardTable::new(&pi, CaseCount::new(remaining.len(), count)?)?;
        if !table.is_feasible() {
            return Err(Error::ConstraintInfeasible(format!(
                "class {k} cannot receive {count} of the {} remaining individuals",
                remaining.len()
            )));
        }
        let chosen = table.sample(rng)?;
        let mut next = Vec::with_capacity(remaining.len() - count);
        for (pos, &i) in remaining.iter().enumerate() {
            if chosen.as_slice()[pos] == 1 {
                labels[i] = k;
            } else {
                next.push(i);
            }
        }
        remaining = next;
    }
    Ok(labels)
}
