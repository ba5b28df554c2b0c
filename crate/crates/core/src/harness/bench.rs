//! Timing of the three constrained samplers on the toy design.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genotype::make_toy_dataset;
use crate::model::{evaluate_pi, DiseaseModel, SingleSnpModel};
use crate::sampling::{
    log_prob_constraint, sample_mcmc, stream_from_seed, BackwardTable, CaseCount, CaseProbabilities,
    McmcSettings, RejectionSampler,
};
use crate::seed::{derive_seed, Hypothesis};

/// `(n, f0)` cells of the toy timing grid.
pub const TOY_GRID: [(usize, f64); 8] = [
    (20, 0.2),
    (20, 0.1),
    (20, 0.07),
    (20, 0.05),
    (40, 0.2),
    (100, 0.2),
    (100, 0.1),
    (100, 0.01),
];

/// Relative risks of the toy design.
pub const TOY_RR: (f64, f64) = (1.5, 2.0);

/// Case probabilities of the toy design with `n` individuals.
pub fn toy_probabilities(n: usize, f0: f64) -> Result<CaseProbabilities> {
    let gm = make_toy_dataset(n)?;
    let model = DiseaseModel::SingleSnp(SingleSnpModel {
        snp: "snp1".into(),
        f0,
        rr1: TOY_RR.0,
        rr2: TOY_RR.1,
    });
    evaluate_pi(&model, &gm)
}

#[derive(Debug, Clone, Copy)]
pub struct BenchSettings {
    pub replicates: usize,
    /// Per-sample attempt budget of the rejection sampler.
    pub rejection_budget: u64,
    /// `None` selects [`McmcSettings::default_for`].
    pub mcmc: Option<McmcSettings>,
    pub seed: u64,
    pub run_rejection: bool,
    pub run_mcmc: bool,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            replicates: 100,
            rejection_budget: 1_000_000,
            mcmc: None,
            seed: 1,
            run_rejection: true,
            run_mcmc: true,
        }
    }
}

/// One grid cell. Times are wall-clock seconds for all replicates; `None`
/// marks an exhausted rejection budget or a sampler that was not run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub f0: f64,
    pub n1: usize,
    pub log10_prob_constraint: f64,
    pub rejection_s: Option<f64>,
    pub mcmc_s: Option<f64>,
    /// Includes building the table.
    pub backward_s: f64,
}

impl BenchRow {
    pub fn prob_constraint(&self) -> f64 {
        10f64.powf(self.log10_prob_constraint)
    }
}

/// Times `settings.replicates` draws per sampler on each `(n, f0)` cell,
/// with `n1 = n / 2`.
pub fn bench_samplers(cells: &[(usize, f64)], settings: &BenchSettings) -> Result<Vec<BenchRow>> {
    cells
        .iter()
        .map(|&(n, f0)| bench_cell(n, f0, settings))
        .collect()
}

fn bench_cell(n: usize, f0: f64, settings: &BenchSettings) -> Result<BenchRow> {
    let pi = toy_probabilities(n, f0)?;
    let c = CaseCount::new(n, n / 2)?;
    let reps = settings.replicates;
    let seed_for = |r: usize| derive_seed(settings.seed, Hypothesis::H1, r as u64);

    let t = Instant::now();
    let table = BackwardTable::new(&pi, c)?;
    for r in 0..reps {
        table.sample(&mut stream_from_seed(seed_for(r)))?;
    }
    let backward_s = t.elapsed().as_secs_f64();

    let mcmc_s = if settings.run_mcmc {
        let mcmc = settings.mcmc.unwrap_or_else(|| McmcSettings::default_for(n));
        let t = Instant::now();
        sample_mcmc(&pi, c, mcmc, reps, None, &mut stream_from_seed(seed_for(0)))?;
        Some(t.elapsed().as_secs_f64())
    } else {
        None
    };

    let rejection_s = if settings.run_rejection {
        let t = Instant::now();
        let sampler = RejectionSampler::new(pi.clone(), c, Some(settings.rejection_budget))?;
        let mut exhausted = false;
        for r in 0..reps {
            match sampler.sample(&mut stream_from_seed(seed_for(r))) {
                Ok(_) => {}
                Err(Error::RejectionBudgetExceeded { .. }) => {
                    exhausted = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        (!exhausted).then(|| t.elapsed().as_secs_f64())
    } else {
        None
    };

    Ok(BenchRow {
        n,
        f0,
        n1: n / 2,
        log10_prob_constraint: log_prob_constraint(&pi, c)? / std::f64::consts::LN_10,
        rejection_s,
        mcmc_s,
        backward_s,
    })
}

/// `4.5e-03` style, computed from the base-10 logarithm so that values far
/// below the `f64` range still print.
pub fn format_probability(log10_p: f64) -> String {
    if log10_p == f64::NEG_INFINITY {
        return "0".into();
    }
    let mut exponent = log10_p.floor();
    let mut mantissa = 10f64.powf(log10_p - exponent);
    if format!("{mantissa:.1}") == "10.0" {
        mantissa = 1.0;
        exponent += 1.0;
    }
    let sign = if exponent < 0.0 { '-' } else { '+' };
    format!("{mantissa:.1}e{sign}{:02}", exponent.abs() as i64)
}

fn format_seconds(s: Option<f64>) -> String {
    match s {
        None => "NA".into(),
        Some(s) if s < 60.0 => format!("{s:.3} s"),
        Some(s) => format!("{:.1} min", s / 60.0),
    }
}

/// Fixed-width table with one row per cell.
pub fn format_bench_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>6} {:>5} {:>10} {:>12} {:>12} {:>12}",
        "n", "f0", "n1", "P(C)", "rejection", "mcmc", "backward"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>5} {:>10} {:>12} {:>12} {:>12}",
            r.n,
            r.f0,
            r.n1,
            format_probability(r.log10_prob_constraint),
            format_seconds(r.rejection_s),
            format_seconds(r.mcmc_s),
            format_seconds(Some(r.backward_s)),
        );
    }
    out
}

/// Build time of the backward table and time to draw one configuration for
/// `n` individuals with constant case probability `p` and `n1` cases.
pub fn time_large_backward(n: usize, n1: usize, p: f64, seed: u64) -> Result<(f64, f64)> {
    let pi = CaseProbabilities::uniform(n, p)?;
    let c = CaseCount::new(n, n1)?;
    let t = Instant::now();
    let table = BackwardTable::new(&pi, c)?;
    let build = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let y = table.sample(&mut stream_from_seed(seed))?;
    let draw = t.elapsed().as_secs_f64();
    debug_assert_eq!(y.cases(), n1);
    Ok((build, draw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_format() {
        assert_eq!(format_probability(4.5e-3f64.log10()), "4.5e-03");
        assert_eq!(format_probability((1.1f64).log10() - 69.0), "1.1e-69");
        assert_eq!(format_probability(-0.00001), "1.0e+00");
        assert_eq!(format_probability(-400.3), "5.0e-401");
        assert_eq!(format_probability(f64::NEG_INFINITY), "0");
        // 9.96e-5 rounds up into the next decade
        assert_eq!(format_probability(9.96e-5f64.log10()), "1.0e-04");
    }

    #[test]
    fn toy_probabilities_follow_genotypes() {
        let pi = toy_probabilities(20, 0.2).unwrap();
        let mut expected = vec![0.2; 16];
        expected.extend([0.3; 3]);
        expected.push(0.4);
        for (a, b) in pi.as_slice().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn small_grid_runs() {
        let settings = BenchSettings {
            replicates: 5,
            mcmc: Some(McmcSettings::new(1000, 20).unwrap()),
            ..BenchSettings::default()
        };
        let rows = bench_samplers(&[(20, 0.2), (100, 0.01)], &settings).unwrap();
        assert!(rows[0].rejection_s.is_some());
        assert!(rows[1].rejection_s.is_none());
        assert!(rows[1].log10_prob_constraint < -60.0);
        let table = format_bench_table(&rows);
        assert!(table.contains("NA"));
        assert_eq!(table.lines().count(), 3);
    }
}
