//! Replicate engine for power studies.
//!
//! H1 phenotypes come from the configured constrained sampler, H0 phenotypes
//! from uniform permutations with the same case count. Every replicate is
//! scored with `S_rho` for each configured radius, and the two arms are
//! compared through ROC curves. Replicates draw from their own derived seed
//! and results are ordered by replicate index, so output does not depend on
//! the number of threads.

pub mod bench;
pub mod config;

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{AlgorithmConfig, ExperimentConfig, GenotypeSource, StatisticConfig, SyntheticSpecConfig};

use crate::assoc::{radius_members, Locus, Radius, TrendScanner};
use crate::error::{Error, Result};
use crate::genotype::{
    load_matrix, load_matrix_with_metadata, make_synthetic_dataset, make_toy_dataset, write_atomic,
    GenotypeMatrix,
};
use crate::model::{evaluate_pi_with, Covariates, EvalOptions};
use crate::roc::{roc_auc, RocSummary};
use crate::sampling::{
    log_prob_constraint, sample_mcmc, sample_permutation, stream_from_seed, BackwardTable, CaseCount,
    CaseProbabilities, McmcSettings, Phenotypes, RejectionSampler,
};
use crate::seed::{derive_seed, Hypothesis};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Drop failed replicates instead of aborting the run.
    pub keep_going: bool,
}

/// `S_rho` values of one replicate, one per configured radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateStatistics {
    pub hypothesis: Hypothesis,
    pub replicate: usize,
    pub s_rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateFailure {
    pub hypothesis: Hypothesis,
    pub replicate: usize,
    pub error: String,
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub load: f64,
    pub model: f64,
    pub setup: f64,
    pub h1: f64,
    pub h0: f64,
    pub roc: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub algorithm: &'static str,
    pub master_seed: u64,
    pub n: usize,
    pub n1: usize,
    pub snps_tested: usize,
    pub log10_prob_constraint: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mcmc_acceptance_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PowerReport {
    pub config: ExperimentConfig,
    pub info: RunInfo,
    pub rhos: Vec<Radius>,
    /// One ROC summary per radius, aligned with `rhos`.
    pub summaries: Vec<RocSummary>,
    /// H1 replicates then H0 replicates, each in replicate order.
    pub replicates: Vec<ReplicateStatistics>,
    pub failures: Vec<ReplicateFailure>,
    pub timings: Timings,
}

#[derive(Serialize)]
struct RhoResult {
    rho: Radius,
    auc: f64,
    se: f64,
    ci_low: f64,
    ci_high: f64,
    band: crate::roc::AucBand,
    h1_replicates: usize,
    h0_replicates: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    #[serde(flatten)]
    info: &'a RunInfo,
    replicates: usize,
    results: Vec<RhoResult>,
    failures: &'a [ReplicateFailure],
    config: &'a ExperimentConfig,
}

impl PowerReport {
    /// `S_rho` of every successful replicate of one arm for radius index `k`.
    pub fn statistics(&self, hypothesis: Hypothesis, k: usize) -> Vec<f64> {
        self.replicates
            .iter()
            .filter(|r| r.hypothesis == hypothesis)
            .map(|r| r.s_rho[k])
            .collect()
    }

    pub fn summary(&self, rho: Radius) -> Option<&RocSummary> {
        self.rhos.iter().position(|&r| r == rho).map(|k| &self.summaries[k])
    }

    /// `hypothesis,replicate,rho,s_rho`, one row per replicate and radius.
    pub fn replicates_csv(&self) -> String {
        let mut out = String::from("hypothesis,replicate,rho,s_rho\n");
        for r in &self.replicates {
            for (rho, s) in self.rhos.iter().zip(&r.s_rho) {
                let _ = writeln!(out, "{},{},{},{}", r.hypothesis.as_str(), r.replicate, rho, s);
            }
        }
        out
    }

    /// Results and configuration echo. Deterministic given the config;
    /// timings are kept apart in [`Self::timings_json`].
    pub fn summary_json(&self) -> String {
        let count = |h| self.replicates.iter().filter(|r| r.hypothesis == h).count();
        let results = self
            .rhos
            .iter()
            .zip(&self.summaries)
            .map(|(&rho, s)| RhoResult {
                rho,
                auc: s.auc,
                se: s.se,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
                band: s.band,
                h1_replicates: count(Hypothesis::H1),
                h0_replicates: count(Hypothesis::H0),
            })
            .collect();
        let summary = Summary {
            info: &self.info,
            replicates: self.config.replicates,
            results,
            failures: &self.failures,
            config: &self.config,
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        text
    }

    pub fn timings_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        text.push('\n');
        text
    }

    /// Writes `replicates.csv`, `summary.json`, `timings.json` and one
    /// `roc_<rho>.csv` (plus `.svg` when asked) per radius into `dir`.
    pub fn write_to(&self, dir: &Path, svg: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(&dir.join("replicates.csv"), self.replicates_csv().as_bytes())?;
        write_atomic(&dir.join("summary.json"), self.summary_json().as_bytes())?;
        write_atomic(&dir.join("timings.json"), self.timings_json().as_bytes())?;
        for (rho, s) in self.rhos.iter().zip(&self.summaries) {
            write_atomic(&dir.join(format!("roc_{rho}.csv")), s.curve_csv().as_bytes())?;
            if svg {
                let title = format!("S_rho, rho = {rho}");
                write_atomic(&dir.join(format!("roc_{rho}.svg")), s.curve_svg(&title).as_bytes())?;
            }
        }
        Ok(())
    }
}

/// Genotypes as configured, before replication and filtering.
pub fn load_genotypes(source: &GenotypeSource) -> Result<GenotypeMatrix> {
    match source {
        GenotypeSource::Toy { n } => make_toy_dataset(*n),
        GenotypeSource::Synthetic(spec) => make_synthetic_dataset(&spec.to_spec()),
        GenotypeSource::File { path, format, metadata } => match metadata {
            Some(meta) => load_matrix_with_metadata(path, *format, meta),
            None => load_matrix(path, *format),
        },
    }
}

/// Everything shared read-only by the replicates.
struct Prepared {
    scan_matrix: GenotypeMatrix,
    scan_snps: Vec<usize>,
    /// For each radius, positions into the scanner output.
    radius_slots: Vec<Vec<usize>>,
    pi: CaseProbabilities,
    count: CaseCount,
}

fn disease_loci(cfg: &ExperimentConfig, gm: &GenotypeMatrix) -> Result<Vec<Locus>> {
    if let Some(loci) = &cfg.statistic.disease_loci {
        return Ok(loci.clone());
    }
    cfg.model
        .snps()
        .into_iter()
        .map(|id| {
            let j = gm.snp_index(id).ok_or_else(|| Error::UnknownSnp(id.to_string()))?;
            let snp = &gm.snps()[j];
            Ok(Locus {
                chromosome: snp.chromosome.clone(),
                position_bp: snp.position_bp,
            })
        })
        .collect()
}

fn prepare(cfg: &ExperimentConfig, timings: &mut Timings) -> Result<Prepared> {
    let t = Instant::now();
    let mut gm = load_genotypes(&cfg.genotypes)?;
    let mut covariates = cfg.covariates.as_deref().map(Covariates::load).transpose()?;
    if cfg.replication_factor > 1 {
        gm = gm.replicate_individuals(cfg.replication_factor)?;
        covariates = covariates.map(|c| c.replicate(cfg.replication_factor));
    }
    timings.load = t.elapsed().as_secs_f64();

    // The model reads the unfiltered matrix so a rare causal SNP can still
    // drive the phenotype while being excluded from testing.
    let t = Instant::now();
    let options = EvalOptions {
        missing: cfg.missing_policy,
        covariates: covariates.as_ref(),
    };
    let pi = evaluate_pi_with(&cfg.model, &gm, options)?;
    let count = CaseCount::new(gm.n_individuals(), cfg.n1)?;
    let loci = disease_loci(cfg, &gm)?;
    timings.model = t.elapsed().as_secs_f64();

    let scan_matrix = match cfg.maf_threshold {
        Some(threshold) => gm.filter_maf(threshold, true)?,
        None => gm,
    };
    let finite = cfg.statistic.rho.iter().any(|r| *r != Radius::Infinite);
    if finite && loci.is_empty() {
        return Err(Error::Config(
            "a finite radius needs disease_loci or a model with SNPs".into(),
        ));
    }
    if finite && !scan_matrix.has_positions() {
        return Err(Error::Config("a finite radius needs SNP positions".into()));
    }

    let members: Vec<Vec<usize>> = cfg
        .statistic
        .rho
        .iter()
        .map(|&rho| {
            let m = radius_members(scan_matrix.snps(), &loci, rho);
            if m.is_empty() {
                Err(Error::EmptyRadius { rho: rho.to_string() })
            } else {
                Ok(m)
            }
        })
        .collect::<Result<_>>()?;
    let mut scan_snps: Vec<usize> = members.iter().flatten().copied().collect();
    scan_snps.sort_unstable();
    scan_snps.dedup();
    let radius_slots = members
        .iter()
        .map(|m| {
            m.iter()
                .map(|j| scan_snps.binary_search(j).expect("member is scanned"))
                .collect()
        })
        .collect();
    Ok(Prepared {
        scan_matrix,
        scan_snps,
        radius_slots,
        pi,
        count,
    })
}

enum Outcome {
    Done(Vec<f64>),
    Failed(Error),
    Skipped,
}

fn run_arm<F>(replicates: usize, keep_going: bool, abort: &AtomicBool, work: F) -> Vec<Outcome>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            if abort.load(Ordering::Relaxed) {
                return Outcome::Skipped;
            }
            match work(r) {
                Ok(s) => Outcome::Done(s),
                Err(e) => {
                    if !keep_going {
                        abort.store(true, Ordering::Relaxed);
                    }
                    Outcome::Failed(e)
                }
            }
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig, options: RunOptions) -> Result<PowerReport> {
    cfg.validate()?;
    match options.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .map_err(|e| Error::InvalidSettings(e.to_string()))?;
            pool.install(|| run_inner(cfg, options))
        }
        None => run_inner(cfg, options),
    }
}

fn run_inner(cfg: &ExperimentConfig, options: RunOptions) -> Result<PowerReport> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let prep = prepare(cfg, &mut timings)?;
    let scanner = TrendScanner::new(&prep.scan_matrix, prep.scan_snps.clone());
    let score = |y: &Phenotypes| -> Vec<f64> {
        let values = scanner.scan(y);
        prep.radius_slots
            .iter()
            .map(|slots| slots.iter().map(|&k| values[k]).fold(0.0, f64::max))
            .collect()
    };
    let n = cfg.replicates;
    let seed = cfg.master_seed;
    let abort = AtomicBool::new(false);
    let log_pc = log_prob_constraint(&prep.pi, prep.count)?;
    info!(
        "n = {}, n1 = {}, {} SNPs tested, log10 P(C) = {:.3}",
        prep.count.n(),
        prep.count.cases(),
        prep.scan_snps.len(),
        log_pc / std::f64::consts::LN_10
    );

    let mut mcmc_acceptance_rate = None;
    let t = Instant::now();
    let h1 = match cfg.algorithm {
        AlgorithmConfig::Backward => {
            let table = BackwardTable::new(&prep.pi, prep.count)?;
            table.require_feasible()?;
            timings.setup = t.elapsed().as_secs_f64();
            run_arm(n, options.keep_going, &abort, |r| {
                let mut rng = stream_from_seed(derive_seed(seed, Hypothesis::H1, r as u64));
                Ok(score(&table.sample(&mut rng)?))
            })
        }
        AlgorithmConfig::Rejection { max_attempts } => {
            let sampler = RejectionSampler::new(prep.pi.clone(), prep.count, max_attempts)?;
            timings.setup = t.elapsed().as_secs_f64();
            run_arm(n, options.keep_going, &abort, |r| {
                let mut rng = stream_from_seed(derive_seed(seed, Hypothesis::H1, r as u64));
                Ok(score(&sampler.sample(&mut rng)?))
            })
        }
        AlgorithmConfig::Mcmc { burn_in, thinning } => {
            // one chain: repeated burn-ins would dominate the run time
            let d = McmcSettings::default_for(prep.count.n());
            let settings = McmcSettings::new(burn_in.unwrap_or(d.burn_in), thinning.unwrap_or(d.thinning))?;
            let mut rng = stream_from_seed(derive_seed(seed, Hypothesis::H1, 0));
            let run = sample_mcmc(&prep.pi, prep.count, settings, n, None, &mut rng)?;
            if run.proposed > 0 {
                mcmc_acceptance_rate = Some(run.accepted as f64 / run.proposed as f64);
            }
            timings.setup = t.elapsed().as_secs_f64();
            run_arm(n, options.keep_going, &abort, |r| Ok(score(&run.samples[r])))
        }
    };
    timings.h1 = t.elapsed().as_secs_f64() - timings.setup;

    let t = Instant::now();
    let (total, cases) = (prep.count.n(), prep.count.cases());
    let h0 = run_arm(n, options.keep_going, &abort, |r| {
        let mut rng = stream_from_seed(derive_seed(seed, Hypothesis::H0, r as u64));
        Ok(score(&sample_permutation(total, cases, &mut rng)?))
    });
    timings.h0 = t.elapsed().as_secs_f64();

    let mut replicates = Vec::with_capacity(2 * n);
    let mut failures = Vec::new();
    let mut first_error = None;
    let mut skipped = 0usize;
    for (hypothesis, outcomes) in [(Hypothesis::H1, h1), (Hypothesis::H0, h0)] {
        for (replicate, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Outcome::Done(s_rho) => replicates.push(ReplicateStatistics {
                    hypothesis,
                    replicate,
                    s_rho,
                }),
                Outcome::Failed(e) => {
                    failures.push(ReplicateFailure {
                        hypothesis,
                        replicate,
                        error: e.to_string(),
                    });
                    first_error.get_or_insert(e);
                }
                Outcome::Skipped => skipped += 1,
            }
        }
    }
    if let Some(first) = first_error {
        for f in failures.iter().take(10) {
            warn!("{} replicate {} failed: {}", f.hypothesis.as_str(), f.replicate, f.error);
        }
        if !options.keep_going {
            return Err(Error::PartialFailure {
                failed: failures.len(),
                total: 2 * n,
                first: first.to_string(),
            });
        }
        warn!("{} of {} replicates failed; continuing", failures.len(), 2 * n);
    }
    debug_assert_eq!(skipped, 0);

    let t = Instant::now();
    let mut report = PowerReport {
        config: cfg.clone(),
        info: RunInfo {
            algorithm: cfg.algorithm.name(),
            master_seed: seed,
            n: total,
            n1: cases,
            snps_tested: prep.scan_snps.len(),
            log10_prob_constraint: log_pc / std::f64::consts::LN_10,
            mcmc_acceptance_rate,
        },
        rhos: cfg.statistic.rho.clone(),
        summaries: Vec::with_capacity(cfg.statistic.rho.len()),
        replicates,
        failures,
        timings,
    };
    for k in 0..report.rhos.len() {
        let h1 = report.statistics(Hypothesis::H1, k);
        let h0 = report.statistics(Hypothesis::H0, k);
        report.summaries.push(roc_auc(&h1, &h0)?);
    }
    report.timings.roc = t.elapsed().as_secs_f64();
    report.timings.total = start.elapsed().as_secs_f64();
    Ok(report)
}
