mod pi;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use phenosim::genotype::{make_synthetic_dataset, make_toy_dataset, write_atomic, SyntheticSpec};
use phenosim::harness::bench::{bench_samplers, format_bench_table, format_probability, time_large_backward, BenchSettings, TOY_GRID};
use phenosim::harness::{run_experiment, ExperimentConfig, RunOptions};
use phenosim::sampling::{
    conditional_marginals, log_prob_constraint, sample_mcmc, sample_permutation, stream_from_seed, BackwardTable,
    CaseCount, McmcSettings, Phenotypes, RejectionSampler,
};
use phenosim::Result;

/// Case/control phenotype simulation with an exact number of cases.
#[derive(Debug, Parser)]
#[command(name = "phenosim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algorithm {
    Backward,
    Mcmc,
    Rejection,
    /// Uniform permutation, ignoring the probabilities.
    Permutation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SampleFormat {
    /// `0110...`
    Bits,
    /// `0,1,1,0,...`
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw phenotype vectors with exactly n1 cases.
    Sample {
        /// Case probabilities: a file with one value per line, or inline `0.2x16,0.3x3,0.4`.
        #[arg(long)]
        pi: String,
        /// Number of cases.
        #[arg(long)]
        n1: usize,
        #[arg(long, value_enum, default_value = "backward")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 1)]
        n_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "bits")]
        format: SampleFormat,
        /// MCMC burn-in iterations [default: 100000 n].
        #[arg(long)]
        burn_in: Option<u64>,
        /// MCMC iterations between samples [default: n].
        #[arg(long)]
        thinning: Option<u64>,
        /// Rejection attempts per sample [default: max(1e6, 1000 / P(C)), at most 1e8].
        #[arg(long)]
        max_attempts: Option<u64>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print P(C), the probability of exactly n1 cases, and its log10.
    Prob {
        /// Case probabilities: a file with one value per line, or inline `0.2x16,0.3x3,0.4`.
        #[arg(long)]
        pi: String,
        #[arg(long)]
        n1: usize,
    },
    /// Print P(Y_i = 1 | exactly n1 cases) for every individual as CSV.
    Marginals {
        /// Case probabilities: a file with one value per line, or inline `0.2x16,0.3x3,0.4`.
        #[arg(long)]
        pi: String,
        #[arg(long)]
        n1: usize,
    },
    /// Run a power study described by a JSON config.
    Power {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "power-out")]
        out: PathBuf,
        /// Overrides the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads [default: all cores].
        #[arg(long)]
        threads: Option<usize>,
        /// Keep the successful replicates when some fail.
        #[arg(long)]
        keep_going: bool,
        /// Also write roc_<rho>.svg.
        #[arg(long)]
        svg: bool,
    },
    /// Time the three samplers on the toy design grid.
    Bench {
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        /// Rejection attempts per sample before the cell is reported NA.
        #[arg(long, default_value_t = 1_000_000)]
        rejection_budget: u64,
        /// MCMC burn-in iterations [default: 100000 n].
        #[arg(long)]
        burn_in: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        skip_rejection: bool,
        #[arg(long)]
        skip_mcmc: bool,
        /// Also time one draw with n = 20000, n1 = 10000.
        #[arg(long)]
        large: bool,
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Write a genotype dataset as dense CSV plus SNP metadata.
    Toygen {
        /// Individuals in the toy dataset (multiple of 20).
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Write the 629 x 8000 two-locus synthetic dataset instead.
        #[arg(long)]
        synthetic: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// SNP metadata CSV [default: <out>.meta.csv].
        #[arg(long)]
        metadata: Option<PathBuf>,
    },
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn render(samples: &[Phenotypes], format: SampleFormat) -> String {
    let mut out = String::new();
    for y in samples {
        match format {
            SampleFormat::Bits => out.push_str(&y.to_bit_string()),
            SampleFormat::Csv => {
                let cells: Vec<&str> = y.as_slice().iter().map(|&v| if v == 1 { "1" } else { "0" }).collect();
                out.push_str(&cells.join(","));
            }
        }
        out.push('\n');
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn sample(
    pi_arg: &str,
    n1: usize,
    algorithm: Algorithm,
    n_samples: usize,
    seed: u64,
    burn_in: Option<u64>,
    thinning: Option<u64>,
    max_attempts: Option<u64>,
) -> Result<Vec<Phenotypes>> {
    let pi = pi::resolve(pi_arg)?;
    let c = CaseCount::for_probs(&pi, n1)?;
    let mut rng = stream_from_seed(seed);
    match algorithm {
        Algorithm::Backward => {
            let table = BackwardTable::new(&pi, c)?;
            (0..n_samples).map(|_| table.sample(&mut rng)).collect()
        }
        Algorithm::Rejection => {
            let sampler = RejectionSampler::new(pi, c, max_attempts)?;
            (0..n_samples).map(|_| sampler.sample(&mut rng)).collect()
        }
        Algorithm::Mcmc => {
            let d = McmcSettings::default_for(c.n());
            let settings = McmcSettings::new(burn_in.unwrap_or(d.burn_in), thinning.unwrap_or(d.thinning))?;
            Ok(sample_mcmc(&pi, c, settings, n_samples, None, &mut rng)?.samples)
        }
        Algorithm::Permutation => (0..n_samples).map(|_| sample_permutation(c.n(), n1, &mut rng)).collect(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            pi,
            n1,
            algorithm,
            n_samples,
            seed,
            format,
            burn_in,
            thinning,
            max_attempts,
            out,
        } => {
            let samples = sample(&pi, n1, algorithm, n_samples, seed, burn_in, thinning, max_attempts)?;
            emit(out.as_ref(), &render(&samples, format))
        }
        Command::Prob { pi, n1 } => {
            let pi = pi::resolve(&pi)?;
            let c = CaseCount::for_probs(&pi, n1)?;
            let log10 = log_prob_constraint(&pi, c)? / std::f64::consts::LN_10;
            emit(None, &format!("P(C)={}\nlog10 P(C)={log10}\n", format_probability(log10)))
        }
        Command::Marginals { pi, n1 } => {
            let pi = pi::resolve(&pi)?;
            let c = CaseCount::for_probs(&pi, n1)?;
            let marginals = conditional_marginals(&pi, c)?;
            let mut out = String::from("index,pi,marginal\n");
            for (i, (p, m)) in pi.as_slice().iter().zip(&marginals).enumerate() {
                let _ = writeln!(out, "{},{p},{m}", i + 1);
            }
            emit(None, &out)
        }
        Command::Power {
            config,
            out,
            seed,
            threads,
            keep_going,
            svg,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let report = run_experiment(&cfg, RunOptions { threads, keep_going })?;
            report.write_to(&out, svg)?;
            let mut text = String::new();
            for (rho, s) in report.rhos.iter().zip(&report.summaries) {
                let _ = writeln!(
                    text,
                    "rho={rho} auc={:.4} ci=[{:.4}, {:.4}] band={}",
                    s.auc, s.ci_low, s.ci_high, s.band
                );
            }
            emit(None, &text)
        }
        Command::Bench {
            replicates,
            rejection_budget,
            burn_in,
            seed,
            skip_rejection,
            skip_mcmc,
            large,
            json,
        } => {
            let settings = BenchSettings {
                replicates,
                rejection_budget,
                mcmc: None,
                seed,
                run_rejection: !skip_rejection,
                run_mcmc: !skip_mcmc,
            };
            let rows = match burn_in {
                None => bench_samplers(&TOY_GRID, &settings)?,
                Some(b) => TOY_GRID
                    .iter()
                    .map(|&cell| {
                        let mcmc = McmcSettings::new(b, cell.0 as u64)?;
                        bench_samplers(&[cell], &BenchSettings { mcmc: Some(mcmc), ..settings })
                            .map(|mut r| r.remove(0))
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            let large = if large {
                Some(time_large_backward(20_000, 10_000, 0.5, seed)?)
            } else {
                None
            };
            if json {
                let mut value = serde_json::json!({ "rows": rows });
                if let Some((build, draw)) = large {
                    value["large"] = serde_json::json!({ "n": 20_000, "n1": 10_000, "build_s": build, "draw_s": draw });
                }
                emit(None, &format!("{}\n", serde_json::to_string_pretty(&value)?))
            } else {
                let mut text = format_bench_table(&rows);
                if let Some((build, draw)) = large {
                    let _ = writeln!(text, "\nn=20000 n1=10000: table {build:.3} s, one draw {draw:.3} s");
                }
                emit(None, &text)
            }
        }
        Command::Toygen {
            n,
            synthetic,
            seed,
            out,
            metadata,
        } => {
            let gm = if synthetic {
                let mut spec = SyntheticSpec::default();
                if let Some(seed) = seed {
                    spec.seed = seed;
                }
                make_synthetic_dataset(&spec)?
            } else {
                make_toy_dataset(n)?
            };
            gm.write_dense_csv(&out)?;
            let meta = metadata.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".meta.csv");
                PathBuf::from(p)
            });
            gm.write_metadata(&meta)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
