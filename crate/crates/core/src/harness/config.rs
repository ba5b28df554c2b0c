use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assoc::{Locus, Radius};
use crate::error::{Error, Result};
use crate::genotype::{GenotypeFormat, SyntheticSpec};
use crate::model::{DiseaseModel, MissingPolicy};

/// Where the genotypes of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GenotypeSource {
    /// Single-SNP toy dataset of `n` individuals.
    Toy { n: usize },
    /// Independent-column synthetic dataset with causal SNPs.
    Synthetic(#[serde(default)] SyntheticSpecConfig),
    File {
        path: PathBuf,
        format: GenotypeFormat,
        #[serde(default)]
        metadata: Option<PathBuf>,
    },
}

/// [`SyntheticSpec`] with every field optional in JSON.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpecConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub individuals: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SyntheticSpecConfig {
    pub fn to_spec(&self) -> SyntheticSpec {
        let d = SyntheticSpec::default();
        SyntheticSpec {
            individuals: self.individuals.unwrap_or(d.individuals),
            snps: self.snps.unwrap_or(d.snps),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticConfig {
    pub rho: Vec<Radius>,
    /// Defaults to the positions of the model SNPs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disease_loci: Option<Vec<Locus>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    #[default]
    Backward,
    /// One chain for all H1 replicates; defaults are a burn-in of `10^5 n`
    /// and a thinning of `n`.
    Mcmc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burn_in: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thinning: Option<u64>,
    },
    Rejection {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_attempts: Option<u64>,
    },
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Backward => "backward",
            AlgorithmConfig::Mcmc { .. } => "mcmc",
            AlgorithmConfig::Rejection { .. } => "rejection",
        }
    }
}

fn default_replicates() -> usize {
    1000
}

fn default_replication_factor() -> usize {
    1
}

/// Declarative description of a power study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub genotypes: GenotypeSource,
    pub model: DiseaseModel,
    #[serde(default)]
    pub missing_policy: MissingPolicy,
    /// CSV `iid,<covariate>,...` for tabular models with covariate effects.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<PathBuf>,
    /// Number of cases, after replication.
    pub n1: usize,
    pub statistic: StatisticConfig,
    /// Replicates per hypothesis.
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub algorithm: AlgorithmConfig,
    pub master_seed: u64,
    #[serde(default = "default_replication_factor")]
    pub replication_factor: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maf_threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let GenotypeSource::File { path, metadata, .. } = &mut cfg.genotypes {
            resolve(path);
            if let Some(m) = metadata {
                resolve(m);
            }
        }
        if let Some(c) = &mut cfg.covariates {
            resolve(c);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Config("replicates must be at least 2".into()));
        }
        if self.statistic.rho.is_empty() {
            return Err(Error::Config("at least one radius is required".into()));
        }
        if self.replication_factor == 0 {
            return Err(Error::Config("replication_factor must be at least 1".into()));
        }
        if let Some(t) = self.maf_threshold {
            if !(0.0..=0.5).contains(&t) {
                return Err(Error::Config(format!("maf_threshold {t} outside [0, 0.5]")));
            }
        }
        if let AlgorithmConfig::Mcmc { burn_in, thinning } = self.algorithm {
            if burn_in == Some(0) || thinning == Some(0) {
                return Err(Error::Config("MCMC burn_in and thinning must be positive".into()));
            }
        }
        if let AlgorithmConfig::Rejection { max_attempts: Some(0) } = self.algorithm {
            return Err(Error::Config("max_attempts must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"{
        "genotypes": {"toy": {"n": 20}},
        "model": {"type": "single_snp", "snp": "snp1", "f0": 0.2, "rr1": 1.5, "rr2": 2.0},
        "n1": 10,
        "statistic": {"rho": ["inf"]},
        "replicates": 100,
        "algorithm": {"kind": "mcmc", "burn_in": 1000},
        "master_seed": 1
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(TOY).unwrap();
        assert_eq!(cfg.replication_factor, 1);
        assert_eq!(cfg.missing_policy, MissingPolicy::Error);
        assert_eq!(
            cfg.algorithm,
            AlgorithmConfig::Mcmc {
                burn_in: Some(1000),
                thinning: None
            }
        );
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&back).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let extra = TOY.replace("\"n1\": 10,", "\"n1\": 10, \"bogus\": true,");
        assert!(ExperimentConfig::from_json(&extra).is_err());
        let nested = TOY.replace("\"burn_in\": 1000", "\"burn_in\": 1000, \"x\": 2");
        assert!(ExperimentConfig::from_json(&nested).is_err());
        let stat = TOY.replace("\"rho\": [\"inf\"]", "\"rho\": [\"inf\"], \"y\": 1");
        assert!(ExperimentConfig::from_json(&stat).is_err());
    }

    #[test]
    fn invalid_values() {
        let few = TOY.replace("\"replicates\": 100", "\"replicates\": 1");
        assert!(ExperimentConfig::from_json(&few).is_err());
        let no_rho = TOY.replace("\"rho\": [\"inf\"]", "\"rho\": []");
        assert!(ExperimentConfig::from_json(&no_rho).is_err());
        let zero_rho = TOY.replace("\"rho\": [\"inf\"]", "\"rho\": [0]");
        assert!(ExperimentConfig::from_json(&zero_rho).is_err());
    }

    #[test]
    fn synthetic_source_defaults() {
        let json = TOY.replace(r#"{"toy": {"n": 20}}"#, r#"{"synthetic": {"snps": 100}}"#);
        let cfg = ExperimentConfig::from_json(&json).unwrap();
        match cfg.genotypes {
            GenotypeSource::Synthetic(s) => {
                let spec = s.to_spec();
                assert_eq!((spec.individuals, spec.snps), (629, 100));
            }
            other => panic!("{other:?}"),
        }
    }
}
