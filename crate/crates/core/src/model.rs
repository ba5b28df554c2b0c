//! Disease models: map each individual's genotypes to a case probability.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genotype::GenotypeMatrix;
use crate::sampling::CaseProbabilities;

/// Penetrances `f0`, `f0 * rr1`, `f0 * rr2` for 0, 1 and 2 copies at one SNP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSnpModel {
    pub snp: String,
    pub f0: f64,
    pub rr1: f64,
    pub rr2: f64,
}

/// Two interacting loci with additive effect `beta` and epistasis `eta`:
///
/// ```text
/// pi = f0 * (1 + beta * x1)                    if x2 = 0
/// pi = f0 * (1 + beta * x2)                    if x1 = 0
/// pi = f0 * (1 + eta + beta * (x1 + x2))       if x1 * x2 != 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLocusEpistaticModel {
    pub snp1: String,
    pub snp2: String,
    pub f0: f64,
    pub beta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularEntry {
    pub genotypes: Vec<u8>,
    pub pi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    /// `logit(pi) = logit(pi_table) + sum(beta * x)`
    Logistic,
    /// `pi = pi_table + sum(beta * x)`
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateEffects {
    pub link: Link,
    pub coefficients: BTreeMap<String, f64>,
}

/// Explicit genotype-tuple lookup over a list of SNPs, with an optional
/// default and optional covariate effects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularModel {
    pub snps: Vec<String>,
    #[serde(default)]
    pub entries: Vec<TabularEntry>,
    #[serde(default)]
    pub default: Option<f64>,
    #[serde(default)]
    pub covariates: Option<CovariateEffects>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DiseaseModel {
    SingleSnp(SingleSnpModel),
    TwoLocus(TwoLocusEpistaticModel),
    Tabular(TabularModel),
    /// Constant probability: no genotype effect.
    Null { p0: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    Error,
    TreatAsZero,
}

/// Per-individual covariate values, rows aligned with the genotype matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    pub names: Vec<String>,
    pub individual_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl Covariates {
    /// Reads a CSV with header `iid,<name>,...`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            path: name.into(),
            line: 1,
            column: 1,
            message: "empty covariate file".into(),
        })?;
        let names: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() != names.len() + 1 {
                return Err(Error::Parse {
                    path: name.into(),
                    line: idx + 1,
                    column: 1,
                    message: format!("expected {} fields, found {}", names.len() + 1, cells.len()),
                });
            }
            ids.push(cells[0].to_string());
            let row = cells[1..]
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    c.parse::<f64>().map_err(|e| Error::Parse {
                        path: name.into(),
                        line: idx + 1,
                        column: j + 2,
                        message: format!("bad number {c:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            values.push(row);
        }
        Ok(Self {
            names,
            individual_ids: ids,
            values,
        })
    }

    /// Mirrors [`GenotypeMatrix::replicate_individuals`].
    pub fn replicate(&self, k: usize) -> Self {
        let mut ids = Vec::new();
        let mut values = Vec::new();
        for c in 1..=k {
            for (id, row) in self.individual_ids.iter().zip(&self.values) {
                ids.push(if c == 1 { id.clone() } else { format!("{id}_rep{c}") });
                values.push(row.clone());
            }
        }
        Self {
            names: self.names.clone(),
            individual_ids: ids,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions<'a> {
    pub missing: MissingPolicy,
    pub covariates: Option<&'a Covariates>,
}

impl DiseaseModel {
    /// SNP ids the model reads.
    pub fn snps(&self) -> Vec<&str> {
        match self {
            DiseaseModel::SingleSnp(m) => vec![m.snp.as_str()],
            DiseaseModel::TwoLocus(m) => vec![m.snp1.as_str(), m.snp2.as_str()],
            DiseaseModel::Tabular(m) => m.snps.iter().map(String::as_str).collect(),
            DiseaseModel::Null { .. } => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSettings(msg));
        match self {
            DiseaseModel::SingleSnp(m) => {
                if !(m.f0 > 0.0 && m.f0 <= 1.0) {
                    return bad(format!("f0 = {} must lie in (0, 1]", m.f0));
                }
                if !(m.rr1 >= 0.0 && m.rr2 >= 0.0) {
                    return bad("relative risks must be non-negative".into());
                }
            }
            DiseaseModel::TwoLocus(m) => {
                if !(m.f0 > 0.0 && m.f0 <= 1.0) {
                    return bad(format!("f0 = {} must lie in (0, 1]", m.f0));
                }
                if !(m.beta >= 0.0) || !m.eta.is_finite() {
                    return bad("beta must be non-negative and eta finite".into());
                }
            }
            DiseaseModel::Tabular(m) => {
                for e in &m.entries {
                    if e.genotypes.len() != m.snps.len() {
                        return bad(format!(
                            "table entry {:?} does not match {} SNPs",
                            e.genotypes,
                            m.snps.len()
                        ));
                    }
                }
            }
            DiseaseModel::Null { p0 } => {
                if !(*p0 > 0.0 && *p0 < 1.0) {
                    return bad(format!("p0 = {p0} must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }
}

/// Case probabilities with default options (missing model genotypes are an
/// error, no covariates).
pub fn evaluate_pi(model: &DiseaseModel, genotypes: &GenotypeMatrix) -> Result<CaseProbabilities> {
    evaluate_pi_with(model, genotypes, EvalOptions::default())
}

pub fn evaluate_pi_with(
    model: &DiseaseModel,
    genotypes: &GenotypeMatrix,
    options: EvalOptions<'_>,
) -> Result<CaseProbabilities> {
    model.validate()?;
    let n = genotypes.n_individuals();
    if let DiseaseModel::Null { p0 } = model {
        return null_model(n, *p0);
    }
    let snp_ids = model.snps();
    let columns = snp_ids
        .iter()
        .map(|id| {
            genotypes
                .snp_index(id)
                .map(|j| genotypes.column(j))
                .ok_or_else(|| Error::UnknownSnp(id.to_string()))
        })
        .collect::<Result<Vec<&[u8]>>>()?;

    let covariate_plan = match model {
        DiseaseModel::Tabular(TabularModel {
            covariates: Some(effects),
            ..
        }) => Some(plan_covariates(effects, options.covariates, genotypes)?),
        _ => None,
    };

    let mut tuple = vec![0u8; columns.len()];
    let mut probs = Vec::with_capacity(n);
    for i in 0..n {
        for (k, col) in columns.iter().enumerate() {
            tuple[k] = match col[i] {
                crate::genotype::MISSING => match options.missing {
                    MissingPolicy::TreatAsZero => 0,
                    MissingPolicy::Error => {
                        return Err(Error::MissingModelGenotype {
                            individual: genotypes.individual_ids()[i].clone(),
                            snp: snp_ids[k].to_string(),
                        })
                    }
                },
                g => g,
            };
        }
        let mut pi = match model {
            DiseaseModel::SingleSnp(m) => m.f0 * [1.0, m.rr1, m.rr2][tuple[0] as usize],
            DiseaseModel::TwoLocus(m) => two_locus_pi(m, tuple[0], tuple[1]),
            DiseaseModel::Tabular(m) => lookup(m, &tuple)?,
            DiseaseModel::Null { .. } => unreachable!(),
        };
        if let Some((effects, cols)) = &covariate_plan {
            let shift: f64 = cols
                .iter()
                .map(|(col, beta)| beta * options.covariates.unwrap().values[i][*col])
                .sum();
            pi = apply_link(effects.link, pi, shift);
        }
        if !(0.0..=1.0).contains(&pi) {
            return Err(Error::PiOutOfRange {
                individual: genotypes.individual_ids()[i].clone(),
                genotypes: format!("{tuple:?}"),
                value: pi,
            });
        }
        probs.push(pi);
    }
    CaseProbabilities::new(probs)
}

fn two_locus_pi(m: &TwoLocusEpistaticModel, x1: u8, x2: u8) -> f64 {
    let (x1, x2) = (x1 as f64, x2 as f64);
    let relative = if x2 == 0.0 {
        1.0 + m.beta * x1
    } else if x1 == 0.0 {
        1.0 + m.beta * x2
    } else {
        1.0 + m.eta + m.beta * (x1 + x2)
    };
    m.f0 * relative
}

fn lookup(m: &TabularModel, tuple: &[u8]) -> Result<f64> {
    m.entries
        .iter()
        .find(|e| e.genotypes == tuple)
        .map(|e| e.pi)
        .or(m.default)
        .ok_or_else(|| {
            Error::Config(format!(
                "tabular model has no entry for genotypes {tuple:?} and no default"
            ))
        })
}

type CovariatePlan<'e> = (&'e CovariateEffects, Vec<(usize, f64)>);

fn plan_covariates<'e>(
    effects: &'e CovariateEffects,
    data: Option<&Covariates>,
    genotypes: &GenotypeMatrix,
) -> Result<CovariatePlan<'e>> {
    let data = data.ok_or_else(|| {
        Error::Config("model declares covariate effects but no covariate data was given".into())
    })?;
    if data.individual_ids != genotypes.individual_ids() {
        return Err(Error::DimensionMismatch(
            "covariate rows do not match the genotype individuals".into(),
        ));
    }
    let cols = effects
        .coefficients
        .iter()
        .map(|(name, beta)| {
            data.names
                .iter()
                .position(|n| n == name)
                .map(|c| (c, *beta))
                .ok_or_else(|| Error::Config(format!("unknown covariate {name}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((effects, cols))
}

fn apply_link(link: Link, base: f64, shift: f64) -> f64 {
    match link {
        Link::Linear => base + shift,
        Link::Logistic => {
            if base <= 0.0 || base >= 1.0 {
                base
            } else {
                let eta = (base / (1.0 - base)).ln() + shift;
                1.0 / (1.0 + (-eta).exp())
            }
        }
    }
}

/// Constant vector `p0`: every individual equally likely to be a case.
pub fn null_model(n: usize, p0: f64) -> Result<CaseProbabilities> {
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(Error::InvalidSettings(format!("p0 = {p0} must lie in (0, 1)")));
    }
    CaseProbabilities::uniform(n, p0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_snp_matrix(pairs: &[(u8, u8)]) -> GenotypeMatrix {
        GenotypeMatrix::from_columns(
            (0..pairs.len()).map(|i| format!("i{i}")).collect(),
            vec!["a".into(), "b".into()],
            vec![
                pairs.iter().map(|p| p.0).collect(),
                pairs.iter().map(|p| p.1).collect(),
            ],
        )
        .unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn single_snp_penetrances() {
        let gm = GenotypeMatrix::from_columns(
            vec!["x".into(), "y".into(), "z".into()],
            vec!["s".into()],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let model = DiseaseModel::SingleSnp(SingleSnpModel {
            snp: "s".into(),
            f0: 0.2,
            rr1: 1.5,
            rr2: 2.0,
        });
        let pi = evaluate_pi(&model, &gm).unwrap();
        assert!(close(pi.as_slice(), &[0.2, 0.30000000000000004, 0.4]));
    }

    #[test]
    fn two_locus_reference_configuration() {
        let gm = two_snp_matrix(&[(0, 0), (1, 0), (1, 1)]);
        let model = DiseaseModel::TwoLocus(TwoLocusEpistaticModel {
            snp1: "a".into(),
            snp2: "b".into(),
            f0: 0.1,
            beta: 0.3,
            eta: 0.3,
        });
        let pi = evaluate_pi(&model, &gm).unwrap();
        assert!((pi[0] - 0.1).abs() < 1e-15);
        assert!((pi[1] - 0.13).abs() < 1e-15);
        assert!((pi[2] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn null_effects_reduce_to_constant() {
        let all: Vec<(u8, u8)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
        let gm = two_snp_matrix(&all);
        let model = DiseaseModel::TwoLocus(TwoLocusEpistaticModel {
            snp1: "a".into(),
            snp2: "b".into(),
            f0: 0.17,
            beta: 0.0,
            eta: 0.0,
        });
        let pi = evaluate_pi(&model, &gm).unwrap();
        assert!(pi.as_slice().iter().all(|&p| p == 0.17));
    }

    #[test]
    fn zero_epistasis_is_additive_everywhere() {
        let all: Vec<(u8, u8)> = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
        let gm = two_snp_matrix(&all);
        let (f0, beta) = (0.08, 0.35);
        let model = DiseaseModel::TwoLocus(TwoLocusEpistaticModel {
            snp1: "a".into(),
            snp2: "b".into(),
            f0,
            beta,
            eta: 0.0,
        });
        let pi = evaluate_pi(&model, &gm).unwrap();
        for (k, &(x1, x2)) in all.iter().enumerate() {
            let additive = f0 * (1.0 + beta * (x1 as f64 + x2 as f64));
            assert!((pi[k] - additive).abs() < 1e-15, "{x1},{x2}");
        }
    }

    #[test]
    fn out_of_range_is_a_hard_error() {
        let gm = two_snp_matrix(&[(0, 0), (2, 2)]);
        let model = DiseaseModel::TwoLocus(TwoLocusEpistaticModel {
            snp1: "a".into(),
            snp2: "b".into(),
            f0: 0.5,
            beta: 0.5,
            eta: 0.5,
        });
        match evaluate_pi(&model, &gm) {
            Err(Error::PiOutOfRange {
                individual,
                genotypes,
                value,
            }) => {
                assert_eq!(individual, "i1");
                assert_eq!(genotypes, "[2, 2]");
                assert!((value - 1.75).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_model_genotype_policy() {
        let gm = GenotypeMatrix::from_columns(
            vec!["x".into(), "y".into()],
            vec!["s".into()],
            vec![vec![1, crate::genotype::MISSING]],
        )
        .unwrap();
        let model = DiseaseModel::SingleSnp(SingleSnpModel {
            snp: "s".into(),
            f0: 0.1,
            rr1: 2.0,
            rr2: 3.0,
        });
        assert!(matches!(
            evaluate_pi(&model, &gm),
            Err(Error::MissingModelGenotype { .. })
        ));
        let opts = EvalOptions {
            missing: MissingPolicy::TreatAsZero,
            covariates: None,
        };
        let pi = evaluate_pi_with(&model, &gm, opts).unwrap();
        assert!(close(pi.as_slice(), &[0.2, 0.1]));
    }

    #[test]
    fn unknown_snp() {
        let gm = two_snp_matrix(&[(0, 0)]);
        let model = DiseaseModel::SingleSnp(SingleSnpModel {
            snp: "zz".into(),
            f0: 0.1,
            rr1: 1.0,
            rr2: 1.0,
        });
        assert!(matches!(evaluate_pi(&model, &gm), Err(Error::UnknownSnp(_))));
    }

    #[test]
    fn tabular_lookup_default_and_covariates() {
        let gm = two_snp_matrix(&[(0, 1), (2, 2), (1, 1)]);
        let mut table = TabularModel {
            snps: vec!["a".into(), "b".into()],
            entries: vec![
                TabularEntry {
                    genotypes: vec![0, 1],
                    pi: 0.25,
                },
                TabularEntry {
                    genotypes: vec![2, 2],
                    pi: 0.5,
                },
            ],
            default: None,
            covariates: None,
        };
        assert!(evaluate_pi(&DiseaseModel::Tabular(table.clone()), &gm).is_err());
        table.default = Some(0.1);
        let pi = evaluate_pi(&DiseaseModel::Tabular(table.clone()), &gm).unwrap();
        assert!(close(pi.as_slice(), &[0.25, 0.5, 0.1]));

        table.covariates = Some(CovariateEffects {
            link: Link::Logistic,
            coefficients: BTreeMap::from([("smoker".to_string(), 3f64.ln())]),
        });
        let cov = Covariates::parse("iid,smoker\ni0,1\ni1,0\ni2,0\n", "c.csv").unwrap();
        let opts = EvalOptions {
            missing: MissingPolicy::Error,
            covariates: Some(&cov),
        };
        let pi = evaluate_pi_with(&DiseaseModel::Tabular(table.clone()), &gm, opts).unwrap();
        // odds 1/3 tripled to 1 -> 0.5
        assert!((pi[0] - 0.5).abs() < 1e-12);
        assert!((pi[1] - 0.5).abs() < 1e-12);
        assert!(evaluate_pi(&DiseaseModel::Tabular(table), &gm).is_err());
    }

    #[test]
    fn null_model_constant() {
        let pi = null_model(4, 0.5).unwrap();
        assert_eq!(pi.as_slice(), &[0.5; 4]);
        assert!(null_model(4, 0.0).is_err());
        assert!(null_model(4, 1.0).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let json = r#"{"type":"two_locus","snp1":"a","snp2":"b","f0":0.1,"beta":0.3,"eta":0.3}"#;
        let m: DiseaseModel = serde_json::from_str(json).unwrap();
        assert!(matches!(m, DiseaseModel::TwoLocus(_)));
        let bad = r#"{"type":"two_locus","snp1":"a","snp2":"b","f0":0.1,"beta":0.3,"eta":0.3,"x":1}"#;
        assert!(serde_json::from_str::<DiseaseModel>(bad).is_err());
        let null: DiseaseModel = serde_json::from_str(r#"{"type":"null","p0":0.3}"#).unwrap();
        assert_eq!(null, DiseaseModel::Null { p0: 0.3 });
    }
}
