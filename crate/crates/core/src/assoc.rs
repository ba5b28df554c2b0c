//! Single-marker association: the Cochran-Armitage trend test with additive
//! scores, and the radius statistic `S_rho`, the best `-log10 p` among SNPs
//! close to a disease locus.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use libm::erfc;

use crate::error::{Error, Result};
use crate::genotype::{GenotypeMatrix, SnpInfo, MISSING};
use crate::sampling::Phenotypes;

/// Trend test outcome for one SNP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendTest {
    /// Chi-square statistic with one degree of freedom.
    pub statistic: f64,
    pub p_value: f64,
    /// `-log10(p_value)`, accurate even where `p_value` underflows.
    pub neg_log10_p: f64,
    /// Monomorphic column, no case or no control, or zero variance.
    pub degenerate: bool,
}

impl TrendTest {
    const DEGENERATE: TrendTest = TrendTest {
        statistic: 0.0,
        p_value: 1.0,
        neg_log10_p: 0.0,
        degenerate: true,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendTestResult {
    pub snp_id: String,
    pub statistic: f64,
    pub p_value: f64,
    pub neg_log10_p: f64,
    pub degenerate: bool,
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_1_upper_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    erfc((x / 2.0).sqrt())
}

/// `-log10` of [`chi2_1_upper_tail`], switching to the asymptotic expansion
/// of `erfc` once the tail underflows.
pub fn chi2_1_neg_log10_upper_tail(x: f64) -> f64 {
    let p = chi2_1_upper_tail(x);
    if p > 1e-300 {
        return -p.log10();
    }
    let z2 = x / 2.0;
    let z = z2.sqrt();
    let series = 1.0 - 1.0 / (2.0 * z2) + 3.0 / (4.0 * z2 * z2);
    let ln_p = -z2 - (z * std::f64::consts::PI.sqrt()).ln() + series.ln();
    -ln_p / std::f64::consts::LN_10
}

/// Trend statistic from case counts `cases[g]` and totals `totals[g]` per
/// genotype `g = 0, 1, 2`, scores `(0, 1, 2)`.
pub fn trend_from_counts(cases: [u64; 3], totals: [u64; 3]) -> TrendTest {
    let n: u64 = totals.iter().sum();
    let r: u64 = cases.iter().sum();
    let s = n - r;
    if n < 2 || r == 0 || s == 0 {
        return TrendTest::DEGENERATE;
    }
    let (nf, rf, sf) = (n as f64, r as f64, s as f64);
    let mut sum_wc = 0.0;
    let mut sum_wm = 0.0;
    let mut sum_w2m = 0.0;
    for g in 0..3 {
        let w = g as f64;
        sum_wc += w * cases[g] as f64;
        sum_wm += w * totals[g] as f64;
        sum_w2m += w * w * totals[g] as f64;
    }
    let t = sum_wc - rf / nf * sum_wm;
    let spread = nf * sum_w2m - sum_wm * sum_wm;
    let var = rf * sf / (nf * nf * (nf - 1.0)) * spread;
    if !(var > 0.0) || spread <= 0.0 {
        return TrendTest::DEGENERATE;
    }
    let statistic = t * t / var;
    TrendTest {
        statistic,
        p_value: chi2_1_upper_tail(statistic),
        neg_log10_p: chi2_1_neg_log10_upper_tail(statistic),
        degenerate: false,
    }
}

/// Cochran-Armitage trend test on one genotype column. Individuals with a
/// missing genotype are dropped.
pub fn trend_test(column: &[u8], phenotypes: &Phenotypes) -> Result<TrendTest> {
    if column.len() != phenotypes.len() {
        return Err(Error::LengthMismatch {
            expected: column.len(),
            found: phenotypes.len(),
        });
    }
    let mut cases = [0u64; 3];
    let mut totals = [0u64; 3];
    for (&g, &y) in column.iter().zip(phenotypes.as_slice()) {
        if g == MISSING {
            continue;
        }
        totals[g as usize] += 1;
        cases[g as usize] += y as u64;
    }
    Ok(trend_from_counts(cases, totals))
}

/// Trend test on every SNP of the matrix, in SNP order.
pub fn trend_test_matrix(gm: &GenotypeMatrix, phenotypes: &Phenotypes) -> Result<Vec<TrendTestResult>> {
    (0..gm.n_snps())
        .map(|j| {
            let t = trend_test(gm.column(j), phenotypes)?;
            Ok(TrendTestResult {
                snp_id: gm.snps()[j].id.clone(),
                statistic: t.statistic,
                p_value: t.p_value,
                neg_log10_p: t.neg_log10_p,
                degenerate: t.degenerate,
            })
        })
        .collect()
}

/// Repeated trend tests on a fixed set of SNPs. Genotype totals do not depend
/// on the phenotypes, so they are counted once; each scan only visits the
/// cases.
#[derive(Debug, Clone)]
pub struct TrendScanner<'a> {
    gm: &'a GenotypeMatrix,
    snps: Vec<usize>,
    totals: Vec<[u64; 3]>,
}

impl<'a> TrendScanner<'a> {
    pub fn new(gm: &'a GenotypeMatrix, snps: Vec<usize>) -> Self {
        let totals = snps
            .iter()
            .map(|&j| {
                let mut t = [0u64; 3];
                for &g in gm.column(j) {
                    if g != MISSING {
                        t[g as usize] += 1;
                    }
                }
                t
            })
            .collect();
        Self { gm, snps, totals }
    }

    pub fn snps(&self) -> &[usize] {
        &self.snps
    }

    /// `-log10 p` for each scanned SNP, in the order given to [`Self::new`].
    pub fn scan(&self, phenotypes: &Phenotypes) -> Vec<f64> {
        let cases: Vec<usize> = phenotypes.case_indices().collect();
        self.snps
            .iter()
            .zip(&self.totals)
            .map(|(&j, &totals)| {
                let col = self.gm.column(j);
                let mut counts = [0u64; 4];
                for &i in &cases {
                    // MISSING folds into the last slot
                    counts[(col[i] as usize).min(3)] += 1;
                }
                trend_from_counts([counts[0], counts[1], counts[2]], totals).neg_log10_p
            })
            .collect()
    }
}

/// Radius around disease loci, in base pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Radius {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(bp) => write!(f, "{bp}"),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Radius {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(Radius::Infinite),
            other => match other.parse::<u64>() {
                Ok(0) => Err(Error::Config("radius must be positive".into())),
                Ok(bp) => Ok(Radius::Finite(bp)),
                Err(_) => Err(Error::Config(format!("bad radius {other:?}"))),
            },
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(bp) => s.serialize_u64(*bp),
            Radius::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("radius must be positive")),
            Raw::Num(bp) => Ok(Radius::Finite(bp)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Locus {
    pub chromosome: String,
    pub position_bp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusStatistic {
    pub rho: Radius,
    pub value: f64,
}

/// Indices of SNPs within `rho` (strictly) of some locus on the same
/// chromosome; every SNP when `rho` is infinite.
pub fn radius_members(snps: &[SnpInfo], loci: &[Locus], rho: Radius) -> Vec<usize> {
    match rho {
        Radius::Infinite => (0..snps.len()).collect(),
        Radius::Finite(r) => snps
            .iter()
            .enumerate()
            .filter(|(_, s)| {
                loci.iter().any(|l| {
                    l.chromosome == s.chromosome && l.position_bp.abs_diff(s.position_bp) < r
                })
            })
            .map(|(j, _)| j)
            .collect(),
    }
}

/// `S_rho = max over SNPs within rho of a disease locus of -log10 p`.
pub fn s_rho(
    results: &[TrendTestResult],
    snps: &[SnpInfo],
    disease_loci: &[Locus],
    rho: Radius,
) -> Result<RadiusStatistic> {
    if results.len() != snps.len() {
        return Err(Error::LengthMismatch {
            expected: snps.len(),
            found: results.len(),
        });
    }
    let members = radius_members(snps, disease_loci, rho);
    if members.is_empty() {
        return Err(Error::EmptyRadius { rho: rho.to_string() });
    }
    let value = members
        .iter()
        .map(|&j| results[j].neg_log10_p)
        .fold(0.0, f64::max);
    Ok(RadiusStatistic { rho, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phenos_from_counts(cases: [u64; 3], controls: [u64; 3]) -> (Vec<u8>, Phenotypes) {
        let mut g = Vec::new();
        let mut y = Vec::new();
        for k in 0..3 {
            for _ in 0..cases[k] {
                g.push(k as u8);
                y.push(1);
            }
            for _ in 0..controls[k] {
                g.push(k as u8);
                y.push(0);
            }
        }
        (g, Phenotypes::new(y).unwrap())
    }

    #[test]
    fn balanced_table_has_no_signal() {
        let (g, y) = phenos_from_counts([10, 10, 10], [10, 10, 10]);
        let t = trend_test(&g, &y).unwrap();
        assert!(!t.degenerate);
        assert!(t.statistic.abs() < 1e-20);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn monomorphic_is_degenerate() {
        let g = vec![0u8; 8];
        let y = Phenotypes::new(vec![1, 0, 1, 0, 1, 0, 0, 0]).unwrap();
        let t = trend_test(&g, &y).unwrap();
        assert!(t.degenerate);
        assert_eq!((t.statistic, t.p_value), (0.0, 1.0));
        let y = Phenotypes::new(vec![0; 8]).unwrap();
        assert!(trend_test(&[0, 1, 2, 0, 1, 2, 0, 1], &y).unwrap().degenerate);
    }

    #[test]
    fn missing_genotypes_are_dropped() {
        let (mut g, y) = phenos_from_counts([10, 20, 30], [30, 20, 10]);
        let full = trend_test(&g, &y).unwrap();
        let mut yv = y.as_slice().to_vec();
        g.push(MISSING);
        yv.push(1);
        let with_missing = trend_test(&g, &Phenotypes::new(yv).unwrap()).unwrap();
        assert_eq!(full, with_missing);
        assert!(trend_test(&g, &y).is_err());
    }

    #[test]
    fn chi2_tail_known_values() {
        assert_eq!(chi2_1_upper_tail(0.0), 1.0);
        // 3.841458820694124 is the 95% quantile
        let p = chi2_1_upper_tail(3.841458820694124); assert!((p - 0.05).abs() < 1e-14, "{p:e}");
        assert!((chi2_1_neg_log10_upper_tail(3.841458820694124) - 0.05f64.log10().abs()).abs() < 1e-12);
        let far = chi2_1_neg_log10_upper_tail(2000.0);
        assert!(far.is_finite() && far > 300.0);
        // asymptotic branch continues the exact one
        let a = chi2_1_neg_log10_upper_tail(1370.0);
        let b = chi2_1_neg_log10_upper_tail(1390.0);
        assert!(a < b && b - a < 5.0);
    }

    #[test]
    fn scanner_matches_direct_test() {
        let col: Vec<u8> = vec![0, 1, 2, MISSING, 1, 0, 2, 2, 1, 0];
        let gm = GenotypeMatrix::from_columns(
            (0..10).map(|i| i.to_string()).collect(),
            vec!["s".into()],
            vec![col.clone()],
        )
        .unwrap();
        let y = Phenotypes::new(vec![1, 0, 1, 1, 0, 0, 1, 1, 0, 0]).unwrap();
        let scanned = TrendScanner::new(&gm, vec![0]).scan(&y);
        assert_eq!(scanned[0], trend_test(&col, &y).unwrap().neg_log10_p);
    }

    fn snp(id: &str, chr: &str, pos: u64) -> SnpInfo {
        SnpInfo {
            id: id.into(),
            chromosome: chr.into(),
            position_bp: pos,
            maf: 0.2,
        }
    }

    fn result(id: &str, p: f64) -> TrendTestResult {
        TrendTestResult {
            snp_id: id.into(),
            statistic: 0.0,
            p_value: p,
            neg_log10_p: -p.log10(),
            degenerate: false,
        }
    }

    #[test]
    fn s_rho_single_locus() {
        let snps = [snp("a", "1", 1000)];
        let loci = [Locus {
            chromosome: "1".into(),
            position_bp: 1000,
        }];
        let s = s_rho(&[result("a", 0.01)], &snps, &loci, Radius::Finite(5000)).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn s_rho_distances() {
        let snps = [
            snp("a", "1", 101_000),
            snp("b", "1", 106_000),
            snp("c", "1", 200_000),
            snp("d", "2", 100_000),
        ];
        let loci = [Locus {
            chromosome: "1".into(),
            position_bp: 100_000,
        }];
        assert_eq!(radius_members(&snps, &loci, Radius::Finite(5000)), vec![0]);
        // strict inequality at exactly 6 kb
        assert_eq!(radius_members(&snps, &loci, Radius::Finite(6000)), vec![0]);
        assert_eq!(radius_members(&snps, &loci, Radius::Finite(6001)), vec![0, 1]);
        let results = [
            result("a", 0.2),
            result("b", 0.001),
            result("c", 1e-6),
            result("d", 1e-9),
        ];
        let near = s_rho(&results, &snps, &loci, Radius::Finite(5000)).unwrap();
        assert!((near.value - 0.2f64.log10().abs()).abs() < 1e-12);
        let all = s_rho(&results, &snps, &loci, Radius::Infinite).unwrap();
        assert!((all.value - 9.0).abs() < 1e-9);
        let far_loci = [Locus {
            chromosome: "3".into(),
            position_bp: 0,
        }];
        assert!(matches!(
            s_rho(&results, &snps, &far_loci, Radius::Finite(10)),
            Err(Error::EmptyRadius { .. })
        ));
    }

    #[test]
    fn radius_parsing() {
        assert_eq!("inf".parse::<Radius>().unwrap(), Radius::Infinite);
        assert_eq!("5000".parse::<Radius>().unwrap(), Radius::Finite(5000));
        assert!("0".parse::<Radius>().is_err());
        let v: Vec<Radius> = serde_json::from_str(r#"[5000, "inf"]"#).unwrap();
        assert_eq!(v, vec![Radius::Finite(5000), Radius::Infinite]);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"[5000,"inf"]"#);
        assert!(serde_json::from_str::<Radius>("0").is_err());
    }
}
