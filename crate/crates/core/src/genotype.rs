//! Genotype matrices: loading, validation, MAF filtering and synthetic data.
//!
//! Genotypes are allele counts in `{0, 1, 2}`; [`MISSING`] marks an absent
//! call. Storage is column-major so that per-SNP scans are contiguous.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::stream_from_seed;

pub const MISSING: u8 = u8::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnpInfo {
    pub id: String,
    pub chromosome: String,
    pub position_bp: u64,
    /// Minor allele frequency over non-missing calls.
    pub maf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenotypeFormat {
    #[serde(rename = "dense-csv")]
    DenseCsv,
    #[serde(rename = "plink-raw")]
    PlinkRaw,
}

impl FromStr for GenotypeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" => Ok(Self::DenseCsv),
            "plink-raw" => Ok(Self::PlinkRaw),
            other => Err(Error::Config(format!("unknown genotype format {other:?}"))),
        }
    }
}

impl fmt::Display for GenotypeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DenseCsv => "dense-csv",
            Self::PlinkRaw => "plink-raw",
        })
    }
}

/// `n x p` genotype matrix with per-individual ids and per-SNP metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeMatrix {
    individual_ids: Vec<String>,
    snps: Vec<SnpInfo>,
    values: Vec<u8>,
    has_positions: bool,
}

fn maf_of(column: &[u8]) -> f64 {
    let (mut alleles, mut called) = (0u64, 0u64);
    for &g in column {
        if g != MISSING {
            alleles += g as u64;
            called += 1;
        }
    }
    if called == 0 {
        return 0.0;
    }
    let freq = alleles as f64 / (2 * called) as f64;
    freq.min(1.0 - freq)
}

impl GenotypeMatrix {
    /// Builds a matrix from per-SNP columns. SNPs get chromosome `"0"` and
    /// position 0 until metadata is attached.
    pub fn from_columns(
        individual_ids: Vec<String>,
        snp_ids: Vec<String>,
        columns: Vec<Vec<u8>>,
    ) -> Result<Self> {
        let n = individual_ids.len();
        if snp_ids.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} SNP ids for {} columns",
                snp_ids.len(),
                columns.len()
            )));
        }
        let mut values = Vec::with_capacity(n * columns.len());
        let mut snps = Vec::with_capacity(columns.len());
        for (id, col) in snp_ids.into_iter().zip(columns) {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "SNP {id} has {} genotypes for {n} individuals",
                    col.len()
                )));
            }
            if let Some(&bad) = col.iter().find(|&&g| g > 2 && g != MISSING) {
                return Err(Error::UnknownValue {
                    path: String::new(),
                    line: 0,
                    column: 0,
                    value: bad.to_string(),
                });
            }
            snps.push(SnpInfo {
                maf: maf_of(&col),
                id,
                chromosome: "0".into(),
                position_bp: 0,
            });
            values.extend_from_slice(&col);
        }
        Ok(Self {
            individual_ids,
            snps,
            values,
            has_positions: false,
        })
    }

    pub fn n_individuals(&self) -> usize {
        self.individual_ids.len()
    }

    pub fn n_snps(&self) -> usize {
        self.snps.len()
    }

    pub fn individual_ids(&self) -> &[String] {
        &self.individual_ids
    }

    pub fn snps(&self) -> &[SnpInfo] {
        &self.snps
    }

    /// Whether SNP positions come from real metadata.
    pub fn has_positions(&self) -> bool {
        self.has_positions
    }

    pub fn column(&self, j: usize) -> &[u8] {
        let n = self.n_individuals();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u8> {
        match self.column(j)[i] {
            MISSING => None,
            g => Some(g),
        }
    }

    pub fn snp_index(&self, id: &str) -> Option<usize> {
        self.snps.iter().position(|s| s.id == id)
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|&&g| g == MISSING).count()
    }

    /// Attaches chromosome/position metadata and sorts SNPs by position within
    /// each chromosome (chromosomes keep their order of first appearance).
    pub fn with_metadata(mut self, metadata: &[(String, String, u64)]) -> Result<Self> {
        let by_id: HashMap<&str, (&str, u64)> = metadata
            .iter()
            .map(|(id, chr, pos)| (id.as_str(), (chr.as_str(), *pos)))
            .collect();
        for snp in &mut self.snps {
            let (chr, pos) = by_id.get(snp.id.as_str()).ok_or_else(|| {
                Error::DimensionMismatch(format!("SNP {} has no metadata row", snp.id))
            })?;
            snp.chromosome = chr.to_string();
            snp.position_bp = *pos;
        }
        if metadata.len() > self.snps.len() {
            warn!(
                "{} metadata rows do not match any SNP",
                metadata.len() - self.snps.len()
            );
        }
        self.has_positions = true;
        self.sort_by_position();
        Ok(self)
    }

    fn sort_by_position(&mut self) {
        let mut chrom_rank: HashMap<String, usize> = HashMap::new();
        for snp in &self.snps {
            let next = chrom_rank.len();
            chrom_rank.entry(snp.chromosome.clone()).or_insert(next);
        }
        let mut order: Vec<usize> = (0..self.n_snps()).collect();
        order.sort_by_key(|&j| (chrom_rank[&self.snps[j].chromosome], self.snps[j].position_bp));
        for w in order.windows(2) {
            let (a, b) = (&self.snps[w[0]], &self.snps[w[1]]);
            if a.chromosome == b.chromosome && a.position_bp == b.position_bp {
                warn!(
                    "SNPs {} and {} share position {}:{}",
                    a.id, b.id, a.chromosome, a.position_bp
                );
            }
        }
        if order.iter().enumerate().all(|(k, &j)| k == j) {
            return;
        }
        *self = self.select_snps(&order);
    }

    fn select_snps(&self, keep: &[usize]) -> Self {
        let mut values = Vec::with_capacity(keep.len() * self.n_individuals());
        for &j in keep {
            values.extend_from_slice(self.column(j));
        }
        Self {
            individual_ids: self.individual_ids.clone(),
            snps: keep.iter().map(|&j| self.snps[j].clone()).collect(),
            values,
            has_positions: self.has_positions,
        }
    }

    /// Keeps SNPs whose MAF is strictly greater than `threshold`.
    pub fn filter_maf(&self, threshold: f64, error_if_empty: bool) -> Result<Self> {
        if !(0.0..=0.5).contains(&threshold) {
            return Err(Error::InvalidSettings(format!(
                "MAF threshold {threshold} is outside [0, 0.5]"
            )));
        }
        let keep: Vec<usize> = (0..self.n_snps())
            .filter(|&j| self.snps[j].maf > threshold)
            .collect();
        if keep.is_empty() {
            if error_if_empty {
                return Err(Error::EmptyAfterFilter { threshold });
            }
            warn!("no SNP survives the MAF filter at {threshold}");
        }
        Ok(self.select_snps(&keep))
    }

    /// Stacks `k` copies of the individuals. Copy 1 keeps the original ids,
    /// copy `c > 1` gets the suffix `_rep<c>`.
    pub fn replicate_individuals(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSettings("replication factor must be at least 1".into()));
        }
        let n = self.n_individuals();
        let mut ids = Vec::with_capacity(n * k);
        for c in 1..=k {
            for id in &self.individual_ids {
                ids.push(if c == 1 { id.clone() } else { format!("{id}_rep{c}") });
            }
        }
        let mut values = Vec::with_capacity(self.values.len() * k);
        for j in 0..self.n_snps() {
            let col = self.column(j);
            for _ in 0..k {
                values.extend_from_slice(col);
            }
        }
        Ok(Self {
            individual_ids: ids,
            snps: self.snps.clone(),
            values,
            has_positions: self.has_positions,
        })
    }

    /// Dense CSV: header `iid,<snp ids>`, one row per individual, `NA` for
    /// missing calls.
    pub fn to_dense_csv(&self) -> String {
        let mut out = String::from("iid");
        for snp in &self.snps {
            out.push(',');
            out.push_str(&snp.id);
        }
        out.push('\n');
        for (i, id) in self.individual_ids.iter().enumerate() {
            out.push_str(id);
            for j in 0..self.n_snps() {
                out.push(',');
                match self.get(i, j) {
                    Some(g) => out.push((b'0' + g) as char),
                    None => out.push_str("NA"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn metadata_csv(&self) -> String {
        let mut out = String::from("snp_id,chromosome,position_bp\n");
        for snp in &self.snps {
            out.push_str(&format!("{},{},{}\n", snp.id, snp.chromosome, snp.position_bp));
        }
        out
    }

    pub fn write_dense_csv(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_dense_csv().as_bytes())
    }

    pub fn write_metadata(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.metadata_csv().as_bytes())
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_genotype(cell: &str, path: &str, line: usize, column: usize) -> Result<u8> {
    match cell {
        "0" => Ok(0),
        "1" => Ok(1),
        "2" => Ok(2),
        "NA" | "" => Ok(MISSING),
        other => Err(Error::UnknownValue {
            path: path.to_string(),
            line,
            column,
            value: other.to_string(),
        }),
    }
}

/// Loads a genotype matrix. Positions are unset until
/// [`GenotypeMatrix::with_metadata`] is applied.
pub fn load_matrix(path: &Path, format: GenotypeFormat) -> Result<GenotypeMatrix> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    match format {
        GenotypeFormat::DenseCsv => parse_dense_csv(&text, &name),
        GenotypeFormat::PlinkRaw => parse_plink_raw(&text, &name),
    }
}

/// Loads a matrix and attaches its `snp_id,chromosome,position_bp` sidecar.
pub fn load_matrix_with_metadata(
    path: &Path,
    format: GenotypeFormat,
    metadata: &Path,
) -> Result<GenotypeMatrix> {
    load_matrix(path, format)?.with_metadata(&load_metadata(metadata)?)
}

pub fn parse_dense_csv(text: &str, name: &str) -> Result<GenotypeMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: name.to_string(),
        line: 1,
        column: 1,
        message: "empty file".into(),
    })?;
    let snp_ids: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    let p = snp_ids.len();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != p + 1 {
            return Err(Error::Parse {
                path: name.to_string(),
                line: lineno,
                column: cells.len().min(p + 1) + 1,
                message: format!("expected {} fields, found {}", p + 1, cells.len()),
            });
        }
        ids.push(cells[0].to_string());
        let row = cells[1..]
            .iter()
            .enumerate()
            .map(|(j, c)| parse_genotype(c, name, lineno, j + 2))
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    GenotypeMatrix::from_columns(ids, snp_ids, columns)
}

/// PLINK `.raw`: whitespace separated, columns `FID IID PAT MAT SEX PHENOTYPE`
/// followed by one `<snp>_<allele>` column per SNP. The phenotype column is
/// ignored; the allele suffix is stripped from SNP ids.
pub fn parse_plink_raw(text: &str, name: &str) -> Result<GenotypeMatrix> {
    const LEADING: usize = 6;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: name.to_string(),
        line: 1,
        column: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < LEADING || fields[1] != "IID" {
        return Err(Error::Parse {
            path: name.to_string(),
            line: 1,
            column: 1,
            message: "expected header starting with FID IID PAT MAT SEX PHENOTYPE".into(),
        });
    }
    let snp_ids: Vec<String> = fields[LEADING..]
        .iter()
        .map(|f| match f.rfind('_') {
            Some(pos) if pos > 0 => f[..pos].to_string(),
            _ => f.to_string(),
        })
        .collect();
    let p = snp_ids.len();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != LEADING + p {
            return Err(Error::Parse {
                path: name.to_string(),
                line: lineno,
                column: cells.len().min(LEADING + p) + 1,
                message: format!("expected {} fields, found {}", LEADING + p, cells.len()),
            });
        }
        ids.push(cells[1].to_string());
        let row = cells[LEADING..]
            .iter()
            .enumerate()
            .map(|(j, c)| parse_genotype(c, name, lineno, LEADING + j + 1))
            .collect::<Result<Vec<u8>>>()?;
        rows.push(row);
    }
    let columns = (0..p).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    GenotypeMatrix::from_columns(ids, snp_ids, columns)
}

/// Reads `snp_id,chromosome,position_bp` rows.
pub fn load_metadata(path: &Path) -> Result<Vec<(String, String, u64)>> {
    let text = fs::read_to_string(path)?;
    parse_metadata(&text, &path.display().to_string())
}

pub fn parse_metadata(text: &str, name: &str) -> Result<Vec<(String, String, u64)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 1 {
            if cells != ["snp_id", "chromosome", "position_bp"] {
                return Err(Error::Parse {
                    path: name.to_string(),
                    line: 1,
                    column: 1,
                    message: "expected header snp_id,chromosome,position_bp".into(),
                });
            }
            continue;
        }
        if cells.len() != 3 {
            return Err(Error::Parse {
                path: name.to_string(),
                line: lineno,
                column: cells.len().min(3) + 1,
                message: format!("expected 3 fields, found {}", cells.len()),
            });
        }
        let pos = cells[2].parse::<u64>().map_err(|e| Error::Parse {
            path: name.to_string(),
            line: lineno,
            column: 3,
            message: format!("bad position {:?}: {e}", cells[2]),
        })?;
        out.push((cells[0].to_string(), cells[1].to_string(), pos));
    }
    Ok(out)
}

/// Single-SNP toy dataset: 80% genotype 0, 15% genotype 1, 5% genotype 2, in
/// that order. `n` must be a multiple of 20.
pub fn make_toy_dataset(n: usize) -> Result<GenotypeMatrix> {
    if n == 0 || n % 20 != 0 {
        return Err(Error::NotMultipleOf20(n));
    }
    let (zeros, ones) = (n * 16 / 20, n * 3 / 20);
    let col: Vec<u8> = (0..n)
        .map(|i| {
            if i < zeros {
                0
            } else if i < zeros + ones {
                1
            } else {
                2
            }
        })
        .collect();
    let ids = (1..=n).map(|i| format!("ind{i}")).collect();
    GenotypeMatrix::from_columns(ids, vec!["snp1".into()], vec![col])?
        .with_metadata(&[("snp1".into(), "1".into(), 1_000_000)])
}

/// A causal SNP placed in the synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CausalSnp {
    pub id: String,
    pub position_bp: u64,
    pub allele_freq: f64,
}

/// Parameters of the synthetic two-locus dataset: independent SNP columns
/// drawn under Hardy-Weinberg proportions on one chromosome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub individuals: usize,
    pub snps: usize,
    pub chromosome: String,
    pub first_position_bp: u64,
    pub spacing_bp: u64,
    pub min_allele_freq: f64,
    pub max_allele_freq: f64,
    pub causal: Vec<CausalSnp>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            individuals: 629,
            snps: 8000,
            chromosome: "X".into(),
            first_position_bp: 10_000,
            spacing_bp: 500,
            min_allele_freq: 0.06,
            max_allele_freq: 0.5,
            causal: vec![
                CausalSnp {
                    id: "causal1".into(),
                    position_bp: 627_641,
                    allele_freq: 0.26,
                },
                CausalSnp {
                    id: "causal2".into(),
                    position_bp: 1_986_325,
                    allele_freq: 0.23,
                },
            ],
            seed: 20_100_629,
        }
    }
}

/// Generates the dataset described by `spec`. Deterministic in `spec.seed`.
pub fn make_synthetic_dataset(spec: &SyntheticSpec) -> Result<GenotypeMatrix> {
    if spec.snps < spec.causal.len() || spec.individuals == 0 || spec.spacing_bp == 0 {
        return Err(Error::InvalidSettings("degenerate synthetic dataset spec".into()));
    }
    if !(0.0 < spec.min_allele_freq && spec.min_allele_freq <= spec.max_allele_freq && spec.max_allele_freq <= 1.0) {
        return Err(Error::InvalidSettings("allele frequency range must lie in (0, 1]".into()));
    }
    let mut rng = stream_from_seed(spec.seed);
    let n = spec.individuals;
    let draw_column = |freq: f64, rng: &mut crate::sampling::RandomStream| -> Vec<u8> {
        (0..n)
            .map(|_| (rng.random::<f64>() < freq) as u8 + (rng.random::<f64>() < freq) as u8)
            .collect()
    };

    let background = spec.snps - spec.causal.len();
    let mut ids = Vec::with_capacity(spec.snps);
    let mut columns = Vec::with_capacity(spec.snps);
    let mut metadata = Vec::with_capacity(spec.snps);
    for j in 0..background {
        let jitter = rng.random_range(0..spec.spacing_bp);
        let pos = spec.first_position_bp + j as u64 * spec.spacing_bp + jitter;
        let freq = rng.random_range(spec.min_allele_freq..=spec.max_allele_freq);
        let id = format!("snp{}", j + 1);
        columns.push(draw_column(freq, &mut rng));
        metadata.push((id.clone(), spec.chromosome.clone(), pos));
        ids.push(id);
    }
    for c in &spec.causal {
        columns.push(draw_column(c.allele_freq, &mut rng));
        metadata.push((c.id.clone(), spec.chromosome.clone(), c.position_bp));
        ids.push(c.id.clone());
    }
    let individuals = (1..=n).map(|i| format!("ind{i}")).collect();
    GenotypeMatrix::from_columns(individuals, ids, columns)?.with_metadata(&metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_csv_with_missing_cell() {
        let text = "iid,rs1,rs2\na,0,1\nb,NA,2\nc,1,1\n";
        let gm = parse_dense_csv(text, "t.csv").unwrap();
        assert_eq!((gm.n_individuals(), gm.n_snps()), (3, 2));
        assert_eq!(gm.missing_count(), 1);
        assert_eq!(gm.get(1, 0), None);
        assert_eq!(gm.get(1, 1), Some(2));
        assert_eq!(gm.to_dense_csv(), text);
    }

    #[test]
    fn plink_raw_fixture() {
        let text = "FID IID PAT MAT SEX PHENOTYPE rs1_A rs2_C\n\
                    f1 i1 0 0 1 -9 0 2\n\
                    f2 i2 0 0 2 1 1 NA\n";
        let gm = parse_plink_raw(text, "t.raw").unwrap();
        assert_eq!((gm.n_individuals(), gm.n_snps()), (2, 2));
        assert_eq!(gm.snps()[0].id, "rs1");
        assert_eq!(gm.snps()[1].id, "rs2");
        assert_eq!(gm.individual_ids(), ["i1", "i2"]);
        assert_eq!(gm.get(1, 1), None);
    }

    #[test]
    fn maf_hand_count() {
        let gm = GenotypeMatrix::from_columns(
            (0..4).map(|i| i.to_string()).collect(),
            vec!["s".into()],
            vec![vec![0, 0, 1, 2]],
        )
        .unwrap();
        assert_eq!(gm.snps()[0].maf, 0.375);
        let gm = GenotypeMatrix::from_columns(
            (0..4).map(|i| i.to_string()).collect(),
            vec!["s".into()],
            vec![vec![2, 2, MISSING, 1]],
        )
        .unwrap();
        // 5 alt alleles out of 6 called
        assert!((gm.snps()[0].maf - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_dense_csv("iid,a,b\nx,0,1\ny,0\n", "f.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_dense_csv("iid,a,b\nx,0,3\n", "f.csv") {
            Err(Error::UnknownValue { line, column, value, .. }) => {
                assert_eq!((line, column, value.as_str()), (2, 3, "3"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_plink_raw("a b c\n", "f.raw").is_err());
        assert!(parse_metadata("id,chr,pos\n", "m.csv").is_err());
    }

    #[test]
    fn toy_dataset_counts() {
        for (n, expected) in [(20, [16, 3, 1]), (40, [32, 6, 2]), (100, [80, 15, 5])] {
            let gm = make_toy_dataset(n).unwrap();
            let mut counts = [0; 3];
            for &g in gm.column(0) {
                counts[g as usize] += 1;
            }
            assert_eq!(counts, expected);
            let col = gm.column(0);
            assert!(col.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(matches!(make_toy_dataset(30), Err(Error::NotMultipleOf20(30))));
        assert!(make_toy_dataset(0).is_err());
    }

    #[test]
    fn replication() {
        let gm = make_toy_dataset(20).unwrap();
        assert_eq!(gm.replicate_individuals(1).unwrap(), gm);
        let r = gm.replicate_individuals(3).unwrap();
        assert_eq!(r.n_individuals(), 60);
        assert_eq!(r.snps(), gm.snps());
        assert_eq!(r.individual_ids()[20], "ind1_rep2");
        assert!(gm.replicate_individuals(0).is_err());
    }

    #[test]
    fn maf_filter_boundary() {
        // 2 minor alleles among 40 -> MAF exactly 0.05, dropped
        let mut col = vec![0u8; 20];
        col[0] = 2;
        let gm = GenotypeMatrix::from_columns(
            (0..20).map(|i| i.to_string()).collect(),
            vec!["edge".into(), "mono".into(), "common".into()],
            vec![col, vec![0; 20], (0..20).map(|i| (i % 3) as u8).collect()],
        )
        .unwrap();
        assert_eq!(gm.snps()[0].maf, 0.05);
        let f = gm.filter_maf(0.05, true).unwrap();
        assert_eq!(f.snps().iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), ["common"]);
        let f0 = gm.filter_maf(0.0, true).unwrap();
        assert_eq!(f0.n_snps(), 2);
        assert!(matches!(
            gm.filter_maf(0.5, true),
            Err(Error::EmptyAfterFilter { .. })
        ));
        assert_eq!(gm.filter_maf(0.5, false).unwrap().n_snps(), 0);
        assert!(gm.filter_maf(0.7, false).is_err());
    }

    #[test]
    fn metadata_sorts_within_chromosome() {
        let gm = GenotypeMatrix::from_columns(
            vec!["a".into(), "b".into()],
            vec!["s1".into(), "s2".into(), "s3".into()],
            vec![vec![0, 1], vec![1, 1], vec![2, 0]],
        )
        .unwrap();
        let meta = vec![
            ("s1".to_string(), "2".to_string(), 500),
            ("s2".to_string(), "2".to_string(), 100),
            ("s3".to_string(), "5".to_string(), 50),
        ];
        let gm = gm.with_metadata(&meta).unwrap();
        let ids: Vec<_> = gm.snps().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["s2", "s1", "s3"]);
        assert_eq!(gm.column(0), &[1, 1]);
        assert!(gm.has_positions());
    }

    #[test]
    fn synthetic_dataset_shape() {
        let spec = SyntheticSpec {
            individuals: 50,
            snps: 30,
            ..SyntheticSpec::default()
        };
        let gm = make_synthetic_dataset(&spec).unwrap();
        assert_eq!((gm.n_individuals(), gm.n_snps()), (50, 30));
        assert!(gm.snp_index("causal1").is_some());
        assert_eq!(gm, make_synthetic_dataset(&spec).unwrap());
        let pos: Vec<u64> = gm.snps().iter().map(|s| s.position_bp).collect();
        assert!(pos.windows(2).all(|w| w[0] <= w[1]));
    }
}
