//! ROC curves and AUC between a sample of statistics under H1 and one under
//! H0. Ties count one half. Confidence intervals use DeLong's
//! structural-components variance.

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AucBand {
    Fail,
    Poor,
    Fair,
    Good,
    Excellent,
}

impl fmt::Display for AucBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AucBand::Fail => "fail",
            AucBand::Poor => "poor",
            AucBand::Fair => "fair",
            AucBand::Good => "good",
            AucBand::Excellent => "excellent",
        })
    }
}

pub fn auc_band(auc: f64) -> AucBand {
    if auc <= 0.6 {
        AucBand::Fail
    } else if auc <= 0.7 {
        AucBand::Poor
    } else if auc <= 0.8 {
        AucBand::Fair
    } else if auc <= 0.9 {
        AucBand::Good
    } else {
        AucBand::Excellent
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Observations `>= threshold` are called positive; `+inf` for the origin.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocSummary {
    pub auc: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub band: AucBand,
    pub curve: Vec<RocPoint>,
}

const Z_95: f64 = 1.959963984540054;

/// Midranks (1-based, ties share the average rank) of `values`.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn sample_variance(v: &[f64], mean: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn roc_auc(h1_stats: &[f64], h0_stats: &[f64]) -> Result<RocSummary> {
    if h1_stats.is_empty() {
        return Err(Error::EmptySample("H1"));
    }
    if h0_stats.is_empty() {
        return Err(Error::EmptySample("H0"));
    }
    if h1_stats.iter().chain(h0_stats).any(|v| v.is_nan()) {
        return Err(Error::InvalidSettings("statistic sample contains NaN".into()));
    }
    let (n1, n0) = (h1_stats.len(), h0_stats.len());
    let (n1f, n0f) = (n1 as f64, n0 as f64);

    let pooled: Vec<f64> = h1_stats.iter().chain(h0_stats).copied().collect();
    let pooled_ranks = midranks(&pooled);
    let h1_ranks = midranks(h1_stats);
    let h0_ranks = midranks(h0_stats);

    let rank_sum: f64 = pooled_ranks[..n1].iter().sum();
    let auc = (rank_sum - n1f * (n1f + 1.0) / 2.0) / (n1f * n0f);

    // placement values: share of the other sample each observation beats
    let v10: Vec<f64> = (0..n1)
        .map(|i| (pooled_ranks[i] - h1_ranks[i]) / n0f)
        .collect();
    let v01: Vec<f64> = (0..n0)
        .map(|j| 1.0 - (pooled_ranks[n1 + j] - h0_ranks[j]) / n1f)
        .collect();
    let var = sample_variance(&v10, auc) / n1f + sample_variance(&v01, auc) / n0f;
    let se = var.max(0.0).sqrt();

    Ok(RocSummary {
        auc,
        se,
        ci_low: (auc - Z_95 * se).max(0.0),
        ci_high: (auc + Z_95 * se).min(1.0),
        band: auc_band(auc),
        curve: roc_curve(h1_stats, h0_stats),
    })
}

/// Curve from `(0, 0)` to `(1, 1)`, one point per distinct pooled value.
fn roc_curve(h1: &[f64], h0: &[f64]) -> Vec<RocPoint> {
    let mut pos: Vec<f64> = h1.to_vec();
    let mut neg: Vec<f64> = h0.to_vec();
    pos.sort_by(|a, b| b.total_cmp(a));
    neg.sort_by(|a, b| b.total_cmp(a));
    let mut thresholds: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();

    let mut curve = Vec::with_capacity(thresholds.len() + 1);
    curve.push(RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    });
    let (mut tp, mut fp) = (0usize, 0usize);
    for t in thresholds {
        while tp < pos.len() && pos[tp] >= t {
            tp += 1;
        }
        while fp < neg.len() && neg[fp] >= t {
            fp += 1;
        }
        curve.push(RocPoint {
            fpr: fp as f64 / neg.len() as f64,
            tpr: tp as f64 / pos.len() as f64,
            threshold: t,
        });
    }
    curve
}

/// Trapezoidal area under a curve.
pub fn trapezoid_area(curve: &[RocPoint]) -> f64 {
    curve
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

impl RocSummary {
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("fpr,tpr,threshold\n");
        for p in &self.curve {
            let _ = writeln!(out, "{},{},{}", p.fpr, p.tpr, p.threshold);
        }
        out
    }

    /// Minimal SVG: axes, diagonal, the curve and an AUC label.
    pub fn curve_svg(&self, title: &str) -> String {
        const SIZE: f64 = 400.0;
        const PAD: f64 = 50.0;
        let x = |fpr: f64| PAD + fpr * SIZE;
        let y = |tpr: f64| PAD + (1.0 - tpr) * SIZE;
        let points: Vec<String> = self
            .curve
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
            .collect();
        let total = SIZE + 2.0 * PAD;
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4 4"/>"#,
            x(0.0),
            y(0.0),
            x(1.0),
            y(1.0)
        );
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14">{title}</text>"#,
            PAD,
            PAD - 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14">AUC = {:.3} [{:.3}, {:.3}] ({})</text>"#,
            x(0.35),
            y(0.1),
            self.auc,
            self.ci_low,
            self.ci_high,
            self.band
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">false positive rate</text>"#,
            PAD + SIZE / 2.0,
            total - 15.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="15" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 15 {})">true positive rate</text>"#,
            PAD + SIZE / 2.0,
            PAD + SIZE / 2.0
        );
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let r = roc_auc(&s, &s).unwrap();
        assert_eq!(r.auc, 0.5);
        assert!(r.ci_low <= 0.5 && r.ci_high >= 0.5);
    }

    #[test]
    fn perfect_separation() {
        let r = roc_auc(&[5.0, 6.0, 7.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.ci_high, 1.0);
        assert_eq!(r.band, AucBand::Excellent);
    }

    #[test]
    fn small_example_with_ties() {
        let r = roc_auc(&[3.0, 2.0, 1.0], &[2.0, 1.0, 0.0]).unwrap();
        assert!((r.auc - 6.0 / 9.0 - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn curve_shape() {
        let r = roc_auc(&[0.3, 0.9, 0.9, 0.1], &[0.2, 0.9, 0.05]).unwrap();
        let first = r.curve.first().unwrap();
        let last = r.curve.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        assert!(r.curve.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
        assert!((trapezoid_area(&r.curve) - r.auc).abs() < 1e-12);
        assert!(r.curve_csv().starts_with("fpr,tpr,threshold\n0,0,inf\n"));
        assert!(r.curve_svg("t").contains("<polyline"));
    }

    #[test]
    fn band_boundaries() {
        assert_eq!(auc_band(0.6), AucBand::Fail);
        assert_eq!(auc_band(0.6000001), AucBand::Poor);
        assert_eq!(auc_band(0.7), AucBand::Poor);
        assert_eq!(auc_band(0.75), AucBand::Fair);
        assert_eq!(auc_band(0.8), AucBand::Fair);
        assert_eq!(auc_band(0.9), AucBand::Good);
        assert_eq!(auc_band(1.0), AucBand::Excellent);
    }

    #[test]
    fn empty_samples() {
        assert!(matches!(roc_auc(&[], &[1.0]), Err(Error::EmptySample("H1"))));
        assert!(matches!(roc_auc(&[1.0], &[]), Err(Error::EmptySample("H0"))));
        assert!(roc_auc(&[f64::NAN], &[1.0]).is_err());
    }
}
