//! Reference computations for tests. Everything here is written from first
//! principles (enumeration, textbook formulas) and shares no code with
//! `phenosim`.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Probability of configuration `mask` (bit `i` set = individual `i` is a
/// case) under independent Bernoulli(`pi[i]`).
pub fn bernoulli_prob(pi: &[f64], mask: u32) -> f64 {
    pi.iter()
        .enumerate()
        .map(|(i, &p)| if mask >> i & 1 == 1 { p } else { 1.0 - p })
        .product()
}

/// `P(sum Y = n1)` by summing over all `2^n` outcomes.
pub fn brute_prob_constraint(pi: &[f64], n1: usize) -> f64 {
    assert!(pi.len() <= 24, "enumeration is limited to small n");
    (0u32..1 << pi.len())
        .filter(|m| m.count_ones() as usize == n1)
        .map(|m| bernoulli_prob(pi, m))
        .sum()
}

/// Exact conditional law of the configurations with `n1` cases, keyed by
/// bit mask.
pub fn brute_conditional_law(pi: &[f64], n1: usize) -> HashMap<u32, f64> {
    let total = brute_prob_constraint(pi, n1);
    (0u32..1 << pi.len())
        .filter(|m| m.count_ones() as usize == n1)
        .map(|m| (m, bernoulli_prob(pi, m) / total))
        .collect()
}

pub fn mask_of(y: &[u8]) -> u32 {
    y.iter()
        .enumerate()
        .fold(0, |acc, (i, &v)| acc | (u32::from(v == 1) << i))
}

/// `P(Y_i = 1 | sum Y = n1)` by enumeration.
pub fn brute_marginals(pi: &[f64], n1: usize) -> Vec<f64> {
    let law = brute_conditional_law(pi, n1);
    (0..pi.len())
        .map(|i| law.iter().filter(|(m, _)| *m >> i & 1 == 1).map(|(_, p)| p).sum())
        .collect()
}

/// Law of the label vectors produced by assigning classes one at a time:
/// class `k` takes exactly `counts[k]` of the still unassigned individuals,
/// each drawn with weight `p_ik / sum_{l >= k} p_il` conditioned on the count.
/// The last class takes the remainder.
pub fn stagewise_multiclass_law(counts: &[usize], probs: &[Vec<f64>]) -> HashMap<Vec<usize>, f64> {
    let n = probs.len();
    let mut out = HashMap::new();
    recurse(counts, probs, 0, vec![usize::MAX; n], 1.0, &mut out);
    out
}

fn recurse(
    counts: &[usize],
    probs: &[Vec<f64>],
    class: usize,
    labels: Vec<usize>,
    weight: f64,
    out: &mut HashMap<Vec<usize>, f64>,
) {
    let free: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == usize::MAX).collect();
    if class + 1 == counts.len() {
        let mut done = labels;
        for &i in &free {
            done[i] = class;
        }
        *out.entry(done).or_insert(0.0) += weight;
        return;
    }
    let q: Vec<f64> = free
        .iter()
        .map(|&i| {
            let tail: f64 = probs[i][class..].iter().sum();
            if tail > 0.0 {
                probs[i][class] / tail
            } else {
                0.0
            }
        })
        .collect();
    let subsets: Vec<u32> = (0u32..1 << free.len())
        .filter(|m| m.count_ones() as usize == counts[class])
        .collect();
    let norm: f64 = subsets.iter().map(|&m| bernoulli_prob(&q, m)).sum();
    if norm == 0.0 {
        return;
    }
    for m in subsets {
        let w = bernoulli_prob(&q, m) / norm;
        if w == 0.0 {
            continue;
        }
        let mut next = labels.clone();
        for (k, &i) in free.iter().enumerate() {
            if m >> k & 1 == 1 {
                next[i] = class;
            }
        }
        recurse(counts, probs, class + 1, next, weight * w, out);
    }
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    1.0 - ChiSquared::new(df).unwrap().cdf(x)
}

/// Armitage trend statistic with scores (0, 1, 2) in its textbook form,
/// `T = sum_g t_g (S r_g - R s_g)` over the case counts `r_g` and control
/// counts `s_g`, with variance `(R S / N) (N sum t^2 n - (sum t n)^2)`.
/// Returns `(statistic, p)`.
pub fn armitage_textbook(cases: [u64; 3], controls: [u64; 3]) -> (f64, f64) {
    let r: f64 = cases.iter().sum::<u64>() as f64;
    let s: f64 = controls.iter().sum::<u64>() as f64;
    let n = r + s;
    let (mut t, mut st2n, mut stn) = (0.0, 0.0, 0.0);
    for g in 0..3 {
        let score = g as f64;
        let ng = (cases[g] + controls[g]) as f64;
        t += score * (s * cases[g] as f64 - r * controls[g] as f64);
        st2n += score * score * ng;
        stn += score * ng;
    }
    let var = r * s / n * (n * st2n - stn * stn);
    let stat = t * t / var;
    (stat, chi_square_sf(stat, 1.0))
}

/// Chi-square goodness of fit of `observed` counts against cell
/// probabilities. Cells with expected count below 5 are pooled, smallest
/// first. Returns `(statistic, degrees of freedom, p)`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> (f64, usize, f64) {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64, p * total as f64))
        .collect();
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (o, e) in cells {
        acc = (acc.0 + o, acc.1 + e);
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => pooled.push(acc),
        }
    }
    let stat: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = pooled.len().saturating_sub(1).max(1);
    (stat, df, chi_square_sf(stat, df as f64))
}

/// Chi-square homogeneity test of two count vectors over the same cells.
/// Columns with a pooled count below 10 are merged. Returns `p`.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut cols: Vec<(f64, f64)> = a.iter().zip(b).map(|(&x, &y)| (x as f64, y as f64)).collect();
    cols.sort_by(|x, y| (x.0 + x.1).total_cmp(&(y.0 + y.1)));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (x, y) in cols {
        acc = (acc.0 + x, acc.1 + y);
        if acc.0 + acc.1 >= 10.0 {
            merged.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match merged.last_mut() {
            Some(last) => *last = (last.0 + acc.0, last.1 + acc.1),
            None => merged.push(acc),
        }
    }
    let (na, nb): (f64, f64) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    for (x, y) in &merged {
        let col = x + y;
        let (ea, eb) = (na * col / n, nb * col / n);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let df = merged.len().saturating_sub(1).max(1);
    chi_square_sf(stat, df as f64)
}

/// AUC by comparing every H1 value with every H0 value, ties counting one
/// half.
pub fn pair_count_auc(h1: &[f64], h0: &[f64]) -> f64 {
    let mut score = 0.0;
    for a in h1 {
        for b in h0 {
            if a > b {
                score += 1.0;
            } else if a == b {
                score += 0.5;
            }
        }
    }
    score / (h1.len() * h0.len()) as f64
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `values` and
/// Uniform(0, 1).
pub fn ks_uniform_distance(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the one-sample KS distance.
pub fn ks_critical_99(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Largest absolute and relative difference between two slices.
pub fn max_errors(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold((0.0, 0.0), |(abs, rel), (&x, &y)| {
        let d = (x - y).abs();
        let scale = x.abs().max(y.abs());
        (f64::max(abs, d), f64::max(rel, if scale > 0.0 { d / scale } else { 0.0 }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_fair_coins() {
        assert!((brute_prob_constraint(&[0.5, 0.5], 1) - 0.5).abs() < 1e-15);
        let law = brute_conditional_law(&[0.5, 0.5], 1);
        assert_eq!(law.len(), 2);
        assert!((law[&0b01] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stagewise_law_sums_to_one() {
        let probs = vec![vec![0.2, 0.3, 0.5]; 6];
        let law = stagewise_multiclass_law(&[2, 2, 2], &probs);
        assert_eq!(law.len(), 90);
        let total: f64 = law.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // identical rows make every arrangement equally likely
        assert!(law.values().all(|&p| (p - 1.0 / 90.0).abs() < 1e-12));
    }

    #[test]
    fn gof_accepts_exact_counts() {
        let (_, df, p) = chi_square_gof(&[250, 250, 500], &[0.25, 0.25, 0.5]);
        assert_eq!(df, 2);
        assert!(p > 0.99);
        assert!(two_sample_chi_square(&[10, 20, 30], &[10, 20, 30]) > 0.99);
    }

    #[test]
    fn armitage_reference() {
        // balanced counts carry no trend
        let (stat, p) = armitage_textbook([10, 10, 10], [10, 10, 10]);
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pair_auc_and_ks() {
        assert!((pair_count_auc(&[3.0, 2.0, 1.0], &[2.0, 1.0, 0.0]) - 7.0 / 9.0).abs() < 1e-15);
        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform_distance(&grid) < 1e-3);
    }
}
