use rand::Rng;

use super::logspace::{log_add, LOG_ZERO};
use super::{CaseCount, CaseProbabilities, Phenotypes};
use crate::error::{Error, Result};

/// Row-banded storage for an `(n+1) x (n1+1)` log-probability matrix. Row `i`
/// only stores columns `lo[i]..=hi[i]`; everything else reads as `LOG_ZERO`.
#[derive(Debug, Clone)]
struct BandedTable {
    lo: Vec<usize>,
    hi: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl BandedTable {
    fn new(lo: Vec<usize>, hi: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(lo.len() + 1);
        let mut total = 0;
        for (l, h) in lo.iter().zip(&hi) {
            offsets.push(total);
            total += h + 1 - l;
        }
        offsets.push(total);
        Self {
            lo,
            hi,
            offsets,
            values: vec![LOG_ZERO; total],
        }
    }

    #[inline]
    fn get(&self, i: usize, m: usize) -> f64 {
        if m < self.lo[i] || m > self.hi[i] {
            LOG_ZERO
        } else {
            self.values[self.offsets[i] + m - self.lo[i]]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, m: usize, v: f64) {
        let idx = self.offsets[i] + m - self.lo[i];
        self.values[idx] = v;
    }
}

fn log_odds_parts(pi: &CaseProbabilities) -> (Vec<f64>, Vec<f64>) {
    let log_p = pi.as_slice().iter().map(|p| p.ln()).collect();
    let log_q = pi.as_slice().iter().map(|p| (-p).ln_1p()).collect();
    (log_p, log_q)
}

fn check_len(pi: &CaseProbabilities, c: CaseCount) -> Result<()> {
    if pi.len() != c.n() {
        return Err(Error::LengthMismatch {
            expected: c.n(),
            found: pi.len(),
        });
    }
    Ok(())
}

/// `log F_i(m) = log P(Z_i = m)`, where `Z_i` counts the cases among the first
/// `i` individuals, truncated to `m <= n1`.
#[derive(Debug, Clone)]
pub struct ForwardTable {
    n: usize,
    n1: usize,
    table: BandedTable,
}

impl ForwardTable {
    pub fn new(pi: &CaseProbabilities, c: CaseCount) -> Result<Self> {
        check_len(pi, c)?;
        let (n, n1) = (c.n(), c.cases());
        let lo = vec![0; n + 1];
        let hi = (0..=n).map(|i| i.min(n1)).collect();
        let mut table = BandedTable::new(lo, hi);
        let (log_p, log_q) = log_odds_parts(pi);

        table.set(0, 0, 0.0);
        for i in 1..=n {
            let (lp, lq) = (log_p[i - 1], log_q[i - 1]);
            for m in 0..=table.hi[i] {
                let stay = table.get(i - 1, m) + lq;
                let step = if m > 0 { table.get(i - 1, m - 1) + lp } else { LOG_ZERO };
                table.set(i, m, log_add(step, stay));
            }
        }
        Ok(Self { n, n1, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cases(&self) -> usize {
        self.n1
    }

    /// `log F_i(m)`; `LOG_ZERO` for `m > min(i, n1)`.
    pub fn log_f(&self, i: usize, m: usize) -> f64 {
        assert!(i <= self.n, "row {i} out of range");
        self.table.get(i, m)
    }

    /// `log P(C)`.
    pub fn log_prob(&self) -> f64 {
        self.table.get(self.n, self.n1)
    }
}

/// `log B_i(m) = log P(C | Z_i = m)`.
///
/// Only states reachable from `Z_0 = 0` that can still reach `Z_n = n1` are
/// stored (`n1 - (n - i) <= m <= min(i, n1)`), so the table needs at most
/// `(n+1) x (n1+1)` cells and usually far fewer. The table is immutable after
/// construction and can be shared between threads; each draw only needs its
/// own random stream.
#[derive(Debug, Clone)]
pub struct BackwardTable {
    n: usize,
    n1: usize,
    log_p: Vec<f64>,
    table: BandedTable,
}

impl BackwardTable {
    pub fn new(pi: &CaseProbabilities, c: CaseCount) -> Result<Self> {
        check_len(pi, c)?;
        let (n, n1) = (c.n(), c.cases());
        let lo = (0..=n).map(|i| n1.saturating_sub(n - i)).collect();
        let hi = (0..=n).map(|i| i.min(n1)).collect();
        let mut table = BandedTable::new(lo, hi);
        let (log_p, log_q) = log_odds_parts(pi);

        table.set(n, n1, 0.0);
        for i in (1..=n).rev() {
            let (lp, lq) = (log_p[i - 1], log_q[i - 1]);
            for m in table.lo[i - 1]..=table.hi[i - 1] {
                let step = table.get(i, m + 1) + lp;
                let stay = table.get(i, m) + lq;
                table.set(i - 1, m, log_add(step, stay));
            }
        }
        Ok(Self { n, n1, log_p, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cases(&self) -> usize {
        self.n1
    }

    /// `log B_i(m)`; `LOG_ZERO` outside the stored band.
    pub fn log_b(&self, i: usize, m: usize) -> f64 {
        assert!(i <= self.n, "row {i} out of range");
        self.table.get(i, m)
    }

    /// `log P(C) = log B_0(0)`.
    pub fn log_prob(&self) -> f64 {
        self.table.get(0, 0)
    }

    pub fn is_feasible(&self) -> bool {
        self.log_prob() > LOG_ZERO
    }

    /// Number of stored cells.
    pub fn cells(&self) -> usize {
        self.table.values.len()
    }

    pub fn require_feasible(&self) -> Result<()> {
        if self.is_feasible() {
            Ok(())
        } else {
            Err(infeasible(self.n, self.n1))
        }
    }

    /// Draws one assignment from the conditional law. Each individual is
    /// decided in turn with `P(Y_i = 1 | Z_{i-1} = m, C) = pi_i B_i(m+1) / B_{i-1}(m)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Phenotypes> {
        self.require_feasible()?;
        let mut y = vec![0u8; self.n];
        let mut m = 0usize;
        for i in 1..=self.n {
            let log_ratio = self.log_p[i - 1] + self.table.get(i, m + 1) - self.table.get(i - 1, m);
            let p = log_ratio.exp();
            if rng.random::<f64>() < p {
                y[i - 1] = 1;
                m += 1;
            }
        }
        assert_eq!(m, self.n1, "backward sampler left the constraint");
        Ok(Phenotypes::from_raw(y))
    }

    /// Exact probability of `y` under the conditional law, as the product of
    /// the sequential decision probabilities.
    pub fn log_prob_of(&self, y: &Phenotypes) -> Result<f64> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: y.len(),
            });
        }
        self.require_feasible()?;
        let mut m = 0usize;
        let mut total = 0.0;
        for i in 1..=self.n {
            let denom = self.table.get(i - 1, m);
            if denom == LOG_ZERO {
                return Ok(LOG_ZERO);
            }
            let log_one = self.log_p[i - 1] + self.table.get(i, m + 1) - denom;
            if y.as_slice()[i - 1] == 1 {
                total += log_one;
                m += 1;
            } else {
                total += (-log_one.exp()).ln_1p();
            }
        }
        Ok(if m == self.n1 { total } else { LOG_ZERO })
    }
}

pub(crate) fn infeasible(n: usize, n1: usize) -> Error {
    Error::ConstraintInfeasible(format!(
        "P(C) = 0 for n1 = {n1} cases among n = {n} individuals"
    ))
}

/// `log P(C)` with `O(n1)` memory, for callers that need the constraint
/// probability but no table.
pub fn log_prob_constraint(pi: &CaseProbabilities, c: CaseCount) -> Result<f64> {
    check_len(pi, c)?;
    let n1 = c.cases();
    let mut row = vec![LOG_ZERO; n1 + 1];
    row[0] = 0.0;
    for (i, &p) in pi.as_slice().iter().enumerate() {
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        for m in (0..=n1.min(i + 1)).rev() {
            let step = if m > 0 { row[m - 1] + lp } else { LOG_ZERO };
            row[m] = log_add(step, row[m] + lq);
        }
    }
    Ok(row[n1])
}

/// `P(Y_i = 1 | C)` for every individual:
/// `sum_m F_{i-1}(m) pi_i B_i(m+1) / P(C)`.
pub fn conditional_marginals(pi: &CaseProbabilities, c: CaseCount) -> Result<Vec<f64>> {
    let forward = ForwardTable::new(pi, c)?;
    let backward = BackwardTable::new(pi, c)?;
    backward.require_feasible()?;
    let log_pc = backward.log_prob();
    let n1 = c.cases();

    let marginals = (1..=c.n())
        .map(|i| {
            let lp = pi[i - 1].ln();
            let mut acc = LOG_ZERO;
            for m in 0..=(i - 1).min(n1) {
                acc = log_add(acc, forward.log_f(i - 1, m) + lp + backward.log_b(i, m + 1));
            }
            (acc - log_pc).exp().min(1.0)
        })
        .collect();
    Ok(marginals)
}
