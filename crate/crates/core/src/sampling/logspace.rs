/// log(0). Absorbing under [`log_add`]: `log_add(LOG_ZERO, x) == x`.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// `ln(exp(a) + exp(b))` without overflow or underflow.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum(exp(x)))` over an iterator.
pub fn log_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(LOG_ZERO, f64::max);
    if max == LOG_ZERO {
        return LOG_ZERO;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_absorbing() {
        assert_eq!(log_add(LOG_ZERO, LOG_ZERO), LOG_ZERO);
        assert_eq!(log_add(LOG_ZERO, -3.0), -3.0);
        assert_eq!(log_add(-3.0, LOG_ZERO), -3.0);
        assert_eq!(log_sum([LOG_ZERO, LOG_ZERO]), LOG_ZERO);
        assert_eq!(log_sum(Vec::<f64>::new()), LOG_ZERO);
    }

    #[test]
    fn matches_linear_space() {
        let (a, b) = (0.3f64, 0.45f64);
        assert!((log_add(a.ln(), b.ln()).exp() - 0.75).abs() < 1e-15);
        let s = log_sum([0.1f64.ln(), 0.2f64.ln(), 0.3f64.ln()]);
        assert!((s.exp() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn tiny_magnitudes_do_not_underflow() {
        let x = -1000.0;
        let s = log_add(x, x);
        assert!((s - (x + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
