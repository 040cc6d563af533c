//! Exact binomial (Clopper–Pearson) confidence intervals.

use statrs::function::beta::beta_reg;

use crate::error::{invalid, Result};

/// Two-sided Clopper–Pearson interval for `errors` successes in `trials`
/// Bernoulli draws at confidence `level` (e.g. `0.90`).
pub fn clopper_pearson(errors: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || errors > trials {
        return invalid(format!("need 0 <= errors ({errors}) <= trials ({trials}) and trials > 0"));
    }
    if !(level > 0.0 && level < 1.0) {
        return invalid(format!("confidence level {level} outside (0, 1)"));
    }
    let alpha = 1.0 - level;
    let (e, m) = (errors as f64, trials as f64);
    let low = if errors == 0 { 0.0 } else { beta_quantile(e, m - e + 1.0, alpha / 2.0) };
    let high = if errors == trials { 1.0 } else { beta_quantile(e + 1.0, m - e, 1.0 - alpha / 2.0) };
    Ok((low, high))
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn zero_errors_has_closed_form() {
        for m in [1u64, 10, 1000, 50_000] {
            let (lo, hi) = clopper_pearson(0, m, 0.90).unwrap();
            assert_eq!(lo, 0.0);
            assert!(close(hi, 1.0 - 0.05f64.powf(1.0 / m as f64), 1e-9), "m = {m}");
        }
    }

    #[test]
    fn all_errors_reaches_one() {
        assert_eq!(clopper_pearson(7, 7, 0.9).unwrap().1, 1.0);
    }

    #[test]
    fn matches_beta_quantile_reference_values() {
        // Reference quantiles from an independent beta-distribution implementation.
        let cases = [
            (5, 50_000, 0.90, 3.940_379_121_505_618e-5, 2.102_491_066_004_216_3e-4),
            (3, 10, 0.90, 0.087_264_433_914_150_33, 0.606_624_216_105_412_3),
            (50, 100, 0.90, 0.413_621_714_630_911_63, 0.586_378_285_369_088_4),
            (7, 1000, 0.99, 0.002_041_386_571_444_759_6, 0.017_046_931_835_088_576),
        ];
        for (e, m, level, lo, hi) in cases {
            let (l, h) = clopper_pearson(e, m, level).unwrap();
            assert!(close(l, lo, 1e-8), "low {l} vs {lo}");
            assert!(close(h, hi, 1e-8), "high {h} vs {hi}");
        }
    }

    #[test]
    fn rejects_invalid_counts() {
        assert!(clopper_pearson(3, 2, 0.9).is_err());
        assert!(clopper_pearson(0, 0, 0.9).is_err());
        assert!(clopper_pearson(1, 2, 1.0).is_err());
    }
}
