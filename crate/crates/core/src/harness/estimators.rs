//! Reductions over per-path outputs. All sums are pairwise so the rounding
//! pattern is fixed by the path order alone.

use serde::{Deserialize, Serialize};

/// Estimate of a derived statistic with its delta-method standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatEstimate {
    pub value: f64,
    pub std_error: f64,
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let m = mean(xs);
    if n < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

/// Sample covariance of two columns and its standard error, using the
/// influence function `(x - mx)(y - my) - cov`.
pub fn covariance(xs: &[f64], ys: &[f64]) -> StatEstimate {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let (c, se) = mean_and_se(&prods);
    StatEstimate {
        value: c,
        std_error: se,
    }
}

/// Delta-method estimate of `stat(E[features])`.
///
/// `rows[k]` holds the feature vector of path `k`. The gradient of `stat` is
/// taken by central differences at the sample means.
pub fn delta_method(rows: &[Vec<f64>], stat: impl Fn(&[f64]) -> f64) -> StatEstimate {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let columns: Vec<Vec<f64>> = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let value = stat(&means);
    let sds: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, m)| {
            let sq: Vec<f64> = c.iter().map(|x| (x - m) * (x - m)).collect();
            (pairwise_sum(&sq) / n.max(2).saturating_sub(1) as f64).sqrt()
        })
        .collect();
    let grad: Vec<f64> = (0..d)
        .map(|j| {
            let h = 1e-6 * (means[j].abs() + sds[j]).max(1e-300);
            let mut up = means.clone();
            let mut dn = means.clone();
            up[j] += h;
            dn[j] -= h;
            (stat(&up) - stat(&dn)) / (2.0 * h)
        })
        .collect();
    // Influence values g'(x_k - m) per path.
    let infl: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(&means).zip(&grad).map(|((x, m), g)| g * (x - m)).sum())
        .collect();
    let (_, se) = mean_and_se(&infl);
    StatEstimate {
        value,
        std_error: se,
    }
}

/// Pearson correlation from the first and second moments
/// `[E x, E y, E xy, E x^2, E y^2]`.
pub fn corr_from_moments(m: &[f64]) -> f64 {
    let cov = m[2] - m[0] * m[1];
    let vx = m[3] - m[0] * m[0];
    let vy = m[4] - m[1] * m[1];
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PathRng;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (0..100).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 4950.0);
    }

    #[test]
    fn se_of_constant_is_zero() {
        assert_eq!(mean_and_se(&[2.0; 10]), (2.0, 0.0));
        assert_eq!(mean_and_se(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn two_se_coverage_of_unit_normal_mean() {
        // 1 000 repetitions of a 200-sample mean of 1 + N(0,1).
        let mut covered = 0;
        for rep in 0..1000u64 {
            let mut rng = PathRng::child(314, rep);
            let xs: Vec<f64> = (0..200).map(|_| 1.0 + rng.normal()).collect();
            let (m, se) = mean_and_se(&xs);
            if (m - 1.0).abs() <= 2.0 * se {
                covered += 1;
            }
        }
        let rate = covered as f64 / 1000.0;
        assert!((rate - 0.9545).abs() <= 0.02, "coverage {rate}");
    }

    #[test]
    fn delta_method_of_mean_is_plain_se() {
        let mut rng = PathRng::child(1, 1);
        let rows: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.normal()]).collect();
        let col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let d = delta_method(&rows, |m| m[0]);
        let (m, se) = mean_and_se(&col);
        assert!((d.value - m).abs() < 1e-15);
        assert!((d.std_error - se).abs() < 1e-9 * se);
    }

    #[test]
    fn correlation_estimate_and_se() {
        let rho: f64 = 0.6;
        let mut rng = PathRng::child(2, 0);
        let rows: Vec<Vec<f64>> = (0..20_000)
            .map(|_| {
                let a = rng.normal();
                let b = rho * a + (1.0 - rho * rho).sqrt() * rng.normal();
                vec![a, b, a * b, a * a, b * b]
            })
            .collect();
        let e = delta_method(&rows, corr_from_moments);
        // Asymptotic SE of Pearson r for normal data: (1 - rho^2) / sqrt(n).
        let theory = (1.0 - rho * rho) / (20_000f64).sqrt();
        assert!((e.std_error / theory - 1.0).abs() < 0.1, "{} vs {theory}", e.std_error);
        assert!((e.value - rho).abs() < 4.0 * e.std_error);
    }
}
