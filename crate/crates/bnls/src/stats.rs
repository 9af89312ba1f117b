//! Statistical test kit for the Monte Carlo studies: one-sample
//! Kolmogorov-Smirnov tests, Benjamini-Hochberg correction, least-squares
//! slope fits, and Pearson correlations. Everything is deterministic given
//! the sample order.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    Empty,
    Degenerate,
    NonFinite,
}

impl std::fmt::Display for StatsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatsError::Empty => write!(f, "empty sample"),
            StatsError::Degenerate => write!(f, "degenerate (constant) sample"),
            StatsError::NonFinite => write!(f, "sample contains non-finite values"),
        }
    }
}

impl std::error::Error for StatsError {}

fn checked_sorted(samples: &[f64]) -> Result<Vec<f64>, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    if s[0] == s[s.len() - 1] {
        return Err(StatsError::Degenerate);
    }
    Ok(s)
}

/// Complement of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form, accurate for small λ
        let mut cdf = 0.0;
        for k in 1..=5u32 {
            let j = (2 * k - 1) as f64;
            cdf += (-j * j * PI * PI / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * PI).sqrt() / lambda * cdf).clamp(0.0, 1.0)
    } else {
        let mut q = 0.0;
        for k in 1..=12u32 {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            q += sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        }
        (2.0 * q).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test against a given CDF (Stephens small-sample scaling).
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome, StatsError> {
    let sorted = checked_sorted(samples)?;
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    let lambda = (m.sqrt() + 0.12 + 0.11 / m.sqrt()) * d;
    Ok(KsOutcome { statistic: d, p_value: kolmogorov_q(lambda) })
}

/// KS against `Exp(1)`.
pub fn ks_exp1(samples: &[f64]) -> Result<KsOutcome, StatsError> {
    ks_test(samples, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() })
}

/// KS against the uniform law on `[-π, π]` (phase test).
pub fn ks_phase_uniform(samples: &[f64]) -> Result<KsOutcome, StatsError> {
    ks_test(samples, |x| ((x + PI) / (2.0 * PI)).clamp(0.0, 1.0))
}

/// Benjamini-Hochberg step-up at FDR level `q`; returns the rejection mask.
pub fn bh_reject(p_values: &[f64], q: f64) -> Vec<bool> {
    let m = p_values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut cut = None;
    for (rank, &idx) in order.iter().enumerate() {
        if p_values[idx] <= q * (rank as f64 + 1.0) / m as f64 {
            cut = Some(rank);
        }
    }
    let mut mask = vec![false; m];
    if let Some(cut) = cut {
        for &idx in order.iter().take(cut + 1) {
            mask[idx] = true;
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

/// Ordinary least squares `y = a + b x`.
pub fn slope_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::Empty);
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(StatsError::Degenerate);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (x.len() as i64 - 2).max(1) as f64;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_std_error: (ss_res / dof / sxx).sqrt(),
    })
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(StatsError::Empty);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Degenerate);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / (sxx * syy).sqrt())
}

/// Type-7 quantile of an unsorted sample.
pub fn quantile(samples: &[f64], q: f64) -> Result<f64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() as f64 - 1.0);
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < s.len() {
        Ok(s[i] * (1.0 - f) + s[i + 1] * f)
    } else {
        Ok(s[i])
    }
}

pub fn median(samples: &[f64]) -> Result<f64, StatsError> {
    quantile(samples, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bnls_core::random::{derive_trajectory_seed, gaussian_mode};

    #[test]
    fn ks_accepts_its_own_law() {
        // |g|² from the library's sampler is Exp(1); p-values spread over (0,1)
        let mut ps = Vec::new();
        for rep in 0..40u64 {
            let vals: Vec<f64> = (0..400)
                .map(|i| gaussian_mode(derive_trajectory_seed(rep, i), 0).norm_sqr())
                .collect();
            ps.push(ks_exp1(&vals).unwrap().p_value);
        }
        let small = ps.iter().filter(|&&p| p < 0.01).count();
        assert!(small <= 2, "{} of 40 runs rejected at 1%", small);
        // and the p-values are not clustered at 1
        assert!(ps.iter().filter(|&&p| p < 0.5).count() >= 8);
    }

    #[test]
    fn ks_rejects_wrong_law() {
        let vals: Vec<f64> = (0..500)
            .map(|i| 2.2 * gaussian_mode(derive_trajectory_seed(7, i), 0).norm_sqr())
            .collect();
        assert!(ks_exp1(&vals).unwrap().p_value < 1e-4);
    }

    #[test]
    fn degenerate_samples_error() {
        assert_eq!(ks_exp1(&[]), Err(StatsError::Empty));
        assert_eq!(ks_exp1(&[1.0, 1.0, 1.0]), Err(StatsError::Degenerate));
        assert!(matches!(slope_fit(&[1.0, 1.0], &[0.0, 1.0]), Err(StatsError::Degenerate)));
        assert!(matches!(pearson(&[1.0, 1.0], &[0.0, 1.0]), Err(StatsError::Degenerate)));
    }

    #[test]
    fn exact_line_recovered() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 1.7 * v).collect();
        let fit = slope_fit(&x, &y).unwrap();
        assert!((fit.slope + 1.7).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.slope_std_error < 1e-12);
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bh_controls_the_obvious_cases() {
        // strong signals rejected, pure nulls mostly retained
        let ps = [1e-9, 0.8, 1e-7, 0.4, 0.9, 0.02];
        let mask = bh_reject(&ps, 0.01);
        assert!(mask[0] && mask[2]);
        assert!(!mask[1] && !mask[4]);
        assert!(bh_reject(&[], 0.01).is_empty());
    }

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&v).unwrap(), 2.5);
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn kolmogorov_q_branches_agree() {
        for lambda in [1.0, 1.1, 1.18, 1.25, 1.4] {
            let small = {
                let mut cdf = 0.0;
                for k in 1..=8u32 {
                    let j = (2 * k - 1) as f64;
                    cdf += (-j * j * PI * PI / (8.0 * lambda * lambda)).exp();
                }
                1.0 - (2.0 * PI).sqrt() / lambda * cdf
            };
            let large = {
                let mut q = 0.0;
                for k in 1..=20u32 {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    q += sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
                }
                2.0 * q
            };
            assert!((small - large).abs() < 1e-9, "λ = {}", lambda);
            assert!((kolmogorov_q(lambda) - large).abs() < 1e-9);
        }
    }
}
