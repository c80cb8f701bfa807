//! Kolmogorov–Smirnov tests with the asymptotic Kolmogorov distribution.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`, the Kolmogorov survival function.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn effective_p(d: f64, ne: f64) -> f64 {
    let root = ne.sqrt();
    kolmogorov_q((root + 0.12 + 0.11 / root) * d)
}

/// One-sample test of `sample` against U(0, 1).
pub fn ks_uniform(sample: &[f64]) -> KsResult {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let cdf = v.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n);
    }
    KsResult { statistic: d, p_value: effective_p(d, n) }
}

/// Two-sample test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult { statistic: d, p_value: effective_p(d, n * m / (n + m)) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.3581) ≈ 0.05 and Q(1.6276) ≈ 0.01 are the classical critical points.
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_q(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn uniform_grid_is_accepted() {
        let x: Vec<f64> = (1..=200).map(|i| (i as f64 - 0.5) / 200.0).collect();
        let r = ks_uniform(&x);
        assert!((r.statistic - 0.0025).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn concentrated_sample_is_rejected() {
        let x = vec![0.01; 100];
        assert!(ks_uniform(&x).p_value < 1e-10);
    }

    #[test]
    fn two_sample_matches_brute_force() {
        let a = [0.1, 0.4, 0.4, 0.9, 1.3];
        let b = [0.2, 0.4, 1.0, 1.1];
        let ecdf = |s: &[f64], v: f64| s.iter().filter(|&&x| x <= v).count() as f64 / s.len() as f64;
        let brute = a.iter().chain(&b).map(|&v| (ecdf(&a, v) - ecdf(&b, v)).abs()).fold(0.0, f64::max);
        assert!((ks_two_sample(&a, &b).statistic - brute).abs() < 1e-15);
        assert_eq!(ks_two_sample(&a, &a).statistic, 0.0);
    }
}
