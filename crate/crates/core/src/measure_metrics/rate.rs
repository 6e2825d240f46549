//! Empirical decay of `E W_1(μ̂_N, μ)` for i.i.d. Gaussian samples, used as a
//! sanity check of the distance code against the known regimes.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{w_beta_exact_matching_capped, EmpiricalMeasure};
use crate::error::Result;
use crate::rng::{Purpose, SeedLineage};
use crate::stats::{linear_fit, mean_and_se, normal_cdf, LinearFit};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateCheck {
    pub ns: Vec<usize>,
    pub means: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub fit: LinearFit,
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exact `W_1` between the empirical measure of sorted `xs` and `N(0,1)`.
pub fn w1_to_standard_normal(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let normal = Normal::standard();
    // φ(Q(u)), with the boundary values at u ∈ {0, 1} equal to zero
    let phi_q = |u: f64| {
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            phi(normal.inverse_cdf(u))
        }
    };
    let mut total = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let p = i as f64 / n;
        let q = (i + 1) as f64 / n;
        let us = normal_cdf(x).clamp(p, q);
        let f_us = if us > p && us < q { phi(x) } else { phi_q(us) };
        let (f_p, f_q) = (phi_q(p), phi_q(q));
        // ∫_p^{u*} (x - Q) + ∫_{u*}^q (Q - x), with ∫ Q = -φ(Q)
        total += x * (us - p) - (f_p - f_us) + (f_us - f_q) - x * (q - us);
    }
    total
}

fn gaussian_cloud<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<f64> {
    (0..n * dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn summarize(ns: &[usize], samples: Vec<Vec<f64>>) -> RateCheck {
    let (means, ses): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| mean_and_se(s)).unzip();
    let lx: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    RateCheck {
        ns: ns.to_vec(),
        means,
        standard_errors: ses,
        fit: linear_fit(&lx, &ly).expect("at least two sizes"),
    }
}

/// `E W_1(μ̂_N, N(0,1))` on the line, computed exactly per sample.
pub fn gaussian_rate_1d(ns: &[usize], reps: usize, seed: u64) -> RateCheck {
    let samples = ns
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            (0..reps as u64)
                .map(|r| {
                    let mut rng = SeedLineage::new(seed, k as u64, r).stream(Purpose::Auxiliary);
                    let mut xs = gaussian_cloud(&mut rng, n, 1);
                    xs.sort_by(f64::total_cmp);
                    w1_to_standard_normal(&xs)
                })
                .collect()
        })
        .collect();
    summarize(ns, samples)
}

/// `E W_1(μ̂_N, μ̂'_N)` for two independent standard Gaussian samples in
/// `R^dim`; it decays at the same rate as the one-sample error.
pub fn gaussian_rate_two_sample(dim: usize, ns: &[usize], reps: usize, seed: u64) -> Result<RateCheck> {
    let mut samples = Vec::with_capacity(ns.len());
    for (k, &n) in ns.iter().enumerate() {
        let mut vals = Vec::with_capacity(reps);
        for r in 0..reps as u64 {
            let mut rng = SeedLineage::new(seed, k as u64, r).stream(Purpose::Auxiliary);
            let a = EmpiricalMeasure::new(dim, gaussian_cloud(&mut rng, n, dim))?;
            let b = EmpiricalMeasure::new(dim, gaussian_cloud(&mut rng, n, dim))?;
            vals.push(w_beta_exact_matching_capped(&a, &b, 1.0, n)?);
        }
        samples.push(vals);
    }
    Ok(summarize(ns, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_at_zero_against_normal() {
        // W1(δ_0, N(0,1)) = E|G| = sqrt(2/π)
        let w = w1_to_standard_normal(&[0.0]);
        assert!((w - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // shifted point: E|G - c|
        let c: f64 = 0.7;
        let exact = 2.0 * phi(c) + c * (2.0 * normal_cdf(c) - 1.0);
        assert!((w1_to_standard_normal(&[c]) - exact).abs() < 1e-12);
    }
}
