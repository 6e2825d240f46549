//! Statistical test battery for the noise samplers.

use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use super::model::{LevyModel, INNER_RADIUS};
use super::sampler::{sample_big_jumps, stable_increment_into, SmallJumpSampler};
use crate::error::Result;
use crate::rng::{Purpose, SeedLineage};
use crate::stats::{chi_squared_poisson, ks_one_sample, ks_two_sample, mean_and_se};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    /// p-value for hypothesis tests, |z| score for moment checks.
    pub p_value: Option<f64>,
    pub z_score: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CfPoint {
    pub u: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub theoretical: f64,
}

impl CfPoint {
    pub fn z(&self) -> f64 {
        (self.empirical - self.theoretical) / self.standard_error
    }
}

/// Real part of the empirical characteristic function of one-dimensional
/// stable increments against `exp(-dt |u|^α)`.
pub fn stable_cf_check(alpha: f64, dt: f64, draws: usize, us: &[f64], seed: u64) -> Vec<CfPoint> {
    let mut rng = SeedLineage::new(seed, 0, 0).stream(Purpose::Auxiliary);
    let mut x = [0.0];
    let xs: Vec<f64> = (0..draws)
        .map(|_| {
            stable_increment_into(alpha, dt, &mut rng, &mut x);
            x[0]
        })
        .collect();
    us.iter()
        .map(|&u| {
            let c: Vec<f64> = xs.iter().map(|x| (u * x).cos()).collect();
            let (m, se) = mean_and_se(&c);
            CfPoint {
                u,
                empirical: m,
                standard_error: se,
                theoretical: (-dt * u.abs().powf(alpha)).exp(),
            }
        })
        .collect()
}

/// Big-jump counts and times for `paths` independent lineages.
fn big_jump_samples(model: &LevyModel, horizon: f64, paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..paths as u64)
        .map(|p| {
            let mut rng = SeedLineage::new(seed, p, 0).stream(Purpose::BigJumps);
            Ok(sample_big_jumps(model, horizon, f64::INFINITY, &mut rng)?
                .into_iter()
                .map(|e| e.time)
                .collect())
        })
        .collect()
}

/// Full battery at significance `level`.
pub fn validate_noise(model: &LevyModel, horizon: f64, paths: usize, level: f64, seed: u64) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let lambda = model.annulus_mass(INNER_RADIUS, f64::INFINITY) * horizon;
    let times = big_jump_samples(model, horizon, paths, seed)?;

    let counts: Vec<u64> = times.iter().map(|t| t.len() as u64).collect();
    let chi = chi_squared_poisson(&counts, lambda);
    checks.push(CheckResult {
        name: format!("poisson_count_chi2(lambda_T={lambda:.4})"),
        statistic: chi.statistic,
        p_value: Some(chi.p_value),
        z_score: None,
        passed: chi.passes(level),
    });

    let pooled: Vec<f64> = times.iter().flatten().copied().collect();
    if pooled.len() >= 20 {
        let ks = ks_one_sample(&pooled, |t| (t / horizon).clamp(0.0, 1.0));
        checks.push(CheckResult {
            name: "jump_times_ks_uniform".into(),
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            z_score: None,
            passed: ks.passes(level),
        });
    }
    let cond: Vec<f64> = times.iter().filter(|t| t.len() == 4).flatten().copied().collect();
    if cond.len() >= 20 {
        let ks = ks_one_sample(&cond, |t| (t / horizon).clamp(0.0, 1.0));
        checks.push(CheckResult {
            name: "jump_times_given_n4_ks_uniform".into(),
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            z_score: None,
            passed: ks.passes(level),
        });
    }

    // symmetric small-jump part has mean zero
    if model.is_symmetric() {
        let grid = TimeGrid::uniform(horizon, 1)?;
        let sampler = SmallJumpSampler::new(model, grid.base_step());
        let mut rng = SeedLineage::new(seed, 0, 1).stream(Purpose::SmallJumps);
        let mut x = vec![0.0; model.dim()];
        let first: Vec<f64> = (0..paths.max(10_000) * 10)
            .map(|_| {
                sampler.increment(horizon, &mut rng, &mut x);
                x[0]
            })
            .collect();
        let (m, se) = mean_and_se(&first);
        let z = if se > 0.0 { m / se } else { 0.0 };
        checks.push(CheckResult {
            name: "small_increment_mean_zero".into(),
            statistic: m,
            p_value: None,
            z_score: Some(z),
            passed: z.abs() <= 4.0,
        });
    }

    if let Some(alpha) = model.alpha() {
        for p in stable_cf_check(alpha, 1.0, 100_000, &[0.5, 1.0, 2.0], seed) {
            checks.push(CheckResult {
                name: format!("stable_cf(u={})", p.u),
                statistic: p.empirical,
                p_value: None,
                z_score: Some(p.z()),
                passed: p.z().abs() <= 3.0,
            });
        }
        let ks = stable_scaling_ks(alpha, 0.3, 4.0, 10_000, seed);
        checks.push(CheckResult {
            name: "stable_self_similarity_ks".into(),
            statistic: ks.statistic,
            p_value: Some(ks.p_value),
            z_score: None,
            passed: ks.passes(level),
        });
    }
    Ok(ValidationReport { checks })
}

/// Two-sample KS between increments over `c·dt` and `c^{1/α}` times
/// increments over `dt`.
pub fn stable_scaling_ks(alpha: f64, dt: f64, c: f64, draws: usize, seed: u64) -> crate::stats::TestOutcome {
    let mut r1 = SeedLineage::new(seed, 1, 0).stream(Purpose::Auxiliary);
    let mut r2 = SeedLineage::new(seed, 2, 0).stream(Purpose::Auxiliary);
    let mut x = [0.0];
    let mut draw = |rng: &mut crate::rng::StreamRng, h: f64, s: f64| -> Vec<f64> {
        (0..draws)
            .map(|_| {
                stable_increment_into(alpha, h, rng, &mut x);
                s * x[0]
            })
            .collect()
    };
    let a = draw(&mut r1, c * dt, 1.0);
    let b = draw(&mut r2, dt, c.powf(1.0 / alpha));
    ks_two_sample(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cf_matches_closed_form() {
        for p in stable_cf_check(1.5, 1.0, 50_000, &[0.5, 1.0, 2.0], 42) {
            assert!(p.z().abs() < 3.5, "u={} z={}", p.u, p.z());
        }
    }
}
