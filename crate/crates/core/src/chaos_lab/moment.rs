use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::levy_noise::{poisson, LevyModel, SmallJumpSampler, INNER_RADIUS};
use crate::rng::{Purpose, SeedLineage};
use crate::stats::{linear_fit, LinearFit};

const CHUNK: usize = 4096;

/// Estimates of `E|Z_{N,T}|^p` where `Z_N` keeps only jumps of size `< N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub alpha: f64,
    pub power: f64,
    pub horizon: f64,
    pub ns: Vec<f64>,
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// Fit of the estimate against `ln N`, over the grid points with `N > 1`.
    pub fit: Option<LinearFit>,
}

impl MomentCurve {
    /// `estimate(N) / ln N` for `N > 1`.
    pub fn log_ratios(&self) -> Vec<f64> {
        self.ns
            .iter()
            .zip(&self.estimates)
            .filter(|(n, _)| **n > 1.0)
            .map(|(n, e)| e / n.ln())
            .collect()
    }

    /// The ratio to `ln N` ends no higher than it starts, up to two standard errors.
    pub fn ratio_non_increasing(&self) -> bool {
        let pts: Vec<(f64, f64, f64)> = self
            .ns
            .iter()
            .zip(self.estimates.iter().zip(&self.standard_errors))
            .filter(|(n, _)| **n > 1.0)
            .map(|(n, (e, s))| (n.ln(), *e, *s))
            .collect();
        match (pts.first(), pts.last()) {
            (Some(a), Some(b)) => b.1 / b.0 <= a.1 / a.0 + 2.0 * (a.2 / a.0).hypot(b.2 / b.0),
            _ => true,
        }
    }
}

/// `E|Z_{N,T}|^p` at `t = T` for the one-dimensional α-stable noise, for every
/// level in `ns`.
///
/// Each sample draws the small-jump part once over `[0, T]` and one set of
/// jumps in `[1, max N)`; level `N` sums the jumps below `N` and subtracts
/// their compensator. Levels share the draws.
pub fn truncated_moment_curve(
    alpha: f64,
    ns: &[f64],
    horizon: f64,
    base_step: f64,
    power: f64,
    samples: usize,
    seed: u64,
) -> Result<MomentCurve> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return param(format!("alpha {alpha} out of (1,2)"));
    }
    if ns.is_empty() || ns.iter().any(|n| !(*n >= INNER_RADIUS && n.is_finite())) {
        return param("levels must be finite and at least 1");
    }
    if !(horizon > 0.0 && base_step > 0.0 && power > 0.0) || samples < 2 {
        return param("horizon, base step and power must be positive, samples at least 2");
    }
    let model = LevyModel::isotropic_stable(alpha, 1)?;
    let small = SmallJumpSampler::new(&model, base_step);
    let n_max = ns.iter().cloned().fold(INNER_RADIUS, f64::max);
    let rate = model.annulus_mass(INNER_RADIUS, n_max) * horizon;
    let compensators: Vec<f64> = ns
        .iter()
        .map(|&n| if n > INNER_RADIUS { model.annulus_mean(INNER_RADIUS, n)[0] * horizon } else { 0.0 })
        .collect();

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = SeedLineage::new(seed, c as u64, 0).stream(Purpose::Auxiliary);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut s1 = vec![0.0; ns.len()];
            let mut s2 = vec![0.0; ns.len()];
            let mut base = [0.0];
            let mut z = [0.0];
            let mut jumps = Vec::new();
            for _ in 0..count {
                small.increment(horizon, &mut rng, &mut base);
                jumps.clear();
                for _ in 0..poisson(rate, &mut rng) {
                    model.sample_in_annulus(INNER_RADIUS, n_max, &mut rng, &mut z);
                    jumps.push(z[0]);
                }
                for (k, &n) in ns.iter().enumerate() {
                    let x = base[0] + jumps.iter().filter(|j| j.abs() < n).sum::<f64>() - compensators[k];
                    let v = x.abs().powf(power);
                    s1[k] += v;
                    s2[k] += v * v;
                }
            }
            (s1, s2)
        })
        .collect();

    let mut s1 = vec![0.0; ns.len()];
    let mut s2 = vec![0.0; ns.len()];
    for (a, b) in &partial {
        s1.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        s2.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let m = samples as f64;
    let estimates: Vec<f64> = s1.iter().map(|s| s / m).collect();
    let standard_errors = s2
        .iter()
        .zip(&estimates)
        .map(|(q, e)| ((q / m - e * e).max(0.0) / (m - 1.0)).sqrt())
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(&estimates)
        .filter(|(n, _)| **n > INNER_RADIUS)
        .map(|(n, e)| (n.ln(), *e))
        .unzip();
    Ok(MomentCurve {
        alpha,
        power,
        horizon,
        ns: ns.to_vec(),
        estimates,
        standard_errors,
        fit: linear_fit(&lx, &ly),
    })
}
