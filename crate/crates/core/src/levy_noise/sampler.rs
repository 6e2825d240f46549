use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use super::model::{LevyModel, INNER_RADIUS};
use crate::error::{param, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigJumpEvent {
    pub time: f64,
    pub size: Vec<f64>,
}

/// Poisson draw that tolerates a zero mean.
pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// One increment over `dt` of the isotropic α-stable process with
/// characteristic function `exp(-dt |u|^α)`.
pub fn sample_stable_increment<R: Rng + ?Sized>(alpha: f64, dt: f64, dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return param(format!("alpha out of (0,2]: {alpha}"));
    }
    if !(dt >= 0.0) {
        return param(format!("dt must be non-negative: {dt}"));
    }
    let mut out = vec![0.0; dim];
    stable_increment_into(alpha, dt, rng, &mut out);
    Ok(out)
}

/// Sub-Gaussian representation `sqrt(A) G` with `A` positive (α/2)-stable
/// (Kanter's formula) and `G ~ N(0, 2I)`.
pub(crate) fn stable_increment_into<R: Rng + ?Sized>(alpha: f64, dt: f64, rng: &mut R, out: &mut [f64]) {
    if dt == 0.0 {
        out.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let scale = if alpha == 2.0 {
        1.0
    } else {
        let rho = alpha / 2.0;
        let u = std::f64::consts::PI * rng.random::<f64>();
        let e: f64 = rng.sample(Exp1);
        let a = (rho * u).sin() / u.sin().powf(1.0 / rho)
            * (((1.0 - rho) * u).sin() / e).powf((1.0 - rho) / rho);
        a.sqrt()
    };
    let s = scale * std::f64::consts::SQRT_2 * dt.powf(1.0 / alpha);
    for x in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *x = s * g;
    }
}

/// Big jumps with `1 ≤ |z| < outer_radius` on `[0, horizon]`, sorted by time.
pub fn sample_big_jumps<R: Rng + ?Sized>(
    model: &LevyModel,
    horizon: f64,
    outer_radius: f64,
    rng: &mut R,
) -> Result<Vec<BigJumpEvent>> {
    if !(outer_radius > INNER_RADIUS) {
        return param(format!("outer radius {outer_radius} leaves an empty annulus"));
    }
    if !(horizon >= 0.0) {
        return param("horizon must be non-negative");
    }
    let lambda = model.annulus_mass(INNER_RADIUS, outer_radius);
    if !lambda.is_finite() {
        return param("big-jump intensity is infinite");
    }
    let n = poisson(lambda * horizon, rng) as usize;
    let mut times: Vec<f64> = (0..n).map(|_| horizon * rng.random::<f64>()).collect();
    times.sort_by(f64::total_cmp);
    let dim = model.dim();
    Ok(times
        .into_iter()
        .map(|time| {
            let mut size = vec![0.0; dim];
            model.sample_in_annulus(INNER_RADIUS, outer_radius, rng, &mut size);
            BigJumpEvent { time, size }
        })
        .collect())
}

/// Per-step sampler of the compensated small-jump integral over `B_1`.
///
/// Jumps in `[ε, 1)` are simulated as a compound Poisson sum and compensated;
/// those below `ε` are replaced by a centred Gaussian with the same
/// covariance. For finite-activity models `ε = 0` and the scheme is exact.
#[derive(Debug, Clone)]
pub struct SmallJumpSampler {
    model: LevyModel,
    cutoff: f64,
    gauss_sd_rate: f64,
    medium_rate: f64,
    compensator_rate: Vec<f64>,
}

impl SmallJumpSampler {
    pub fn new(model: &LevyModel, base_step: f64) -> Self {
        let cutoff = model.small_jump_cutoff(base_step);
        let dim = model.dim() as f64;
        let gauss_var = if cutoff > 0.0 {
            model.annulus_moment(2.0, 0.0, cutoff) / dim
        } else {
            0.0
        };
        let medium_rate = model.annulus_mass(cutoff, INNER_RADIUS);
        let compensator_rate = model
            .annulus_mean(cutoff, INNER_RADIUS)
            .into_iter()
            .map(|m| -m)
            .collect();
        Self {
            model: model.clone(),
            cutoff,
            gauss_sd_rate: gauss_var.sqrt(),
            medium_rate,
            compensator_rate,
        }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// `∫_{|z|<1} |z|^2 dν`, the variance rate of the whole small-jump part.
    pub fn variance_rate(&self) -> f64 {
        self.model.annulus_moment(2.0, 0.0, INNER_RADIUS)
    }

    pub fn increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R, out: &mut [f64]) {
        let sd = self.gauss_sd_rate * dt.sqrt();
        for (x, c) in out.iter_mut().zip(&self.compensator_rate) {
            let g: f64 = if sd > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
            *x = sd * g + c * dt;
        }
        let n = poisson(self.medium_rate * dt, rng);
        if n == 0 {
            return;
        }
        let mut z = vec![0.0; out.len()];
        for _ in 0..n {
            self.model.sample_in_annulus(self.cutoff, INNER_RADIUS, rng, &mut z);
            out.iter_mut().zip(&z).for_each(|(x, zi)| *x += zi);
        }
    }
}

/// Small-jump increments for every step of `grid`, flattened `steps × dim`.
pub fn synthesize_small_jump_increments<R: Rng + ?Sized>(model: &LevyModel, grid: &TimeGrid, rng: &mut R) -> Vec<f64> {
    let dim = model.dim();
    let sampler = SmallJumpSampler::new(model, grid.base_step());
    let mut out = vec![0.0; grid.steps() * dim];
    for (k, chunk) in out.chunks_mut(dim).enumerate() {
        sampler.increment(grid.dt(k), rng, chunk);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_noise::model::Atom;
    use crate::rng::{Purpose, SeedLineage};

    fn rng(seed: u64) -> crate::rng::StreamRng {
        SeedLineage::new(seed, 0, 0).stream(Purpose::Auxiliary)
    }

    #[test]
    fn zero_dt_gives_zero() {
        let x = sample_stable_increment(1.5, 0.0, 3, &mut rng(1)).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert!(sample_stable_increment(2.1, 1.0, 1, &mut rng(1)).is_err());
    }

    #[test]
    fn alpha_two_is_gaussian_with_variance_two() {
        let mut r = rng(3);
        let n = 40_000;
        let v: f64 = (0..n)
            .map(|_| sample_stable_increment(2.0, 1.0, 1, &mut r).unwrap()[0].powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((v - 2.0).abs() < 0.06, "variance {v}");
    }

    #[test]
    fn single_atom_big_jumps() {
        let m = LevyModel::compound_poisson(vec![Atom { jump: vec![3.0], rate: 2.0 }]).unwrap();
        let mut r = rng(5);
        let mut total = 0;
        for _ in 0..2000 {
            let ev = sample_big_jumps(&m, 1.0, f64::INFINITY, &mut r).unwrap();
            assert!(ev.iter().all(|e| e.size == vec![3.0]));
            assert!(ev.windows(2).all(|w| w[0].time < w[1].time));
            total += ev.len();
        }
        assert!((total as f64 / 2000.0 - 2.0).abs() < 0.1);
        assert!(sample_big_jumps(&m, 1.0, 1.0, &mut r).is_err());
    }

    #[test]
    fn atoms_outside_unit_ball_give_zero_small_increments() {
        let m = LevyModel::compound_poisson(vec![
            Atom { jump: vec![1.5], rate: 1.0 },
            Atom { jump: vec![-2.0], rate: 1.0 },
        ])
        .unwrap();
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        let inc = synthesize_small_jump_increments(&m, &g, &mut rng(7));
        assert!(inc.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn stable_small_increment_variance() {
        let m = LevyModel::isotropic_stable(1.5, 1).unwrap();
        let dt = 0.02;
        let s = SmallJumpSampler::new(&m, dt);
        let mut r = rng(11);
        let n = 100_000;
        let mut x = [0.0];
        let mut acc = 0.0;
        for _ in 0..n {
            s.increment(dt, &mut r, &mut x);
            acc += x[0] * x[0];
        }
        let oracle = s.variance_rate() * dt;
        assert!((acc / n as f64 / oracle - 1.0).abs() < 0.05);
    }
}
