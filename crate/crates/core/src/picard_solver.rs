//! Fixed-point iteration of the map `φ`: freeze a measure flow, solve the
//! resulting ordinary SDE with `M` independent paths, and return their
//! marginal flow.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::levy_noise::{LevyModel, TimeGrid};
use crate::mean_field_engine::{
    CoefficientSet, EnsembleSetup, InitialLaw, JumpPlacement, Lockstep, MeasureDependence, SystemSpec,
};
use crate::measure_metrics::{convention_label, flow_distance_profile, EmpiricalMeasure, FlowData, MeasureFlow};
use crate::rng::{reserved_replication, Purpose, SeedLineage};

/// How iterates are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowRepresentation {
    /// Means for mean-only coefficient sets, full clouds otherwise.
    #[default]
    Auto,
    Empirical,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub particles_m: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub beta: f64,
    /// Reuse one noise lineage for every application of `φ`.
    pub common_noise: bool,
    /// Declare convergence once `δ_k ≤ floor_factor · floor_k`.
    pub floor_factor: f64,
    pub representation: FlowRepresentation,
    pub placement: JumpPlacement,
    pub exact_cap: usize,
    pub master_seed: u64,
}

impl PicardConfig {
    pub fn new(particles_m: usize, master_seed: u64) -> Self {
        Self {
            particles_m,
            max_iters: 20,
            tol: 1e-9,
            beta: 1.0,
            common_noise: false,
            floor_factor: 2.0,
            representation: FlowRepresentation::Auto,
            placement: JumpPlacement::Snapped,
            exact_cap: crate::measure_metrics::DEFAULT_EXACT_CAP,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles_m < 2 {
            return param("Picard cloud needs M ≥ 2");
        }
        if !(self.tol > 0.0) {
            return param("Picard tolerance must be positive");
        }
        if self.max_iters == 0 {
            return param("max_iters must be positive");
        }
        if !(self.beta > 0.0 && self.beta <= 2.0) {
            return param("beta out of (0,2]");
        }
        Ok(())
    }

    fn uses_means(&self, coeffs: &dyn CoefficientSet) -> bool {
        match self.representation {
            FlowRepresentation::Auto => coeffs.dependence() != MeasureDependence::General,
            FlowRepresentation::Mean => true,
            FlowRepresentation::Empirical => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `δ_k = d(φ^k μ, φ^{k-1} μ)` for `k = 1, 2, …`.
    pub distances: Vec<f64>,
    /// Distance between two independent applications of `φ` to the same input.
    pub noise_floors: Vec<f64>,
    /// Per-node distance profile behind each `δ_k`.
    pub profiles: Vec<Vec<f64>>,
    pub floor_factor: f64,
    pub converged: bool,
    pub convention: String,
}

impl ContractionReport {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }

    /// `δ_{k+1} / δ_k` for every consecutive pair.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }

    fn above_floor(&self, k: usize) -> bool {
        let floor = self.noise_floors.get(k).copied().unwrap_or(0.0);
        self.distances[k] > self.floor_factor * floor
    }

    /// Ratios whose denominator lies above the noise floor.
    pub fn ratios_above_floor(&self) -> Vec<f64> {
        (0..self.distances.len().saturating_sub(1))
            .filter(|&k| self.above_floor(k) && self.distances[k] > 0.0)
            .map(|k| self.distances[k + 1] / self.distances[k])
            .collect()
    }

    pub fn is_contractive(&self) -> bool {
        self.ratios_above_floor().iter().all(|r| *r < 1.0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let ratios = self.ratios();
        let rows: Vec<serde_json::Value> = self
            .distances
            .iter()
            .enumerate()
            .map(|(k, d)| {
                serde_json::json!({
                    "iteration": k + 1,
                    "delta": d,
                    "ratio": if k > 0 { ratios.get(k - 1).copied() } else { None },
                    "noise_floor": self.noise_floors.get(k),
                    "profile": self.profiles.get(k),
                })
            })
            .collect();
        serde_json::json!({
            "converged": self.converged,
            "contractive": self.is_contractive(),
            "convention": self.convention,
            "floor_factor": self.floor_factor,
            "iterations": rows,
        })
    }
}

/// Geometric mean of the successive ratios `δ_{k+1}/δ_k` whose denominator
/// is above the noise floor. Returns 0 when every distance is at the floor.
pub fn contraction_ratio(report: &ContractionReport) -> Result<f64> {
    if report.iterations() < 3 {
        return param(format!(
            "contraction ratio needs at least 3 iterations, report has {}",
            report.iterations()
        ));
    }
    let rs = report.ratios_above_floor();
    if rs.is_empty() {
        return Ok(0.0);
    }
    if rs.contains(&0.0) {
        return Ok(0.0);
    }
    Ok((rs.iter().map(|r| r.ln()).sum::<f64>() / rs.len() as f64).exp())
}

/// Apply `φ` with an explicit noise slot (reserved replication index).
pub fn apply_phi_with_slot(
    flow: &MeasureFlow,
    coeffs: &dyn CoefficientSet,
    model: &LevyModel,
    initial: &InitialLaw,
    config: &PicardConfig,
    slot: u64,
) -> Result<MeasureFlow> {
    let grid = flow.grid().clone();
    let setup = EnsembleSetup {
        model,
        grid: &grid,
        initial,
        particles: config.particles_m,
        master_seed: config.master_seed,
        replication: reserved_replication(slot),
        placement: config.placement,
    };
    let spec = SystemSpec::frozen(Arc::new(flow.clone()));
    let mut run = Lockstep::new(coeffs, &setup, &[spec])?;
    let d = coeffs.dim();
    let means = config.uses_means(coeffs);
    let mut mean_nodes = Vec::with_capacity(grid.nodes().len());
    let mut clouds = Vec::new();
    let mut record = |pos: &[f64]| -> Result<()> {
        if means {
            mean_nodes.push(crate::mean_field_engine::mean_of_points(pos, d));
        } else {
            clouds.push(EmpiricalMeasure::new(d, pos.to_vec())?);
        }
        Ok(())
    };
    record(run.positions(0))?;
    while !run.is_done() {
        run.advance()?;
        if grid.contains(run.time()) {
            record(run.positions(0))?;
        }
    }
    let data = if means {
        FlowData::Mean(mean_nodes)
    } else {
        FlowData::Empirical(clouds)
    };
    MeasureFlow::new(grid, data)
}

/// One application of `φ` with fresh noise drawn from `rng_slot`.
pub fn apply_phi(
    flow: &MeasureFlow,
    coeffs: &dyn CoefficientSet,
    model: &LevyModel,
    initial: &InitialLaw,
    config: &PicardConfig,
    rng_slot: u64,
) -> Result<MeasureFlow> {
    apply_phi_with_slot(flow, coeffs, model, initial, config, rng_slot)
}

/// Shift produced by one more application of `φ` to a computed fixed point,
/// next to the noise floor of the last iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCheck {
    pub shift: f64,
    pub noise_floor: f64,
}

impl FixedPointCheck {
    pub fn within(&self, factor: f64) -> bool {
        self.shift < factor * self.noise_floor
    }
}

/// Re-apply `φ` to `fixed` on a noise slot no iteration has used.
pub fn reapply_check(
    fixed: &MeasureFlow,
    report: &ContractionReport,
    coeffs: &dyn CoefficientSet,
    model: &LevyModel,
    initial: &InitialLaw,
    config: &PicardConfig,
) -> Result<FixedPointCheck> {
    let slot = 2 * config.max_iters as u64 + 2;
    let again = apply_phi_with_slot(fixed, coeffs, model, initial, config, slot)?;
    let shift = sup(&flow_distance_profile(fixed, &again, config.beta, config.exact_cap)?);
    Ok(FixedPointCheck {
        shift,
        noise_floor: report.noise_floors.last().copied().unwrap_or(0.0),
    })
}

/// Constant-in-time flow at the law of `ξ`, sampled with `M` points.
pub fn initial_flow(
    coeffs: &dyn CoefficientSet,
    initial: &InitialLaw,
    grid: &TimeGrid,
    config: &PicardConfig,
) -> Result<MeasureFlow> {
    let d = initial.dim();
    let mut pts = vec![0.0; config.particles_m * d];
    for (i, x) in pts.chunks_mut(d).enumerate() {
        let lin = SeedLineage::new(config.master_seed, i as u64, reserved_replication(u32::MAX as u64));
        initial.sample(&mut lin.stream(Purpose::InitialCondition), x);
    }
    let cloud = EmpiricalMeasure::new(d, pts)?;
    let flow = MeasureFlow::constant(grid.clone(), cloud);
    Ok(if config.uses_means(coeffs) { flow.to_means() } else { flow })
}

fn sup(profile: &[f64]) -> f64 {
    profile.iter().copied().fold(0.0, f64::max)
}

/// Iterate `φ` from the constant flow at the law of `ξ`.
pub fn solve_fixed_point(
    coeffs: &dyn CoefficientSet,
    model: &LevyModel,
    initial: &InitialLaw,
    grid: &TimeGrid,
    config: &PicardConfig,
) -> Result<(MeasureFlow, ContractionReport)> {
    let start = initial_flow(coeffs, initial, grid, config)?;
    solve_fixed_point_from(start, coeffs, model, initial, config)
}

/// Iterate `φ` from a given starting flow.
pub fn solve_fixed_point_from(
    start: MeasureFlow,
    coeffs: &dyn CoefficientSet,
    model: &LevyModel,
    initial: &InitialLaw,
    config: &PicardConfig,
) -> Result<(MeasureFlow, ContractionReport)> {
    config.validate()?;
    let mut report = ContractionReport {
        distances: Vec::new(),
        noise_floors: Vec::new(),
        profiles: Vec::new(),
        floor_factor: config.floor_factor,
        converged: false,
        convention: convention_label(config.beta).to_string(),
    };
    let mut current = start;
    for k in 1..=config.max_iters as u64 {
        let slot = if config.common_noise { 1 } else { 2 * k };
        let next = apply_phi_with_slot(&current, coeffs, model, initial, config, slot)?;
        let twin = apply_phi_with_slot(&current, coeffs, model, initial, config, 2 * k + 1)?;
        let profile = flow_distance_profile(&next, &current, config.beta, config.exact_cap)?;
        let floor = sup(&flow_distance_profile(&next, &twin, config.beta, config.exact_cap)?);
        let delta = sup(&profile);
        report.distances.push(delta);
        report.noise_floors.push(floor);
        report.profiles.push(profile);
        current = next;
        if delta < config.tol || (k > 1 && delta <= config.floor_factor * floor) {
            report.converged = true;
            return Ok((current, report));
        }
    }
    Err(Error::NotConverged(Box::new(report)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_noise::Atom;
    use crate::mean_field_engine::{FnCoefficients, PowerMomentDrift, StableOuCoefficients};

    fn report(ds: &[f64]) -> ContractionReport {
        ContractionReport {
            distances: ds.to_vec(),
            noise_floors: vec![0.0; ds.len()],
            profiles: vec![],
            floor_factor: 2.0,
            converged: true,
            convention: String::new(),
        }
    }

    #[test]
    fn ratio_examples() {
        assert!((contraction_ratio(&report(&[1.0, 0.5, 0.25])).unwrap() - 0.5).abs() < 1e-15);
        assert!((contraction_ratio(&report(&[1.0, 0.4, 0.2])).unwrap() - 0.2f64.sqrt()).abs() < 1e-15);
        assert!(contraction_ratio(&report(&[1.0, 0.4])).is_err());
    }

    fn cp_model() -> LevyModel {
        LevyModel::compound_poisson(vec![
            Atom { jump: vec![1.5], rate: 0.5 },
            Atom { jump: vec![-1.5], rate: 0.5 },
            Atom { jump: vec![0.5], rate: 1.0 },
            Atom { jump: vec![-0.5], rate: 1.0 },
        ])
        .unwrap()
    }

    #[test]
    fn trivial_dynamics_fixed_in_one_iteration() {
        let zero = FnCoefficients::new(1, MeasureDependence::General, vec![0.0], |_, _, _, o| o[0] = 0.0);
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let xi = InitialLaw::PointMass { at: vec![0.0] };
        let (flow, rep) = solve_fixed_point(&zero, &cp_model(), &xi, &grid, &PicardConfig::new(64, 1)).unwrap();
        assert_eq!(rep.iterations(), 1);
        assert!(rep.converged);
        assert!(flow.measure_at_node(10).unwrap().points().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn decoupled_converges_at_second_iteration() {
        let c = StableOuCoefficients::scalar(1, -1.0, 0.0);
        let grid = TimeGrid::uniform(1.0, 20).unwrap();
        let xi = InitialLaw::Gaussian { mean: vec![1.0], sd: 0.5 };
        let mut cfg = PicardConfig::new(2000, 3);
        cfg.representation = FlowRepresentation::Empirical;
        let (_, rep) = solve_fixed_point(&c, &cp_model(), &xi, &grid, &cfg).unwrap();
        assert_eq!(rep.iterations(), 2);
    }

    #[test]
    fn mean_only_fixed_point_matches_exponential() {
        let c = StableOuCoefficients::scalar(1, 0.0, 1.0);
        let grid = TimeGrid::uniform(1.0, 200).unwrap();
        let xi = InitialLaw::PointMass { at: vec![1.0] };
        let mut cfg = PicardConfig::new(4000, 5);
        cfg.max_iters = 30;
        let (flow, rep) = solve_fixed_point(&c, &cp_model(), &xi, &grid, &cfg).unwrap();
        assert!(rep.converged);
        let m1 = flow.mean_at_node(200)[0];
        // noise sd of the cloud mean at t = 1 is about 0.03, amplified by at most e
        assert!((m1 - 1f64.exp()).abs() < 0.15, "m(1) = {m1}");
    }

    #[test]
    fn zero_start_stays_zero_for_sublinear_power() {
        let c = PowerMomentDrift { beta: 0.5 };
        let grid = TimeGrid::uniform(1.0, 50).unwrap();
        let xi = InitialLaw::PointMass { at: vec![0.0] };
        let none = LevyModel::compound_poisson(vec![Atom { jump: vec![2.0], rate: 0.0 }]).unwrap();
        let (flow, rep) = solve_fixed_point(&c, &none, &xi, &grid, &PicardConfig::new(8, 1)).unwrap();
        assert!(rep.converged);
        assert!((0..=50).all(|k| flow.measure_at_node(k).unwrap().points().iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn one_application_from_constant_flow() {
        // φ(m ≡ m0)(t) = m0 + (A + A') m0 t for centred noise
        let c = StableOuCoefficients::scalar(1, 0.0, 0.8);
        let grid = TimeGrid::uniform(0.2, 20).unwrap();
        let xi = InitialLaw::PointMass { at: vec![2.0] };
        let cfg = PicardConfig::new(20_000, 9);
        let start = initial_flow(&c, &xi, &grid, &cfg).unwrap();
        let out = apply_phi(&start, &c, &cp_model(), &xi, &cfg, 0).unwrap();
        let m = out.mean_at_node(20)[0];
        // sd of the sample mean: sqrt(jump variance 3.125 * 0.2 / 20000) ≈ 0.0056
        assert!((m - (2.0 + 0.8 * 2.0 * 0.2)).abs() < 0.03, "{m}");
    }
}
