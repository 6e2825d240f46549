use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::TimeGrid;
use super::model::{norm, LevyModel, INNER_RADIUS};
use super::sampler::{sample_big_jumps, synthesize_small_jump_increments, BigJumpEvent};
use crate::error::{param, Result};
use crate::rng::{Purpose, SeedLineage};

/// One path of the driving noise: small-jump increments per step plus an
/// explicit list of big jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    grid: Arc<TimeGrid>,
    dim: usize,
    small_increments: Vec<f64>,
    drift_rate: Vec<f64>,
    big_jumps: Vec<BigJumpEvent>,
    outer_radius: f64,
    lineage: SeedLineage,
}

impl NoiseRealization {
    /// Sample a path on `grid`. With `adapt` the grid is refined so that every
    /// big-jump time is a node.
    pub fn generate(model: &LevyModel, grid: &TimeGrid, lineage: SeedLineage, adapt: bool) -> Result<Self> {
        let big_jumps = sample_big_jumps(
            model,
            grid.horizon(),
            f64::INFINITY,
            &mut lineage.stream(Purpose::BigJumps),
        )?;
        let grid = if adapt {
            grid.refined_with(big_jumps.iter().map(|e| e.time))
        } else {
            grid.clone()
        };
        let small_increments = synthesize_small_jump_increments(model, &grid, &mut lineage.stream(Purpose::SmallJumps));
        Ok(Self {
            grid: Arc::new(grid),
            dim: model.dim(),
            small_increments,
            drift_rate: vec![0.0; model.dim()],
            big_jumps,
            outer_radius: f64::INFINITY,
            lineage,
        })
    }

    pub fn from_parts(
        grid: Arc<TimeGrid>,
        dim: usize,
        small_increments: Vec<f64>,
        drift_rate: Vec<f64>,
        big_jumps: Vec<BigJumpEvent>,
        outer_radius: f64,
        lineage: SeedLineage,
    ) -> Result<Self> {
        if small_increments.len() != grid.steps() * dim || drift_rate.len() != dim {
            return param("realization buffers do not match grid and dimension");
        }
        if big_jumps.iter().any(|e| e.size.len() != dim) {
            return param("big-jump sizes do not match the dimension");
        }
        if big_jumps.windows(2).any(|w| !(w[0].time < w[1].time)) {
            return param("big jumps must be strictly time-ordered");
        }
        Ok(Self {
            grid,
            dim,
            small_increments,
            drift_rate,
            big_jumps,
            outer_radius,
            lineage,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn small_increments(&self) -> &[f64] {
        &self.small_increments
    }

    pub fn small_increment(&self, step: usize) -> &[f64] {
        &self.small_increments[step * self.dim..(step + 1) * self.dim]
    }

    /// Deterministic drift per unit time added by truncation.
    pub fn drift_rate(&self) -> &[f64] {
        &self.drift_rate
    }

    pub fn compensator_drift(&self, step: usize) -> Vec<f64> {
        let dt = self.grid.dt(step);
        self.drift_rate.iter().map(|r| r * dt).collect()
    }

    pub fn big_jumps(&self) -> &[BigJumpEvent] {
        &self.big_jumps
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn lineage(&self) -> SeedLineage {
        self.lineage
    }

    /// `Z` at each grid node, flattened `nodes × dim`. A jump at time `t` is
    /// counted at the first node `≥ t`.
    pub fn path_at_nodes(&self) -> Vec<f64> {
        let d = self.dim;
        let nodes = self.grid.nodes();
        let mut out = vec![0.0; nodes.len() * d];
        let mut next = 0;
        for k in 0..self.grid.steps() {
            let dt = self.grid.dt(k);
            for i in 0..d {
                out[(k + 1) * d + i] = out[k * d + i] + self.small_increments[k * d + i] + self.drift_rate[i] * dt;
            }
            while next < self.big_jumps.len() && self.big_jumps[next].time <= nodes[k + 1] {
                for i in 0..d {
                    out[(k + 1) * d + i] += self.big_jumps[next].size[i];
                }
                next += 1;
            }
        }
        out
    }
}

/// Drop every big jump with `|ΔZ| ≥ level` and compensate the retained annulus
/// `1 ≤ |z| < level`. The result shares the input's seed lineage.
pub fn truncate_realization(noise: &NoiseRealization, model: &LevyModel, level: f64) -> Result<NoiseRealization> {
    if !(level >= INNER_RADIUS) {
        return param(format!("truncation level must be at least {INNER_RADIUS}: {level}"));
    }
    let outer = level.min(noise.outer_radius);
    if outer.is_infinite() {
        return Ok(noise.clone());
    }
    let drift_rate = model
        .annulus_mean(INNER_RADIUS, outer)
        .into_iter()
        .map(|m| -m)
        .collect();
    Ok(NoiseRealization {
        grid: noise.grid.clone(),
        dim: noise.dim,
        small_increments: noise.small_increments.clone(),
        drift_rate,
        big_jumps: noise
            .big_jumps
            .iter()
            .filter(|e| norm(&e.size) < outer)
            .cloned()
            .collect(),
        outer_radius: outer,
        lineage: noise.lineage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_noise::model::Atom;

    #[test]
    fn same_lineage_is_bit_identical() {
        let m = LevyModel::isotropic_stable(1.5, 2).unwrap();
        let g = TimeGrid::uniform(1.0, 20).unwrap();
        let l = SeedLineage::new(9, 4, 2);
        let a = NoiseRealization::generate(&m, &g, l, true).unwrap();
        let b = NoiseRealization::generate(&m, &g, l, true).unwrap();
        assert_eq!(a, b);
        let c = NoiseRealization::generate(&m, &g, l.with_particle(5), true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn adapted_grid_contains_jump_times() {
        let m = LevyModel::isotropic_stable(1.2, 1).unwrap();
        let g = TimeGrid::uniform(5.0, 10).unwrap();
        for p in 0..20 {
            let n = NoiseRealization::generate(&m, &g, SeedLineage::new(1, p, 0), true).unwrap();
            assert!(n.big_jumps().iter().all(|e| n.grid().contains(e.time)));
        }
    }

    #[test]
    fn truncation_identity_and_symmetry() {
        let m = LevyModel::isotropic_stable(1.5, 1).unwrap();
        let g = TimeGrid::uniform(1.0, 10).unwrap();
        let n = NoiseRealization::generate(&m, &g, SeedLineage::new(3, 0, 0), false).unwrap();
        assert_eq!(truncate_realization(&n, &m, f64::INFINITY).unwrap(), n);
        let t = truncate_realization(&n, &m, 2.0).unwrap();
        assert!(t.drift_rate().iter().all(|x| *x == 0.0));
        assert!(t.big_jumps().iter().all(|e| norm(&e.size) < 2.0));
        assert!(truncate_realization(&n, &m, 0.5).is_err());
    }

    #[test]
    fn asymmetric_truncation_compensates() {
        let m = LevyModel::compound_poisson(vec![
            Atom { jump: vec![1.5], rate: 2.0 },
            Atom { jump: vec![3.0], rate: 1.0 },
        ])
        .unwrap();
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let n = NoiseRealization::generate(&m, &g, SeedLineage::new(3, 0, 0), false).unwrap();
        let t = truncate_realization(&n, &m, 2.0).unwrap();
        assert_eq!(t.drift_rate(), &[-3.0]);
        assert!(t.big_jumps().iter().all(|e| e.size[0] == 1.5));
    }

    #[test]
    fn path_accumulates_small_and_big() {
        let m = LevyModel::compound_poisson(vec![Atom { jump: vec![2.0], rate: 3.0 }]).unwrap();
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        let n = NoiseRealization::generate(&m, &g, SeedLineage::new(8, 0, 0), false).unwrap();
        let z = n.path_at_nodes();
        assert_eq!(*z.last().unwrap(), 2.0 * n.big_jumps().len() as f64);
    }
}
