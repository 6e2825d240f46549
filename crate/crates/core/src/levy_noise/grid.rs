use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Time nodes `0 = t_0 < t_1 < … < t_K = T`.
///
/// `base_step` is the step of the uniform grid the nodes were refined from.
/// Noise schemes key their cutoffs on it so that inserting jump times does not
/// change the small-jump law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    base_step: f64,
}

impl TimeGrid {
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return param(format!("horizon must be positive and finite: {horizon}"));
        }
        if steps == 0 {
            return param("grid needs at least one step");
        }
        let h = horizon / steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
        nodes[steps] = horizon;
        Ok(Self { nodes, base_step: h })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return param("grid must start at 0 and have at least two nodes");
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes.last().unwrap().is_finite() {
            return param("grid nodes must be finite and strictly increasing");
        }
        let base_step = nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Ok(Self { nodes, base_step })
    }

    /// Insert extra times in `(0, T)`, keeping the base step.
    pub fn refined_with(&self, times: impl IntoIterator<Item = f64>) -> TimeGrid {
        let t_end = self.horizon();
        let mut extra: Vec<f64> = times.into_iter().filter(|t| *t > 0.0 && *t < t_end).collect();
        if extra.is_empty() {
            return self.clone();
        }
        extra.sort_by(f64::total_cmp);
        let mut nodes = Vec::with_capacity(self.nodes.len() + extra.len());
        let (mut i, mut j) = (0, 0);
        while i < self.nodes.len() || j < extra.len() {
            let next = if j >= extra.len() || (i < self.nodes.len() && self.nodes[i] <= extra[j]) {
                i += 1;
                self.nodes[i - 1]
            } else {
                j += 1;
                extra[j - 1]
            };
            if nodes.last().is_none_or(|&last| next > last) {
                nodes.push(next);
            }
        }
        TimeGrid {
            nodes,
            base_step: self.base_step,
        }
    }

    /// Same nodes with an explicit base step (used when restoring a grid).
    pub fn with_base_step(mut self, base_step: f64) -> Self {
        self.base_step = base_step;
        self
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn base_step(&self) -> f64 {
        self.base_step
    }

    pub fn contains(&self, t: f64) -> bool {
        self.nodes.binary_search_by(|x| x.total_cmp(&t)).is_ok()
    }

    /// Index of the last node `≤ t` (clamped to the grid).
    pub fn locate(&self, t: f64) -> usize {
        match self.nodes.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_endpoints() {
        let g = TimeGrid::uniform(1.0, 3).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.horizon(), 1.0);
        assert_eq!(g.steps(), 3);
    }

    #[test]
    fn refinement_merges_and_dedups() {
        let g = TimeGrid::uniform(1.0, 2).unwrap();
        let r = g.refined_with([0.25, 0.5, 0.75, 0.25, 1.0]);
        assert_eq!(r.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(r.base_step(), 0.5);
        assert!(r.contains(0.75));
        assert_eq!(r.locate(0.6), 2);
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(TimeGrid::from_nodes(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::uniform(0.0, 3).is_err());
    }
}
