use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Law of the initial condition `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum InitialLaw {
    PointMass { at: Vec<f64> },
    /// Independent coordinates `N(mean_i, sd²)`.
    Gaussian { mean: Vec<f64>, sd: f64 },
    /// Independent symmetric Lomax coordinates: `±scale (U^{-1/shape} - 1)`.
    /// Moments of order below `shape` are finite.
    CenteredPareto { dim: usize, shape: f64, scale: f64 },
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            InitialLaw::PointMass { at } if at.is_empty() || at.iter().any(|x| !x.is_finite()) => {
                param("point mass location must be a finite non-empty vector")
            }
            InitialLaw::Gaussian { mean, sd } if mean.is_empty() || !(*sd >= 0.0) => {
                param("gaussian initial law needs a mean vector and sd ≥ 0")
            }
            InitialLaw::CenteredPareto { dim, shape, scale } if *dim == 0 || !(*shape > 0.0) || !(*scale > 0.0) => {
                param("centered Pareto needs dim ≥ 1, shape > 0 and scale > 0")
            }
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialLaw::PointMass { at } => at.len(),
            InitialLaw::Gaussian { mean, .. } => mean.len(),
            InitialLaw::CenteredPareto { dim, .. } => *dim,
        }
    }

    pub fn mean(&self) -> Option<Vec<f64>> {
        match self {
            InitialLaw::PointMass { at } => Some(at.clone()),
            InitialLaw::Gaussian { mean, .. } => Some(mean.clone()),
            InitialLaw::CenteredPareto { dim, shape, .. } => (*shape > 1.0).then(|| vec![0.0; *dim]),
        }
    }

    /// Supremum of the orders `p` with `E|ξ|^p < ∞`.
    pub fn moment_index(&self) -> f64 {
        match self {
            InitialLaw::CenteredPareto { shape, .. } => *shape,
            _ => f64::INFINITY,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            InitialLaw::PointMass { at } => out.copy_from_slice(at),
            InitialLaw::Gaussian { mean, sd } => {
                for (o, m) in out.iter_mut().zip(mean) {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = m + sd * g;
                }
            }
            InitialLaw::CenteredPareto { shape, scale, .. } => {
                for o in out.iter_mut() {
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let mag = scale * (u.powf(-1.0 / shape) - 1.0);
                    *o = if rng.random::<bool>() { mag } else { -mag };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, SeedLineage};

    #[test]
    fn pareto_median_magnitude() {
        let law = InitialLaw::CenteredPareto {
            dim: 1,
            shape: 3.0,
            scale: 1.0,
        };
        let mut rng = SeedLineage::new(1, 0, 0).stream(Purpose::InitialCondition);
        let mut x = [0.0];
        let n = 20_000;
        let below = (0..n)
            .filter(|_| {
                law.sample(&mut rng, &mut x);
                x[0].abs() < 2f64.powf(1.0 / 3.0) - 1.0
            })
            .count();
        assert!((below as f64 / n as f64 - 0.5).abs() < 0.015);
    }

    #[test]
    fn validation() {
        assert!(InitialLaw::Gaussian { mean: vec![0.0], sd: -1.0 }.validate().is_err());
        assert!(InitialLaw::PointMass { at: vec![1.0] }.validate().is_ok());
    }
}
