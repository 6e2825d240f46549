use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::levy_noise::{Atom, LevyModel, TimeGrid};
use crate::linalg::rk4;
use crate::mean_field_engine::{InitialLaw, PowerMomentDrift};
use crate::picard_solver::{solve_fixed_point, PicardConfig};

/// Size of the perturbation that moves the ODE off the zero solution.
pub const PERTURBATION: f64 = 1e-12;

/// Two solutions of `y' = ∫|y|^β dμ_t` started from `δ_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonUniqueness {
    pub beta: f64,
    pub nodes: Vec<f64>,
    /// Mean of the Picard fixed point started at the zero flow.
    pub zero_branch: Vec<f64>,
    /// `y' = |y|^β` integrated from `y(0) = PERTURBATION`.
    pub nonzero_branch: Vec<f64>,
    pub closed_form: Vec<f64>,
    /// Largest `|Δy/h - (f(y_k) + f(y_{k+1}))/2|` over the grid.
    pub residual_zero: f64,
    pub residual_nonzero: f64,
    /// Grid tolerance (the base step).
    pub tolerance: f64,
}

impl NonUniqueness {
    pub fn residuals_within_tolerance(&self) -> bool {
        self.residual_zero <= self.tolerance && self.residual_nonzero <= self.tolerance
    }
}

/// `((1-β) T)^{1/(1-β)}`.
pub fn nonzero_branch_endpoint(beta: f64, horizon: f64) -> f64 {
    ((1.0 - beta) * horizon).powf(1.0 / (1.0 - beta))
}

fn residual(ys: &[f64], nodes: &[f64], beta: f64) -> f64 {
    let f = |y: f64| y.abs().powf(beta);
    ys.windows(2)
        .zip(nodes.windows(2))
        .map(|(y, t)| ((y[1] - y[0]) / (t[1] - t[0]) - 0.5 * (f(y[0]) + f(y[1]))).abs())
        .fold(0.0, f64::max)
}

pub fn nonuniqueness_demo(beta: f64, grid: &TimeGrid) -> Result<NonUniqueness> {
    if !(beta > 0.0 && beta < 1.0) {
        return param(format!("beta {beta} out of (0,1)"));
    }
    let coeffs = PowerMomentDrift { beta };
    let silent = LevyModel::compound_poisson(vec![Atom { jump: vec![1.0], rate: 0.0 }])?;
    let start = InitialLaw::PointMass { at: vec![0.0] };
    let (flow, _) = solve_fixed_point(&coeffs, &silent, &start, grid, &PicardConfig::new(4, 0))?;
    let zero_branch: Vec<f64> = (0..grid.nodes().len()).map(|k| flow.mean_at_node(k)[0]).collect();

    let nodes = grid.nodes().to_vec();
    let nonzero_branch: Vec<f64> = rk4(|_, y| vec![y[0].abs().powf(beta)], &[PERTURBATION], &nodes)
        .into_iter()
        .map(|y| y[0])
        .collect();
    let closed_form = nodes.iter().map(|&t| nonzero_branch_endpoint(beta, t)).collect();
    Ok(NonUniqueness {
        beta,
        residual_zero: residual(&zero_branch, &nodes, beta),
        residual_nonzero: residual(&nonzero_branch, &nodes, beta),
        tolerance: grid.base_step(),
        nodes,
        zero_branch,
        nonzero_branch,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_power_endpoints() {
        let grid = TimeGrid::uniform(1.0, 1000).unwrap();
        let demo = nonuniqueness_demo(0.5, &grid).unwrap();
        assert_eq!(*demo.zero_branch.last().unwrap(), 0.0);
        assert_eq!(demo.residual_zero, 0.0);
        assert!((demo.nonzero_branch.last().unwrap() - 0.25).abs() < 1e-3);
        assert!(demo.residuals_within_tolerance(), "{} {}", demo.residual_nonzero, demo.tolerance);
    }

    #[test]
    fn endpoint_decreases_towards_unit_power() {
        let e: Vec<f64> = (1..20).map(|k| nonzero_branch_endpoint(k as f64 / 20.0, 1.0)).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_linear_power() {
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        assert!(nonuniqueness_demo(1.0, &grid).is_err());
    }
}
