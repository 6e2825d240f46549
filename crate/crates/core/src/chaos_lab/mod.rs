//! Monte Carlo experiments: propagation-of-chaos rates, big-jump truncation,
//! the truncated moment curve and the non-uniqueness example.

mod exponent;
mod moment;
mod nonuniqueness;
mod poc;
pub mod report;
mod truncation;

use serde::{Deserialize, Serialize};

pub use exponent::{theoretical_exponent, RateLaw};
pub use moment::{truncated_moment_curve, MomentCurve};
pub use nonuniqueness::{nonuniqueness_demo, nonzero_branch_endpoint, NonUniqueness};
pub use poc::{limit_flow_for, run_poc_experiment};
pub use truncation::run_truncation_study;

use crate::error::{param, Result};
use crate::levy_noise::{LevyModel, TimeGrid};
use crate::mean_field_engine::{CoefficientSpec, InitialLaw, JumpPlacement};
use crate::stats::LinearFit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub label: String,
    pub coefficients: CoefficientSpec,
    pub model: LevyModel,
    pub initial: InitialLaw,
    /// β for the finite-moment law, α for the stable law.
    pub rate_index: f64,
    pub law: RateLaw,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub horizon: f64,
    pub steps: usize,
    pub master_seed: u64,
    pub placement: JumpPlacement,
    /// Reference cloud size for `E_2` is `reference_factor · max N`.
    pub reference_factor: usize,
    /// Number of evenly spaced nodes (after 0) where `E_2` is evaluated.
    pub observation_nodes: usize,
    pub picard_max_iters: usize,
}

impl ExperimentPlan {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.horizon, self.steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 4 {
            return param("N-grid needs at least 4 values");
        }
        if self.n_grid[0] == 0 || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return param("N-grid must be positive and strictly increasing");
        }
        if self.replications < 50 {
            return param(format!("replications must be at least 50, got {}", self.replications));
        }
        if self.initial.dim() != self.model.dim() {
            return param("initial law and noise model have different dimensions");
        }
        if self.reference_factor == 0 || self.observation_nodes == 0 {
            return param("reference_factor and observation_nodes must be positive");
        }
        self.initial.validate()?;
        self.grid()?;
        Ok(())
    }

    /// Base-grid node indices where `E_2` is evaluated.
    pub(crate) fn observation_indices(&self) -> Vec<usize> {
        let k = self.observation_nodes.min(self.steps);
        let mut idx: Vec<usize> = (0..=k).map(|j| (j * self.steps + k / 2) / k).collect();
        idx.dedup();
        idx
    }
}

/// Convergence table with fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub label: String,
    /// Name of the abscissa (`N` or `R`).
    pub abscissa: String,
    pub ns: Vec<f64>,
    pub e1: Vec<f64>,
    pub e1_se: Vec<f64>,
    /// `sup_t E W_1(μ̄^N_t, μ_t)`; NaN when not computed.
    pub e2: Vec<f64>,
    pub e2_se: Vec<f64>,
    /// `sup_t E W_1(μ̃^N_t, μ_t)` for the limit copies.
    pub e2_copies: Vec<f64>,
    pub fit: Option<LinearFit>,
    pub log_correction: f64,
    pub theoretical_exponent: f64,
    pub zero_error: bool,
    pub aborted_replications: usize,
    pub total_replications: usize,
    pub coupling_checks: usize,
    pub coupling_violations: usize,
    /// `sup_t W_1` between two independent reference clouds.
    pub reference_bias: Option<f64>,
    pub convention: String,
}

impl RateReport {
    pub fn fitted_exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// `E_1` non-increasing up to two combined standard errors.
    pub fn monotone_decay(&self) -> bool {
        self.e1.windows(2).zip(self.e1_se.windows(2)).all(|(e, s)| {
            let tol = 2.0 * (s[0] * s[0] + s[1] * s[1]).sqrt();
            e[1] <= e[0] + tol
        })
    }

    /// `E_2 ≤ E_1 + sup_t E W_1(μ̃^N, μ) + 2 se` at every N where `E_2` exists.
    pub fn decomposition_holds(&self) -> bool {
        (0..self.ns.len()).all(|k| {
            if self.e2[k].is_nan() {
                return true;
            }
            let slack = 2.0 * (self.e1_se[k].powi(2) + self.e2_se[k].powi(2)).sqrt();
            self.e2[k] <= self.e1[k] + self.e2_copies[k] + slack
        })
    }

    pub fn within(&self, tolerance: f64) -> bool {
        self.fitted_exponent()
            .is_some_and(|s| (s - self.theoretical_exponent).abs() <= tolerance)
    }
}

/// Log-log least squares of `ys` against `xs` after removing
/// `log_correction · ln ln x`. Points with zero error are skipped.
pub(crate) fn fit_rate(xs: &[f64], ys: &[f64], log_correction: f64) -> Option<LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0 && y.is_finite())
        .map(|(x, y)| {
            let corr = if log_correction != 0.0 { log_correction * x.ln().ln() } else { 0.0 };
            (x.ln(), y.ln() - corr)
        })
        .unzip();
    if lx.len() < 4 {
        return None;
    }
    crate::stats::linear_fit(&lx, &ly)
}

/// Run `f` on a pool limited to `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_noise::Atom;

    fn small_plan(coefficients: CoefficientSpec, model: LevyModel) -> ExperimentPlan {
        ExperimentPlan {
            label: "test".into(),
            coefficients,
            initial: InitialLaw::Gaussian {
                mean: vec![1.0],
                sd: 0.5,
            },
            rate_index: 2.0,
            law: RateLaw::Thm2,
            model,
            n_grid: vec![4, 8, 16, 32],
            replications: 50,
            horizon: 0.5,
            steps: 10,
            master_seed: 11,
            placement: JumpPlacement::Snapped,
            reference_factor: 4,
            observation_nodes: 5,
            picard_max_iters: 10,
        }
    }

    fn cp() -> LevyModel {
        LevyModel::compound_poisson(vec![
            Atom { jump: vec![1.0], rate: 1.0 },
            Atom { jump: vec![-0.5], rate: 2.0 },
        ])
        .unwrap()
    }

    #[test]
    fn decoupled_coefficients_give_zero_error() {
        let plan = small_plan(CoefficientSpec::scalar_stable_ou(1, -1.0, 0.0), cp());
        let r = run_poc_experiment(&plan).unwrap();
        assert!(r.zero_error);
        assert!(r.fit.is_none());
        assert!(r.e1.iter().all(|e| *e == 0.0));
        assert_eq!(r.coupling_violations, 0);
    }

    #[test]
    fn report_is_schedule_independent() {
        let plan = small_plan(CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5), cp());
        let a = with_threads(1, || run_poc_experiment(&plan)).unwrap();
        let b = with_threads(3, || run_poc_experiment(&plan)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.e1.iter().all(|e| *e > 0.0));
        assert!(a.coupling_checks > 0);
        assert_eq!(a.coupling_violations, 0);
        assert!(a.decomposition_holds());
    }

    #[test]
    fn general_coefficients_use_picard_reference() {
        let mut plan = small_plan(CoefficientSpec::PowerMoment { beta: 1.5 }, cp());
        plan.steps = 5;
        plan.replications = 50;
        let r = run_poc_experiment(&plan).unwrap();
        assert!(r.e1.iter().all(|e| e.is_finite()));
        assert!(r.reference_bias.is_some());
    }

    #[test]
    fn truncation_beyond_largest_atom_is_exact() {
        let plan = small_plan(CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5), cp());
        assert!(run_truncation_study(&plan, 8, &[2.0]).is_err());
        let stable = small_plan(
            CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5),
            LevyModel::isotropic_stable(1.5, 1).unwrap(),
        );
        let r = run_truncation_study(&stable, 8, &[f64::INFINITY]).unwrap();
        assert!(r.zero_error);
        let r = run_truncation_study(&stable, 8, &[2.0, 1e300]).unwrap();
        assert!(r.e1[0] > 0.0);
    }

    #[test]
    fn plan_validation() {
        let mut plan = small_plan(CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5), cp());
        plan.n_grid = vec![4, 8, 8, 16];
        assert!(plan.validate().is_err());
        plan.n_grid = vec![4, 8, 16];
        assert!(plan.validate().is_err());
        plan.n_grid = vec![4, 8, 16, 32];
        plan.replications = 49;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn observation_indices_cover_the_horizon() {
        let plan = small_plan(CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5), cp());
        assert_eq!(plan.observation_indices(), vec![0, 2, 4, 6, 8, 10]);
    }
}
