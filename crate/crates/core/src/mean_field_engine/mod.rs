//! Euler stepping of the interacting particle system and of synchronously
//! coupled copies of the limit equation.

mod coefficients;
mod engine;
mod initial;

pub use coefficients::{
    CoefficientSet, CoefficientSpec, FnCoefficients, MeasureDependence, PowerMomentDrift, StableOuCoefficients, TanhMeanField,
};
pub use engine::{
    coupling_bound_terms, coupling_bound_violated, euler_mean_flow, simulate_coupled_limit_copies,
    simulate_particle_system, stable_ou_mean_flow, step_particle_system, CoupledEnsemble, EnsembleSetup,
    EnsembleState, Interaction, JumpPlacement, Lockstep, NoiseSlice, PathEnsemble, SystemSpec,
};
pub use initial::InitialLaw;

/// Coordinatewise mean of a flat `N × d` cloud.
pub fn mean_of_points(points: &[f64], dim: usize) -> Vec<f64> {
    coefficients::mean_of(points, dim)
}

#[cfg(test)]
mod tests;
