//! Drive an interacting particle system and its limit copies with the same
//! noise and measure how far they drift apart.

use std::sync::Arc;

use levy_mckean::levy_noise::{LevyModel, TimeGrid};
use levy_mckean::mean_field_engine::{
    simulate_coupled_limit_copies, stable_ou_mean_flow, EnsembleSetup, InitialLaw, JumpPlacement, StableOuCoefficients,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeffs = StableOuCoefficients::scalar(1, -0.5, 0.5);
    let model = LevyModel::isotropic_stable(1.5, 1)?;
    let grid = TimeGrid::uniform(1.0, 100)?;
    let initial = InitialLaw::Gaussian {
        mean: vec![2.0],
        sd: 0.5,
    };
    // the stable noise is centred, so the mean of the limit solves m' = (A + A') m
    let flow = Arc::new(stable_ou_mean_flow(coeffs.a(), coeffs.a_prime(), &[2.0], &grid)?);

    println!("{:>6} {:>12} {:>12} {:>10}", "N", "mean |dX|", "max |dX|", "bound ok");
    for n in [32, 128, 512, 2048] {
        let setup = EnsembleSetup {
            model: &model,
            grid: &grid,
            initial: &initial,
            particles: n,
            master_seed: 1,
            replication: 0,
            placement: JumpPlacement::Snapped,
        };
        let run = simulate_coupled_limit_copies(&coeffs, flow.clone(), &setup)?;
        let mean = run.coupling_sup.iter().sum::<f64>() / n as f64;
        let max = run.coupling_sup.iter().cloned().fold(0.0, f64::max);
        println!(
            "{n:>6} {mean:>12.5} {max:>12.5} {:>10}",
            format!("{}/{}", run.bound_checks - run.bound_violations, run.bound_checks)
        );
    }
    Ok(())
}
