//! Error from removing jumps of size at least R, for a 256-particle system.

use levy_mckean::chaos_lab::{run_truncation_study, ExperimentPlan, RateLaw};
use levy_mckean::levy_noise::LevyModel;
use levy_mckean::mean_field_engine::{CoefficientSpec, InitialLaw, JumpPlacement};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let replications = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(500);
    let plan = ExperimentPlan {
        label: "truncation".into(),
        coefficients: CoefficientSpec::scalar_stable_ou(1, 0.0, 0.5),
        model: LevyModel::isotropic_stable(1.5, 1)?,
        initial: InitialLaw::Gaussian {
            mean: vec![1.0],
            sd: 0.5,
        },
        rate_index: 1.5,
        law: RateLaw::Thm3,
        n_grid: vec![64, 128, 256, 512],
        replications,
        horizon: 1.0,
        steps: 50,
        master_seed: 99,
        placement: JumpPlacement::Snapped,
        reference_factor: 16,
        observation_nodes: 10,
        picard_max_iters: 10,
    };
    let r = run_truncation_study(&plan, 256, &[4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0])?;
    for k in 0..r.ns.len() {
        println!("R = {:>5}: {:.5} ± {:.5}", r.ns[k], r.e1[k], r.e1_se[k]);
    }
    println!(
        "slope {:.3}, predicted 1 - alpha = {:.3}",
        r.fitted_exponent().unwrap_or(f64::NAN),
        r.theoretical_exponent
    );
    Ok(())
}
