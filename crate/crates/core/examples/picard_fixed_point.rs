//! Picard iteration for a linear mean-field drift with compound Poisson
//! jumps. Prints the distances between iterates, the noise floor, and the
//! shift caused by one more application at the fixed point.

use levy_mckean::levy_noise::{Atom, LevyModel, TimeGrid};
use levy_mckean::mean_field_engine::{euler_mean_flow, InitialLaw, StableOuCoefficients};
use levy_mckean::picard_solver::{contraction_ratio, reapply_check, solve_fixed_point, FlowRepresentation, PicardConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeffs = StableOuCoefficients::scalar(1, 0.0, 2.0);
    let model = LevyModel::compound_poisson(vec![
        Atom { jump: vec![1.0], rate: 1.0 },
        Atom { jump: vec![-1.0], rate: 1.0 },
        Atom { jump: vec![0.5], rate: 2.0 },
        Atom { jump: vec![-0.5], rate: 2.0 },
    ])?;
    let initial = InitialLaw::Gaussian {
        mean: vec![1.0],
        sd: 0.5,
    };
    let grid = TimeGrid::uniform(0.5, 50)?;
    let mut cfg = PicardConfig::new(10_000, 3);
    cfg.representation = FlowRepresentation::Empirical;

    let (flow, report) = solve_fixed_point(&coeffs, &model, &initial, &grid, &cfg)?;
    println!("{:>4} {:>12} {:>12} {:>8}", "k", "delta", "floor", "ratio");
    let ratios = report.ratios();
    for (k, d) in report.distances.iter().enumerate() {
        let r = if k > 0 { format!("{:.3}", ratios[k - 1]) } else { "-".into() };
        println!("{:>4} {d:>12.5e} {:>12.5e} {r:>8}", k + 1, report.noise_floors[k]);
    }
    if report.iterations() >= 3 {
        println!("contraction ratio above the floor: {:.3}", contraction_ratio(&report)?);
    }
    let check = reapply_check(&flow, &report, &coeffs, &model, &initial, &cfg)?;
    println!("re-application shift {:.3e}, floor {:.3e}", check.shift, check.noise_floor);

    let exact = euler_mean_flow(&coeffs, &[1.0], &model, &grid)?;
    println!(
        "mean at T: fixed point {:.4}, mean ODE {:.4}",
        flow.mean_at_node(50)[0],
        exact.mean_at_node(50)[0]
    );
    Ok(())
}
