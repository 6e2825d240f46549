//! Two solutions of y' = ∫|y|^β dμ from δ_0 when β < 1.

use levy_mckean::chaos_lab::{nonuniqueness_demo, nonzero_branch_endpoint};
use levy_mckean::levy_noise::TimeGrid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TimeGrid::uniform(1.0, 1000)?;
    let demo = nonuniqueness_demo(0.5, &grid)?;
    for k in (0..=1000).step_by(200) {
        println!(
            "t = {:.1}: zero branch {:.6}, perturbed {:.6}, closed form {:.6}",
            demo.nodes[k], demo.zero_branch[k], demo.nonzero_branch[k], demo.closed_form[k]
        );
    }
    println!(
        "residuals: {:.2e} and {:.2e} (tolerance {:.0e})",
        demo.residual_zero, demo.residual_nonzero, demo.tolerance
    );
    println!("\nendpoint at T = 1 as beta grows:");
    for beta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("  beta = {beta}: {:.6}", nonzero_branch_endpoint(beta, 1.0));
    }
    Ok(())
}
