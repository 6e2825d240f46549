//! Sample an α-stable noise path, inspect its jumps, round-trip it through
//! the binary event log and run the sampler test battery.

use levy_mckean::levy_noise::{read_event_log, validate::validate_noise, write_event_log, LevyModel, NoiseRealization, TimeGrid};
use levy_mckean::rng::SeedLineage;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LevyModel::isotropic_stable(1.5, 2)?;
    let grid = TimeGrid::uniform(1.0, 100)?;
    let noise = NoiseRealization::generate(&model, &grid, SeedLineage::new(42, 0, 0), true)?;

    println!("alpha = 1.5, d = 2, T = 1");
    println!("  grid nodes after adding jump times: {}", noise.grid().nodes().len());
    println!("  small-jump cutoff: {:.4}", model.small_jump_cutoff(grid.base_step()));
    for e in noise.big_jumps() {
        let r = e.size.iter().map(|z| z * z).sum::<f64>().sqrt();
        println!("  jump at t = {:.4}, |z| = {:.3}", e.time, r);
    }
    let path = noise.path_at_nodes();
    println!("  Z_T = {:?}", &path[path.len() - 2..]);

    let mut buf = Vec::new();
    write_event_log(&mut buf, &noise, None)?;
    let (back, _) = read_event_log(&mut buf.as_slice())?;
    println!("  event log: {} bytes, round trip identical: {}", buf.len(), back == noise);

    let report = validate_noise(&LevyModel::isotropic_stable(1.5, 1)?, 1.0, 10_000, 0.01, 2024)?;
    // each test rejects a correct sampler with probability equal to the level
    println!("\nsampler checks (10^4 paths, level 0.01):");
    for c in &report.checks {
        println!("  {:<40} {:>10.4}  {}", c.name, c.statistic, if c.passed { "ok" } else { "FAIL" });
    }
    Ok(())
}
