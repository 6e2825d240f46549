//! Growth of E|Z_{N,T}|^α with the truncation level N.

use levy_mckean::chaos_lab::truncated_moment_curve;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ns: Vec<f64> = (4..=12).map(|k| f64::from(1u32 << k)).collect();
    let c = truncated_moment_curve(1.5, &ns, 1.0, 0.02, 1.5, 500_000, 5)?;
    println!("{:>6} {:>8} {:>10} {:>10} {:>8}", "N", "ln N", "estimate", "se", "ratio");
    for (k, n) in ns.iter().enumerate() {
        println!(
            "{n:>6} {:>8.3} {:>10.4} {:>10.4} {:>8.4}",
            n.ln(),
            c.estimates[k],
            c.standard_errors[k],
            c.estimates[k] / n.ln()
        );
    }
    if let Some(f) = c.fit {
        println!("fit against ln N: slope {:.4}, R^2 {:.4}", f.slope, f.r_squared);
    }

    // the second moment is linear in T
    let one = truncated_moment_curve(1.5, &[64.0], 1.0, 0.02, 2.0, 500_000, 6)?;
    let two = truncated_moment_curve(1.5, &[64.0], 2.0, 0.02, 2.0, 500_000, 6)?;
    println!(
        "E|Z_64|^2: T = 1 -> {:.3}, T = 2 -> {:.3} (ratio {:.3})",
        one.estimates[0],
        two.estimates[0],
        two.estimates[0] / one.estimates[0]
    );
    Ok(())
}
