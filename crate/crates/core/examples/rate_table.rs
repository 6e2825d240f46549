//! Predicted propagation-of-chaos exponents across dimensions and moment indices.

use levy_mckean::chaos_lab::{theoretical_exponent, RateLaw};

fn main() {
    println!("finite beta-moment noise:");
    for d in 1..=4 {
        for beta in [1.0, 1.25, 1.5, 2.0] {
            match theoretical_exponent(d, beta, RateLaw::Thm2) {
                Ok((e, _)) => println!("  d = {d}, beta = {beta:<4}: N^{e:.4}"),
                Err(err) => println!("  d = {d}, beta = {beta:<4}: {err}"),
            }
        }
    }
    println!("alpha-stable noise:");
    for d in [1, 2, 3] {
        for alpha in [1.2, 1.5, 1.8] {
            match theoretical_exponent(d, alpha, RateLaw::Thm3) {
                Ok((e, l)) => println!("  d = {d}, alpha = {alpha}: (ln N)^{l:.3} N^{e:.4}"),
                Err(err) => println!("  d = {d}, alpha = {alpha}: {err}"),
            }
        }
    }
}
