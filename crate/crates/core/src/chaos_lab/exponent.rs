use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Which rate statement an experiment is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateLaw {
    /// Finite β-moment noise: `N^{1/β - 1}` or `N^{-1/d}`.
    Thm2,
    /// α-stable noise: `(ln N)^{1/α} N^{1/α - 1}` or `N^{-1/d}`.
    Thm3,
}

/// `(exponent, log_correction)` of the predicted propagation-of-chaos rate.
pub fn theoretical_exponent(dim: usize, beta_or_alpha: f64, law: RateLaw) -> Result<(f64, f64)> {
    if dim == 0 {
        return param("dimension must be positive");
    }
    let p = beta_or_alpha;
    match law {
        RateLaw::Thm2 if !(1.0..=2.0).contains(&p) => return param(format!("beta out of [1,2]: {p}")),
        RateLaw::Thm3 if !(p > 1.0 && p < 2.0) => return param(format!("alpha out of (1,2): {p}")),
        _ => {}
    }
    let d = dim as f64;
    let first_regime = if dim <= 2 {
        true
    } else {
        let critical = d / (d - 1.0);
        if p == critical {
            return Err(Error::UncoveredCase(format!(
                "index {p} equals the critical value d/(d-1) = {critical} for d = {dim}"
            )));
        }
        p < critical
    };
    Ok(if first_regime {
        let log = if law == RateLaw::Thm3 { 1.0 / p } else { 0.0 };
        (1.0 / p - 1.0, log)
    } else {
        (-1.0 / d, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_examples() {
        assert_eq!(theoretical_exponent(1, 2.0, RateLaw::Thm2).unwrap(), (-0.5, 0.0));
        assert_eq!(theoretical_exponent(3, 2.0, RateLaw::Thm2).unwrap(), (-1.0 / 3.0, 0.0));
        let (e, l) = theoretical_exponent(1, 1.5, RateLaw::Thm3).unwrap();
        assert!((e + 1.0 / 3.0).abs() < 1e-15 && (l - 1.0 / 1.5).abs() < 1e-15);
        assert!(matches!(
            theoretical_exponent(3, 1.5, RateLaw::Thm2),
            Err(Error::UncoveredCase(_))
        ));
        assert!(theoretical_exponent(1, 2.5, RateLaw::Thm2).is_err());
        assert!(theoretical_exponent(1, 2.0, RateLaw::Thm3).is_err());
    }

    #[test]
    fn case_split_flips_across_critical_index() {
        for d in 3..8usize {
            let crit = d as f64 / (d as f64 - 1.0);
            for (beta, below) in [(crit - 0.05, true), (crit + 0.05, false)] {
                if !(1.0..=2.0).contains(&beta) {
                    continue;
                }
                let (e, _) = theoretical_exponent(d, beta, RateLaw::Thm2).unwrap();
                if below {
                    assert_eq!(e, 1.0 / beta - 1.0);
                } else {
                    assert_eq!(e, -1.0 / d as f64);
                }
            }
        }
    }
}
