use rayon::prelude::*;

use super::{fit_rate, ExperimentPlan, RateReport};
use crate::error::{param, Error, Result};
use crate::mean_field_engine::{coupling_bound_terms, coupling_bound_violated, EnsembleSetup, Lockstep, SystemSpec};
use crate::measure_metrics::{convention_label, dist, DEFAULT_EXACT_CAP};
use crate::stats::mean_and_se;

/// Pathwise distance between an `N`-particle system and its twins with jumps
/// of size `≥ R` removed, one twin per level.
///
/// All systems share the seed lineage, so the only difference between them is
/// the dropped jumps and the compensator correction. The fit is of the error
/// against `R` on log-log axes and is compared with `1 - α`.
pub fn run_truncation_study(plan: &ExperimentPlan, particles: usize, levels: &[f64]) -> Result<RateReport> {
    if plan.replications < 50 {
        return param("replications must be at least 50");
    }
    if particles == 0 || levels.is_empty() {
        return param("truncation study needs particles and at least one level");
    }
    if levels.iter().any(|r| !(*r > 1.0)) {
        return param("truncation levels must exceed 1");
    }
    let alpha = plan
        .model
        .alpha()
        .ok_or_else(|| Error::Parameter("truncation study needs an α-stable model".into()))?;
    let d = plan.dim();
    let coeffs = plan.coefficients.build(d)?;
    let grid = plan.grid()?;
    let mut specs = vec![SystemSpec::interacting()];
    specs.extend(levels.iter().map(|&r| SystemSpec::interacting().truncated(r)));

    let outcomes: Vec<Result<(Vec<f64>, usize, usize)>> = (0..plan.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let setup = EnsembleSetup {
                model: &plan.model,
                grid: &grid,
                initial: &plan.initial,
                particles,
                master_seed: plan.master_seed,
                replication: rep,
                placement: plan.placement,
            };
            let mut run = Lockstep::new(coeffs.as_ref(), &setup, &specs)?;
            let mut sup = vec![0.0f64; levels.len() * particles];
            let (mut checks, mut violations) = (0, 0);
            loop {
                let full = run.positions(0);
                for (l, s) in sup.chunks_mut(particles).enumerate() {
                    let twin = run.positions(l + 1);
                    if let Some((w1, avg)) = coupling_bound_terms(full, twin, d, DEFAULT_EXACT_CAP) {
                        checks += 1;
                        violations += coupling_bound_violated(w1, avg) as usize;
                    }
                    for (si, (x, y)) in s.iter_mut().zip(full.chunks(d).zip(twin.chunks(d))) {
                        *si = si.max(dist(x, y));
                    }
                }
                if run.is_done() {
                    break;
                }
                run.advance()?;
            }
            let errs = sup.chunks(particles).map(|s| s.iter().sum::<f64>() / particles as f64).collect();
            Ok((errs, checks, violations))
        })
        .collect();

    let mut per_level: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];
    let (mut aborted, total) = (0, outcomes.len());
    let (mut checks, mut violations) = (0, 0);
    for o in outcomes {
        match o {
            Ok((v, c, bad)) => {
                v.into_iter().zip(per_level.iter_mut()).for_each(|(e, acc)| acc.push(e));
                checks += c;
                violations += bad;
            }
            Err(Error::BlowUp { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    if aborted * 20 > total {
        return Err(Error::TooManyBlowUps { aborted, total });
    }
    let stats: Vec<(f64, f64)> = per_level.iter().map(|v| mean_and_se(v)).collect();
    let e1: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let zero_error = e1.iter().all(|e| *e == 0.0);
    let nan = vec![f64::NAN; levels.len()];
    Ok(RateReport {
        label: plan.label.clone(),
        abscissa: "R".into(),
        ns: levels.to_vec(),
        fit: if zero_error { None } else { fit_rate(levels, &e1, 0.0) },
        e1,
        e1_se: stats.iter().map(|s| s.1).collect(),
        e2: nan.clone(),
        e2_se: nan.clone(),
        e2_copies: nan,
        log_correction: 0.0,
        theoretical_exponent: 1.0 - alpha,
        zero_error,
        aborted_replications: aborted,
        total_replications: total,
        coupling_checks: checks,
        coupling_violations: violations,
        reference_bias: None,
        convention: convention_label(1.0).into(),
    })
}
