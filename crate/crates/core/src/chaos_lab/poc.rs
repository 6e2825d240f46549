use std::sync::Arc;

use rayon::prelude::*;

use super::{fit_rate, theoretical_exponent, ExperimentPlan, RateReport};
use crate::error::{Error, Result};
use crate::levy_noise::TimeGrid;
use crate::mean_field_engine::{
    coupling_bound_terms, coupling_bound_violated, euler_mean_flow, CoefficientSet, EnsembleSetup, Lockstep,
    MeasureDependence, SystemSpec,
};
use crate::measure_metrics::{convention_label, dist, w1_sorted, FlowData, MeasureFlow, DEFAULT_EXACT_CAP};
use crate::picard_solver::{solve_fixed_point, FlowRepresentation, PicardConfig};
use crate::rng::reserved_replication;
use crate::stats::mean_and_se;

/// Limit flow and, for general coefficients, the cloud it was estimated from.
pub fn limit_flow_for(
    coeffs: &dyn CoefficientSet,
    plan: &ExperimentPlan,
    grid: &TimeGrid,
    cloud_size: usize,
) -> Result<MeasureFlow> {
    if coeffs.dependence() != MeasureDependence::General && coeffs.mean_closes() {
        if let Some(m0) = plan.initial.mean() {
            return euler_mean_flow(coeffs, &m0, &plan.model, grid);
        }
    }
    let mut cfg = PicardConfig::new(cloud_size, plan.master_seed);
    cfg.representation = FlowRepresentation::Empirical;
    cfg.placement = plan.placement;
    cfg.max_iters = plan.picard_max_iters;
    cfg.exact_cap = usize::MAX;
    let (flow, _) = solve_fixed_point(coeffs, &plan.model, &plan.initial, grid, &cfg)?;
    Ok(flow)
}

/// Sorted one-dimensional reference cloud at each observation time.
fn reference_clouds(
    coeffs: &dyn CoefficientSet,
    plan: &ExperimentPlan,
    grid: &TimeGrid,
    flow: &Arc<MeasureFlow>,
    obs_times: &[f64],
    size: usize,
    slot: u64,
) -> Result<Vec<Vec<f64>>> {
    if let (FlowData::Empirical(ms), 0) = (flow.data(), slot) {
        // the Picard cloud is itself a sample of the limit law
        if ms[0].len() >= size {
            return Ok(obs_times
                .iter()
                .map(|&t| {
                    let mut xs = ms[flow.node_at(t)].points().to_vec();
                    xs.sort_by(f64::total_cmp);
                    xs
                })
                .collect());
        }
    }
    let setup = EnsembleSetup {
        model: &plan.model,
        grid,
        initial: &plan.initial,
        particles: size,
        master_seed: plan.master_seed,
        replication: reserved_replication(100 + slot),
        placement: plan.placement,
    };
    let mut run = Lockstep::new(coeffs, &setup, &[SystemSpec::frozen(flow.clone())])?;
    let mut out = Vec::with_capacity(obs_times.len());
    let mut next = 0;
    loop {
        if next < obs_times.len() && run.time() == obs_times[next] {
            let mut xs = run.positions(0).to_vec();
            xs.sort_by(f64::total_cmp);
            out.push(xs);
            next += 1;
        }
        if run.is_done() {
            break;
        }
        run.advance()?;
    }
    Ok(out)
}

struct RepOutcome {
    e1: f64,
    e2: Vec<f64>,
    e2_copies: Vec<f64>,
    checks: usize,
    violations: usize,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Everything a replication shares with the others.
struct Shared<'a> {
    coeffs: &'a dyn CoefficientSet,
    plan: &'a ExperimentPlan,
    grid: &'a TimeGrid,
    flow: &'a Arc<MeasureFlow>,
    reference: Option<&'a [Vec<f64>]>,
    obs_times: &'a [f64],
}

fn run_replication(ctx: &Shared<'_>, n: usize, rep: u64) -> Result<RepOutcome> {
    let Shared {
        coeffs,
        plan,
        grid,
        flow,
        reference,
        obs_times,
    } = *ctx;
    let d = coeffs.dim();
    let setup = EnsembleSetup {
        model: &plan.model,
        grid,
        initial: &plan.initial,
        particles: n,
        master_seed: plan.master_seed,
        replication: rep,
        placement: plan.placement,
    };
    let specs = [SystemSpec::interacting(), SystemSpec::frozen(flow.clone())];
    let mut run = Lockstep::new(coeffs, &setup, &specs)?;
    let mut sup = vec![0.0f64; n];
    let mut out = RepOutcome {
        e1: 0.0,
        e2: Vec::with_capacity(obs_times.len()),
        e2_copies: Vec::with_capacity(obs_times.len()),
        checks: 0,
        violations: 0,
    };
    let mut next = 0;
    loop {
        let (a, b) = (run.positions(0), run.positions(1));
        for (s, (x, y)) in sup.iter_mut().zip(a.chunks(d).zip(b.chunks(d))) {
            *s = s.max(dist(x, y));
        }
        if let Some((w1, avg)) = coupling_bound_terms(a, b, d, DEFAULT_EXACT_CAP) {
            out.checks += 1;
            if coupling_bound_violated(w1, avg) {
                out.violations += 1;
            }
        }
        if let Some(reference) = reference {
            if next < obs_times.len() && run.time() == obs_times[next] {
                out.e2.push(w1_sorted(&sorted(a), &reference[next]));
                out.e2_copies.push(w1_sorted(&sorted(b), &reference[next]));
                next += 1;
            }
        }
        if run.is_done() {
            break;
        }
        run.advance()?;
    }
    out.e1 = sup.iter().sum::<f64>() / n as f64;
    Ok(out)
}

/// Coupled particle system versus limit copies for every `N` of the plan.
pub fn run_poc_experiment(plan: &ExperimentPlan) -> Result<RateReport> {
    plan.validate()?;
    let d = plan.dim();
    let coeffs = plan.coefficients.build(d)?;
    let coeffs: &dyn CoefficientSet = coeffs.as_ref();
    let grid = plan.grid()?;
    let n_max = *plan.n_grid.last().unwrap();
    let m_ref = plan.reference_factor * n_max;
    let (exponent, log_corr) = theoretical_exponent(d, plan.rate_index, plan.law)?;
    let flow = Arc::new(limit_flow_for(coeffs, plan, &grid, m_ref)?);
    let obs_times: Vec<f64> = plan.observation_indices().iter().map(|&k| grid.nodes()[k]).collect();

    let (reference, reference_bias) = if d == 1 {
        let r1 = reference_clouds(coeffs, plan, &grid, &flow, &obs_times, m_ref, 0)?;
        let r2 = reference_clouds(coeffs, plan, &grid, &flow, &obs_times, m_ref, 1)?;
        let bias = r1.iter().zip(&r2).map(|(a, b)| w1_sorted(a, b)).fold(0.0, f64::max);
        (Some(r1), Some(bias))
    } else {
        (None, None)
    };

    let mut report = RateReport {
        label: plan.label.clone(),
        abscissa: "N".into(),
        ns: Vec::new(),
        e1: Vec::new(),
        e1_se: Vec::new(),
        e2: Vec::new(),
        e2_se: Vec::new(),
        e2_copies: Vec::new(),
        fit: None,
        log_correction: log_corr,
        theoretical_exponent: exponent,
        zero_error: false,
        aborted_replications: 0,
        total_replications: 0,
        coupling_checks: 0,
        coupling_violations: 0,
        reference_bias,
        convention: convention_label(1.0).into(),
    };

    let ctx = Shared {
        coeffs,
        plan,
        grid: &grid,
        flow: &flow,
        reference: reference.as_deref(),
        obs_times: &obs_times,
    };
    for &n in &plan.n_grid {
        let outcomes: Vec<Result<RepOutcome>> = (0..plan.replications as u64)
            .into_par_iter()
            .map(|r| run_replication(&ctx, n, r))
            .collect();
        let mut e1s = Vec::with_capacity(outcomes.len());
        let mut e2s: Vec<Vec<f64>> = vec![Vec::new(); obs_times.len()];
        let mut e2c: Vec<Vec<f64>> = vec![Vec::new(); obs_times.len()];
        for o in outcomes {
            report.total_replications += 1;
            match o {
                Ok(o) => {
                    e1s.push(o.e1);
                    for (k, (a, b)) in o.e2.iter().zip(&o.e2_copies).enumerate() {
                        e2s[k].push(*a);
                        e2c[k].push(*b);
                    }
                    report.coupling_checks += o.checks;
                    report.coupling_violations += o.violations;
                }
                Err(Error::BlowUp { .. }) => report.aborted_replications += 1,
                Err(e) => return Err(e),
            }
        }
        let (m, se) = mean_and_se(&e1s);
        report.ns.push(n as f64);
        report.e1.push(m);
        report.e1_se.push(se);
        if reference.is_some() && !e2s[0].is_empty() {
            // sup over observation nodes, reported with the se at the maximiser
            let best = e2s
                .iter()
                .map(|v| mean_and_se(v))
                .fold((f64::NEG_INFINITY, 0.0), |acc, s| if s.0 > acc.0 { s } else { acc });
            report.e2.push(best.0);
            report.e2_se.push(best.1);
            report
                .e2_copies
                .push(e2c.iter().map(|v| mean_and_se(v).0).fold(0.0, f64::max));
        } else {
            report.e2.push(f64::NAN);
            report.e2_se.push(f64::NAN);
            report.e2_copies.push(f64::NAN);
        }
    }
    if report.aborted_replications * 20 > report.total_replications {
        return Err(Error::TooManyBlowUps {
            aborted: report.aborted_replications,
            total: report.total_replications,
        });
    }
    report.zero_error = report.e1.iter().all(|e| *e == 0.0);
    if !report.zero_error {
        report.fit = fit_rate(&report.ns, &report.e1, log_corr);
    }
    Ok(report)
}
