use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coefficients::{CoefficientSet, MeasureDependence};
use super::initial::InitialLaw;
use crate::error::{param, Error, Result};
use crate::levy_noise::{norm, sample_big_jumps, BigJumpEvent, LevyModel, SmallJumpSampler, TimeGrid, INNER_RADIUS};
use crate::linalg::{expm, mat_vec, mat_vec_add};
use crate::measure_metrics::{w1_sorted, w_beta_exact_matching_capped, EmpiricalMeasure, FlowData, MeasureFlow};
use crate::rng::{Purpose, SeedLineage, StreamRng};

/// Where big jumps enter the time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpPlacement {
    /// Every jump time of every particle becomes a grid node.
    Adapted,
    /// A jump in `(t_k, t_{k+1}]` is applied at `t_{k+1}`.
    #[default]
    Snapped,
}

/// Positions of `N` particles at one time, flattened `N × d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleState {
    pub time: f64,
    pub dim: usize,
    pub positions: Vec<f64>,
}

impl EnsembleState {
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn empirical(&self) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(self.dim, self.positions.clone())
    }
}

/// Noise acting on every particle over one grid interval.
#[derive(Debug, Clone)]
pub struct NoiseSlice {
    pub dt: f64,
    /// Compensated small-jump increments, `N × d`.
    pub small: Vec<f64>,
    /// Deterministic drift of the step (truncation compensator), shared.
    pub drift: Vec<f64>,
    /// `(particle, ΔZ)` applied at the end of the step.
    pub jumps: Vec<(usize, Vec<f64>)>,
}

fn check_finite(positions: &[f64], dim: usize, time: f64) -> Result<()> {
    if let Some(k) = positions.iter().position(|x| !x.is_finite()) {
        return Err(Error::BlowUp { particle: k / dim, time });
    }
    Ok(())
}

struct StepScratch {
    b: Vec<f64>,
    sigma: Vec<f64>,
    noise: Vec<f64>,
}

impl StepScratch {
    fn new(d: usize) -> Self {
        Self {
            b: vec![0.0; d],
            sigma: vec![0.0; d * d],
            noise: vec![0.0; d],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn euler_continuous(
    coeffs: &dyn CoefficientSet,
    constant_sigma: Option<&[f64]>,
    t: f64,
    dt: f64,
    positions: &mut [f64],
    summary: &[f64],
    small: &[f64],
    drift: &[f64],
    s: &mut StepScratch,
) {
    let d = coeffs.dim();
    for (x, dz) in positions.chunks_mut(d).zip(small.chunks(d)) {
        coeffs.drift(t, x, summary, &mut s.b);
        for i in 0..d {
            s.noise[i] = dz[i] + drift[i];
        }
        let sigma = match constant_sigma {
            Some(m) => m,
            None => {
                coeffs.diffusion(t, x, summary, &mut s.sigma);
                &s.sigma
            }
        };
        for (xi, bi) in x.iter_mut().zip(&s.b) {
            *xi += bi * dt;
        }
        mat_vec_add(sigma, &s.noise, x);
    }
}

fn apply_jumps(
    coeffs: &dyn CoefficientSet,
    constant_sigma: Option<&[f64]>,
    t: f64,
    positions: &mut [f64],
    summary: &[f64],
    jumps: &[(usize, Vec<f64>)],
    s: &mut StepScratch,
) {
    let d = coeffs.dim();
    for (p, dz) in jumps {
        let x = &mut positions[p * d..(p + 1) * d];
        let sigma = match constant_sigma {
            Some(m) => m,
            None => {
                coeffs.diffusion(t, x, summary, &mut s.sigma);
                &s.sigma
            }
        };
        mat_vec(sigma, dz, &mut s.noise);
        x.iter_mut().zip(&s.noise).for_each(|(xi, n)| *xi += n);
    }
}

/// One explicit Euler step of the interacting system. The measure in the
/// drift is the empirical measure of `state`; jumps use the pre-jump
/// position and the pre-jump empirical measure.
pub fn step_particle_system(state: &EnsembleState, coeffs: &dyn CoefficientSet, slice: &NoiseSlice) -> Result<EnsembleState> {
    let d = coeffs.dim();
    if state.dim != d || slice.small.len() != state.positions.len() || slice.drift.len() != d {
        return Err(Error::Dimension {
            expected: state.positions.len(),
            got: slice.small.len(),
        });
    }
    let sigma = coeffs.constant_diffusion();
    let mut s = StepScratch::new(d);
    let mut next = state.positions.clone();
    let summary = coeffs.summarize(&state.positions);
    euler_continuous(
        coeffs,
        sigma.as_deref(),
        state.time,
        slice.dt,
        &mut next,
        &summary,
        &slice.small,
        &slice.drift,
        &mut s,
    );
    let t_next = state.time + slice.dt;
    if !slice.jumps.is_empty() {
        let pre = if sigma.is_some() { summary } else { coeffs.summarize(&next) };
        apply_jumps(coeffs, sigma.as_deref(), t_next, &mut next, &pre, &slice.jumps, &mut s);
    }
    check_finite(&next, d, t_next)?;
    Ok(EnsembleState {
        time: t_next,
        dim: d,
        positions: next,
    })
}

/// How a system sees the measure argument.
#[derive(Debug, Clone)]
pub enum Interaction {
    /// Its own empirical measure (the interacting particle system).
    Empirical,
    /// A prescribed flow (limit copies, Picard iterates).
    Frozen(Arc<MeasureFlow>),
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub interaction: Interaction,
    /// Jumps with `|ΔZ| ≥ truncation` are dropped and the retained annulus
    /// compensated. `f64::INFINITY` keeps the full noise.
    pub truncation: f64,
}

impl SystemSpec {
    pub fn interacting() -> Self {
        Self {
            interaction: Interaction::Empirical,
            truncation: f64::INFINITY,
        }
    }

    pub fn frozen(flow: Arc<MeasureFlow>) -> Self {
        Self {
            interaction: Interaction::Frozen(flow),
            truncation: f64::INFINITY,
        }
    }

    pub fn truncated(mut self, level: f64) -> Self {
        self.truncation = level;
        self
    }
}

struct ParticleNoise {
    small: StreamRng,
    jumps: Vec<BigJumpEvent>,
    next: usize,
}

enum Source {
    Empirical,
    // summary at each ensemble node
    Frozen(Vec<Arc<Vec<f64>>>),
}

struct SystemRun {
    source: Source,
    truncation: f64,
    drift_rate: Vec<f64>,
    positions: Vec<f64>,
}

/// Several systems stepped in lockstep on one shared noise.
///
/// Particle `i` of every system sees the same initial condition and the same
/// noise (seed lineage `(master, i, replication)`), which is the synchronous
/// coupling used to compare an interacting system with limit copies or a
/// truncated twin.
pub struct Lockstep<'a> {
    coeffs: &'a dyn CoefficientSet,
    grid: TimeGrid,
    n: usize,
    sampler: SmallJumpSampler,
    noise: Vec<ParticleNoise>,
    systems: Vec<SystemRun>,
    step: usize,
    sigma: Option<Vec<f64>>,
    slice: NoiseSlice,
    scratch: StepScratch,
}

#[derive(Debug, Clone)]
pub struct EnsembleSetup<'a> {
    pub model: &'a LevyModel,
    pub grid: &'a TimeGrid,
    pub initial: &'a InitialLaw,
    pub particles: usize,
    pub master_seed: u64,
    pub replication: u64,
    pub placement: JumpPlacement,
}

fn frozen_summaries(coeffs: &dyn CoefficientSet, flow: &MeasureFlow, grid: &TimeGrid) -> Result<Vec<Arc<Vec<f64>>>> {
    if (flow.grid().horizon() - grid.horizon()).abs() > 1e-12 * grid.horizon() {
        return Err(Error::GridMismatch("flow horizon differs from the ensemble horizon".into()));
    }
    if flow.grid().nodes().iter().any(|&t| !grid.contains(t)) {
        return Err(Error::GridMismatch("flow nodes are not nodes of the ensemble grid".into()));
    }
    let per_node: Vec<Arc<Vec<f64>>> = match flow.data() {
        FlowData::Empirical(ms) => ms.iter().map(|m| Arc::new(coeffs.summarize(m.points()))).collect(),
        FlowData::Mean(ms) => ms
            .iter()
            .map(|m| {
                coeffs.summary_from_mean(m).map(Arc::new).ok_or_else(|| {
                    Error::Parameter("a mean-only flow cannot freeze coefficients that need the full measure".into())
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(grid.nodes().iter().map(|&t| per_node[flow.node_at(t)].clone()).collect())
}

impl<'a> Lockstep<'a> {
    pub fn new(coeffs: &'a dyn CoefficientSet, setup: &EnsembleSetup<'_>, specs: &[SystemSpec]) -> Result<Self> {
        let d = coeffs.dim();
        if setup.model.dim() != d || setup.initial.dim() != d {
            return Err(Error::Dimension {
                expected: d,
                got: if setup.model.dim() != d {
                    setup.model.dim()
                } else {
                    setup.initial.dim()
                },
            });
        }
        if setup.particles == 0 {
            return param("need at least one particle");
        }
        if specs.is_empty() {
            return param("need at least one system");
        }
        let n = setup.particles;
        let horizon = setup.grid.horizon();
        let mut initial = vec![0.0; n * d];
        let mut noise = Vec::with_capacity(n);
        for (i, x0) in initial.chunks_mut(d).enumerate() {
            let lineage = SeedLineage::new(setup.master_seed, i as u64, setup.replication);
            setup.initial.sample(&mut lineage.stream(Purpose::InitialCondition), x0);
            let jumps = sample_big_jumps(setup.model, horizon, f64::INFINITY, &mut lineage.stream(Purpose::BigJumps))?;
            noise.push(ParticleNoise {
                small: lineage.stream(Purpose::SmallJumps),
                jumps,
                next: 0,
            });
        }
        let grid = match setup.placement {
            JumpPlacement::Snapped => setup.grid.clone(),
            JumpPlacement::Adapted => setup
                .grid
                .refined_with(noise.iter().flat_map(|p| p.jumps.iter().map(|e| e.time))),
        };
        let mut systems = Vec::with_capacity(specs.len());
        for spec in specs {
            if !(spec.truncation >= INNER_RADIUS) {
                return param(format!("truncation level must be at least {INNER_RADIUS}"));
            }
            let source = match &spec.interaction {
                Interaction::Empirical => Source::Empirical,
                Interaction::Frozen(flow) => Source::Frozen(frozen_summaries(coeffs, flow, &grid)?),
            };
            let drift_rate = if spec.truncation.is_finite() {
                setup
                    .model
                    .annulus_mean(INNER_RADIUS, spec.truncation)
                    .into_iter()
                    .map(|m| -m)
                    .collect()
            } else {
                vec![0.0; d]
            };
            systems.push(SystemRun {
                source,
                truncation: spec.truncation,
                drift_rate,
                positions: initial.clone(),
            });
        }
        check_finite(&initial, d, 0.0)?;
        Ok(Self {
            coeffs,
            sampler: SmallJumpSampler::new(setup.model, grid.base_step()),
            grid,
            n,
            noise,
            systems,
            step: 0,
            sigma: coeffs.constant_diffusion(),
            slice: NoiseSlice {
                dt: 0.0,
                small: vec![0.0; n * d],
                drift: vec![0.0; d],
                jumps: Vec::new(),
            },
            scratch: StepScratch::new(d),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// Index of the current node.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.grid.nodes()[self.step]
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.grid.steps()
    }

    pub fn positions(&self, system: usize) -> &[f64] {
        &self.systems[system].positions
    }

    /// Big jumps applied during the last step, before truncation.
    pub fn last_jumps(&self) -> &[(usize, Vec<f64>)] {
        &self.slice.jumps
    }

    pub fn advance(&mut self) -> Result<()> {
        if self.is_done() {
            return param("ensemble already reached the horizon");
        }
        let d = self.dim();
        let k = self.step;
        let t = self.grid.nodes()[k];
        let dt = self.grid.dt(k);
        let t_next = self.grid.nodes()[k + 1];
        let last = k + 1 == self.grid.steps();
        self.slice.dt = dt;
        self.slice.jumps.clear();
        for (i, (p, dz)) in self.noise.iter_mut().zip(self.slice.small.chunks_mut(d)).enumerate() {
            self.sampler.increment(dt, &mut p.small, dz);
            while p.next < p.jumps.len() && (last || p.jumps[p.next].time <= t_next) {
                self.slice.jumps.push((i, p.jumps[p.next].size.clone()));
                p.next += 1;
            }
        }
        let coeffs = self.coeffs;
        let sigma = self.sigma.as_deref();
        let mut kept: Vec<(usize, Vec<f64>)> = Vec::new();
        for sys in &mut self.systems {
            let summary: Arc<Vec<f64>> = match &sys.source {
                Source::Empirical => Arc::new(if coeffs.dependence() == MeasureDependence::None {
                    Vec::new()
                } else {
                    coeffs.summarize(&sys.positions)
                }),
                Source::Frozen(s) => s[k].clone(),
            };
            let drift: Vec<f64> = sys.drift_rate.iter().map(|r| r * dt).collect();
            euler_continuous(
                coeffs,
                sigma,
                t,
                dt,
                &mut sys.positions,
                &summary,
                &self.slice.small,
                &drift,
                &mut self.scratch,
            );
            let jumps: &[(usize, Vec<f64>)] = if sys.truncation.is_infinite() {
                &self.slice.jumps
            } else {
                kept.clear();
                kept.extend(self.slice.jumps.iter().filter(|(_, z)| norm(z) < sys.truncation).cloned());
                &kept
            };
            if !jumps.is_empty() {
                let pre = match (&sys.source, sigma) {
                    (Source::Empirical, None) if coeffs.dependence() != MeasureDependence::None => {
                        Arc::new(coeffs.summarize(&sys.positions))
                    }
                    _ => summary,
                };
                apply_jumps(coeffs, sigma, t_next, &mut sys.positions, &pre, jumps, &mut self.scratch);
            }
            check_finite(&sys.positions, d, t_next)?;
        }
        self.step += 1;
        Ok(())
    }
}

/// Trajectories of one system on its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub grid: TimeGrid,
    pub states: Vec<EnsembleState>,
    /// `sup_t |X^i_t|` per particle.
    pub running_sup: Vec<f64>,
}

impl PathEnsemble {
    fn start(grid: &TimeGrid, dim: usize, positions: &[f64]) -> Self {
        let running_sup = positions.chunks(dim).map(norm).collect();
        Self {
            grid: grid.clone(),
            states: vec![EnsembleState {
                time: 0.0,
                dim,
                positions: positions.to_vec(),
            }],
            running_sup,
        }
    }

    fn record(&mut self, time: f64, dim: usize, positions: &[f64]) {
        for (s, x) in self.running_sup.iter_mut().zip(positions.chunks(dim)) {
            *s = s.max(norm(x));
        }
        self.states.push(EnsembleState {
            time,
            dim,
            positions: positions.to_vec(),
        });
    }

    pub fn particles(&self) -> usize {
        self.running_sup.len()
    }

    /// Empirical marginal flow.
    pub fn flow(&self) -> Result<MeasureFlow> {
        let ms = self.states.iter().map(|s| s.empirical()).collect::<Result<Vec<_>>>()?;
        MeasureFlow::new(self.grid.clone(), FlowData::Empirical(ms))
    }
}

/// Simulate the interacting `N`-particle system.
pub fn simulate_particle_system(coeffs: &dyn CoefficientSet, setup: &EnsembleSetup<'_>) -> Result<PathEnsemble> {
    let mut run = Lockstep::new(coeffs, setup, &[SystemSpec::interacting()])?;
    let d = coeffs.dim();
    let mut paths = PathEnsemble::start(run.grid(), d, run.positions(0));
    while !run.is_done() {
        run.advance()?;
        paths.record(run.time(), d, run.positions(0));
    }
    Ok(paths)
}

/// Result of stepping the particle system and limit copies on shared noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoupledEnsemble {
    pub particles: PathEnsemble,
    pub limit_copies: PathEnsemble,
    /// `sup_t |X^{i,N}_t - X^{i,∞}_t|` per particle.
    pub coupling_sup: Vec<f64>,
    pub bound_checks: usize,
    pub bound_violations: usize,
}

/// `W_1` between two equal-size clouds and the mean pairwise distance.
/// Returns `None` when exact `W_1` is unavailable (d > 1 above the cap).
pub fn coupling_bound_terms(a: &[f64], b: &[f64], dim: usize, cap: usize) -> Option<(f64, f64)> {
    let n = a.len() / dim;
    let avg = a
        .chunks(dim)
        .zip(b.chunks(dim))
        .map(|(x, y)| crate::measure_metrics::dist(x, y))
        .sum::<f64>()
        / n as f64;
    let w1 = if dim == 1 {
        let mut xs = a.to_vec();
        let mut ys = b.to_vec();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        w1_sorted(&xs, &ys)
    } else if n <= cap {
        let mu = EmpiricalMeasure::new(dim, a.to_vec()).ok()?;
        let nu = EmpiricalMeasure::new(dim, b.to_vec()).ok()?;
        w_beta_exact_matching_capped(&mu, &nu, 1.0, cap).ok()?
    } else {
        return None;
    };
    Some((w1, avg))
}

/// The coupling inequality `W_1 ≤ (1/N) Σ |X^k - Y^k|`, up to rounding.
pub fn coupling_bound_violated(w1: f64, avg: f64) -> bool {
    w1 > avg * (1.0 + 1e-10) + 1e-12
}

/// Step the particle system and `N` copies of the limit equation frozen to
/// `limit_flow` on identical initial data and noise.
pub fn simulate_coupled_limit_copies(
    coeffs: &dyn CoefficientSet,
    limit_flow: Arc<MeasureFlow>,
    setup: &EnsembleSetup<'_>,
) -> Result<CoupledEnsemble> {
    let specs = [SystemSpec::interacting(), SystemSpec::frozen(limit_flow)];
    let mut run = Lockstep::new(coeffs, setup, &specs)?;
    let d = coeffs.dim();
    let mut particles = PathEnsemble::start(run.grid(), d, run.positions(0));
    let mut limit = PathEnsemble::start(run.grid(), d, run.positions(1));
    let mut coupling_sup = vec![0.0; setup.particles];
    let (mut checks, mut violations) = (0, 0);
    loop {
        let (a, b) = (run.positions(0), run.positions(1));
        for (s, (x, y)) in coupling_sup.iter_mut().zip(a.chunks(d).zip(b.chunks(d))) {
            *s = f64::max(*s, crate::measure_metrics::dist(x, y));
        }
        if let Some((w1, avg)) = coupling_bound_terms(a, b, d, crate::measure_metrics::DEFAULT_EXACT_CAP) {
            checks += 1;
            if coupling_bound_violated(w1, avg) {
                violations += 1;
            }
        }
        if run.is_done() {
            break;
        }
        run.advance()?;
        particles.record(run.time(), d, run.positions(0));
        limit.record(run.time(), d, run.positions(1));
    }
    Ok(CoupledEnsemble {
        particles,
        limit_copies: limit,
        coupling_sup,
        bound_checks: checks,
        bound_violations: violations,
    })
}

/// Closed-form mean flow `m(t) = exp((A + A') t) m_0` of the stable OU
/// equation driven by centred noise.
pub fn stable_ou_mean_flow(a: &[f64], a_prime: &[f64], mean0: &[f64], grid: &TimeGrid) -> Result<MeasureFlow> {
    let d = mean0.len();
    if a.len() != d * d || a_prime.len() != d * d {
        return Err(Error::Dimension {
            expected: d * d,
            got: a.len().max(a_prime.len()),
        });
    }
    let sum: Vec<f64> = a.iter().zip(a_prime).map(|(x, y)| x + y).collect();
    let means = grid
        .nodes()
        .iter()
        .map(|&t| {
            let e = expm(&sum.iter().map(|x| x * t).collect::<Vec<_>>(), d);
            let mut m = vec![0.0; d];
            mat_vec(&e, mean0, &mut m);
            m
        })
        .collect();
    MeasureFlow::new(grid.clone(), FlowData::Mean(means))
}

/// Mean flow of the Euler-discretized limit equation,
/// `m_{k+1} = m_k + dt b(t_k, m_k, m_k) + σ dt ∫_{|z|≥1} z dν`.
///
/// Exact for coefficient sets whose drift is affine in `x` with constant
/// diffusion, and free of the time-discretization bias of the closed form.
pub fn euler_mean_flow(coeffs: &dyn CoefficientSet, mean0: &[f64], model: &LevyModel, grid: &TimeGrid) -> Result<MeasureFlow> {
    if !coeffs.mean_closes() || coeffs.dependence() == MeasureDependence::General {
        return param("coefficients do not admit a closed mean recursion");
    }
    let d = coeffs.dim();
    let sigma = coeffs.constant_diffusion().expect("mean_closes implies constant diffusion");
    let jump_mean = model.annulus_mean(INNER_RADIUS, f64::INFINITY);
    let mut push = vec![0.0; d];
    mat_vec(&sigma, &jump_mean, &mut push);
    let mut means = vec![mean0.to_vec()];
    let mut b = vec![0.0; d];
    for k in 0..grid.steps() {
        let m = means.last().unwrap();
        let s = coeffs.summary_from_mean(m).expect("mean-only coefficients");
        coeffs.drift(grid.nodes()[k], m, &s, &mut b);
        let dt = grid.dt(k);
        let next = (0..d).map(|i| m[i] + dt * (b[i] + push[i])).collect();
        means.push(next);
    }
    MeasureFlow::new(grid.clone(), FlowData::Mean(means))
}
