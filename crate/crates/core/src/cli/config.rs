//! Strict TOML experiment configuration.
//!
//! Parsing never stops at the first problem: every missing key, bad value and
//! unknown key is collected so a typo-ridden file is fixed in one pass.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::chaos_lab::{ExperimentPlan, RateLaw};
use crate::levy_noise::{Atom, LevyModel, RadialProfile};
use crate::mean_field_engine::{CoefficientSpec, InitialLaw, JumpPlacement};
use crate::picard_solver::{FlowRepresentation, PicardConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Quick,
    Full,
}

impl Preset {
    /// Multiplier applied to Monte Carlo sample sizes.
    pub fn scale(self) -> usize {
        match self {
            Preset::Quick => 1,
            Preset::Full => 4,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quick" => Some(Preset::Quick),
            "full" => Some(Preset::Full),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Poc {
        plan: ExperimentPlan,
        tolerance: f64,
    },
    Truncation {
        plan: ExperimentPlan,
        particles: usize,
        levels: Vec<f64>,
        tolerance: f64,
    },
    Picard {
        coefficients: CoefficientSpec,
        model: LevyModel,
        initial: InitialLaw,
        horizon: f64,
        steps: usize,
        solver: PicardConfig,
        reapply_factor: f64,
    },
    Nonuniqueness {
        beta: f64,
        horizon: f64,
        steps: usize,
        endpoint_tolerance: f64,
    },
    NoiseValidate {
        model: LevyModel,
        horizon: f64,
        paths: usize,
        level: f64,
    },
    Moment {
        alpha: f64,
        n_grid: Vec<f64>,
        horizon: f64,
        base_step: f64,
        power: f64,
        samples: usize,
        min_r_squared: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub label: String,
    pub seed: u64,
    /// 0 lets rayon decide.
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub preset: Preset,
    pub experiment: Experiment,
}

impl RunConfig {
    pub fn kind(&self) -> &'static str {
        match self.experiment {
            Experiment::Poc { .. } => "poc",
            Experiment::Truncation { .. } => "truncation",
            Experiment::Picard { .. } => "picard",
            Experiment::Nonuniqueness { .. } => "nonuniqueness",
            Experiment::NoiseValidate { .. } => "noise-validate",
            Experiment::Moment { .. } => "moment",
        }
    }

    /// Scale every Monte Carlo size by the preset multiplier.
    pub fn with_preset(mut self, preset: Preset) -> Self {
        let k = preset.scale();
        self.preset = preset;
        match &mut self.experiment {
            Experiment::Poc { plan, .. } | Experiment::Truncation { plan, .. } => plan.replications *= k,
            Experiment::Picard { solver, .. } => solver.particles_m *= k,
            Experiment::NoiseValidate { paths, .. } => *paths *= k,
            Experiment::Moment { samples, .. } => *samples *= k,
            Experiment::Nonuniqueness { steps, .. } => *steps *= k,
        }
        self
    }
}

/// Every problem found in a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.0 {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// One TOML table being read, with the keys consumed so far.
struct Section<'a> {
    path: String,
    table: &'a Table,
    used: BTreeSet<String>,
}

type Errors = Vec<String>;

impl<'a> Section<'a> {
    fn new(path: &str, table: &'a Table) -> Self {
        Self {
            path: path.to_string(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn raw(&mut self, k: &str) -> Option<&'a Value> {
        self.used.insert(k.to_string());
        self.table.get(k)
    }

    fn missing(&self, k: &str, errs: &mut Errors) {
        errs.push(format!("missing key `{}`", self.key(k)));
    }

    fn float_of(v: &Value) -> Option<f64> {
        match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            Value::String(s) if s == "inf" => Some(f64::INFINITY),
            _ => None,
        }
    }

    fn opt_f64(&mut self, k: &str, errs: &mut Errors) -> Option<f64> {
        let v = self.raw(k)?;
        let x = Self::float_of(v);
        if x.is_none() {
            errs.push(format!("`{}` must be a number", self.key(k)));
        }
        x
    }

    fn f64_or(&mut self, k: &str, default: f64, errs: &mut Errors) -> f64 {
        self.opt_f64(k, errs).unwrap_or(default)
    }

    fn req_f64(&mut self, k: &str, errs: &mut Errors) -> Option<f64> {
        if !self.table.contains_key(k) {
            self.used.insert(k.to_string());
            self.missing(k, errs);
            return None;
        }
        self.opt_f64(k, errs)
    }

    fn opt_u64(&mut self, k: &str, errs: &mut Errors) -> Option<u64> {
        let v = self.raw(k)?;
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                errs.push(format!("`{}` must be a non-negative integer", self.key(k)));
                None
            }
        }
    }

    fn req_u64(&mut self, k: &str, errs: &mut Errors) -> Option<u64> {
        if !self.table.contains_key(k) {
            self.used.insert(k.to_string());
            self.missing(k, errs);
            return None;
        }
        self.opt_u64(k, errs)
    }

    fn usize_or(&mut self, k: &str, default: usize, errs: &mut Errors) -> usize {
        self.opt_u64(k, errs).map_or(default, |v| v as usize)
    }

    fn req_usize(&mut self, k: &str, errs: &mut Errors) -> Option<usize> {
        self.req_u64(k, errs).map(|v| v as usize)
    }

    fn opt_bool(&mut self, k: &str, default: bool, errs: &mut Errors) -> bool {
        match self.raw(k) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                errs.push(format!("`{}` must be true or false", self.key(k)));
                default
            }
        }
    }

    fn opt_str(&mut self, k: &str, errs: &mut Errors) -> Option<&'a str> {
        match self.raw(k)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                errs.push(format!("`{}` must be a string", self.key(k)));
                None
            }
        }
    }

    fn req_str(&mut self, k: &str, errs: &mut Errors) -> Option<&'a str> {
        if !self.table.contains_key(k) {
            self.used.insert(k.to_string());
            self.missing(k, errs);
            return None;
        }
        self.opt_str(k, errs)
    }

    fn f64_list(&mut self, k: &str, required: bool, errs: &mut Errors) -> Option<Vec<f64>> {
        let Some(v) = self.raw(k) else {
            if required {
                self.missing(k, errs);
            }
            return None;
        };
        let xs = v.as_array().and_then(|a| a.iter().map(Self::float_of).collect::<Option<Vec<_>>>());
        if xs.is_none() {
            errs.push(format!("`{}` must be an array of numbers", self.key(k)));
        }
        xs
    }

    fn usize_list(&mut self, k: &str, errs: &mut Errors) -> Option<Vec<usize>> {
        let Some(v) = self.raw(k) else {
            self.missing(k, errs);
            return None;
        };
        let xs = v.as_array().and_then(|a| {
            a.iter()
                .map(|x| x.as_integer().filter(|i| *i >= 0).map(|i| i as usize))
                .collect::<Option<Vec<_>>>()
        });
        if xs.is_none() {
            errs.push(format!("`{}` must be an array of non-negative integers", self.key(k)));
        }
        xs
    }

    fn table(&mut self, k: &str, required: bool, errs: &mut Errors) -> Option<Section<'a>> {
        let path = self.key(k);
        match self.raw(k) {
            Some(Value::Table(t)) => Some(Section::new(&path, t)),
            Some(_) => {
                errs.push(format!("`{path}` must be a table"));
                None
            }
            None => {
                if required {
                    errs.push(format!("missing section `[{path}]`"));
                }
                None
            }
        }
    }

    fn finish(self, errs: &mut Errors) {
        for k in self.table.keys() {
            if !self.used.contains(k) {
                errs.push(format!("unknown key `{}`", self.key(k)));
            }
        }
    }
}

fn parse_model(mut s: Section<'_>, errs: &mut Errors) -> Option<LevyModel> {
    let kind = s.req_str("kind", errs);
    let model = match kind {
        Some("stable") => {
            let alpha = s.req_f64("alpha", errs);
            let dim = s.usize_or("dim", 1, errs);
            let beta = s.opt_f64("beta", errs);
            if let Some(a) = alpha {
                if !(a > 0.0 && a < 2.0) {
                    errs.push("alpha out of (0,2)".to_string());
                } else if a <= 1.0 {
                    errs.push("alpha must exceed 1 so that first moments exist".to_string());
                }
            }
            alpha.filter(|a| *a > 1.0 && *a < 2.0).and_then(|a| {
                let m = LevyModel::isotropic_stable(a, dim).and_then(|m| match beta {
                    Some(b) => m.with_beta(b),
                    None => Ok(m),
                });
                m.map_err(|e| errs.push(format!("model: {e}"))).ok()
            })
        }
        Some("compound-poisson") => {
            let atoms = match s.raw("atoms") {
                Some(Value::Array(a)) => {
                    let mut out = Vec::new();
                    for (i, v) in a.iter().enumerate() {
                        let Some(t) = v.as_table() else {
                            errs.push(format!("`model.atoms[{i}]` must be a table"));
                            continue;
                        };
                        let mut at = Section::new(&format!("model.atoms[{i}]"), t);
                        let jump = at.f64_list("jump", true, errs);
                        let rate = at.req_f64("rate", errs);
                        at.finish(errs);
                        if let (Some(jump), Some(rate)) = (jump, rate) {
                            out.push(Atom { jump, rate });
                        }
                    }
                    Some(out)
                }
                Some(_) => {
                    errs.push("`model.atoms` must be an array of tables".to_string());
                    None
                }
                None => {
                    s.missing("atoms", errs);
                    None
                }
            };
            atoms.and_then(|a| LevyModel::compound_poisson(a).map_err(|e| errs.push(format!("model: {e}"))).ok())
        }
        Some("radial") => {
            let radii = s.f64_list("radii", true, errs);
            let density = s.f64_list("density", true, errs);
            let dim = s.usize_or("dim", 1, errs);
            match (radii, density) {
                (Some(r), Some(g)) => RadialProfile::new(r, g)
                    .and_then(|p| LevyModel::radial(p, dim))
                    .map_err(|e| errs.push(format!("model: {e}")))
                    .ok(),
                _ => None,
            }
        }
        Some(other) => {
            errs.push(format!("unknown model kind `{other}` (stable, compound-poisson, radial)"));
            None
        }
        None => None,
    };
    s.finish(errs);
    model
}

fn parse_coefficients(mut s: Section<'_>, dim: Option<usize>, errs: &mut Errors) -> Option<CoefficientSpec> {
    let spec = match s.req_str("kind", errs) {
        Some("stable-ou") => {
            let a = s.f64_list("a", true, errs);
            let a_prime = s.f64_list("a_prime", true, errs);
            let b = s.f64_list("b", false, errs);
            match (a, a_prime) {
                (Some(a), Some(a_prime)) => {
                    let d = dim.unwrap_or(1);
                    let b = b.unwrap_or_else(|| crate::linalg::identity(d));
                    Some(CoefficientSpec::StableOu { a, a_prime, b })
                }
                _ => None,
            }
        }
        Some("tanh-mean-field") => {
            let a = s.req_f64("a", errs);
            let kappa = s.req_f64("kappa", errs);
            let sigma = s.f64_or("sigma", 1.0, errs);
            Some(CoefficientSpec::TanhMeanField {
                a: a?,
                kappa: kappa?,
                sigma,
            })
        }
        Some("power-moment") => s.req_f64("beta", errs).map(|beta| CoefficientSpec::PowerMoment { beta }),
        Some(other) => {
            errs.push(format!(
                "unknown coefficient kind `{other}` (stable-ou, tanh-mean-field, power-moment)"
            ));
            None
        }
        None => None,
    };
    s.finish(errs);
    if let (Some(spec), Some(d)) = (&spec, dim) {
        if let Err(e) = spec.build(d) {
            errs.push(format!("coefficients: {e}"));
            return None;
        }
    }
    spec
}

fn parse_initial(mut s: Section<'_>, errs: &mut Errors) -> Option<InitialLaw> {
    let law = match s.req_str("law", errs) {
        Some("point-mass") => s.f64_list("at", true, errs).map(|at| InitialLaw::PointMass { at }),
        Some("gaussian") => {
            let mean = s.f64_list("mean", true, errs);
            let sd = s.req_f64("sd", errs);
            Some(InitialLaw::Gaussian { mean: mean?, sd: sd? })
        }
        Some("centered-pareto") => {
            let dim = s.usize_or("dim", 1, errs);
            let shape = s.req_f64("shape", errs);
            let scale = s.f64_or("scale", 1.0, errs);
            shape.map(|shape| InitialLaw::CenteredPareto { dim, shape, scale })
        }
        Some(other) => {
            errs.push(format!("unknown initial law `{other}` (point-mass, gaussian, centered-pareto)"));
            None
        }
        None => None,
    };
    s.finish(errs);
    if let Some(l) = &law {
        if let Err(e) = l.validate() {
            errs.push(format!("initial: {e}"));
            return None;
        }
    }
    law
}

fn parse_placement(s: &mut Section<'_>, errs: &mut Errors) -> JumpPlacement {
    match s.opt_str("placement", errs) {
        None | Some("snapped") => JumpPlacement::Snapped,
        Some("adapted") => JumpPlacement::Adapted,
        Some(other) => {
            errs.push(format!("unknown placement `{other}` (snapped, adapted)"));
            JumpPlacement::Snapped
        }
    }
}

struct Shared {
    model: Option<LevyModel>,
    coefficients: Option<CoefficientSpec>,
    initial: Option<InitialLaw>,
}

fn parse_shared(root: &mut Section<'_>, errs: &mut Errors) -> Shared {
    let model = root.table("model", true, errs).and_then(|s| parse_model(s, errs));
    let dim = model.as_ref().map(|m| m.dim());
    let coefficients = root
        .table("coefficients", true, errs)
        .and_then(|s| parse_coefficients(s, dim, errs));
    let initial = root.table("initial", true, errs).and_then(|s| parse_initial(s, errs));
    if let (Some(m), Some(i)) = (&model, &initial) {
        if m.dim() != i.dim() {
            errs.push(format!(
                "initial law has dimension {} but the model has dimension {}",
                i.dim(),
                m.dim()
            ));
        }
    }
    Shared {
        model,
        coefficients,
        initial,
    }
}

fn parse_plan(
    s: &mut Section<'_>,
    shared: Shared,
    label: &str,
    seed: Option<u64>,
    default_tolerance: f64,
    errs: &mut Errors,
) -> Option<(ExperimentPlan, f64)> {
    let n_grid = s.usize_list("n_grid", errs);
    let replications = s.req_usize("replications", errs);
    let horizon = s.req_f64("horizon", errs);
    let steps = s.req_usize("steps", errs);
    let law = match s.opt_str("law", errs) {
        None => shared.model.as_ref().map(|m| if m.alpha().is_some() { RateLaw::Thm3 } else { RateLaw::Thm2 }),
        Some("thm2") => Some(RateLaw::Thm2),
        Some("thm3") => Some(RateLaw::Thm3),
        Some(other) => {
            errs.push(format!("unknown rate law `{other}` (thm2, thm3)"));
            None
        }
    };
    let rate_index = s.opt_f64("rate_index", errs);
    let placement = parse_placement(s, errs);
    let reference_factor = s.usize_or("reference_factor", 16, errs);
    let observation_nodes = s.usize_or("observation_nodes", 10, errs);
    let picard_max_iters = s.usize_or("picard_max_iters", 10, errs);
    let tolerance = s.f64_or("tolerance", default_tolerance, errs);

    let model = shared.model?;
    let law = law?;
    let rate_index = rate_index.unwrap_or(match law {
        RateLaw::Thm3 => model.alpha().unwrap_or(f64::NAN),
        RateLaw::Thm2 => model.beta(),
    });
    let plan = ExperimentPlan {
        label: label.to_string(),
        coefficients: shared.coefficients?,
        initial: shared.initial?,
        model,
        rate_index,
        law,
        n_grid: n_grid?,
        replications: replications?,
        horizon: horizon?,
        steps: steps?,
        master_seed: seed?,
        placement,
        reference_factor,
        observation_nodes,
        picard_max_iters,
    };
    if let Err(e) = plan.validate() {
        errs.push(format!("plan: {e}"));
        return None;
    }
    Some((plan, tolerance))
}

fn parse_experiment(kind: &str, root: &mut Section<'_>, label: &str, seed: Option<u64>, errs: &mut Errors) -> Option<Experiment> {
    match kind {
        "poc" => {
            let shared = parse_shared(root, errs);
            let mut p = root.table("plan", true, errs)?;
            let out = parse_plan(&mut p, shared, label, seed, 0.15, errs);
            p.finish(errs);
            let (plan, tolerance) = out?;
            Some(Experiment::Poc { plan, tolerance })
        }
        "truncation" => {
            let shared = parse_shared(root, errs);
            if shared.model.as_ref().is_some_and(|m| m.alpha().is_none()) {
                errs.push("truncation study needs a stable model".to_string());
            }
            let mut p = root.table("plan", true, errs);
            let mut t = root.table("truncation", true, errs);
            let (particles, levels) = match &mut t {
                Some(t) => (t.req_usize("particles", errs), t.f64_list("levels", true, errs)),
                None => (None, None),
            };
            if let Some(l) = &levels {
                if l.is_empty() || l.iter().any(|r| !(*r > 1.0)) {
                    errs.push("`truncation.levels` must be non-empty and above 1".to_string());
                }
            }
            let out = p.as_mut().and_then(|p| parse_plan(p, shared, label, seed, 0.2, errs));
            if let Some(p) = p {
                p.finish(errs);
            }
            if let Some(t) = t {
                t.finish(errs);
            }
            let (plan, tolerance) = out?;
            Some(Experiment::Truncation {
                plan,
                particles: particles?,
                levels: levels?,
                tolerance,
            })
        }
        "picard" => {
            let shared = parse_shared(root, errs);
            let mut p = root.table("picard", true, errs)?;
            let particles = p.req_usize("particles", errs);
            let horizon = p.req_f64("horizon", errs);
            let steps = p.req_usize("steps", errs);
            let max_iters = p.usize_or("max_iters", 20, errs);
            let tol = p.f64_or("tol", 1e-9, errs);
            let beta = p.f64_or("beta", 1.0, errs);
            let floor_factor = p.f64_or("floor_factor", 2.0, errs);
            let common_noise = p.opt_bool("common_noise", false, errs);
            let representation = match p.opt_str("representation", errs) {
                None | Some("auto") => FlowRepresentation::Auto,
                Some("empirical") => FlowRepresentation::Empirical,
                Some("mean") => FlowRepresentation::Mean,
                Some(other) => {
                    errs.push(format!("unknown representation `{other}` (auto, empirical, mean)"));
                    FlowRepresentation::Auto
                }
            };
            let placement = parse_placement(&mut p, errs);
            let reapply_factor = p.f64_or("reapply_factor", 3.0, errs);
            p.finish(errs);
            let mut solver = PicardConfig::new(particles?, seed?);
            solver.max_iters = max_iters;
            solver.tol = tol;
            solver.beta = beta;
            solver.floor_factor = floor_factor;
            solver.common_noise = common_noise;
            solver.representation = representation;
            solver.placement = placement;
            if let Err(e) = solver.validate() {
                errs.push(format!("picard: {e}"));
            }
            let (horizon, steps) = (horizon?, steps?);
            if let Err(e) = crate::levy_noise::TimeGrid::uniform(horizon, steps) {
                errs.push(format!("picard: {e}"));
            }
            Some(Experiment::Picard {
                coefficients: shared.coefficients?,
                model: shared.model?,
                initial: shared.initial?,
                horizon,
                steps,
                solver,
                reapply_factor,
            })
        }
        "nonuniqueness" => {
            let mut s = root.table("nonuniqueness", true, errs)?;
            let beta = s.req_f64("beta", errs);
            let horizon = s.f64_or("horizon", 1.0, errs);
            let steps = s.usize_or("steps", 1000, errs);
            let endpoint_tolerance = s.f64_or("endpoint_tolerance", 1e-3, errs);
            s.finish(errs);
            if let Some(b) = beta {
                if !(b > 0.0 && b < 1.0) {
                    errs.push("beta out of (0,1)".to_string());
                }
            }
            if !(horizon > 0.0) || steps == 0 {
                errs.push("nonuniqueness needs horizon > 0 and steps ≥ 1".to_string());
            }
            Some(Experiment::Nonuniqueness {
                beta: beta?,
                horizon,
                steps,
                endpoint_tolerance,
            })
        }
        "noise-validate" => {
            let model = root.table("model", true, errs).and_then(|s| parse_model(s, errs));
            let mut s = root.table("noise", false, errs);
            let (horizon, paths, level) = match &mut s {
                Some(s) => (s.f64_or("horizon", 1.0, errs), s.usize_or("paths", 10_000, errs), s.f64_or("level", 0.01, errs)),
                None => (1.0, 10_000, 0.01),
            };
            if let Some(s) = s {
                s.finish(errs);
            }
            if !(level > 0.0 && level < 1.0) {
                errs.push("`noise.level` out of (0,1)".to_string());
            }
            Some(Experiment::NoiseValidate {
                model: model?,
                horizon,
                paths,
                level,
            })
        }
        "moment" => {
            let mut s = root.table("moment", true, errs)?;
            let alpha = s.req_f64("alpha", errs);
            let n_grid = s.f64_list("n_grid", true, errs);
            let horizon = s.f64_or("horizon", 1.0, errs);
            let base_step = s.f64_or("base_step", 0.02, errs);
            let power = s.opt_f64("power", errs);
            let samples = s.req_usize("samples", errs);
            let min_r_squared = s.f64_or("min_r_squared", 0.9, errs);
            s.finish(errs);
            if let Some(a) = alpha {
                if !(a > 0.0 && a < 2.0) {
                    errs.push("alpha out of (0,2)".to_string());
                } else if a <= 1.0 {
                    errs.push("alpha must exceed 1".to_string());
                }
            }
            let alpha = alpha?;
            Some(Experiment::Moment {
                alpha,
                n_grid: n_grid?,
                horizon,
                base_step,
                power: power.unwrap_or(alpha),
                samples: samples?,
                min_r_squared,
            })
        }
        other => {
            errs.push(format!(
                "unknown experiment kind `{other}` (poc, truncation, picard, nonuniqueness, noise-validate, moment)"
            ));
            None
        }
    }
}

/// Parse and validate configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigErrors(vec![format!("malformed TOML: {e}")]))?;
    let mut errs = Vec::new();
    let mut root = Section::new("", &table);
    let kind = root.req_str("kind", &mut errs);
    let seed = root.req_u64("seed", &mut errs);
    let label = root.opt_str("label", &mut errs).map(str::to_string);
    let threads = root.usize_or("threads", 0, &mut errs);
    let output = root.opt_str("output", &mut errs).map(PathBuf::from);
    let preset = match root.opt_str("preset", &mut errs) {
        None => Preset::Quick,
        Some(p) => Preset::parse(p).unwrap_or_else(|| {
            errs.push(format!("unknown preset `{p}` (quick, full)"));
            Preset::Quick
        }),
    };
    let label = label.unwrap_or_else(|| kind.unwrap_or("experiment").to_string());
    let experiment = kind.and_then(|k| parse_experiment(k, &mut root, &label, seed, &mut errs));
    root.finish(&mut errs);
    match (experiment, seed) {
        (Some(experiment), Some(seed)) if errs.is_empty() => Ok(RunConfig {
            label,
            seed,
            threads,
            output,
            preset,
            experiment,
        }),
        _ => {
            if errs.is_empty() {
                errs.push("configuration is incomplete".to_string());
            }
            Err(ConfigErrors(errs))
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const POC: &str = r#"
kind = "poc"
seed = 7

[model]
kind = "stable"
alpha = 1.5

[coefficients]
kind = "stable-ou"
a = [0.0]
a_prime = [0.5]

[initial]
law = "gaussian"
mean = [1.0]
sd = 0.5

[plan]
n_grid = [64, 128, 256, 512]
replications = 50
horizon = 1.0
steps = 20
"#;

    #[test]
    fn minimal_poc_fills_defaults() {
        let cfg = parse_config_str(POC).unwrap();
        let Experiment::Poc { plan, tolerance } = &cfg.experiment else {
            panic!("wrong kind")
        };
        assert_eq!(*tolerance, 0.15);
        assert_eq!(plan.law, RateLaw::Thm3);
        assert_eq!(plan.rate_index, 1.5);
        assert_eq!(plan.reference_factor, 16);
        assert_eq!(plan.placement, JumpPlacement::Snapped);
        assert_eq!(cfg.preset, Preset::Quick);
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["experiment"]["plan"]["observation_nodes"], 10);
    }

    #[test]
    fn alpha_out_of_range() {
        let text = POC.replace("alpha = 1.5", "alpha = 2.5");
        let errs = parse_config_str(&text).unwrap_err();
        assert!(errs.0.iter().any(|e| e.contains("alpha out of (0,2)")), "{errs}");
    }

    #[test]
    fn missing_seed_is_named() {
        let text = POC.replace("seed = 7", "");
        let errs = parse_config_str(&text).unwrap_err();
        assert!(errs.0.iter().any(|e| e == "missing key `seed`"), "{errs}");
    }

    #[test]
    fn all_errors_are_reported() {
        let text = POC
            .replace("seed = 7", "")
            .replace("steps = 20", "stpes = 20")
            .replace("sd = 0.5", "sd = \"wide\"");
        let errs = parse_config_str(&text).unwrap_err();
        let joined = errs.to_string();
        assert!(joined.contains("missing key `seed`"), "{joined}");
        assert!(joined.contains("unknown key `plan.stpes`"), "{joined}");
        assert!(joined.contains("missing key `plan.steps`"), "{joined}");
        assert!(joined.contains("`initial.sd` must be a number"), "{joined}");
    }

    #[test]
    fn unknown_section_rejected() {
        let text = format!("{POC}\n[moment]\nalpha = 1.5\n");
        let errs = parse_config_str(&text).unwrap_err();
        assert!(errs.0.iter().any(|e| e.contains("unknown key `moment`")), "{errs}");
    }

    #[test]
    fn nonuniqueness_config() {
        let cfg = parse_config_str("kind = \"nonuniqueness\"\nseed = 1\n[nonuniqueness]\nbeta = 0.5\n").unwrap();
        assert_eq!(cfg.kind(), "nonuniqueness");
        assert!(matches!(cfg.experiment, Experiment::Nonuniqueness { steps: 1000, .. }));
    }

    #[test]
    fn full_preset_scales_sizes() {
        let cfg = parse_config_str(POC).unwrap().with_preset(Preset::Full);
        let Experiment::Poc { plan, .. } = &cfg.experiment else {
            panic!()
        };
        assert_eq!(plan.replications, 200);
    }
}
