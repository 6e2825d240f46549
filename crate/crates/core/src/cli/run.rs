use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Experiment, RunConfig};
use crate::chaos_lab::{
    nonuniqueness_demo, nonzero_branch_endpoint, report, run_poc_experiment, run_truncation_study,
    truncated_moment_curve, with_threads, RateReport,
};
use crate::error::{Error, Result};
use crate::levy_noise::{validate::validate_noise, TimeGrid};
use crate::picard_solver::{reapply_check, solve_fixed_point};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "LEVY_MCKEAN_OUT";

/// `git describe` of the source tree at build time.
pub const BUILD_ID: &str = env!("LEVY_MCKEAN_BUILD_ID");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExitStatus {
    Success,
    Failure,
    Validation,
    BlowUps,
    Acceptance,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::Validation => 2,
            ExitStatus::BlowUps => 3,
            ExitStatus::Acceptance => 4,
        }
    }

    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::Parameter(_)
            | Error::Dimension { .. }
            | Error::GridMismatch(_)
            | Error::UncoveredCase(_)
            | Error::SupportTooLarge { .. } => ExitStatus::Validation,
            Error::TooManyBlowUps { .. } | Error::BlowUp { .. } => ExitStatus::BlowUps,
            Error::NotConverged(_) => ExitStatus::Acceptance,
            _ => ExitStatus::Failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub status: ExitStatus,
    pub output_dir: PathBuf,
    pub checks: Vec<Check>,
    pub files: Vec<ArtifactEntry>,
    pub error: Option<String>,
}

/// `--out`, then the environment override, then the config, then `results/<label>`.
pub fn resolve_output_dir(flag: Option<&Path>, config: &RunConfig) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config
        .output
        .clone()
        .unwrap_or_else(|| Path::new("results").join(&config.label))
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<ArtifactEntry>,
}

impl Artifacts {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(ArtifactEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn json(&mut self, name: &str, v: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

fn rate_artifacts(out: &mut Artifacts, r: &RateReport) -> Result<()> {
    let mut csv = Vec::new();
    report::write_rate_csv(r, &mut csv)?;
    out.write("rate.csv", &csv)?;
    out.json("rate.json", &report::rate_json(r))?;
    out.write("rate.svg", report::rate_svg(r).as_bytes())
}

fn rate_checks(r: &RateReport, tolerance: f64) -> Vec<Check> {
    let slope = if r.zero_error {
        check("exponent", true, "zero error at every abscissa, fit skipped".into())
    } else {
        let fitted = r.fitted_exponent().unwrap_or(f64::NAN);
        check(
            "exponent",
            r.within(tolerance),
            format!(
                "fitted {fitted:.4} vs theoretical {:.4} (tolerance {tolerance})",
                r.theoretical_exponent
            ),
        )
    };
    vec![
        slope,
        check(
            "coupling-bound",
            r.coupling_violations == 0,
            format!("{} violations in {} checks", r.coupling_violations, r.coupling_checks),
        ),
        check("monotone-decay", r.monotone_decay(), "E1 non-increasing within 2 se".into()),
        check(
            "decomposition",
            r.decomposition_holds(),
            "E2 <= E1 + copies term + 2 se".into(),
        ),
    ]
}

fn execute(config: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    match &config.experiment {
        Experiment::Poc { plan, tolerance } => {
            let r = run_poc_experiment(plan)?;
            rate_artifacts(out, &r)?;
            Ok(rate_checks(&r, *tolerance))
        }
        Experiment::Truncation {
            plan,
            particles,
            levels,
            tolerance,
        } => {
            let r = run_truncation_study(plan, *particles, levels)?;
            rate_artifacts(out, &r)?;
            let mut checks = rate_checks(&r, *tolerance);
            checks.truncate(2);
            Ok(checks)
        }
        Experiment::Picard {
            coefficients,
            model,
            initial,
            horizon,
            steps,
            solver,
            reapply_factor,
        } => {
            let coeffs = coefficients.build(model.dim())?;
            let grid = TimeGrid::uniform(*horizon, *steps)?;
            let (flow, rep) = solve_fixed_point(coeffs.as_ref(), model, initial, &grid, solver)?;
            let fp = reapply_check(&flow, &rep, coeffs.as_ref(), model, initial, solver)?;
            let mut csv = csv::Writer::from_writer(Vec::new());
            csv.write_record(["iteration", "delta", "ratio", "noise_floor"])?;
            let ratios = rep.ratios();
            for (k, d) in rep.distances.iter().enumerate() {
                let ratio = if k > 0 { format!("{:?}", ratios[k - 1]) } else { String::new() };
                csv.write_record([
                    (k + 1).to_string(),
                    format!("{d:?}"),
                    ratio,
                    format!("{:?}", rep.noise_floors[k]),
                ])?;
            }
            let bytes = csv.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            out.write("contraction.csv", &bytes)?;
            let mut json = rep.to_json();
            json["reapply"] = serde_json::to_value(fp)?;
            out.json("contraction.json", &json)?;
            out.write(
                "contraction.svg",
                report::contraction_svg(&rep.distances, &rep.noise_floors).as_bytes(),
            )?;
            Ok(vec![
                check(
                    "contraction",
                    rep.is_contractive(),
                    format!("ratios above floor {:?}", rep.ratios_above_floor()),
                ),
                check(
                    "fixed-point",
                    fp.within(*reapply_factor),
                    format!(
                        "re-application shift {:.3e} vs {reapply_factor} x floor {:.3e}",
                        fp.shift, fp.noise_floor
                    ),
                ),
            ])
        }
        Experiment::Nonuniqueness {
            beta,
            horizon,
            steps,
            endpoint_tolerance,
        } => {
            let grid = TimeGrid::uniform(*horizon, *steps)?;
            let demo = nonuniqueness_demo(*beta, &grid)?;
            let mut csv = Vec::new();
            report::write_nonuniqueness_csv(&demo, &mut csv)?;
            out.write("trajectories.csv", &csv)?;
            let endpoint = *demo.nonzero_branch.last().unwrap_or(&f64::NAN);
            let exact = nonzero_branch_endpoint(*beta, *horizon);
            out.json(
                "residuals.json",
                &serde_json::json!({
                    "beta": beta,
                    "residual_zero": demo.residual_zero,
                    "residual_nonzero": demo.residual_nonzero,
                    "tolerance": demo.tolerance,
                    "nonzero_endpoint": endpoint,
                    "closed_form_endpoint": exact,
                }),
            )?;
            out.write("trajectories.svg", report::nonuniqueness_svg(&demo).as_bytes())?;
            Ok(vec![
                check(
                    "residuals",
                    demo.residuals_within_tolerance(),
                    format!(
                        "zero {:.2e}, nonzero {:.2e}, tolerance {:.2e}",
                        demo.residual_zero, demo.residual_nonzero, demo.tolerance
                    ),
                ),
                check(
                    "endpoint",
                    (endpoint - exact).abs() <= *endpoint_tolerance,
                    format!("{endpoint:.6} vs closed form {exact:.6}"),
                ),
            ])
        }
        Experiment::NoiseValidate {
            model,
            horizon,
            paths,
            level,
        } => {
            let v = validate_noise(model, *horizon, *paths, *level, config.seed)?;
            let mut csv = csv::Writer::from_writer(Vec::new());
            csv.write_record(["check", "statistic", "p_value", "z_score", "passed"])?;
            let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
            for c in &v.checks {
                csv.write_record([
                    c.name.clone(),
                    format!("{:?}", c.statistic),
                    opt(c.p_value),
                    opt(c.z_score),
                    c.passed.to_string(),
                ])?;
            }
            let bytes = csv.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            out.write("validation.csv", &bytes)?;
            out.json("validation.json", &serde_json::to_value(&v)?)?;
            Ok(v
                .checks
                .iter()
                .map(|c| check(&c.name, c.passed, format!("statistic {:.4}", c.statistic)))
                .collect())
        }
        Experiment::Moment {
            alpha,
            n_grid,
            horizon,
            base_step,
            power,
            samples,
            min_r_squared,
        } => {
            let c = truncated_moment_curve(*alpha, n_grid, *horizon, *base_step, *power, *samples, config.seed)?;
            let mut csv = Vec::new();
            report::write_moment_csv(&c, &mut csv)?;
            out.write("moment.csv", &csv)?;
            let mut json = serde_json::to_value(&c)?;
            json["log_ratios"] = c.log_ratios().into();
            json["ratio_non_increasing"] = c.ratio_non_increasing().into();
            out.json("moment.json", &json)?;
            out.write("moment.svg", report::moment_svg(&c).as_bytes())?;
            let fit = c.fit;
            Ok(vec![
                check(
                    "log-growth",
                    fit.is_some_and(|f| f.slope > 0.0 && f.r_squared >= *min_r_squared),
                    format!(
                        "slope {:.4}, R^2 {:.4} (min {min_r_squared})",
                        fit.map_or(f64::NAN, |f| f.slope),
                        fit.map_or(f64::NAN, |f| f.r_squared)
                    ),
                ),
                check("ratio-trend", c.ratio_non_increasing(), format!("{:?}", c.log_ratios())),
            ])
        }
    }
}

/// Run one configured experiment, write its artifacts and manifest into
/// `out_dir` and report the exit status.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut out = Artifacts {
        dir: out_dir.to_path_buf(),
        files: Vec::new(),
    };
    let result = with_threads(config.threads, || execute(config, &mut out));
    let elapsed = start.elapsed().as_secs_f64();
    let (status, checks, error) = match result {
        Ok(checks) => {
            let status = if checks.iter().all(|c| c.passed) {
                ExitStatus::Success
            } else {
                ExitStatus::Acceptance
            };
            (status, checks, None)
        }
        Err(e) => (ExitStatus::for_error(&e), Vec::new(), Some(e.to_string())),
    };
    let manifest = serde_json::json!({
        "label": config.label,
        "kind": config.kind(),
        "build": BUILD_ID,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "elapsed_seconds": elapsed,
        "status": status,
        "exit_code": status.code(),
        "error": error,
        "checks": checks,
        "config": config,
        "files": out.files,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(out_dir.join("manifest.json"), text)?;
    Ok(RunOutcome {
        status,
        output_dir: out_dir.to_path_buf(),
        checks,
        files: out.files,
        error,
    })
}
