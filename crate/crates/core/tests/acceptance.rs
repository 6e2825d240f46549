//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Runs the shipped configurations under `configs/` at the quick preset.

use std::path::{Path, PathBuf};
use std::time::Instant;

use levy_mckean::cli::{parse_config, run, Check, RunOutcome};
use levy_mckean::measure_metrics::{dist, sorted_sum, w_beta_exact_matching, EmpiricalMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

struct Run {
    outcome: RunOutcome,
    dir: TempDir,
}

fn run_config(name: &str) -> Result<Run, String> {
    let cfg = parse_config(&config_path(name)).map_err(|e| e.to_string())?;
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let outcome = run(&cfg, dir.path()).map_err(|e| e.to_string())?;
    if let Some(e) = &outcome.error {
        return Err(e.clone());
    }
    Ok(Run { outcome, dir })
}

fn find<'a>(checks: &'a [Check], name: &str) -> Option<&'a Check> {
    checks.iter().find(|c| c.name == name)
}

fn named_check(run: &Result<Run, String>, name: &str) -> (bool, String) {
    match run {
        Ok(r) => match find(&r.outcome.checks, name) {
            Some(c) => (c.passed, c.detail.clone()),
            None => (false, format!("no `{name}` check reported")),
        },
        Err(e) => (false, e.clone()),
    }
}

fn coupling_counts(run: &Result<Run, String>) -> Option<(u64, u64)> {
    let r = run.as_ref().ok()?;
    let text = std::fs::read_to_string(r.dir.path().join("rate.json")).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    Some((v["coupling_checks"].as_u64()?, v["coupling_violations"].as_u64()?))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(a: &EmpiricalMeasure, b: &EmpiricalMeasure, beta: f64) -> f64 {
    let n = a.len();
    let best = permutations(n)
        .iter()
        .map(|p| sorted_sum((0..n).map(|i| dist(a.point(i), b.point(p[i])).powf(beta)).collect()))
        .fold(f64::INFINITY, f64::min);
    (best / n as f64).powf(if beta < 1.0 { 1.0 } else { 1.0 / beta })
}

fn oracle_equivalence() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst_rel, mut bitwise_bad, mut bitwise_total) = (0.0f64, 0, 0);
    for i in 0..200 {
        let beta = [0.5, 1.0, 2.0][i % 3];
        let n = rng.random_range(1..=7);
        let d = rng.random_range(1..=3);
        let integer = beta == 1.0;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n * d)
                .map(|_| if integer { rng.random_range(-5i32..=5) as f64 } else { rng.random_range(-3.0..3.0) })
                .collect()
        };
        let a = EmpiricalMeasure::new(d, draw(&mut rng)).unwrap();
        let b = EmpiricalMeasure::new(d, draw(&mut rng)).unwrap();
        let fast = w_beta_exact_matching(&a, &b, beta).unwrap();
        let slow = brute_force(&a, &b, beta);
        if integer {
            bitwise_total += 1;
            if fast.to_bits() != slow.to_bits() {
                bitwise_bad += 1;
            }
        } else {
            let rel = (fast - slow).abs() / slow.abs().max(f64::MIN_POSITIVE);
            worst_rel = worst_rel.max(if fast == slow { 0.0 } else { rel });
        }
    }
    (
        bitwise_bad == 0 && worst_rel <= 1e-9,
        format!("{bitwise_bad}/{bitwise_total} bitwise mismatches at beta = 1, worst relative error {worst_rel:.2e}"),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, bool, String, f64)> = Vec::new();
    let mut record = |id: u32, name: &'static str, start: Instant, (ok, detail): (bool, String)| {
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {} {name}: {detail} ({secs:.1}s)",
            if ok { "PASS" } else { "FAIL" }
        );
        results.push((id, name, ok, detail, secs));
    };

    let t = Instant::now();
    let stable = run_config("poc_stable_ou.toml");
    record(1, "stable rate exponent", t, named_check(&stable, "exponent"));

    let t = Instant::now();
    let cp = run_config("poc_compound_poisson.toml");
    record(2, "finite-moment rate exponent", t, named_check(&cp, "exponent"));

    let t = Instant::now();
    let trunc = run_config("truncation.toml");
    record(3, "truncation slope", t, named_check(&trunc, "exponent"));

    let t = Instant::now();
    let moment = run_config("moment.toml");
    record(4, "truncated moment log growth", t, named_check(&moment, "log-growth"));

    let t = Instant::now();
    let picard = run_config("picard.toml");
    let (c_ok, c_detail) = named_check(&picard, "contraction");
    let (f_ok, f_detail) = named_check(&picard, "fixed-point");
    record(5, "Picard contraction", t, (c_ok && f_ok, format!("{c_detail}; {f_detail}")));

    let t = Instant::now();
    record(6, "assignment equals brute force", t, oracle_equivalence());

    let t = Instant::now();
    let counts: Vec<(&str, Option<(u64, u64)>)> = vec![
        ("poc_stable_ou", coupling_counts(&stable)),
        ("poc_compound_poisson", coupling_counts(&cp)),
        ("truncation", coupling_counts(&trunc)),
    ];
    let ok = counts.iter().all(|(_, c)| matches!(c, Some((n, 0)) if *n > 0));
    let detail = counts
        .iter()
        .map(|(name, c)| match c {
            Some((n, v)) => format!("{name}: {v}/{n}"),
            None => format!("{name}: missing"),
        })
        .collect::<Vec<_>>()
        .join(", ");
    record(7, "coupling bound violations", t, (ok, detail));

    let t = Instant::now();
    let noise = run_config("noise_validate.toml");
    let res = match &noise {
        Ok(r) => (
            r.outcome.checks.iter().all(|c| c.passed) && r.outcome.checks.len() >= 6,
            r.outcome
                .checks
                .iter()
                .map(|c| format!("{}={}", c.name, if c.passed { "ok" } else { "fail" }))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        Err(e) => (false, e.clone()),
    };
    record(8, "noise validation", t, res);

    let t = Instant::now();
    let nonu = run_config("nonuniqueness.toml");
    let (r_ok, r_detail) = named_check(&nonu, "residuals");
    let (e_ok, e_detail) = named_check(&nonu, "endpoint");
    record(9, "non-uniqueness demo", t, (r_ok && e_ok, format!("{r_detail}; {e_detail}")));

    let t = Instant::now();
    let again = run_config("poc_stable_ou.toml");
    let res = match (&stable, &again) {
        (Ok(a), Ok(b)) => {
            let x = std::fs::read(a.dir.path().join("rate.csv")).unwrap_or_default();
            let y = std::fs::read(b.dir.path().join("rate.csv")).unwrap_or_default();
            (!x.is_empty() && x == y, format!("rate.csv {} bytes, identical: {}", x.len(), x == y))
        }
        _ => (false, "a run failed".to_string()),
    };
    record(10, "byte-identical rerun", t, res);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2).map(|r| r.0).collect();
    println!(
        "{} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
