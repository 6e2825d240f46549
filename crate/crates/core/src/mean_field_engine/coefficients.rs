use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::linalg::{frobenius, identity, mat_vec, mat_vec_add};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureDependence {
    General,
    MeanOnly,
    None,
}

/// Drift and diffusion of a McKean-Vlasov equation.
///
/// Coefficients see the measure only through a summary vector computed once
/// per step by [`CoefficientSet::summarize`]; mean-only sets use the mean
/// itself as the summary, so a mean-only flow is enough to freeze them.
pub trait CoefficientSet: Send + Sync {
    fn dim(&self) -> usize;
    fn dependence(&self) -> MeasureDependence;
    /// Declared constant in `|b(x,μ)-b(y,ν)| + |σ(x,μ)-σ(y,ν)| ≤ C(|x-y| + W_β(μ,ν))`.
    fn lipschitz_constant(&self) -> f64;
    /// Declared constant in `|b| + |σ| ≤ C(1 + |x| + M_β(μ))`.
    fn growth_constant(&self) -> f64;

    /// Summary of the flat support `points` (N × d, uniform weights).
    fn summarize(&self, points: &[f64]) -> Vec<f64> {
        match self.dependence() {
            MeasureDependence::None => Vec::new(),
            _ => mean_of(points, self.dim()),
        }
    }

    /// Summary from a mean alone; `None` when the set needs more than the mean.
    fn summary_from_mean(&self, mean: &[f64]) -> Option<Vec<f64>> {
        match self.dependence() {
            MeasureDependence::General => None,
            MeasureDependence::MeanOnly => Some(mean.to_vec()),
            MeasureDependence::None => Some(Vec::new()),
        }
    }

    fn drift(&self, t: f64, x: &[f64], summary: &[f64], out: &mut [f64]);

    /// Row-major d × d matrix.
    fn diffusion(&self, t: f64, x: &[f64], summary: &[f64], out: &mut [f64]);

    /// The diffusion matrix when it depends on nothing.
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        None
    }

    /// True when the drift is affine in `x` (so `E b(X, m) = b(E X, m)`) and
    /// the diffusion is constant. Such sets admit an exact mean recursion.
    fn mean_closes(&self) -> bool {
        false
    }
}

pub(crate) fn mean_of(points: &[f64], dim: usize) -> Vec<f64> {
    let n = (points.len() / dim) as f64;
    let mut m = vec![0.0; dim];
    for p in points.chunks(dim) {
        m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    m.iter_mut().for_each(|a| *a /= n);
    m
}

fn check_square(name: &str, m: &[f64], d: usize) -> Result<()> {
    if m.len() != d * d || m.iter().any(|x| !x.is_finite()) {
        return param(format!("{name} must be a finite {d}×{d} matrix"));
    }
    Ok(())
}

/// `b(x, μ) = A x + A' ∫ y dμ(y)`, `σ = B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableOuCoefficients {
    dim: usize,
    a: Vec<f64>,
    a_prime: Vec<f64>,
    b: Vec<f64>,
}

impl StableOuCoefficients {
    pub fn new(dim: usize, a: Vec<f64>, a_prime: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return param("dimension must be positive");
        }
        check_square("A", &a, dim)?;
        check_square("A'", &a_prime, dim)?;
        check_square("B", &b, dim)?;
        Ok(Self { dim, a, a_prime, b })
    }

    /// Scalar matrices `a I`, `a' I`, `B = I`.
    pub fn scalar(dim: usize, a: f64, a_prime: f64) -> Self {
        let id = identity(dim);
        Self {
            dim,
            a: id.iter().map(|x| x * a).collect(),
            a_prime: id.iter().map(|x| x * a_prime).collect(),
            b: id,
        }
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_prime(&self) -> &[f64] {
        &self.a_prime
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }
}

impl CoefficientSet for StableOuCoefficients {
    fn dim(&self) -> usize {
        self.dim
    }

    fn dependence(&self) -> MeasureDependence {
        if self.a_prime.iter().all(|x| *x == 0.0) {
            MeasureDependence::None
        } else {
            MeasureDependence::MeanOnly
        }
    }

    fn lipschitz_constant(&self) -> f64 {
        frobenius(&self.a) + frobenius(&self.a_prime)
    }

    fn growth_constant(&self) -> f64 {
        frobenius(&self.a).max(frobenius(&self.a_prime)).max(frobenius(&self.b))
    }

    fn drift(&self, _t: f64, x: &[f64], summary: &[f64], out: &mut [f64]) {
        mat_vec(&self.a, x, out);
        if !summary.is_empty() {
            mat_vec_add(&self.a_prime, summary, out);
        }
    }

    fn diffusion(&self, _t: f64, _x: &[f64], _s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
    }

    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        Some(self.b.clone())
    }

    fn mean_closes(&self) -> bool {
        true
    }
}

/// Coordinatewise `b(x, μ) = a x + κ tanh(∫ y dμ)`, `σ = s I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TanhMeanField {
    pub dim: usize,
    pub a: f64,
    pub kappa: f64,
    pub sigma: f64,
}

impl CoefficientSet for TanhMeanField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn dependence(&self) -> MeasureDependence {
        if self.kappa == 0.0 {
            MeasureDependence::None
        } else {
            MeasureDependence::MeanOnly
        }
    }

    fn lipschitz_constant(&self) -> f64 {
        self.a.abs() + self.kappa.abs()
    }

    fn growth_constant(&self) -> f64 {
        self.a.abs() + self.kappa.abs() + self.sigma.abs() * (self.dim as f64).sqrt()
    }

    fn drift(&self, _t: f64, x: &[f64], summary: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let m = summary.get(i).copied().unwrap_or(0.0);
            *o = self.a * x[i] + self.kappa * m.tanh();
        }
    }

    fn diffusion(&self, _t: f64, _x: &[f64], _s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.constant_diffusion().unwrap());
    }

    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        Some(identity(self.dim).into_iter().map(|x| x * self.sigma).collect())
    }

    fn mean_closes(&self) -> bool {
        true
    }
}

/// One-dimensional `b(x, μ) = ∫ |y|^β dμ(y)`, `σ = 0`. For `β < 1` the
/// associated equation has several solutions started from `δ_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerMomentDrift {
    pub beta: f64,
}

impl CoefficientSet for PowerMomentDrift {
    fn dim(&self) -> usize {
        1
    }

    fn dependence(&self) -> MeasureDependence {
        MeasureDependence::General
    }

    fn lipschitz_constant(&self) -> f64 {
        if self.beta >= 1.0 {
            // |∫|y|^β dμ - ∫|y|^β dν| is not controlled by W_β globally
            f64::INFINITY
        } else {
            1.0
        }
    }

    fn growth_constant(&self) -> f64 {
        1.0
    }

    fn summarize(&self, points: &[f64]) -> Vec<f64> {
        vec![points.iter().map(|y| y.abs().powf(self.beta)).sum::<f64>() / points.len() as f64]
    }

    fn drift(&self, _t: f64, _x: &[f64], summary: &[f64], out: &mut [f64]) {
        out[0] = summary[0];
    }

    fn diffusion(&self, _t: f64, _x: &[f64], _s: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }

    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }
}

type DriftFn = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync;
type SummaryFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Coefficients from closures with a constant diffusion matrix.
#[derive(Clone)]
pub struct FnCoefficients {
    pub dim: usize,
    pub dependence: MeasureDependence,
    pub lipschitz: f64,
    pub growth: f64,
    pub diffusion: Vec<f64>,
    pub drift: Arc<DriftFn>,
    /// Overrides the default mean summary.
    pub summary: Option<Arc<SummaryFn>>,
}

impl FnCoefficients {
    pub fn new(
        dim: usize,
        dependence: MeasureDependence,
        diffusion: Vec<f64>,
        drift: impl Fn(f64, &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            dependence,
            lipschitz: f64::NAN,
            growth: f64::NAN,
            diffusion,
            drift: Arc::new(drift),
            summary: None,
        }
    }

    pub fn with_summary(mut self, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.summary = Some(Arc::new(f));
        self
    }

    pub fn with_constants(mut self, lipschitz: f64, growth: f64) -> Self {
        self.lipschitz = lipschitz;
        self.growth = growth;
        self
    }
}

impl std::fmt::Debug for FnCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnCoefficients")
            .field("dim", &self.dim)
            .field("dependence", &self.dependence)
            .finish_non_exhaustive()
    }
}

impl CoefficientSet for FnCoefficients {
    fn dim(&self) -> usize {
        self.dim
    }

    fn dependence(&self) -> MeasureDependence {
        self.dependence
    }

    fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    fn growth_constant(&self) -> f64 {
        self.growth
    }

    fn summarize(&self, points: &[f64]) -> Vec<f64> {
        match (&self.summary, self.dependence) {
            (Some(f), _) => f(points),
            (None, MeasureDependence::None) => Vec::new(),
            (None, _) => mean_of(points, self.dim),
        }
    }

    fn summary_from_mean(&self, mean: &[f64]) -> Option<Vec<f64>> {
        match (&self.summary, self.dependence) {
            (_, MeasureDependence::None) => Some(Vec::new()),
            (None, MeasureDependence::MeanOnly) => Some(mean.to_vec()),
            _ => None,
        }
    }

    fn drift(&self, t: f64, x: &[f64], summary: &[f64], out: &mut [f64]) {
        (self.drift)(t, x, summary, out)
    }

    fn diffusion(&self, _t: f64, _x: &[f64], _s: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.diffusion);
    }

    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        Some(self.diffusion.clone())
    }
}

/// Serializable description of a shipped coefficient set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientSpec {
    /// Row-major `d × d` matrices.
    StableOu { a: Vec<f64>, a_prime: Vec<f64>, b: Vec<f64> },
    TanhMeanField { a: f64, kappa: f64, sigma: f64 },
    PowerMoment { beta: f64 },
}

impl CoefficientSpec {
    pub fn build(&self, dim: usize) -> Result<Box<dyn CoefficientSet>> {
        Ok(match self {
            CoefficientSpec::StableOu { a, a_prime, b } => {
                Box::new(StableOuCoefficients::new(dim, a.clone(), a_prime.clone(), b.clone())?)
            }
            CoefficientSpec::TanhMeanField { a, kappa, sigma } => Box::new(TanhMeanField {
                dim,
                a: *a,
                kappa: *kappa,
                sigma: *sigma,
            }),
            CoefficientSpec::PowerMoment { beta } => {
                if dim != 1 {
                    return param("power-moment drift is one-dimensional");
                }
                if !(*beta > 0.0) {
                    return param("power-moment exponent must be positive");
                }
                Box::new(PowerMomentDrift { beta: *beta })
            }
        })
    }

    /// Scalar stable OU: `a I`, `a' I`, `B = I`.
    pub fn scalar_stable_ou(dim: usize, a: f64, a_prime: f64) -> Self {
        let c = StableOuCoefficients::scalar(dim, a, a_prime);
        CoefficientSpec::StableOu {
            a: c.a,
            a_prime: c.a_prime,
            b: c.b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_ou_drift() {
        let c = StableOuCoefficients::scalar(1, -1.0, 0.5);
        let mut out = [0.0];
        c.drift(0.0, &[2.0], &[4.0], &mut out);
        assert_eq!(out[0], -2.0 + 2.0);
        assert_eq!(c.dependence(), MeasureDependence::MeanOnly);
        assert_eq!(StableOuCoefficients::scalar(1, -1.0, 0.0).dependence(), MeasureDependence::None);
    }

    #[test]
    fn power_moment_summary() {
        let c = PowerMomentDrift { beta: 0.5 };
        assert_eq!(c.summarize(&[4.0, 0.0]), vec![1.0]);
        assert!(c.summary_from_mean(&[1.0]).is_none());
    }
}
