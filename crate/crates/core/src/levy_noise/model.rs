use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{param, Result};

/// Radius separating the small-jump ball from the big-jump region.
pub const INNER_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub jump: Vec<f64>,
    pub rate: f64,
}

/// Piecewise-linear radial density `g` on `[radii[0], radii[last]]`, zero
/// outside. The Lévy measure is `g(|z|) d|z|` times the uniform law on the
/// unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    density: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != density.len() {
            return param("radial profile needs at least two (radius, density) pairs");
        }
        if radii[0] <= 0.0 || radii.iter().any(|r| !r.is_finite()) {
            return param("radial profile radii must be finite and positive");
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return param("radial profile radii must be strictly increasing");
        }
        if density.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return param("radial profile density must be finite and non-negative");
        }
        Ok(Self { radii, density })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    // ∫_{lo}^{hi} r^p g(r) dr over one linear segment, with lo, hi inside it.
    fn segment_moment(&self, seg: usize, p: f64, lo: f64, hi: f64) -> f64 {
        let (r0, r1) = (self.radii[seg], self.radii[seg + 1]);
        let (g0, g1) = (self.density[seg], self.density[seg + 1]);
        let s = (g1 - g0) / (r1 - r0);
        // g(r) = (g0 - s r0) + s r
        let c = g0 - s * r0;
        let prim = |r: f64| c * r.powf(p + 1.0) / (p + 1.0) + s * r.powf(p + 2.0) / (p + 2.0);
        prim(hi) - prim(lo)
    }

    fn moment(&self, p: f64, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for seg in 0..self.radii.len() - 1 {
            let lo = self.radii[seg].max(a);
            let hi = self.radii[seg + 1].min(b);
            if hi > lo {
                total += self.segment_moment(seg, p, lo, hi);
            }
        }
        total
    }

    // Inverse of the radial CDF restricted to [a, b).
    fn sample_radius<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R) -> f64 {
        let total = self.moment(0.0, a, b);
        let mut target = rng.random::<f64>() * total;
        for seg in 0..self.radii.len() - 1 {
            let lo = self.radii[seg].max(a);
            let hi = self.radii[seg + 1].min(b);
            if hi <= lo {
                continue;
            }
            let m = self.segment_moment(seg, 0.0, lo, hi);
            if target > m && seg + 2 < self.radii.len() {
                target -= m;
                continue;
            }
            let (r0, r1) = (self.radii[seg], self.radii[seg + 1]);
            let (g0, g1) = (self.density[seg], self.density[seg + 1]);
            let s = (g1 - g0) / (r1 - r0);
            let glo = g0 + s * (lo - r0);
            // solve glo x + s x^2 / 2 = target for x in [0, hi - lo]
            let x = if s.abs() < 1e-14 * glo.max(1e-300) {
                target / glo
            } else {
                let disc = (glo * glo + 2.0 * s * target).max(0.0);
                2.0 * target / (glo + disc.sqrt())
            };
            return (lo + x).clamp(lo, hi);
        }
        b.min(*self.radii.last().unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LevyKind {
    IsotropicStable { alpha: f64 },
    CompoundPoisson { atoms: Vec<Atom> },
    RadialDensity { profile: RadialProfile },
}

/// Lévy measure of a pure-jump driving noise in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    kind: LevyKind,
    dim: usize,
    beta: f64,
}

/// Value of `∫_{|z|≥1} |z|^β dν`, which may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMoment {
    Finite(f64),
    Infinite,
}

impl BetaMoment {
    pub fn is_finite(&self) -> bool {
        matches!(self, BetaMoment::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match self {
            BetaMoment::Finite(v) => *v,
            BetaMoment::Infinite => f64::INFINITY,
        }
    }
}

/// Surface area of the unit sphere in `R^d`; equals 2 for d = 1.
pub fn sphere_area(dim: usize) -> f64 {
    let h = dim as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// Constant `c_{d,α}` of the density `c |z|^{-d-α}` whose process has
/// characteristic exponent `|u|^α`.
pub fn stable_density_constant(alpha: f64, dim: usize) -> f64 {
    let d = dim as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((d + alpha) / 2.0)
        / (std::f64::consts::PI.powf(d / 2.0) * gamma(1.0 - alpha / 2.0))
}

impl LevyModel {
    pub fn isotropic_stable(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return param(format!("alpha out of (0,2): {alpha}"));
        }
        let beta = if alpha > 1.0 { 1.0 } else { alpha / 2.0 };
        Self::build(LevyKind::IsotropicStable { alpha }, dim, beta)
    }

    pub fn compound_poisson(atoms: Vec<Atom>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return param("compound Poisson model needs at least one atom");
        };
        let dim = first.jump.len();
        for a in &atoms {
            if a.jump.len() != dim {
                return param("compound Poisson atoms must share one dimension");
            }
            if a.jump.iter().any(|x| !x.is_finite()) || norm(&a.jump) == 0.0 {
                return param("compound Poisson atoms must be finite and nonzero");
            }
            if !(a.rate >= 0.0 && a.rate.is_finite()) {
                return param("compound Poisson rates must be finite and non-negative");
            }
        }
        Self::build(LevyKind::CompoundPoisson { atoms }, dim, 2.0)
    }

    pub fn radial(profile: RadialProfile, dim: usize) -> Result<Self> {
        Self::build(LevyKind::RadialDensity { profile }, dim, 2.0)
    }

    fn build(kind: LevyKind, dim: usize, beta: f64) -> Result<Self> {
        if dim == 0 {
            return param("dimension must be positive");
        }
        Ok(Self { kind, dim, beta })
    }

    /// Declare the moment index. Stable models require β < α.
    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 2.0) {
            return param(format!("beta out of (0,2]: {beta}"));
        }
        if let LevyKind::IsotropicStable { alpha } = self.kind {
            if beta >= alpha {
                return param(format!(
                    "beta = {beta} is not below alpha = {alpha}; the big-jump moment diverges"
                ));
            }
        }
        self.beta = beta;
        Ok(self)
    }

    pub fn kind(&self) -> &LevyKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            LevyKind::IsotropicStable { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            LevyKind::CompoundPoisson { atoms } => {
                let m = self.annulus_mean_raw(atoms, 0.0, f64::INFINITY);
                m.iter().all(|x| x.abs() < 1e-12)
            }
            _ => true,
        }
    }

    /// Stable radial constant `K` with `ν(|z| ∈ dr) = K r^{-1-α} dr`.
    fn stable_radial(&self, alpha: f64) -> f64 {
        stable_density_constant(alpha, self.dim) * sphere_area(self.dim)
    }

    /// `ν(a ≤ |z| < b)`; infinite for stable models when `a = 0`.
    pub fn annulus_mass(&self, a: f64, b: f64) -> f64 {
        self.annulus_moment(0.0, a, b)
    }

    /// `∫_{a ≤ |z| < b} |z|^p dν`, possibly `+∞`.
    pub fn annulus_moment(&self, p: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match &self.kind {
            LevyKind::IsotropicStable { alpha } => {
                let k = self.stable_radial(*alpha);
                let e = p - alpha;
                if e == 0.0 {
                    return if b.is_infinite() || a == 0.0 {
                        f64::INFINITY
                    } else {
                        k * (b / a).ln()
                    };
                }
                let upper = if b.is_infinite() {
                    if e > 0.0 {
                        return f64::INFINITY;
                    }
                    0.0
                } else {
                    b.powf(e)
                };
                let lower = if a == 0.0 {
                    if e < 0.0 {
                        return f64::INFINITY;
                    }
                    0.0
                } else {
                    a.powf(e)
                };
                k * (upper - lower) / e
            }
            LevyKind::CompoundPoisson { atoms } => atoms
                .iter()
                .filter(|at| {
                    let r = norm(&at.jump);
                    r >= a && r < b
                })
                .map(|at| at.rate * norm(&at.jump).powf(p))
                .sum(),
            LevyKind::RadialDensity { profile } => profile.moment(p, a, b),
        }
    }

    fn annulus_mean_raw(&self, atoms: &[Atom], a: f64, b: f64) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for at in atoms {
            let r = norm(&at.jump);
            if r >= a && r < b {
                for (mi, zi) in m.iter_mut().zip(&at.jump) {
                    *mi += at.rate * zi;
                }
            }
        }
        m
    }

    /// `∫_{a ≤ |z| < b} z dν`; zero for the isotropic kinds.
    pub fn annulus_mean(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.kind {
            LevyKind::CompoundPoisson { atoms } => self.annulus_mean_raw(atoms, a, b),
            _ => vec![0.0; self.dim],
        }
    }

    /// Draw one jump from `ν` restricted to `a ≤ |z| < b` and normalized.
    /// The annulus must carry positive finite mass.
    pub fn sample_in_annulus<R: Rng + ?Sized>(&self, a: f64, b: f64, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            LevyKind::IsotropicStable { alpha } => {
                let lo = a.powf(-alpha);
                let hi = if b.is_infinite() { 0.0 } else { b.powf(-alpha) };
                let u: f64 = rng.random();
                let r = (lo - u * (lo - hi)).powf(-1.0 / alpha);
                random_direction(rng, out);
                out.iter_mut().for_each(|x| *x *= r);
            }
            LevyKind::RadialDensity { profile } => {
                let r = profile.sample_radius(a, b, rng);
                random_direction(rng, out);
                out.iter_mut().for_each(|x| *x *= r);
            }
            LevyKind::CompoundPoisson { atoms } => {
                let inside: Vec<&Atom> = atoms
                    .iter()
                    .filter(|at| {
                        let r = norm(&at.jump);
                        r >= a && r < b && at.rate > 0.0
                    })
                    .collect();
                let idx = if inside.len() == 1 {
                    0
                } else {
                    WeightedIndex::new(inside.iter().map(|at| at.rate))
                        .expect("annulus carries positive mass")
                        .sample(rng)
                };
                out.copy_from_slice(&inside[idx].jump);
            }
        }
    }

    /// Inner cutoff below which small jumps are replaced by a Gaussian with
    /// matching covariance. Zero means every small jump is simulated.
    pub fn small_jump_cutoff(&self, base_step: f64) -> f64 {
        match self.kind {
            LevyKind::IsotropicStable { alpha } => base_step.powf(1.0 / alpha).min(INNER_RADIUS),
            _ => 0.0,
        }
    }
}

/// `∫_{|z|≥1} |z|^β dν`.
pub fn beta_moment(model: &LevyModel, beta: f64) -> Result<BetaMoment> {
    if !(beta > 0.0) {
        return param(format!("beta must be positive: {beta}"));
    }
    let v = model.annulus_moment(beta, INNER_RADIUS, f64::INFINITY);
    Ok(if v.is_finite() {
        BetaMoment::Finite(v)
    } else {
        BetaMoment::Infinite
    })
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Uniform point on the unit sphere.
pub(crate) fn random_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n = norm(out);
        if n > 1e-12 {
            out.iter_mut().for_each(|x| *x /= n);
            return;
        }
    }
}
