//! Empirical measures, exact Wasserstein distances and the moment functional
//! `M_β`.

mod assignment;
pub mod rate;

use serde::{Deserialize, Serialize};

pub use assignment::{solve_assignment, sorted_sum};

use crate::error::{param, Error, Result};
use crate::levy_noise::TimeGrid;

/// Default cap on support size for the exact assignment solver.
pub const DEFAULT_EXACT_CAP: usize = 512;

/// Uniform atomic measure `(1/N) Σ δ_{x_i}` on `R^d`, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    dim: usize,
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return param("empirical measure needs at least one point of positive dimension");
        }
        if points.iter().any(|x| !x.is_finite()) {
            return param("empirical measure support must be finite");
        }
        Ok(Self { dim, points })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim];
        for p in self.points.chunks(self.dim) {
            m.iter_mut().zip(p).for_each(|(a, b)| *a += b);
        }
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// `(1/N) Σ |x_i|^p`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        self.points
            .chunks(self.dim)
            .map(|x| dist(x, &vec![0.0; x.len()]).powf(p))
            .sum::<f64>()
            / self.len() as f64
    }

    fn sorted_scalars(&self) -> Vec<f64> {
        let mut xs = self.points.clone();
        xs.sort_by(f64::total_cmp);
        xs
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Outer exponent shared by `W_β` and `M_β`: `1/β ∧ 1`.
pub fn outer_exponent(beta: f64) -> f64 {
    (1.0 / beta).min(1.0)
}

/// Label for the distance convention in force at `beta`.
pub fn convention_label(beta: f64) -> &'static str {
    if beta >= 1.0 {
        "W_beta = (inf E|X-Y|^beta)^(1/beta)"
    } else {
        "W_beta = inf E|X-Y|^beta (no outer root)"
    }
}

/// `M_β(μ) = (∫ |x|^β dμ)^{1/β ∧ 1}`.
pub fn moment_m_beta(mu: &EmpiricalMeasure, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return param(format!("beta must be positive: {beta}"));
    }
    Ok(mu.abs_moment(beta).powf(outer_exponent(beta)))
}

/// Exact `W_1` on the line. Equal sizes use the sorted coupling; unequal
/// sizes integrate the difference of quantile functions.
pub fn w1_exact_1d(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<f64> {
    if mu.dim != 1 || nu.dim != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: mu.dim.max(nu.dim),
        });
    }
    let xs = mu.sorted_scalars();
    let ys = nu.sorted_scalars();
    Ok(w1_sorted(&xs, &ys))
}

/// `W_1` between two sorted samples.
pub fn w1_sorted(xs: &[f64], ys: &[f64]) -> f64 {
    let (n, m) = (xs.len(), ys.len());
    if n == m {
        return xs.iter().zip(ys).map(|(x, y)| (x - y).abs()).sum::<f64>() / n as f64;
    }
    // walk the merged quantile breakpoints i/n and j/m in units of 1/(nm)
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0usize;
    let mut total = 0.0;
    let scale = (n * m) as f64;
    while i < n && j < m {
        let a = (i + 1) * m;
        let b = (j + 1) * n;
        let next = a.min(b);
        total += (next - u) as f64 / scale * (xs[i] - ys[j]).abs();
        u = next;
        if a == next {
            i += 1;
        }
        if b == next {
            j += 1;
        }
    }
    total
}

fn check_pair(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 2.0) {
        return param(format!("beta out of (0,2]: {beta}"));
    }
    if mu.dim != nu.dim {
        return Err(Error::Dimension {
            expected: mu.dim,
            got: nu.dim,
        });
    }
    if mu.len() != nu.len() {
        return param(format!("support sizes differ: {} vs {}", mu.len(), nu.len()));
    }
    Ok(())
}

/// Exact `W_β` between equal-size empirical measures via optimal assignment
/// on the cost matrix `|x_i - y_j|^β`.
pub fn w_beta_exact_matching(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, beta: f64) -> Result<f64> {
    w_beta_exact_matching_capped(mu, nu, beta, DEFAULT_EXACT_CAP)
}

pub fn w_beta_exact_matching_capped(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, beta: f64, cap: usize) -> Result<f64> {
    check_pair(mu, nu, beta)?;
    let n = mu.len();
    if n > cap {
        return Err(Error::SupportTooLarge { n, cap });
    }
    let cost: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| dist(mu.point(i), nu.point(j)).powf(beta))
        .collect();
    let col = solve_assignment(n, &cost);
    let total = sorted_sum(col.iter().enumerate().map(|(i, &j)| cost[i * n + j]).collect());
    Ok((total / n as f64).powf(outer_exponent(beta)))
}

/// `W_β` choosing the cheapest exact method: sorted coupling on the line for
/// `β ≥ 1`, assignment otherwise.
pub fn w_beta(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, beta: f64, cap: usize) -> Result<f64> {
    check_pair(mu, nu, beta)?;
    if mu.dim == 1 && beta >= 1.0 {
        let xs = mu.sorted_scalars();
        let ys = nu.sorted_scalars();
        if beta == 1.0 {
            return Ok(w1_sorted(&xs, &ys));
        }
        let costs: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - y).abs().powf(beta)).collect();
        return Ok((sorted_sum(costs) / xs.len() as f64).powf(1.0 / beta));
    }
    w_beta_exact_matching_capped(mu, nu, beta, cap)
}

/// Per-node marginals of a measure flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FlowData {
    Empirical(Vec<EmpiricalMeasure>),
    Mean(Vec<Vec<f64>>),
}

/// Time-indexed family of measures on a grid, piecewise constant and
/// right-continuous between nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFlow {
    grid: TimeGrid,
    data: FlowData,
}

impl MeasureFlow {
    pub fn new(grid: TimeGrid, data: FlowData) -> Result<Self> {
        let n = match &data {
            FlowData::Empirical(v) => v.len(),
            FlowData::Mean(v) => v.len(),
        };
        if n != grid.nodes().len() {
            return Err(Error::GridMismatch(format!(
                "flow has {n} marginals for {} nodes",
                grid.nodes().len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// The same measure at every node.
    pub fn constant(grid: TimeGrid, mu: EmpiricalMeasure) -> Self {
        let k = grid.nodes().len();
        Self {
            grid,
            data: FlowData::Empirical(vec![mu; k]),
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn data(&self) -> &FlowData {
        &self.data
    }

    pub fn is_mean_only(&self) -> bool {
        matches!(self.data, FlowData::Mean(_))
    }

    pub fn len(&self) -> usize {
        self.grid.nodes().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean_at_node(&self, k: usize) -> Vec<f64> {
        match &self.data {
            FlowData::Empirical(v) => v[k].mean(),
            FlowData::Mean(v) => v[k].clone(),
        }
    }

    pub fn measure_at_node(&self, k: usize) -> Option<&EmpiricalMeasure> {
        match &self.data {
            FlowData::Empirical(v) => Some(&v[k]),
            FlowData::Mean(_) => None,
        }
    }

    /// Node index whose marginal is in force at time `t`.
    pub fn node_at(&self, t: f64) -> usize {
        self.grid.locate(t)
    }

    /// Mean-only summary of this flow.
    pub fn to_means(&self) -> MeasureFlow {
        let means = (0..self.len()).map(|k| self.mean_at_node(k)).collect();
        MeasureFlow {
            grid: self.grid.clone(),
            data: FlowData::Mean(means),
        }
    }
}

/// Per-node distances between two flows on the same grid.
pub fn flow_distance_profile(f: &MeasureFlow, g: &MeasureFlow, beta: f64, cap: usize) -> Result<Vec<f64>> {
    if f.grid.nodes() != g.grid.nodes() {
        return Err(Error::GridMismatch("flows live on different grids".into()));
    }
    match (&f.data, &g.data) {
        (FlowData::Empirical(a), FlowData::Empirical(b)) => {
            a.iter().zip(b).map(|(x, y)| w_beta(x, y, beta, cap)).collect()
        }
        (FlowData::Mean(a), FlowData::Mean(b)) => Ok(a.iter().zip(b).map(|(x, y)| dist(x, y)).collect()),
        _ => Err(Error::GridMismatch("flows use different representations".into())),
    }
}

/// `sup_t W_β(f_t, g_t)` over grid nodes (mean-only flows: `sup_t |Δm|`).
pub fn flow_distance(f: &MeasureFlow, g: &MeasureFlow, beta: f64) -> Result<f64> {
    Ok(flow_distance_profile(f, g, beta, DEFAULT_EXACT_CAP)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(xs: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::from_scalars(xs).unwrap()
    }

    #[test]
    fn w1_examples() {
        assert_eq!(w1_exact_1d(&m(&[0.0, 1.0]), &m(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(w1_exact_1d(&m(&[0.0, 1.0]), &m(&[0.0, 2.0])).unwrap(), 0.5);
        let a = m(&[0.3, -1.2, 4.0]);
        let b = m(&[2.3, 0.8, 6.0]);
        assert_abs_diff_eq!(w1_exact_1d(&a, &b).unwrap(), 2.0, epsilon = 1e-12);
        let two = EmpiricalMeasure::new(2, vec![0.0, 0.0]).unwrap();
        assert!(w1_exact_1d(&two, &two).is_err());
    }

    #[test]
    fn w1_unequal_sizes() {
        // uniform on {0,1} vs point mass at 0.5: W1 = 0.5
        assert_abs_diff_eq!(w1_exact_1d(&m(&[0.0, 1.0]), &m(&[0.5])).unwrap(), 0.5, epsilon = 1e-15);
        // {0,1,2} vs {0,2}: quantiles differ on (1/3,1/2) by 1 and on (1/2,2/3) by 1
        assert_abs_diff_eq!(w1_exact_1d(&m(&[0.0, 1.0, 2.0]), &m(&[0.0, 2.0])).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        // replicated support equals the original measure
        assert_abs_diff_eq!(
            w1_exact_1d(&m(&[1.0, 5.0]), &m(&[1.0, 1.0, 5.0, 5.0])).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn matching_examples() {
        let a = m(&[1.0]);
        let b = m(&[4.0]);
        assert_eq!(w_beta_exact_matching(&a, &b, 2.0).unwrap(), 3.0);
        assert_eq!(w_beta_exact_matching(&a, &b, 1.0).unwrap(), 3.0);
        // beta < 1 keeps the cost without root
        assert_abs_diff_eq!(w_beta_exact_matching(&a, &b, 0.5).unwrap(), 3f64.sqrt(), epsilon = 1e-15);
        let big = m(&vec![0.0; 600]);
        assert!(matches!(
            w_beta_exact_matching(&big, &big, 1.0),
            Err(Error::SupportTooLarge { n: 600, cap: 512 })
        ));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment_m_beta(&m(&[0.0]), 1.0).unwrap(), 0.0);
        let p = EmpiricalMeasure::new(2, vec![3.0, 4.0]).unwrap();
        assert_eq!(moment_m_beta(&p, 1.0).unwrap(), 5.0);
        assert_abs_diff_eq!(moment_m_beta(&m(&[1.0, 2.0]), 2.0).unwrap(), 2.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn flow_distance_examples() {
        let g = TimeGrid::uniform(1.0, 1).unwrap();
        let f = MeasureFlow::new(g.clone(), FlowData::Empirical(vec![m(&[0.0]), m(&[0.0])])).unwrap();
        let h = MeasureFlow::new(g.clone(), FlowData::Empirical(vec![m(&[0.2]), m(&[0.7])])).unwrap();
        assert_eq!(flow_distance(&f, &f, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(flow_distance(&f, &h, 1.0).unwrap(), 0.7, epsilon = 1e-15);
        let mf = f.to_means();
        assert!(flow_distance(&f, &mf, 1.0).is_err());
        let other = MeasureFlow::constant(TimeGrid::uniform(2.0, 1).unwrap(), m(&[0.0]));
        assert!(matches!(flow_distance(&f, &other, 1.0), Err(Error::GridMismatch(_))));
    }
}
