//! Exact W_β between empirical measures: assignment versus brute force on a
//! tiny instance, and the sorted coupling on a large one-dimensional cloud.

use levy_mckean::measure_metrics::{convention_label, w1_sorted, w_beta, EmpiricalMeasure, DEFAULT_EXACT_CAP};

fn brute_force(a: &EmpiricalMeasure, b: &EmpiricalMeasure, beta: f64) -> f64 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
    let n = a.len();
    let best = perms(n)
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| {
                    let d: f64 = a.point(i).iter().zip(b.point(p[i])).map(|(x, y)| (x - y).powi(2)).sum();
                    d.sqrt().powf(beta)
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    (best / n as f64).powf(1.0 / beta.max(1.0))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = EmpiricalMeasure::new(2, vec![0.0, 0.0, 1.0, 2.0, 3.0, 1.0, -1.0, 4.0, 2.0, 2.0])?;
    let b = EmpiricalMeasure::new(2, vec![1.0, 1.0, 0.0, 3.0, 2.0, 0.0, 5.0, 5.0, -2.0, 1.0])?;
    for beta in [0.5, 1.0, 2.0] {
        let exact = w_beta(&a, &b, beta, DEFAULT_EXACT_CAP)?;
        println!(
            "beta = {beta}: assignment {exact:.12}, brute force {:.12}   [{}]",
            brute_force(&a, &b, beta),
            convention_label(beta)
        );
    }

    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x + 0.25).collect();
    println!("\nW_1(U[0,1], U[0.25,1.25]) on {n} points: {:.6}", w1_sorted(&xs, &ys));
    Ok(())
}
