//! Tiny dense helpers for the d × d matrices that appear in coefficient sets.

/// `y = M x` for row-major `M` (d × d).
pub fn mat_vec(m: &[f64], x: &[f64], y: &mut [f64]) {
    let d = x.len();
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = m[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

/// `y += M x`.
pub fn mat_vec_add(m: &[f64], x: &[f64], y: &mut [f64]) {
    let d = x.len();
    for (i, yi) in y.iter_mut().enumerate() {
        *yi += m[i * d..(i + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

pub fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut c = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                c[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    c
}

pub fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

pub fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(m: &[f64], d: usize) -> Vec<f64> {
    let norm = frobenius(m);
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.5 {
        s += 1;
    }
    let scale = 2f64.powi(-s);
    let a: Vec<f64> = m.iter().map(|x| x * scale).collect();
    let mut result = identity(d);
    let mut term = identity(d);
    for k in 1..=20 {
        term = mat_mul(&term, &a, d);
        term.iter_mut().for_each(|x| *x /= k as f64);
        result.iter_mut().zip(&term).for_each(|(r, t)| *r += t);
    }
    for _ in 0..s {
        result = mat_mul(&result, &result, d);
    }
    result
}

/// Classical fourth-order Runge-Kutta on a fixed grid for `y' = f(t, y)`.
pub fn rk4(f: impl Fn(f64, &[f64]) -> Vec<f64>, y0: &[f64], nodes: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![y0.to_vec()];
    let axpy = |y: &[f64], k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    for w in nodes.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let y = out.last().unwrap();
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, &axpy(y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(y, &k3, h));
        let next = (0..y.len())
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        out.push(next);
    }
    out
}
