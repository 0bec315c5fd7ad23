//! Independent numerical oracles: finite differences, dense linear algebra
//! and random interior points.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// First `d` coordinates of a symmetric Dirichlet draw on `d + 1` categories.
pub fn simplex_point(d: usize, concentration: f64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    let g = Gamma::new(concentration, 1.0).unwrap();
    loop {
        let draws: Vec<f64> = (0..=d).map(|_| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let x: Vec<f64> = draws[..d].iter().map(|v| v / total).collect();
        let slack = 1.0 - x.iter().sum::<f64>();
        if x.iter().all(|v| *v > 1e-9) && slack > 1e-9 {
            return x;
        }
    }
}

/// Log-normal coordinates with the given log-scale spread.
pub fn orthant_point(d: usize, spread: f64, rng: &mut ChaCha20Rng) -> Vec<f64> {
    (0..d).map(|_| (spread * normal(rng)).exp()).collect()
}

pub fn normal_vec(d: usize, rng: &mut ChaCha20Rng) -> Vec<f64> {
    (0..d).map(|_| normal(rng)).collect()
}

pub fn normal_matrix(n: usize, d: usize, scale: f64, rng: &mut ChaCha20Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| scale * normal(rng))
}

/// Central differences with a per-coordinate step.
pub fn central_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], steps: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut p = x.to_vec();
            let mut m = x.to_vec();
            p[k] += steps[k];
            m[k] -= steps[k];
            (f(&p) - f(&m)) / (2.0 * steps[k])
        })
        .collect()
}

/// Central-difference Jacobian; entry `[a][k]` is `d f_a / d x_k`.
pub fn central_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], steps: &[f64]) -> Array2<f64> {
    let d = x.len();
    let mut cols = Vec::with_capacity(d);
    for k in 0..d {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[k] += steps[k];
        m[k] -= steps[k];
        let (fp, fm) = (f(&p), f(&m));
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * steps[k])).collect::<Vec<_>>());
    }
    let rows = cols[0].len();
    Array2::from_shape_fn((rows, d), |(a, k)| cols[k][a])
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `|a - b|_inf / |b|_inf`, or the plain difference when `b` vanishes.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
    let scale = sup(b);
    if scale == 0.0 {
        sup(&diff)
    } else {
        sup(&diff) / scale
    }
}

/// Worst column-wise relative error between two matrices.
pub fn rel_err_columns(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    (0..b.ncols())
        .map(|k| rel_err(&a.column(k).to_vec(), &b.column(k).to_vec()))
        .fold(0.0, f64::max)
}

pub fn rel_err_matrix(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    rel_err(a.as_slice().unwrap(), b.as_standard_layout().as_slice().unwrap())
}

/// LU factorization with partial pivoting; returns `log |det a|`.
pub fn log_abs_det(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut m = a.clone();
    let mut acc = 0.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[[i, c]].abs().total_cmp(&m[[j, c]].abs())).unwrap();
        if p != c {
            for k in 0..n {
                m.swap([c, k], [p, k]);
            }
        }
        let piv = m[[c, c]];
        acc += piv.abs().ln();
        for r in c + 1..n {
            let f = m[[r, c]] / piv;
            for k in c..n {
                m[[r, k]] -= f * m[[c, k]];
            }
        }
    }
    acc
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &Array2<f64>, b: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[[i, c]].abs().total_cmp(&m[[j, c]].abs())).unwrap();
        if p != c {
            for k in 0..n {
                m.swap([c, k], [p, k]);
            }
            v.swap(c, p);
        }
        for r in c + 1..n {
            let f = m[[r, c]] / m[[c, c]];
            for k in c..n {
                m[[r, k]] -= f * m[[c, k]];
            }
            v[r] -= f * v[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[[r, k]] * x[k]).sum();
        x[r] = (v[r] - s) / m[[r, r]];
    }
    x
}

/// Whether the Cholesky factorization of the symmetrized matrix succeeds.
pub fn is_positive_definite(a: &Array2<f64>) -> bool {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let aij = 0.5 * (a[[i, j]] + a[[j, i]]);
            let s: f64 = (0..j).map(|k| l[[i, k]] * l[[j, k]]).sum();
            if i == j {
                let v = aij - s;
                if !(v > 0.0) {
                    return false;
                }
                l[[i, i]] = v.sqrt();
            } else {
                l[[i, j]] = (aij - s) / l[[j, j]];
            }
        }
    }
    true
}

/// Composite Simpson rule on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
