//! Selective density of the randomized Lasso, with the inactive subgradient
//! coordinates integrated out analytically.
//!
//! With Gaussian randomization `omega ~ N(0, tau^2 I)` the density of the
//! magnitudes `b = |beta_E|` on the open positive orthant is, up to a constant,
//!
//! ```text
//! log g(b) = -|omega_E(b)|^2 / (2 tau^2)
//!            + sum_{j not in E} log[Phi((lambda - u_j)/tau) - Phi((-lambda - u_j)/tau)]
//! omega_E(b) = ridge * beta_E - X_E^T (y - X_E beta_E) + lambda z_E
//! u_j(b)     = X_j^T (y - X_E beta_E),      beta_E = z_E * b
//! ```

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::normal;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SelectiveLasso {
    design: Array2<f64>,
    response: Array1<f64>,
    lambda: f64,
    ridge: f64,
    tau: f64,
    active: Vec<usize>,
    signs: Vec<f64>,
    inactive: Vec<usize>,
    /// `ridge I + X_E^T X_E`
    gram_e: Array2<f64>,
    /// `-X_E^T y + lambda z_E`
    offset_e: Array1<f64>,
    /// Column `j` holds `X_E^T X_j` for the `j`-th inactive feature.
    cross: Array2<f64>,
    /// `X_j^T y` for the inactive features.
    inactive_xty: Array1<f64>,
}

/// Terms of one inactive coordinate: `f(u)`, `f'(u)`, `f''(u)` where
/// `f(u) = log[Phi((lambda - u)/tau) - Phi((-lambda - u)/tau)]`.
fn interval_terms(u: f64, lambda: f64, tau: f64) -> (f64, f64, f64) {
    let a = (lambda - u) / tau;
    let b = (-lambda - u) / tau;
    let log_mass = normal::log_interval_mass(a, b);
    let ra = (normal::log_pdf(a) - log_mass).exp();
    let rb = (normal::log_pdf(b) - log_mass).exp();
    let d1 = -(ra - rb) / tau;
    let d2 = -((a * ra - b * rb) + (ra - rb) * (ra - rb)) / (tau * tau);
    (log_mass, d1, d2)
}

impl SelectiveLasso {
    pub fn new(
        design: Array2<f64>,
        response: Array1<f64>,
        lambda: f64,
        ridge: f64,
        tau: f64,
        active: Vec<usize>,
        signs: Vec<f64>,
    ) -> Result<Self> {
        let (n, p) = design.dim();
        let mut bad = Vec::new();
        if response.len() != n {
            bad.push(("target.response", format!("length {} does not match {n} design rows", response.len())));
        }
        for (key, v) in [("target.lambda", lambda), ("target.ridge", ridge), ("target.tau", tau)] {
            if !(v.is_finite() && v > 0.0) {
                bad.push((key, format!("must be positive, got {v}")));
            }
        }
        if active.is_empty() {
            bad.push(("target.active", "selected set must be non-empty".to_string()));
        }
        if active.len() != signs.len() {
            bad.push(("target.signs", "one sign per selected feature is required".to_string()));
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            bad.push(("target.signs", "signs must be +1 or -1".to_string()));
        }
        let mut sorted = active.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != active.len() || active.iter().any(|j| *j >= p) {
            bad.push(("target.active", format!("indices must be distinct and below {p}")));
        }
        if !bad.is_empty() {
            return Err(Error::Config(
                bad.into_iter()
                    .map(|(k, r)| crate::error::ConfigViolation::new(k, r))
                    .collect(),
            ));
        }

        let q = active.len();
        let inactive: Vec<usize> = (0..p).filter(|j| !active.contains(j)).collect();
        let col = |j: usize| design.column(j);
        let mut gram_e = Array2::zeros((q, q));
        for a in 0..q {
            for b in 0..q {
                gram_e[[a, b]] = col(active[a]).dot(&col(active[b]));
            }
            gram_e[[a, a]] += ridge;
        }
        let offset_e = Array1::from_iter(
            (0..q).map(|a| -col(active[a]).dot(&response) + lambda * signs[a]),
        );
        let mut cross = Array2::zeros((q, inactive.len()));
        for (jj, &j) in inactive.iter().enumerate() {
            for a in 0..q {
                cross[[a, jj]] = col(active[a]).dot(&col(j));
            }
        }
        let inactive_xty = Array1::from_iter(inactive.iter().map(|&j| col(j).dot(&response)));
        Ok(Self {
            design,
            response,
            lambda,
            ridge,
            tau,
            active,
            signs,
            inactive,
            gram_e,
            offset_e,
            cross,
            inactive_xty,
        })
    }

    /// Synthetic problem: equicorrelated Gaussian design with unit-norm
    /// columns, null response `y ~ N(0, I)`, ridge `var(y) / sqrt(n)`, and a
    /// randomized Lasso fit (coordinate descent) to pick `E` and `z_E`.
    pub fn synthetic<R: Rng>(n: usize, p: usize, rho: f64, lambda: f64, tau: f64, rng: &mut R) -> Result<Self> {
        if n < 2 || p < 1 {
            return Err(Error::config("target", "synthetic Lasso needs n >= 2 and p >= 1"));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::config("target.rho", format!("must lie in [0, 1), got {rho}")));
        }
        let mut design = Array2::<f64>::zeros((n, p));
        for i in 0..n {
            let shared: f64 = rng.sample(StandardNormal);
            for j in 0..p {
                let own: f64 = rng.sample(StandardNormal);
                design[[i, j]] = (1.0 - rho).sqrt() * own + rho.sqrt() * shared;
            }
        }
        for j in 0..p {
            let norm = design.column(j).dot(&design.column(j)).sqrt();
            design.column_mut(j).mapv_inplace(|v| v / norm);
        }
        let response = Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let mean = response.mean().unwrap_or(0.0);
        let var = response.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let ridge = var / (n as f64).sqrt();
        let omega: Vec<f64> = (0..p).map(|_| tau * rng.sample::<f64, _>(StandardNormal)).collect();

        let beta = randomized_lasso(&design, &response, lambda, ridge, &omega);
        let active: Vec<usize> = (0..p).filter(|&j| beta[j] != 0.0).collect();
        if active.is_empty() {
            return Err(Error::config(
                "target.lambda",
                format!("randomized Lasso with lambda = {lambda} selected no features"),
            ));
        }
        let signs = active.iter().map(|&j| beta[j].signum()).collect();
        Self::new(design, response, lambda, ridge, tau, active, signs)
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.design
    }

    pub fn response(&self) -> &Array1<f64> {
        &self.response
    }

    fn beta_e(&self, b: &[f64]) -> Vec<f64> {
        b.iter().zip(&self.signs).map(|(v, s)| v * s).collect()
    }

    fn omega_e(&self, beta: &[f64]) -> Vec<f64> {
        let q = self.dim();
        (0..q)
            .map(|a| self.offset_e[a] + (0..q).map(|c| self.gram_e[[a, c]] * beta[c]).sum::<f64>())
            .collect()
    }

    fn inactive_u(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.inactive.len())
            .map(|jj| {
                self.inactive_xty[jj] - (0..self.dim()).map(|a| self.cross[[a, jj]] * beta[a]).sum::<f64>()
            })
            .collect()
    }

    pub fn log_density(&self, b: &[f64]) -> f64 {
        let beta = self.beta_e(b);
        let omega = self.omega_e(&beta);
        let quad: f64 = omega.iter().map(|v| v * v).sum();
        let tail: f64 = self
            .inactive_u(&beta)
            .into_iter()
            .map(|u| interval_terms(u, self.lambda, self.tau).0)
            .sum();
        -quad / (2.0 * self.tau * self.tau) + tail
    }

    /// Gradient and Hessian of [`SelectiveLasso::log_density`] in `b`.
    pub fn grad_hessian(&self, b: &[f64]) -> (Vec<f64>, Array2<f64>) {
        let q = self.dim();
        let t2 = self.tau * self.tau;
        let beta = self.beta_e(b);
        let omega = self.omega_e(&beta);
        let us = self.inactive_u(&beta);

        // Gradient and Hessian in beta_E, then flip signs into b.
        let mut g = vec![0.0; q];
        let mut h = Array2::zeros((q, q));
        for a in 0..q {
            g[a] = -(0..q).map(|c| self.gram_e[[a, c]] * omega[c]).sum::<f64>() / t2;
            for c in 0..q {
                h[[a, c]] = -(0..q).map(|e| self.gram_e[[a, e]] * self.gram_e[[e, c]]).sum::<f64>() / t2;
            }
        }
        for (jj, u) in us.iter().enumerate() {
            let (_, d1, d2) = interval_terms(*u, self.lambda, self.tau);
            for a in 0..q {
                g[a] -= d1 * self.cross[[a, jj]];
                for c in 0..q {
                    h[[a, c]] += d2 * self.cross[[a, jj]] * self.cross[[c, jj]];
                }
            }
        }
        for a in 0..q {
            g[a] *= self.signs[a];
            for c in 0..q {
                h[[a, c]] *= self.signs[a] * self.signs[c];
            }
        }
        (g, h)
    }
}

/// Coordinate descent for
/// `1/2 |y - X beta|^2 + lambda |beta|_1 - omega^T beta + ridge/2 |beta|^2`.
fn randomized_lasso(x: &Array2<f64>, y: &Array1<f64>, lambda: f64, ridge: f64, omega: &[f64]) -> Vec<f64> {
    let p = x.ncols();
    let mut beta = vec![0.0; p];
    let mut resid = y.clone();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).dot(&x.column(j))).collect();
    for _sweep in 0..10_000 {
        let mut max_change = 0.0_f64;
        for j in 0..p {
            let xj = x.column(j);
            let rho = xj.dot(&resid) + col_sq[j] * beta[j] + omega[j];
            let new = soft_threshold(rho, lambda) / (col_sq[j] + ridge);
            let delta = new - beta[j];
            if delta != 0.0 {
                resid.scaled_add(-delta, &xj);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < 1e-12 {
            break;
        }
    }
    beta
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}
