use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated spectral kernel of the Langevin generator of a 1-D standard
/// Gaussian, `k(x, y) = sum_{i=1..K} h_i(x) h_i(y) / i` with orthonormal
/// Hermite functions `h_i = He_i / sqrt(i!)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermiteKernel {
    terms: usize,
}

impl Default for HermiteKernel {
    fn default() -> Self {
        Self { terms: 30 }
    }
}

impl HermiteKernel {
    pub fn new(terms: usize) -> Result<Self> {
        if terms == 0 {
            return Err(Error::config("spectral.terms", "need at least one term"));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// `h_0(x), ..., h_K(x)`.
    fn basis(&self, x: f64) -> Vec<f64> {
        let mut h = Vec::with_capacity(self.terms + 1);
        h.push(1.0);
        h.push(x);
        for i in 1..self.terms {
            let next = (x * h[i] - (i as f64).sqrt() * h[i - 1]) / ((i + 1) as f64).sqrt();
            h.push(next);
        }
        h.truncate(self.terms + 1);
        h
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (hx, hy) = (self.basis(x), self.basis(y));
        (1..=self.terms).map(|i| hx[i] * hy[i] / i as f64).sum()
    }

    /// `d k(x, y) / dx`, using `h_i' = sqrt(i) h_{i-1}`.
    pub fn grad_first(&self, x: f64, y: f64) -> f64 {
        let (hx, hy) = (self.basis(x), self.basis(y));
        (1..=self.terms).map(|i| hx[i - 1] * hy[i] / (i as f64).sqrt()).sum()
    }
}

/// Mirrored LAWGD direction, negated so it can be added:
/// row `i` is `-(1/N) sum_j d_1 k(y_i, y_j)`.
pub fn mlawgd_direction(ys: ArrayView2<f64>, kernel: &HermiteKernel) -> Result<Array2<f64>> {
    if ys.ncols() != 1 {
        return Err(Error::Shape(format!(
            "the Hermite spectral kernel is one-dimensional, got {} columns",
            ys.ncols()
        )));
    }
    let pts: Vec<f64> = ys.column(0).to_vec();
    let n = pts.len() as f64;
    let out: Vec<f64> = pts
        .par_iter()
        .map(|&yi| -pts.iter().map(|&yj| kernel.grad_first(yi, yj)).sum::<f64>() / n)
        .collect();
    Ok(Array2::from_shape_vec((pts.len(), 1), out).expect("one column"))
}
