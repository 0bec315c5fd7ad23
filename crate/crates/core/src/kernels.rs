//! Base kernels, bandwidth selection and the mirrored kernel
//! `k_phi(y, y') = k(grad phi*(y), grad phi*(y'))`.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DualJet, MirrorMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `(1 + r^2 / h^2)^{-1/2}`
    Imq,
    /// `exp(-r^2 / h^2)`
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    MedianHeuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub bandwidth: Bandwidth,
}

impl KernelConfig {
    pub fn new(family: KernelFamily, bandwidth: Bandwidth) -> Result<Self> {
        if let Bandwidth::Fixed(h) = bandwidth {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::config("kernel.bandwidth", format!("fixed bandwidth must be positive, got {h}")));
            }
        }
        Ok(Self { family, bandwidth })
    }

    /// Bandwidth for the given cloud: the fixed value, or the median
    /// heuristic evaluated on `points`.
    pub fn resolve(&self, points: ArrayView2<f64>) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Fixed(h) => Ok(h),
            Bandwidth::MedianHeuristic => median_bandwidth(points),
        }
    }
}

/// Radial profile `k = kappa(rho)` with `rho = |x - x'|^2`, and its first
/// three derivatives in `rho`.
pub fn radial_profile(family: KernelFamily, h: f64, rho: f64) -> [f64; 4] {
    let h2 = h * h;
    match family {
        KernelFamily::Imq => {
            let q = 1.0 + rho / h2;
            let k = q.powf(-0.5);
            let k1 = -0.5 / h2 * k / q;
            let k2 = 0.75 / (h2 * h2) * k / (q * q);
            let k3 = -1.875 / (h2 * h2 * h2) * k / (q * q * q);
            [k, k1, k2, k3]
        }
        KernelFamily::Rbf => {
            let k = (-rho / h2).exp();
            let a = -1.0 / h2;
            [k, a * k, a * a * k, a * a * a * k]
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Kernel value and gradient in the first argument.
pub fn base_eval_grad(family: KernelFamily, h: f64, x: &[f64], xp: &[f64]) -> (f64, Vec<f64>) {
    let [k, k1, _, _] = radial_profile(family, h, sq_dist(x, xp));
    let grad = x.iter().zip(xp).map(|(a, b)| 2.0 * k1 * (a - b)).collect();
    (k, grad)
}

/// Median heuristic `h = sqrt(med^2 / log N)`, where `med` is the median of
/// the `N(N-1)/2` pairwise Euclidean distances between rows.
pub fn median_bandwidth(points: ArrayView2<f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::Shape("median heuristic needs at least two points".into()));
    }
    let rows: Vec<Vec<f64>> = points.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sq_dist(&rows[i], &rows[j]).sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let med = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if !(med > 0.0) {
        return Err(Error::DegenerateCloud);
    }
    Ok((med * med / (n as f64).ln()).sqrt())
}

/// Value of the mirrored kernel and its gradients in both dual arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct MirroredEval {
    pub value: f64,
    pub grad_y: Vec<f64>,
    pub grad_yp: Vec<f64>,
}

/// Mirrored kernel between two precomputed jets. `grad_y = J(y) grad_x k`.
pub fn mirrored_eval_jets(family: KernelFamily, h: f64, a: &DualJet, b: &DualJet) -> MirroredEval {
    let (value, gx) = base_eval_grad(family, h, a.x(), b.x());
    let neg: Vec<f64> = gx.iter().map(|v| -v).collect();
    MirroredEval {
        value,
        grad_y: a.jac_apply(&gx),
        grad_yp: b.jac_apply(&neg),
    }
}

pub fn mirrored_eval_grad(
    cfg: &KernelConfig,
    h: f64,
    map: &MirrorMap,
    y: &[f64],
    yp: &[f64],
) -> Result<MirroredEval> {
    let a = map.jet(y)?;
    let b = map.jet(yp)?;
    Ok(mirrored_eval_jets(cfg.family, h, &a, &b))
}

/// Gram matrix of the mirrored kernel on a dual cloud.
pub fn mirrored_gram(cfg: &KernelConfig, h: f64, map: &MirrorMap, ys: ArrayView2<f64>) -> Result<Array2<f64>> {
    let jets = ys
        .rows()
        .into_iter()
        .map(|r| map.jet(r.as_slice().expect("contiguous row")))
        .collect::<Result<Vec<_>>>()?;
    let n = jets.len();
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let (v, _) = base_eval_grad(cfg.family, h, jets[i].x(), jets[j].x());
            g[[i, j]] = v;
        }
    }
    Ok(g)
}
