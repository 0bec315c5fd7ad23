//! Mirrored Stein kernel
//! `k(y, y') = s^T s' k_phi + s^T grad_{y'} k_phi + grad_y k_phi^T s' + tr(grad_y grad_{y'} k_phi)`
//! with `k_phi(y, y') = k(x, x')`, and its gradient in the second argument.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::rows_to_array;
use crate::error::Result;
use crate::geometry::DualJet;
use crate::kernels::{radial_profile, KernelConfig, KernelFamily};
use crate::targets::MirroredTarget;

/// Everything the Stein kernel needs at one dual point.
#[derive(Debug, Clone)]
pub struct SteinPoint {
    pub jet: DualJet,
    pub score: Vec<f64>,
    /// `[a][c] = d score_a / d y_c`.
    pub score_jac: Array2<f64>,
}

pub fn stein_points(ys: ArrayView2<f64>, mt: &MirroredTarget) -> Result<Vec<SteinPoint>> {
    let jets = mt.jets(ys)?;
    jets.into_par_iter()
        .map(|jet| {
            let (score, score_jac) = mt.dual_score_and_jacobian(&jet)?;
            Ok(SteinPoint { jet, score, score_jac })
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn mat_t_vec(m: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols()).map(|c| (0..m.nrows()).map(|a| m[[a, c]] * v[a]).sum()).collect()
}

/// Stein kernel value at `(p, q)` and its gradient in the dual coordinates
/// of `q`.
pub fn stein_pair(family: KernelFamily, h: f64, p: &SteinPoint, q: &SteinPoint) -> (f64, Vec<f64>) {
    let (x, xp) = (p.jet.x(), q.jet.x());
    let d = x.len();
    let u: Vec<f64> = x.iter().zip(xp).map(|(a, b)| a - b).collect();
    let [k, k1, k2, k3] = radial_profile(family, h, dot(&u, &u));
    let g: Vec<f64> = u.iter().map(|v| 2.0 * k1 * v).collect();
    // grad_x grad_x' k = alpha I + beta u u^T and the rho-derivatives of both.
    let (alpha, beta) = (-2.0 * k1, -4.0 * k2);
    let (dalpha, dbeta) = (-2.0 * k2, -4.0 * k3);

    let (jm, jpm) = (p.jet.jac(), q.jet.jac());
    let (s, sp) = (&p.score, &q.score);
    let jg = p.jet.jac_apply(&g);
    let jpg = q.jet.jac_apply(&g);
    let ju = p.jet.jac_apply(&u);
    let jpu = q.jet.jac_apply(&u);
    let tr_jjp: f64 = jm.iter().zip(jpm.iter()).map(|(a, b)| a * b).sum();
    let ss = dot(s, sp);

    let value = k * ss - dot(s, &jpg) + dot(&jg, sp) + alpha * tr_jjp + beta * dot(&ju, &jpu);

    let kmul = |v: &[f64]| -> Vec<f64> {
        let uv = dot(&u, v);
        v.iter().zip(&u).map(|(a, b)| alpha * a + beta * b * uv).collect()
    };
    let dsp_t_s = mat_t_vec(&q.score_jac, s);
    let dsp_t_jg = mat_t_vec(&q.score_jac, &jg);
    let jpkjps = q.jet.jac_apply(&kmul(&q.jet.jac_apply(s)));
    let jpkjsp = q.jet.jac_apply(&kmul(&p.jet.jac_apply(sp)));
    let contract = q.jet.dj_contract(s, &g);

    let jp_ju = q.jet.jac_apply(&ju);
    let j_jpu = p.jet.jac_apply(&jpu);
    let upu = dot(&jpu, &ju);
    let z: Vec<f64> = (0..d)
        .map(|f| -2.0 * u[f] * (dalpha * tr_jjp + dbeta * upu) - beta * (j_jpu[f] + jp_ju[f]))
        .collect();
    let jpz = q.jet.jac_apply(&z);
    let mut jk = jm * alpha;
    for a in 0..d {
        for b in 0..d {
            jk[[a, b]] += beta * ju[a] * u[b];
        }
    }
    let trace = q.jet.dj_trace(&jk);

    let grad = (0..d)
        .map(|c| {
            -ss * jpg[c] + k * dsp_t_s[c] - contract[c] - jpkjps[c] + jpkjsp[c] + dsp_t_jg[c] + jpz[c] + trace[c]
        })
        .collect();
    (value, grad)
}

pub fn stein_kernel_eval(mt: &MirroredTarget, cfg: &KernelConfig, h: f64, y: &[f64], yp: &[f64]) -> Result<f64> {
    let pts = stein_points(
        ArrayView2::from_shape((2, y.len()), &[y, yp].concat()).map_err(|e| crate::Error::Shape(e.to_string()))?,
        mt,
    )?;
    Ok(stein_pair(cfg.family, h, &pts[0], &pts[1]).0)
}

/// Mirrored KSD descent direction, negated so it can be added:
/// row `i` is `-(1/N^2) sum_j grad_2 k(y_j, y_i)`.
pub fn mksdd_direction(ys: ArrayView2<f64>, mt: &MirroredTarget, family: KernelFamily, h: f64) -> Result<Array2<f64>> {
    let pts = stein_points(ys, mt)?;
    Ok(mksdd_from_points(&pts, family, h))
}

pub(crate) fn mksdd_from_points(pts: &[SteinPoint], family: KernelFamily, h: f64) -> Array2<f64> {
    let n = pts.len();
    let d = pts.first().map_or(0, |p| p.score.len());
    let scale = 1.0 / (n * n) as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; d];
            for p in pts {
                let (_, g) = stein_pair(family, h, p, &pts[i]);
                acc.iter_mut().zip(&g).for_each(|(a, b)| *a -= scale * b);
            }
            acc
        })
        .collect();
    rows_to_array(rows, d)
}

/// `(1/N^2) sum_ij k(y_i, y_j)`.
pub fn ksd_vstat_points(pts: &[SteinPoint], family: KernelFamily, h: f64) -> f64 {
    let n = pts.len();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| pts.iter().map(|q| stein_pair(family, h, &pts[i], q).0).sum())
        .collect();
    rows.iter().sum::<f64>() / (n * n) as f64
}
