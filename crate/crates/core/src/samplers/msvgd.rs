use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::rows_to_array;
use crate::error::Result;
use crate::geometry::DualJet;
use crate::kernels::{base_eval_grad, mirrored_eval_jets, KernelFamily};
use crate::targets::{ConstrainedTarget, MirroredTarget};

/// Mirrored SVGD update direction, already negated so it can be added:
/// row `i` is `(1/N) sum_j [k(y_j, y_i) s(y_j) + grad_{y_j} k(y_j, y_i)]`.
pub fn msvgd_direction(
    ys: ArrayView2<f64>,
    mt: &MirroredTarget,
    family: KernelFamily,
    h: f64,
) -> Result<Array2<f64>> {
    let jets = mt.jets(ys)?;
    let scores = jets
        .par_iter()
        .map(|j| mt.dual_score_jet(j))
        .collect::<Result<Vec<_>>>()?;
    Ok(msvgd_from_parts(&jets, &scores, family, h))
}

pub(crate) fn msvgd_from_parts(jets: &[DualJet], scores: &[Vec<f64>], family: KernelFamily, h: f64) -> Array2<f64> {
    let n = jets.len();
    let d = scores.first().map_or(0, Vec::len);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; d];
            for j in 0..n {
                let ev = mirrored_eval_jets(family, h, &jets[j], &jets[i]);
                for c in 0..d {
                    acc[c] += ev.value * scores[j][c] + ev.grad_y[c];
                }
            }
            acc.iter_mut().for_each(|v| *v /= n as f64);
            acc
        })
        .collect();
    rows_to_array(rows, d)
}

/// Plain SVGD direction in the primal space, used by the projected
/// baselines.
pub fn svgd_direction(
    xs: ArrayView2<f64>,
    target: &ConstrainedTarget,
    family: KernelFamily,
    h: f64,
) -> Result<Array2<f64>> {
    let n = xs.nrows();
    let d = xs.ncols();
    let pts: Vec<Vec<f64>> = xs.rows().into_iter().map(|r| r.to_vec()).collect();
    let scores = pts
        .par_iter()
        .map(|x| target.primal_score(x))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; d];
            for j in 0..n {
                let (k, g) = base_eval_grad(family, h, &pts[j], &pts[i]);
                for c in 0..d {
                    acc[c] += k * scores[j][c] + g[c];
                }
            }
            acc.iter_mut().for_each(|v| *v /= n as f64);
            acc
        })
        .collect();
    Ok(rows_to_array(rows, d))
}
