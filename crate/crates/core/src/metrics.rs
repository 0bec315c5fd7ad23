//! Sample-quality metrics and the metric hooks used by the run loops.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::KernelConfig;
use crate::samplers::{ksd_vstat_points, stein_points, MetricHook, Snapshot};
use crate::targets::MirroredTarget;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub metadata: BTreeMap<String, String>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

fn rows(a: ArrayView2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// `(1/(nm)) sum_ij |a_i - b_j|`, reduced in row order.
fn mean_cross(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let partial: Vec<f64> = a
        .par_iter()
        .map(|ai| b.iter().map(|bj| dist(ai, bj)).sum())
        .collect();
    partial.iter().sum::<f64>() / (a.len() * b.len()) as f64
}

/// V-statistic energy distance
/// `2 E|A - B| - E|A - A'| - E|B - B'|`.
pub fn energy_distance(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    check_pair(a, b)?;
    let (ra, rb) = (rows(a), rows(b));
    Ok(2.0 * mean_cross(&ra, &rb) - mean_cross(&ra, &ra) - mean_cross(&rb, &rb))
}

fn check_pair(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<()> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(Error::Shape("energy distance needs non-empty clouds".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Shape(format!(
            "dimension mismatch: {} vs {} columns",
            a.ncols(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Squared mirrored KSD estimate `(1/N^2) sum_ij k(y_i, y_j)`.
pub fn ksd_vstat(ys: ArrayView2<f64>, mt: &MirroredTarget, kernel: &KernelConfig, h: f64) -> Result<f64> {
    let pts = stein_points(ys, mt)?;
    Ok(ksd_vstat_points(&pts, kernel.family, h))
}

/// Per-coordinate sample mean and unbiased variance.
pub fn summary_moments(a: ArrayView2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
    let n = a.nrows();
    if n < 2 {
        return Err(Error::Shape("moments need at least two rows".into()));
    }
    let mean = a.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let var = a.var_axis(ndarray::Axis(0), 1.0);
    Ok((mean, var))
}

/// Energy distance of the primal cloud to a fixed reference sample; the
/// reference self-term is computed once.
pub struct EnergyDistanceHook {
    reference: Vec<Vec<f64>>,
    self_term: f64,
}

impl EnergyDistanceHook {
    pub const NAME: &'static str = "energy_distance";

    pub fn new(reference: &Array2<f64>) -> Result<Self> {
        if reference.nrows() == 0 {
            return Err(Error::Shape("empty reference sample".into()));
        }
        let reference = rows(reference.view());
        let self_term = mean_cross(&reference, &reference);
        Ok(Self { reference, self_term })
    }

    pub fn distance(&self, a: ArrayView2<f64>) -> Result<f64> {
        if a.nrows() == 0 || a.ncols() != self.reference[0].len() {
            return Err(Error::Shape("cloud does not match the reference dimension".into()));
        }
        let ra = rows(a);
        Ok(2.0 * mean_cross(&ra, &self.reference) - mean_cross(&ra, &ra) - self.self_term)
    }
}

impl MetricHook for EnergyDistanceHook {
    fn name(&self) -> String {
        Self::NAME.into()
    }

    fn evaluate(&self, snap: &Snapshot) -> Result<f64> {
        self.distance(snap.primal)
    }
}

/// Squared mirrored KSD of the dual cloud; the bandwidth is resolved on the
/// cloud at every evaluation unless fixed.
pub struct KsdHook {
    pub target: MirroredTarget,
    pub kernel: KernelConfig,
}

impl KsdHook {
    pub const NAME: &'static str = "ksd";
}

impl MetricHook for KsdHook {
    fn name(&self) -> String {
        Self::NAME.into()
    }

    fn evaluate(&self, snap: &Snapshot) -> Result<f64> {
        let ys = snap
            .dual
            .ok_or_else(|| Error::Unsupported("ksd needs a dual cloud".into()))?;
        let h = self.kernel.resolve(ys)?;
        ksd_vstat(ys, &self.target, &self.kernel, h)
    }
}

/// Sample mean of one primal coordinate.
pub struct MeanHook {
    pub coordinate: usize,
}

impl MetricHook for MeanHook {
    fn name(&self) -> String {
        format!("mean_x{}", self.coordinate + 1)
    }

    fn evaluate(&self, snap: &Snapshot) -> Result<f64> {
        let col = snap.primal.column(self.coordinate);
        Ok(col.sum() / col.len() as f64)
    }
}
