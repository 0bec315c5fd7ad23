//! Benchmark targets and their mirrored (dual-space) counterparts.
//!
//! Log-densities are unnormalized. Primal entry points validate their input;
//! the dual-space services work from a [`DualJet`] and use the target's
//! *scaled* gradient `z * grad_z log pi(z)` so that coordinates close to the
//! boundary never produce `0 * inf`.

mod lasso;
pub mod normal;

pub use lasso::SelectiveLasso;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Uniform};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DualJet, MirrorMap, INTERIOR_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Simplex { dim: usize },
    Orthant { dim: usize },
    Box { dim: usize, lo: f64, hi: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match *self {
            Domain::Simplex { dim } | Domain::Orthant { dim } | Domain::Box { dim, .. } => dim,
        }
    }

    /// The mirror map matching this domain, if there is one.
    pub fn mirror_map(&self) -> Option<MirrorMap> {
        match *self {
            Domain::Simplex { dim } => Some(MirrorMap::EntropicSimplex { dim }),
            Domain::Orthant { dim } => Some(MirrorMap::PositiveOrthant { dim }),
            Domain::Box { .. } => None,
        }
    }

    /// Strict interior test against [`INTERIOR_FLOOR`].
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match *self {
            Domain::Simplex { .. } => {
                x.iter().all(|v| *v > INTERIOR_FLOOR) && 1.0 - x.iter().sum::<f64>() > INTERIOR_FLOOR
            }
            Domain::Orthant { .. } => x.iter().all(|v| *v > INTERIOR_FLOOR),
            Domain::Box { lo, hi, .. } => x.iter().all(|v| *v > lo && *v < hi),
        }
    }
}

#[derive(Debug, Clone)]
pub enum ConstrainedTarget {
    /// Dirichlet posterior `prod_k x_k^{n_k + alpha_k - 1}` over `d + 1` categories.
    SparseDirichlet { alpha: Vec<f64>, counts: Vec<f64> },
    /// `exp(-x^T A x / (2 sigma^2))` on the simplex.
    QuadraticSimplex { a: Array2<f64>, sigma: f64 },
    UniformBox { dim: usize, lo: f64, hi: f64 },
    SelectiveLasso(Box<SelectiveLasso>),
    /// Product of unit-rate exponentials on the orthant.
    Exponential { dim: usize },
    /// Product of standard log-normals; its dual under the orthant map is a
    /// standard Gaussian.
    LogNormal { dim: usize },
}

impl ConstrainedTarget {
    pub fn sparse_dirichlet(alpha: Vec<f64>, counts: Vec<f64>) -> Result<Self> {
        let mut bad = Vec::new();
        if alpha.len() < 2 {
            bad.push(crate::error::ConfigViolation::new("target.alpha", "need at least two categories"));
        }
        if alpha.len() != counts.len() {
            bad.push(crate::error::ConfigViolation::new(
                "target.counts",
                format!("{} counts for {} categories", counts.len(), alpha.len()),
            ));
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            bad.push(crate::error::ConfigViolation::new("target.alpha", "concentrations must be positive"));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            bad.push(crate::error::ConfigViolation::new("target.counts", "counts must be non-negative"));
        }
        if bad.is_empty() {
            Ok(ConstrainedTarget::SparseDirichlet { alpha, counts })
        } else {
            Err(Error::Config(bad))
        }
    }

    pub fn quadratic_simplex(a: Array2<f64>, sigma: f64) -> Result<Self> {
        let d = a.nrows();
        let mut bad = Vec::new();
        if d == 0 || a.ncols() != d {
            bad.push("matrix must be square and non-empty".to_string());
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            bad.push(format!("sigma must be positive, got {sigma}"));
        }
        if bad.is_empty() {
            for i in 0..d {
                for j in 0..d {
                    if (a[[i, j]] - a[[j, i]]).abs() > 1e-12 {
                        bad.push("matrix must be symmetric".to_string());
                    }
                    if a[[i, j]].abs() > 1.0 + 1e-12 {
                        bad.push("entries must be bounded by 1 in magnitude".to_string());
                    }
                }
            }
            if !is_psd(&a) {
                bad.push("matrix must be positive semi-definite".to_string());
            }
        }
        bad.dedup();
        if bad.is_empty() {
            Ok(ConstrainedTarget::QuadraticSimplex { a, sigma })
        } else {
            Err(Error::Config(
                bad.into_iter()
                    .map(|r| crate::error::ConfigViolation::new("target.matrix", r))
                    .collect(),
            ))
        }
    }

    /// `A = B^T B / max |(B^T B)_ij|` with `B` i.i.d. `Unif[-1, 1]`.
    pub fn random_quadratic<R: Rng>(dim: usize, sigma: f64, rng: &mut R) -> Result<Self> {
        let unif = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let b = Array2::from_shape_fn((dim, dim), |_| unif.sample(rng));
        let mut a = b.t().dot(&b);
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(f64::abs(*v)));
        a.mapv_inplace(|v| v / scale);
        // Exact symmetry after rounding.
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (a[[i, j]] + a[[j, i]]);
                a[[i, j]] = v;
                a[[j, i]] = v;
            }
        }
        Self::quadratic_simplex(a, sigma)
    }

    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if dim == 0 || !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("target", format!("invalid box: dim {dim}, [{lo}, {hi}]")));
        }
        Ok(ConstrainedTarget::UniformBox { dim, lo, hi })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConstrainedTarget::SparseDirichlet { .. } => "sparse_dirichlet",
            ConstrainedTarget::QuadraticSimplex { .. } => "quadratic_simplex",
            ConstrainedTarget::UniformBox { .. } => "uniform_box",
            ConstrainedTarget::SelectiveLasso(_) => "selective_lasso",
            ConstrainedTarget::Exponential { .. } => "exponential",
            ConstrainedTarget::LogNormal { .. } => "log_normal",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ConstrainedTarget::SparseDirichlet { alpha, .. } => Domain::Simplex { dim: alpha.len() - 1 },
            ConstrainedTarget::QuadraticSimplex { a, .. } => Domain::Simplex { dim: a.nrows() },
            ConstrainedTarget::UniformBox { dim, lo, hi } => Domain::Box { dim: *dim, lo: *lo, hi: *hi },
            ConstrainedTarget::SelectiveLasso(l) => Domain::Orthant { dim: l.dim() },
            ConstrainedTarget::Exponential { dim } | ConstrainedTarget::LogNormal { dim } => {
                Domain::Orthant { dim: *dim }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if self.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!("{x:?} is not strictly inside the {} domain", self.name())))
        }
    }

    /// Unnormalized `log pi(x)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            ConstrainedTarget::SparseDirichlet { alpha, counts } => {
                let slack = 1.0 - x.iter().sum::<f64>();
                x.iter()
                    .chain(std::iter::once(&slack))
                    .zip(alpha.iter().zip(counts))
                    .map(|(xk, (a, n))| (n + a - 1.0) * xk.ln())
                    .sum()
            }
            ConstrainedTarget::QuadraticSimplex { a, sigma } => -quad_form(a, x) / (2.0 * sigma * sigma),
            ConstrainedTarget::UniformBox { .. } => 0.0,
            ConstrainedTarget::SelectiveLasso(l) => l.log_density(x),
            ConstrainedTarget::Exponential { .. } => -x.iter().sum::<f64>(),
            ConstrainedTarget::LogNormal { .. } => x
                .iter()
                .map(|v| {
                    let l = v.ln();
                    -0.5 * l * l - l
                })
                .sum(),
        })
    }

    /// `grad log pi(x)` in the free coordinates.
    pub fn primal_score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match self {
            ConstrainedTarget::SparseDirichlet { alpha, counts } => {
                let d = x.len();
                let slack = 1.0 - x.iter().sum::<f64>();
                let last = (counts[d] + alpha[d] - 1.0) / slack;
                (0..d).map(|i| (counts[i] + alpha[i] - 1.0) / x[i] - last).collect()
            }
            ConstrainedTarget::QuadraticSimplex { a, sigma } => {
                let s2 = sigma * sigma;
                mat_vec(a, x).into_iter().map(|v| -v / s2).collect()
            }
            ConstrainedTarget::UniformBox { dim, .. } => vec![0.0; *dim],
            ConstrainedTarget::SelectiveLasso(l) => l.grad_hessian(x).0,
            ConstrainedTarget::Exponential { dim } => vec![-1.0; *dim],
            ConstrainedTarget::LogNormal { .. } => x.iter().map(|v| -(v.ln() + 1.0) / v).collect(),
        })
    }

    /// Scaled gradient `w_k = z_k d log pi / d z_k` and its scaled Jacobian
    /// `q_km = z_m d w_k / d z_m`.
    ///
    /// On the simplex `z` holds all `d + 1` barycentric coordinates and `log pi`
    /// is read as a function of them; on the orthant `z = x`.
    pub fn scaled_grad_jacobian(&self, z: &[f64]) -> Result<(Vec<f64>, Array2<f64>)> {
        let n = z.len();
        let mut q = Array2::zeros((n, n));
        let w = match self {
            ConstrainedTarget::SparseDirichlet { alpha, counts } => {
                alpha.iter().zip(counts).map(|(a, c)| a + c - 1.0).collect()
            }
            ConstrainedTarget::QuadraticSimplex { a, sigma } => {
                let d = a.nrows();
                let s2 = sigma * sigma;
                let az = mat_vec(a, &z[..d]);
                let mut w = vec![0.0; d + 1];
                for k in 0..d {
                    w[k] = -z[k] * az[k] / s2;
                    for m in 0..d {
                        q[[k, m]] = -z[m] * z[k] * a[[k, m]] / s2;
                    }
                    q[[k, k]] -= z[k] * az[k] / s2;
                }
                w
            }
            ConstrainedTarget::SelectiveLasso(l) => {
                let (g, h) = l.grad_hessian(z);
                for i in 0..n {
                    for c in 0..n {
                        q[[i, c]] = z[c] * z[i] * h[[i, c]];
                    }
                    q[[i, i]] += z[i] * g[i];
                }
                z.iter().zip(&g).map(|(a, b)| a * b).collect()
            }
            ConstrainedTarget::Exponential { .. } => {
                for k in 0..n {
                    q[[k, k]] = -z[k];
                }
                z.iter().map(|v| -v).collect()
            }
            ConstrainedTarget::LogNormal { .. } => {
                for k in 0..n {
                    q[[k, k]] = -1.0;
                }
                z.iter().map(|v| -(v.ln() + 1.0)).collect()
            }
            ConstrainedTarget::UniformBox { .. } => {
                return Err(Error::Unsupported("the uniform box has no mirrored form".into()))
            }
        };
        Ok((w, q))
    }

    /// Surrogate ground truth: i.i.d. draws where available.
    pub fn sample_ground_truth<R: Rng>(&self, n: usize, rng: &mut R) -> Result<GroundTruth> {
        let d = self.dim();
        match self {
            ConstrainedTarget::SparseDirichlet { alpha, counts } => {
                let params: Vec<f64> = alpha.iter().zip(counts).map(|(a, c)| a + c).collect();
                let samples = sample_dirichlet(&params, n, rng)?;
                Ok(GroundTruth {
                    samples,
                    method: "iid dirichlet via normalized gamma draws; coordinates lifted to the 1e-12 interior floor".into(),
                })
            }
            ConstrainedTarget::UniformBox { lo, hi, .. } => {
                let u = Uniform::new(*lo, *hi).map_err(|e| Error::Unsupported(e.to_string()))?;
                Ok(GroundTruth {
                    samples: Array2::from_shape_fn((n, d), |_| u.sample(rng)),
                    method: "iid uniform".into(),
                })
            }
            ConstrainedTarget::Exponential { .. } => {
                let e = rand_distr::Exp1;
                Ok(GroundTruth {
                    samples: Array2::from_shape_fn((n, d), |_| {
                        let v: f64 = e.sample(rng);
                        v.max(INTERIOR_FLOOR * 2.0)
                    }),
                    method: "iid exponential".into(),
                })
            }
            ConstrainedTarget::LogNormal { .. } => {
                let g = rand_distr::StandardNormal;
                Ok(GroundTruth {
                    samples: Array2::from_shape_fn((n, d), |_| {
                        let v: f64 = g.sample(rng);
                        v.exp()
                    }),
                    method: "iid log-normal".into(),
                })
            }
            ConstrainedTarget::QuadraticSimplex { a, sigma } if d <= 3 => {
                let resolution = match d {
                    1 => 100_000,
                    2 => 1_500,
                    _ => 150,
                };
                let samples = grid_sample_simplex(d, resolution, n, rng, |x| -quad_form(a, x) / (2.0 * sigma * sigma));
                Ok(GroundTruth {
                    samples,
                    method: format!(
                        "grid inverse-cdf over cube cells of side 1/{resolution} clipped to the simplex, uniform jitter within the cell"
                    ),
                })
            }
            ConstrainedTarget::QuadraticSimplex { .. } => Err(Error::Unsupported(
                "grid ground truth for the quadratic target is limited to d <= 3; supply a sample file".into(),
            )),
            ConstrainedTarget::SelectiveLasso(_) => Err(Error::Unsupported(
                "no built-in ground truth for the selective Lasso density; supply a sample file".into(),
            )),
        }
    }
}

/// Samples drawn by [`ConstrainedTarget::sample_ground_truth`] plus a
/// description of how they were produced.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub samples: Array2<f64>,
    pub method: String,
}

fn quad_form(a: &Array2<f64>, x: &[f64]) -> f64 {
    mat_vec(a, x).iter().zip(x).map(|(p, q)| p * q).sum()
}

fn mat_vec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    a.rows().into_iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Cholesky with a small diagonal jitter; succeeds iff the matrix is PSD up to rounding.
fn is_psd(a: &Array2<f64>) -> bool {
    let d = a.nrows();
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let mut l = Array2::<f64>::zeros((d, d));
    for j in 0..d {
        let mut diag = a[[j, j]] + 1e-10 * scale;
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if diag <= 0.0 {
            return false;
        }
        l[[j, j]] = diag.sqrt();
        for i in (j + 1)..d {
            let mut v = a[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = v / l[[j, j]];
        }
    }
    true
}

/// Dirichlet draws over `params.len()` categories, returning the first
/// `params.len() - 1` coordinates of each draw, lifted onto the interior floor.
pub fn sample_dirichlet<R: Rng>(params: &[f64], n: usize, rng: &mut R) -> Result<Array2<f64>> {
    let k = params.len();
    let gammas = params
        .iter()
        .map(|a| Gamma::new(*a, 1.0).map_err(|e| Error::Unsupported(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Array2::zeros((n, k - 1));
    let mut row = vec![0.0; k];
    for i in 0..n {
        loop {
            for (r, g) in row.iter_mut().zip(&gammas) {
                *r = g.sample(rng);
            }
            let total: f64 = row.iter().sum();
            if total > 0.0 && total.is_finite() {
                row.iter_mut().for_each(|v| *v /= total);
                break;
            }
        }
        lift_to_interior(&mut row);
        for j in 0..k - 1 {
            out[[i, j]] = row[j];
        }
    }
    Ok(out)
}

/// Raises barycentric coordinates below twice the interior floor and takes
/// the mass from the largest coordinate, so the free coordinates pass the
/// strict interior test.
fn lift_to_interior(z: &mut [f64]) {
    let floor = 2.0 * INTERIOR_FLOOR;
    let mut added = 0.0;
    for v in z.iter_mut() {
        if *v < floor {
            added += floor - *v;
            *v = floor;
        }
    }
    if added > 0.0 {
        let (imax, _) = z
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        z[imax] -= added;
    }
    // Free coordinates must leave room for the implicit one.
    let k = z.len();
    let free: f64 = z[..k - 1].iter().sum();
    if 1.0 - free <= INTERIOR_FLOOR {
        let excess = free - (1.0 - floor);
        let (imax, _) = z[..k - 1]
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
        z[imax] -= excess;
    }
}

/// Approximate sampler for a log-density on the `d`-simplex (`d <= 3`):
/// weights at the centres of cube cells of side `1/resolution` whose centre
/// lies inside the simplex, inverse-CDF cell choice, then uniform jitter
/// within the cell (redrawn until inside the simplex).
fn grid_sample_simplex<R: Rng, F: Fn(&[f64]) -> f64>(
    d: usize,
    resolution: usize,
    n: usize,
    rng: &mut R,
    log_density: F,
) -> Array2<f64> {
    let step = 1.0 / resolution as f64;
    let mut centres: Vec<Vec<f64>> = Vec::new();
    let mut logw: Vec<f64> = Vec::new();
    let mut idx = vec![0usize; d];
    loop {
        let c: Vec<f64> = idx.iter().map(|i| (*i as f64 + 0.5) * step).collect();
        if c.iter().sum::<f64>() < 1.0 {
            logw.push(log_density(&c));
            centres.push(c);
        }
        // Odometer increment with the sum constraint pruning whole rows.
        let mut pos = 0;
        loop {
            if pos == d {
                break;
            }
            idx[pos] += 1;
            if idx.iter().sum::<usize>() < resolution {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == d {
            break;
        }
    }
    let max = logw.iter().copied().fold(f64::MIN, f64::max);
    let mut cdf = Vec::with_capacity(logw.len());
    let mut acc = 0.0;
    for lw in &logw {
        acc += (lw - max).exp();
        cdf.push(acc);
    }
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut out = Array2::zeros((n, d));
    for i in 0..n {
        let u = unit.sample(rng) * acc;
        let cell = cdf.partition_point(|c| *c < u).min(cdf.len() - 1);
        loop {
            let x: Vec<f64> = centres[cell].iter().map(|c| c + (unit.sample(rng) - 0.5) * step).collect();
            if x.iter().all(|v| *v > INTERIOR_FLOOR) && 1.0 - x.iter().sum::<f64>() > INTERIOR_FLOOR {
                for j in 0..d {
                    out[[i, j]] = x[j];
                }
                break;
            }
        }
    }
    out
}

/// A target paired with a compatible mirror map.
#[derive(Debug, Clone)]
pub struct MirroredTarget {
    target: ConstrainedTarget,
    map: MirrorMap,
}

impl MirroredTarget {
    pub fn new(target: ConstrainedTarget, map: MirrorMap) -> Result<Self> {
        let ok = matches!(
            (target.domain(), map),
            (Domain::Simplex { dim: a }, MirrorMap::EntropicSimplex { dim: b }) if a == b
        ) || matches!(
            (target.domain(), map),
            (Domain::Orthant { dim: a }, MirrorMap::PositiveOrthant { dim: b }) if a == b
        );
        if !ok {
            return Err(Error::config(
                "map",
                format!("mirror map {} does not match the domain of target {}", map.name(), target.name()),
            ));
        }
        Ok(Self { target, map })
    }

    /// Pairs a target with the mirror map of its domain.
    pub fn with_default_map(target: ConstrainedTarget) -> Result<Self> {
        let map = target.domain().mirror_map().ok_or_else(|| {
            Error::config("map", format!("target {} has no mirror map", target.name()))
        })?;
        Self::new(target, map)
    }

    pub fn target(&self) -> &ConstrainedTarget {
        &self.target
    }

    pub fn map(&self) -> &MirrorMap {
        &self.map
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// `W(y) = V(x) + log det grad^2 phi(x)` at `x = grad phi*(y)`.
    pub fn dual_potential(&self, y: &[f64]) -> Result<f64> {
        let x = self.map.dual_to_primal(y)?;
        Ok(-self.target.log_density(&x)? + self.map.log_det_hessian(&x)?)
    }

    /// `grad log nu(y) = -grad W(y)`.
    pub fn dual_score(&self, y: &[f64]) -> Result<Vec<f64>> {
        let jet = self.map.jet(y)?;
        self.dual_score_jet(&jet)
    }

    pub fn dual_score_jet(&self, jet: &DualJet) -> Result<Vec<f64>> {
        Ok(self.dual_score_parts(jet, false)?.0)
    }

    /// Dual score and its Jacobian `[a][c] = d s_a / d y_c`.
    pub fn dual_score_and_jacobian(&self, jet: &DualJet) -> Result<(Vec<f64>, Array2<f64>)> {
        let (s, j) = self.dual_score_parts(jet, true)?;
        Ok((s, j.expect("jacobian requested")))
    }

    fn dual_score_parts(&self, jet: &DualJet, with_jac: bool) -> Result<(Vec<f64>, Option<Array2<f64>>)> {
        let z = jet.barycentric();
        let d = self.dim();
        let (w, q) = self.target.scaled_grad_jacobian(z)?;
        match self.map {
            MirrorMap::PositiveOrthant { .. } => {
                // s = x * grad log pi + 1, since grad log det = -1/x.
                let s = w.iter().map(|v| v + 1.0).collect();
                Ok((s, with_jac.then_some(q)))
            }
            MirrorMap::EntropicSimplex { .. } => {
                // s_i = w_i + 1 - z_i (sum_k w_k + d + 1).
                let total: f64 = w.iter().sum::<f64>() + (d + 1) as f64;
                let s: Vec<f64> = (0..d).map(|i| w[i] + 1.0 - z[i] * total).collect();
                if !with_jac {
                    return Ok((s, None));
                }
                let jac = jet.jac();
                let row_sums: Vec<f64> = (0..=d).map(|k| q.row(k).sum()).collect();
                // dw_k/dy_c = q_kc - z_c sum_m q_km  (q_{k,d+1} enters only through the sum).
                let dw = Array2::from_shape_fn((d + 1, d), |(k, c)| q[[k, c]] - z[c] * row_sums[k]);
                let dtotal: Vec<f64> = (0..d).map(|c| dw.column(c).sum()).collect();
                let ds = Array2::from_shape_fn((d, d), |(i, c)| dw[[i, c]] - jac[[i, c]] * total - z[i] * dtotal[c]);
                Ok((s, Some(ds)))
            }
        }
    }

    /// Jets for every row of a dual cloud.
    pub fn jets(&self, ys: ArrayView2<f64>) -> Result<Vec<DualJet>> {
        ys.rows()
            .into_iter()
            .map(|r| self.map.jet(&r.to_vec()))
            .collect()
    }
}
