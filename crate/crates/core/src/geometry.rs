//! Mirror maps of Legendre type.
//!
//! Two maps are provided. `EntropicSimplex(d)` lives on the open simplex
//! `{x in R^d : x_k > 0, sum x < 1}` with the `(d+1)`-th coordinate left
//! implicit, and `PositiveOrthant(d)` on the open positive orthant. All
//! arrays carry the `d` free coordinates.
//!
//! Primal-side entry points validate their input against [`INTERIOR_FLOOR`].
//! Samplers work from dual coordinates through [`DualJet`], which recovers the
//! primal point (including an accurately computed simplex slack) directly from
//! `y` and never round-trips through `1 - sum x`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A primal point is interior iff every free coordinate (and, on the simplex,
/// the slack `1 - sum x`) exceeds this floor.
pub const INTERIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MirrorMap {
    /// `phi(x) = sum x_k log x_k + (1 - sum x) log(1 - sum x)`.
    EntropicSimplex { dim: usize },
    /// `phi(x) = sum (x_k log x_k - x_k)`.
    PositiveOrthant { dim: usize },
}

impl MirrorMap {
    pub fn dim(&self) -> usize {
        match *self {
            MirrorMap::EntropicSimplex { dim } | MirrorMap::PositiveOrthant { dim } => dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MirrorMap::EntropicSimplex { .. } => "entropic_simplex",
            MirrorMap::PositiveOrthant { .. } => "positive_orthant",
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Shape(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                v.len()
            )));
        }
        Ok(())
    }

    /// Validates that `x` lies strictly inside the domain and returns the
    /// simplex slack (or `1.0` for the orthant, where it is unused).
    pub fn check_interior(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        if let Some((k, v)) = x
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > INTERIOR_FLOOR))
        {
            return Err(Error::DomainViolation(format!(
                "coordinate {} = {v:e} is not above the interior floor",
                k + 1
            )));
        }
        match self {
            MirrorMap::EntropicSimplex { .. } => {
                let slack = 1.0 - x.iter().sum::<f64>();
                if slack > INTERIOR_FLOOR {
                    Ok(slack)
                } else {
                    Err(Error::DomainViolation(format!(
                        "simplex slack 1 - sum(x) = {slack:e} is not above the interior floor"
                    )))
                }
            }
            MirrorMap::PositiveOrthant { .. } => Ok(1.0),
        }
    }

    /// `y = grad phi(x)`.
    pub fn primal_to_dual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let slack = self.check_interior(x)?;
        Ok(match self {
            MirrorMap::EntropicSimplex { .. } => {
                let ls = slack.ln();
                x.iter().map(|v| v.ln() - ls).collect()
            }
            MirrorMap::PositiveOrthant { .. } => x.iter().map(|v| v.ln()).collect(),
        })
    }

    /// `x = grad phi*(y)`.
    pub fn dual_to_primal(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.barycentric(y)?;
        z.truncate(self.dim());
        Ok(z)
    }

    /// Primal point from a dual point, with the simplex slack appended as a
    /// final coordinate (length `d + 1`); the orthant returns `d` coordinates.
    fn barycentric(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y)?;
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericalOverflow(format!(
                "dual coordinate {v} is not finite"
            )));
        }
        match self {
            MirrorMap::EntropicSimplex { .. } => {
                let shift = y.iter().copied().fold(0.0_f64, f64::max);
                let mut z: Vec<f64> = y.iter().map(|v| (v - shift).exp()).collect();
                z.push((-shift).exp());
                let total: f64 = z.iter().sum();
                z.iter_mut().for_each(|v| *v /= total);
                Ok(z)
            }
            MirrorMap::PositiveOrthant { .. } => {
                let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
                if x.iter().any(|v| v.is_infinite()) {
                    return Err(Error::NumericalOverflow(
                        "exp overflow in orthant inverse map".into(),
                    ));
                }
                Ok(x)
            }
        }
    }

    /// `log det grad^2 phi(x)` in closed form.
    pub fn log_det_hessian(&self, x: &[f64]) -> Result<f64> {
        let slack = self.check_interior(x)?;
        let s: f64 = -x.iter().map(|v| v.ln()).sum::<f64>();
        Ok(match self {
            MirrorMap::EntropicSimplex { .. } => s - slack.ln(),
            MirrorMap::PositiveOrthant { .. } => s,
        })
    }

    /// Gradient of [`MirrorMap::log_det_hessian`] with respect to `x`.
    pub fn grad_log_det_hessian(&self, x: &[f64]) -> Result<Vec<f64>> {
        let slack = self.check_interior(x)?;
        Ok(match self {
            MirrorMap::EntropicSimplex { .. } => x.iter().map(|v| -1.0 / v + 1.0 / slack).collect(),
            MirrorMap::PositiveOrthant { .. } => x.iter().map(|v| -1.0 / v).collect(),
        })
    }

    /// `grad^2 phi(x) v`.
    pub fn hessian_apply(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let slack = self.check_interior(x)?;
        self.check_len(v)?;
        Ok(match self {
            MirrorMap::EntropicSimplex { .. } => {
                let sv: f64 = v.iter().sum::<f64>() / slack;
                x.iter().zip(v).map(|(xi, vi)| vi / xi + sv).collect()
            }
            MirrorMap::PositiveOrthant { .. } => x.iter().zip(v).map(|(xi, vi)| vi / xi).collect(),
        })
    }

    /// `[grad^2 phi(x)]^{-1} v`. On the simplex the Hessian is
    /// `diag(1/x) + 11^T / x_{d+1}` and Sherman-Morrison gives the inverse
    /// `diag(x) - x x^T`.
    pub fn hessian_inverse_apply(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_interior(x)?;
        self.check_len(v)?;
        Ok(match self {
            MirrorMap::EntropicSimplex { .. } => {
                let xv: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                x.iter().zip(v).map(|(xi, vi)| xi * vi - xi * xv).collect()
            }
            MirrorMap::PositiveOrthant { .. } => x.iter().zip(v).map(|(xi, vi)| xi * vi).collect(),
        })
    }

    /// Dense `grad^2 phi(x)`.
    pub fn hessian(&self, x: &[f64]) -> Result<Array2<f64>> {
        let slack = self.check_interior(x)?;
        let d = self.dim();
        let mut h = Array2::zeros((d, d));
        for i in 0..d {
            h[[i, i]] = 1.0 / x[i];
            if let MirrorMap::EntropicSimplex { .. } = self {
                for j in 0..d {
                    h[[i, j]] += 1.0 / slack;
                }
            }
        }
        Ok(h)
    }

    /// Local inverse-map data at the dual point `y`.
    pub fn jet(&self, y: &[f64]) -> Result<DualJet> {
        let z = self.barycentric(y)?;
        let d = self.dim();
        let mut jac = Array2::zeros((d, d));
        match self {
            MirrorMap::EntropicSimplex { .. } => {
                for a in 0..d {
                    for b in 0..d {
                        jac[[a, b]] = -z[a] * z[b];
                    }
                    jac[[a, a]] += z[a];
                }
            }
            MirrorMap::PositiveOrthant { .. } => {
                for a in 0..d {
                    jac[[a, a]] = z[a];
                }
            }
        }
        Ok(DualJet {
            map: *self,
            z,
            jac,
        })
    }
}

/// The inverse map and its first two derivatives at one dual point.
///
/// `jac` is `d x_/d y = grad^2 phi*(y) = [grad^2 phi(x)]^{-1}`, which is
/// symmetric. For the simplex `z` holds `d + 1` barycentric coordinates.
#[derive(Debug, Clone)]
pub struct DualJet {
    map: MirrorMap,
    z: Vec<f64>,
    jac: Array2<f64>,
}

impl DualJet {
    pub fn map(&self) -> MirrorMap {
        self.map
    }

    pub fn x(&self) -> &[f64] {
        &self.z[..self.map.dim()]
    }

    /// Full coordinates: `d + 1` on the simplex, `d` on the orthant.
    pub fn barycentric(&self) -> &[f64] {
        &self.z
    }

    pub fn jac(&self) -> &Array2<f64> {
        &self.jac
    }

    /// Every coordinate (and the simplex slack) strictly positive and finite.
    pub fn is_strictly_interior(&self) -> bool {
        self.z.iter().all(|v| v.is_finite() && *v > 0.0)
    }

    pub fn jac_apply(&self, v: &[f64]) -> Vec<f64> {
        let x = self.x();
        match self.map {
            MirrorMap::EntropicSimplex { .. } => {
                let xv: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                x.iter().zip(v).map(|(xi, vi)| xi * vi - xi * xv).collect()
            }
            MirrorMap::PositiveOrthant { .. } => x.iter().zip(v).map(|(xi, vi)| xi * vi).collect(),
        }
    }

    /// Vector over `c` of `u^T (d jac / d y_c) v`.
    pub fn dj_contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let x = self.x();
        match self.map {
            MirrorMap::EntropicSimplex { .. } => {
                let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
                let zv: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
                let uz: f64 = x.iter().zip(u).map(|(a, b)| a * b).sum();
                let j_uv = self.jac_apply(&uv);
                let j_u = self.jac_apply(u);
                let j_v = self.jac_apply(v);
                (0..x.len())
                    .map(|c| j_uv[c] - zv * j_u[c] - uz * j_v[c])
                    .collect()
            }
            MirrorMap::PositiveOrthant { .. } => (0..x.len()).map(|c| u[c] * v[c] * x[c]).collect(),
        }
    }

    /// Vector over `c` of `sum_ab m_ba (d jac_ab / d y_c)`, i.e. `tr(m d jac/d y_c)`.
    pub fn dj_trace(&self, m: &Array2<f64>) -> Vec<f64> {
        let x = self.x();
        let d = x.len();
        match self.map {
            MirrorMap::EntropicSimplex { .. } => {
                let mut w = vec![0.0; d];
                for a in 0..d {
                    let mut mz = 0.0;
                    let mut mtz = 0.0;
                    for b in 0..d {
                        mz += m[[a, b]] * x[b];
                        mtz += m[[b, a]] * x[b];
                    }
                    w[a] = m[[a, a]] - mz - mtz;
                }
                self.jac_apply(&w)
            }
            MirrorMap::PositiveOrthant { .. } => (0..d).map(|c| m[[c, c]] * x[c]).collect(),
        }
    }
}
