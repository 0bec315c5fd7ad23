//! Mollified interaction energy descent in unconstrained coordinates.
//!
//! Particles live in `w`-space and are mapped into the domain by a
//! [`Reparam`]. The objective is
//! `log E = log (1/N^2) sum_ij phi(x_i - x_j) (pi(x_i) pi(x_j))^{-1/2}`,
//! diagonal terms included, accumulated in log space.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigViolation, Error, Result};
use crate::rng::{substream, TAG_INIT};
use crate::samplers::{InitSpec, MetricHook, RunRecord, Snapshot, Stepper, StepperConfig, TraceRow};
use crate::targets::{ConstrainedTarget, Domain};

/// Unnormalized log-density with gradient.
pub trait LogDensity: Sync {
    fn log_density(&self, x: &[f64]) -> Result<f64>;
    fn score(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl LogDensity for ConstrainedTarget {
    fn log_density(&self, x: &[f64]) -> Result<f64> {
        ConstrainedTarget::log_density(self, x)
    }

    fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.primal_score(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MollifierFamily {
    /// `(r^2 + eps^2)^{-s/2}`
    Riesz { s: f64 },
    /// `exp(-r^2 / (2 eps^2))`
    Gaussian,
    /// `exp(-r / eps)`
    Laplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub family: MollifierFamily,
    pub eps: f64,
}

impl Mollifier {
    pub fn new(family: MollifierFamily, eps: f64) -> Result<Self> {
        let mut v = Vec::new();
        if !(eps.is_finite() && eps > 0.0) {
            v.push(ConfigViolation::new("mollifier.eps", format!("must be positive, got {eps}")));
        }
        if let MollifierFamily::Riesz { s } = family {
            if !(s.is_finite() && s > 0.0) {
                v.push(ConfigViolation::new("mollifier.s", format!("must be positive, got {s}")));
            }
        }
        if v.is_empty() {
            Ok(Self { family, eps })
        } else {
            Err(Error::Config(v))
        }
    }

    /// Riesz mollifier with `s = d + 1e-4`.
    pub fn riesz_for_dim(dim: usize, eps: f64) -> Result<Self> {
        Self::new(MollifierFamily::Riesz { s: dim as f64 + 1e-4 }, eps)
    }

    pub fn log_value(&self, r: &[f64]) -> f64 {
        let r2: f64 = r.iter().map(|v| v * v).sum();
        match self.family {
            MollifierFamily::Riesz { s } => -0.5 * s * (r2 + self.eps * self.eps).ln(),
            MollifierFamily::Gaussian => -r2 / (2.0 * self.eps * self.eps),
            MollifierFamily::Laplace => -r2.sqrt() / self.eps,
        }
    }

    /// Gradient of [`Mollifier::log_value`]; zero at the origin for the
    /// Laplace kink.
    pub fn grad_log(&self, r: &[f64]) -> Vec<f64> {
        let r2: f64 = r.iter().map(|v| v * v).sum();
        let scale = match self.family {
            MollifierFamily::Riesz { s } => -s / (r2 + self.eps * self.eps),
            MollifierFamily::Gaussian => -1.0 / (self.eps * self.eps),
            MollifierFamily::Laplace => {
                if r2 == 0.0 {
                    0.0
                } else {
                    -1.0 / (self.eps * r2.sqrt())
                }
            }
        };
        r.iter().map(|v| scale * v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reparam {
    /// `x = (lo + hi)/2 + (hi - lo)/2 * tanh(w)`, coordinatewise.
    TanhBox { lo: f64, hi: f64 },
    Identity,
}

impl Reparam {
    pub fn forward(&self, w: &[f64]) -> Vec<f64> {
        match *self {
            Reparam::TanhBox { lo, hi } => {
                let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                w.iter()
                    .map(|v| {
                        let x = mid + half * v.tanh();
                        // tanh saturates to +-1 in floating point.
                        if x >= hi {
                            hi.next_down()
                        } else if x <= lo {
                            lo.next_up()
                        } else {
                            x
                        }
                    })
                    .collect()
            }
            Reparam::Identity => w.to_vec(),
        }
    }

    pub fn inverse(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Reparam::TanhBox { lo, hi } => {
                let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                x.iter()
                    .map(|v| {
                        if *v <= lo || *v >= hi {
                            Err(Error::DomainViolation(format!("{v} is outside ({lo}, {hi})")))
                        } else {
                            Ok(((v - mid) / half).atanh())
                        }
                    })
                    .collect()
            }
            Reparam::Identity => Ok(x.to_vec()),
        }
    }

    /// Diagonal of `dx/dw`.
    pub fn jacobian_diag(&self, w: &[f64]) -> Vec<f64> {
        match *self {
            Reparam::TanhBox { lo, hi } => w
                .iter()
                .map(|v| {
                    let t = v.tanh();
                    0.5 * (hi - lo) * (1.0 - t * t)
                })
                .collect(),
            Reparam::Identity => vec![1.0; w.len()],
        }
    }
}

struct Pairs {
    x: Vec<Vec<f64>>,
    scores: Vec<Vec<f64>>,
    /// `l_ij` row-major.
    logs: Vec<f64>,
    lse: f64,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|a| (a - m).exp()).sum::<f64>().ln()
}

fn pairs(
    w: ArrayView2<f64>,
    reparam: &Reparam,
    mollifier: &Mollifier,
    density: &dyn LogDensity,
    with_scores: bool,
) -> Result<Pairs> {
    let n = w.nrows();
    if n == 0 {
        return Err(Error::Shape("need at least one particle".into()));
    }
    let x: Vec<Vec<f64>> = w.rows().into_iter().map(|r| reparam.forward(&r.to_vec())).collect();
    let logp = x
        .par_iter()
        .map(|xi| density.log_density(xi))
        .collect::<Result<Vec<_>>>()?;
    let scores = if with_scores {
        x.par_iter().map(|xi| density.score(xi)).collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let logs: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (x, logp) = (&x, &logp);
            (0..n).map(move |j| {
                let r: Vec<f64> = x[i].iter().zip(&x[j]).map(|(a, b)| a - b).collect();
                mollifier.log_value(&r) - 0.5 * (logp[i] + logp[j])
            })
        })
        .collect();
    let lse = log_sum_exp(&logs);
    Ok(Pairs { x, scores, logs, lse })
}

/// `log E` at the mapped particles `reparam(w)`.
pub fn mie_log_energy(
    w: ArrayView2<f64>,
    reparam: &Reparam,
    mollifier: &Mollifier,
    density: &dyn LogDensity,
) -> Result<f64> {
    let p = pairs(w, reparam, mollifier, density, false)?;
    Ok(p.lse - 2.0 * (w.nrows() as f64).ln())
}

/// Gradient of [`mie_log_energy`] in the unconstrained coordinates.
pub fn mie_gradient(
    w: ArrayView2<f64>,
    reparam: &Reparam,
    mollifier: &Mollifier,
    density: &dyn LogDensity,
) -> Result<Array2<f64>> {
    let p = pairs(w, reparam, mollifier, density, true)?;
    let (n, d) = w.dim();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut g = vec![0.0; d];
            let mut mass = 0.0;
            for j in 0..n {
                let omega = (p.logs[k * n + j] - p.lse).exp();
                mass += omega;
                let r: Vec<f64> = p.x[k].iter().zip(&p.x[j]).map(|(a, b)| a - b).collect();
                for (gc, v) in g.iter_mut().zip(mollifier.grad_log(&r)) {
                    *gc += 2.0 * omega * v;
                }
            }
            let jac = reparam.jacobian_diag(&w.row(k).to_vec());
            (0..d).map(|c| (g[c] - mass * p.scores[k][c]) * jac[c]).collect()
        })
        .collect();
    Ok(Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).expect("n x d"))
}

#[derive(Debug, Clone)]
pub struct MiedSpec {
    pub target: ConstrainedTarget,
    pub reparam: Reparam,
    pub mollifier: Mollifier,
    pub stepper: StepperConfig,
    pub n: usize,
    pub iterations: usize,
    /// Primal initial distribution; `None` picks the domain default.
    pub init: Option<InitSpec>,
    pub seed: u64,
    pub cadence: usize,
}

pub const LOG_ENERGY: &str = "log_energy";

impl MiedSpec {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if self.n == 0 {
            v.push(ConfigViolation::new("n", "need at least one particle"));
        }
        if self.cadence == 0 {
            v.push(ConfigViolation::new("metrics.cadence", "must be at least 1"));
        }
        if let Err(Error::Config(mut e)) = self.stepper.validate() {
            v.append(&mut e);
        }
        match (self.target.domain(), self.reparam) {
            (Domain::Box { lo, hi, .. }, Reparam::TanhBox { lo: a, hi: b }) => {
                if !(a >= lo && b <= hi && a < b) {
                    v.push(ConfigViolation::new(
                        "reparam",
                        format!("tanh range ({a}, {b}) is not inside the target box ({lo}, {hi})"),
                    ));
                }
            }
            _ => v.push(ConfigViolation::new(
                "reparam",
                format!("no reparameterisation maps onto the domain of {}", self.target.name()),
            )),
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

fn mapped(w: &Array2<f64>, reparam: &Reparam) -> Array2<f64> {
    let mut x = w.clone();
    for mut row in x.rows_mut() {
        let v = reparam.forward(&row.to_vec());
        row.assign(&ndarray::ArrayView1::from(&v));
    }
    x
}

/// MIED with a learning-rate stepper, or Coin MIED with a coin stepper.
/// Records `log_energy` plus every hook at the cadence.
pub fn run_mied(spec: &MiedSpec, hooks: &[&dyn MetricHook]) -> Result<RunRecord> {
    spec.validate()?;
    let start = Instant::now();
    let domain = spec.target.domain();
    let init = spec.init.unwrap_or_else(|| InitSpec::default_for(&domain));
    let (x0, _) = init.draw(&domain, None, spec.n, &mut substream(spec.seed, TAG_INIT, 0))?;
    let mut w = x0.clone();
    for (mut row, xr) in w.rows_mut().into_iter().zip(x0.rows()) {
        let v = spec.reparam.inverse(&xr.to_vec())?;
        row.assign(&ndarray::ArrayView1::from(&v));
    }
    let mut stepper = Stepper::new(&spec.stepper, &w);
    let mut trace = Vec::new();
    let numeric = |iteration, e: Error| Error::NumericFailure {
        iteration,
        reason: e.to_string(),
    };
    let emit = |t: usize, w: &Array2<f64>, trace: &mut Vec<TraceRow>| -> Result<Array2<f64>> {
        let x = mapped(w, &spec.reparam);
        let le = mie_log_energy(w.view(), &spec.reparam, &spec.mollifier, &spec.target).map_err(|e| numeric(t, e))?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        trace.push(TraceRow { iteration: t, metric: LOG_ENERGY.into(), value: le, wall_ms });
        let snap = Snapshot { iteration: t, primal: x.view(), dual: None };
        for hook in hooks {
            let value = hook.evaluate(&snap).map_err(|e| numeric(t, e))?;
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            trace.push(TraceRow { iteration: t, metric: hook.name(), value, wall_ms });
        }
        Ok(x)
    };
    let mut x = emit(0, &w, &mut trace)?;
    for t in 1..=spec.iterations {
        if !stepper.take_free_step() {
            let g = mie_gradient(w.view(), &spec.reparam, &spec.mollifier, &spec.target).map_err(|e| numeric(t, e))?;
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericFailure {
                    iteration: t,
                    reason: "non-finite energy gradient".into(),
                });
            }
            let c = -g;
            stepper.advance(&mut w, c.view());
        }
        if t % spec.cadence == 0 || t == spec.iterations {
            x = emit(t, &w, &mut trace)?;
        }
    }
    Ok(RunRecord {
        trace,
        initial: x0,
        primal: x,
        dual: None,
        iterations: spec.iterations,
    })
}
