//! Mirrored particle samplers, their projected Euclidean baselines and the
//! shared run loop.

mod mla;
mod mlawgd;
mod msvgd;
mod run;

mod stein;

pub use mla::mla_step;
pub use mlawgd::{mlawgd_direction, HermiteKernel};
pub use msvgd::{msvgd_direction, svgd_direction};
pub use run::{run, MetricHook, RunRecord, RunSpec, Snapshot, TraceRow};


pub use stein::{ksd_vstat_points, mksdd_direction, stein_kernel_eval, stein_pair, stein_points, SteinPoint};

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::coin::{AdaptiveCoin, CoinGuard, KtCoin};
use crate::error::{Error, Result};
use crate::geometry::{MirrorMap, INTERIOR_FLOOR};
use crate::targets::{sample_dirichlet, Domain};

/// Floor used when pulling projected points back inside. Twice the interior
/// tolerance so that projected points pass the strict interior test.
pub const PROJECTION_FLOOR: f64 = 2.0 * INTERIOR_FLOOR;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Msvgd,
    CoinMsvgd,
    Mla,
    Mksdd,
    CoinMksdd,
    Mlawgd,
    CoinMlawgd,
    ProjectedSvgd,
    ProjectedCoinSvgd,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 9] = [
        SamplerKind::Msvgd,
        SamplerKind::CoinMsvgd,
        SamplerKind::Mla,
        SamplerKind::Mksdd,
        SamplerKind::CoinMksdd,
        SamplerKind::Mlawgd,
        SamplerKind::CoinMlawgd,
        SamplerKind::ProjectedSvgd,
        SamplerKind::ProjectedCoinSvgd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Msvgd => "msvgd",
            SamplerKind::CoinMsvgd => "coin_msvgd",
            SamplerKind::Mla => "mla",
            SamplerKind::Mksdd => "mksdd",
            SamplerKind::CoinMksdd => "coin_mksdd",
            SamplerKind::Mlawgd => "mlawgd",
            SamplerKind::CoinMlawgd => "coin_mlawgd",
            SamplerKind::ProjectedSvgd => "projected_svgd",
            SamplerKind::ProjectedCoinSvgd => "projected_coin_svgd",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_coin(&self) -> bool {
        matches!(
            self,
            SamplerKind::CoinMsvgd | SamplerKind::CoinMksdd | SamplerKind::CoinMlawgd | SamplerKind::ProjectedCoinSvgd
        )
    }

    pub fn is_projected(&self) -> bool {
        matches!(self, SamplerKind::ProjectedSvgd | SamplerKind::ProjectedCoinSvgd)
    }

    /// The learning-rate-free counterpart, if this is a baseline.
    pub fn coin_counterpart(&self) -> Option<Self> {
        match self {
            SamplerKind::Msvgd => Some(SamplerKind::CoinMsvgd),
            SamplerKind::Mksdd => Some(SamplerKind::CoinMksdd),
            SamplerKind::Mlawgd => Some(SamplerKind::CoinMlawgd),
            SamplerKind::ProjectedSvgd => Some(SamplerKind::ProjectedCoinSvgd),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepperConfig {
    FixedLr { lr: f64 },
    /// Accumulator decay 0.9, epsilon 1e-8.
    RmsProp { lr: f64 },
    /// `scale` normalizes outcomes by a known bound.
    CoinKt { scale: Option<f64> },
    CoinAdaptive { guard: CoinGuard },
}

pub const RMSPROP_DECAY: f64 = 0.9;
pub const RMSPROP_EPS: f64 = 1e-8;

impl StepperConfig {
    pub fn is_coin(&self) -> bool {
        matches!(self, StepperConfig::CoinKt { .. } | StepperConfig::CoinAdaptive { .. })
    }

    pub fn lr(&self) -> Option<f64> {
        match *self {
            StepperConfig::FixedLr { lr } | StepperConfig::RmsProp { lr } => Some(lr),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(lr) = self.lr() {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::config("stepper.lr", format!("learning rate must be positive, got {lr}")));
            }
        }
        if let StepperConfig::CoinKt { scale: Some(l) } = *self {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::config("stepper.scale", format!("outcome scale must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Stateful position update driven by outcomes `c` (negative gradients).
#[derive(Debug, Clone)]
pub enum Stepper {
    Fixed(f64),
    RmsProp { lr: f64, acc: Array2<f64> },
    Kt { coin: KtCoin, started: bool },
    Adaptive(AdaptiveCoin),
}

impl Stepper {
    pub fn new(cfg: &StepperConfig, y0: &Array2<f64>) -> Self {
        match *cfg {
            StepperConfig::FixedLr { lr } => Stepper::Fixed(lr),
            StepperConfig::RmsProp { lr } => Stepper::RmsProp {
                lr,
                acc: Array2::zeros(y0.dim()),
            },
            StepperConfig::CoinKt { scale } => Stepper::Kt {
                coin: match scale {
                    Some(l) => KtCoin::with_scale(y0.clone(), l),
                    None => KtCoin::new(y0.clone()),
                },
                started: false,
            },
            StepperConfig::CoinAdaptive { guard } => Stepper::Adaptive(AdaptiveCoin::new(y0.clone(), guard)),
        }
    }

    /// The KT bettor's first position is `y0` itself; no outcome is needed.
    pub fn take_free_step(&mut self) -> bool {
        if let Stepper::Kt { started, .. } = self {
            if !*started {
                *started = true;
                return true;
            }
        }
        false
    }

    pub fn advance(&mut self, y: &mut Array2<f64>, c: ArrayView2<f64>) {
        match self {
            Stepper::Fixed(lr) => y.scaled_add(*lr, &c),
            Stepper::RmsProp { lr, acc } => {
                for ((yv, a), cv) in y.iter_mut().zip(acc.iter_mut()).zip(c.iter()) {
                    *a = RMSPROP_DECAY * *a + (1.0 - RMSPROP_DECAY) * cv * cv;
                    *yv += *lr * cv / (*a + RMSPROP_EPS).sqrt();
                }
            }
            Stepper::Kt { coin, .. } => *y = coin.step(y.view(), c),
            Stepper::Adaptive(coin) => *y = coin.step(y.view(), c),
        }
    }
}

/// Distribution of the initial particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    /// Symmetric Dirichlet on the simplex.
    Dirichlet { concentration: f64 },
    /// Independent uniform coordinates on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Independent Gaussian dual coordinates, mapped to the primal space.
    DualNormal { mean: f64, std: f64 },
}

impl InitSpec {
    pub fn default_for(domain: &Domain) -> Self {
        match *domain {
            Domain::Simplex { .. } => InitSpec::Dirichlet { concentration: 5.0 },
            Domain::Orthant { .. } => InitSpec::DualNormal { mean: 0.0, std: 1.0 },
            Domain::Box { lo, hi, .. } => {
                let (mid, q) = (0.5 * (lo + hi), 0.25 * (hi - lo));
                InitSpec::Uniform { lo: mid - q, hi: mid + q }
            }
        }
    }

    /// Draws `n` primal points, and the matching dual points when `map` is
    /// given.
    pub fn draw<R: Rng>(
        &self,
        domain: &Domain,
        map: Option<&MirrorMap>,
        n: usize,
        rng: &mut R,
    ) -> Result<(Array2<f64>, Option<Array2<f64>>)> {
        let d = domain.dim();
        let primal = match *self {
            InitSpec::Dirichlet { concentration } => {
                if !matches!(domain, Domain::Simplex { .. }) {
                    return Err(Error::config("init.kind", "dirichlet init requires a simplex target"));
                }
                if !(concentration > 0.0) {
                    return Err(Error::config("init.concentration", "must be positive"));
                }
                sample_dirichlet(&vec![concentration; d + 1], n, rng)?
            }
            InitSpec::Uniform { lo, hi } => {
                let dist = Uniform::new(lo, hi).map_err(|e| Error::config("init.lo", e.to_string()))?;
                Array2::from_shape_simple_fn((n, d), || dist.sample(rng))
            }
            InitSpec::DualNormal { mean, std } => {
                let map = map.ok_or_else(|| Error::config("init.kind", "dual_normal init requires a mirror map"))?;
                if !(std >= 0.0) {
                    return Err(Error::config("init.std", "must be non-negative"));
                }
                let y = Array2::from_shape_simple_fn((n, d), || {
                    let e: f64 = StandardNormal.sample(rng);
                    mean + std * e
                });
                let mut x = Array2::zeros((n, d));
                for (i, row) in y.rows().into_iter().enumerate() {
                    let xi = map.dual_to_primal(&row.to_vec())?;
                    x.row_mut(i).assign(&ndarray::ArrayView1::from(&xi));
                }
                return Ok((x, Some(y)));
            }
        };
        for row in primal.rows() {
            if !domain.contains(row.as_slice().expect("contiguous row")) {
                return Err(Error::DomainViolation(format!(
                    "initial point {row} is not strictly inside the domain"
                )));
            }
        }
        let dual = match map {
            Some(map) => {
                let mut y = Array2::zeros((n, d));
                for (i, row) in primal.rows().into_iter().enumerate() {
                    let yi = map.primal_to_dual(row.as_slice().expect("contiguous row"))?;
                    y.row_mut(i).assign(&ndarray::ArrayView1::from(&yi));
                }
                Some(y)
            }
            None => None,
        };
        Ok((primal, dual))
    }
}

/// Euclidean projection onto `{x >= 0, sum x <= 1}` without flooring.
pub fn project_simplex_exact(x: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= 1.0 {
        return clipped;
    }
    // Projection onto the face sum x = 1.
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Euclidean projection onto the closed domain, then pulled inside by
/// [`PROJECTION_FLOOR`].
pub fn project_to_domain(domain: &Domain, x: &[f64]) -> Vec<f64> {
    let f = PROJECTION_FLOOR;
    match *domain {
        Domain::Simplex { .. } => {
            let mut p = project_simplex_exact(x);
            p.iter_mut().for_each(|v| *v = v.max(f));
            let mut excess = p.iter().sum::<f64>() - (1.0 - f);
            while excess > 0.0 {
                let (k, _) = p
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .expect("non-empty point");
                let take = excess.min(p[k] - f);
                p[k] -= take;
                excess = p.iter().sum::<f64>() - (1.0 - f);
                if take <= 0.0 {
                    break;
                }
            }
            p
        }
        Domain::Orthant { .. } => x.iter().map(|v| v.max(f)).collect(),
        Domain::Box { lo, hi, .. } => {
            let (a, b) = (lo + f * lo.abs().max(1.0), hi - f * hi.abs().max(1.0));
            x.iter().map(|v| v.clamp(a, b)).collect()
        }
    }
}

fn rows_to_array(rows: Vec<Vec<f64>>, d: usize) -> Array2<f64> {
    let n = rows.len();
    Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect()).expect("rows of equal length")
}
