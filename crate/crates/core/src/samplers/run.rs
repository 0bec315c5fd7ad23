use std::time::Instant;

use ndarray::{Array2, ArrayView2};

use super::mla::mla_step;
use super::mlawgd::{mlawgd_direction, HermiteKernel};
use super::msvgd::{msvgd_from_parts, svgd_direction};
use super::stein::{mksdd_from_points, stein_points};
use super::{project_to_domain, InitSpec, SamplerKind, Stepper, StepperConfig};
use crate::error::{ConfigViolation, Error, Result};
use crate::geometry::MirrorMap;
use crate::kernels::KernelConfig;
use crate::rng::{substream, TAG_INIT, TAG_LANGEVIN};
use crate::targets::{ConstrainedTarget, MirroredTarget};

/// Everything needed to reproduce one run.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub sampler: SamplerKind,
    pub target: ConstrainedTarget,
    /// `None` picks the mirror map of the target's domain.
    pub map: Option<MirrorMap>,
    pub kernel: KernelConfig,
    pub spectral: Option<HermiteKernel>,
    pub stepper: StepperConfig,
    pub n: usize,
    pub iterations: usize,
    /// `None` picks the domain default.
    pub init: Option<InitSpec>,
    pub seed: u64,
    /// Hooks run at iteration 0, every `cadence` iterations and at the end.
    pub cadence: usize,
}

/// Particle clouds handed to metric hooks.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a> {
    pub iteration: usize,
    pub primal: ArrayView2<'a, f64>,
    pub dual: Option<ArrayView2<'a, f64>>,
}

pub trait MetricHook: Sync {
    fn name(&self) -> String;
    fn evaluate(&self, snap: &Snapshot) -> Result<f64>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub metric: String,
    pub value: f64,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trace: Vec<TraceRow>,
    pub initial: Array2<f64>,
    pub primal: Array2<f64>,
    pub dual: Option<Array2<f64>>,
    pub iterations: usize,
}

impl RunRecord {
    /// Last recorded value of a metric.
    pub fn final_metric(&self, name: &str) -> Option<f64> {
        self.trace.iter().rev().find(|r| r.metric == name).map(|r| r.value)
    }

    pub fn metric_series(&self, name: &str) -> Vec<(usize, f64)> {
        self.trace
            .iter()
            .filter(|r| r.metric == name)
            .map(|r| (r.iteration, r.value))
            .collect()
    }
}

impl RunSpec {
    /// Checks every sampler/target/stepper combination rule, collecting all
    /// violations.
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
        let coin_stepper = self.stepper.is_coin();
        match self.sampler {
            s if s.is_coin() && !coin_stepper => v.push(ConfigViolation::new(
                "stepper",
                format!("{} requires a coin stepper", s.name()),
            )),
            SamplerKind::Mla => {
                if !matches!(self.stepper, StepperConfig::FixedLr { .. }) {
                    v.push(ConfigViolation::new("stepper", "mla requires a fixed step size"));
                }
            }
            s if !s.is_coin() && coin_stepper => v.push(ConfigViolation::new(
                "stepper",
                format!("{} requires a learning rate; use the coin variant instead", s.name()),
            )),
            _ => {}
        }
        let domain = self.target.domain();
        if self.sampler.is_projected() {
            if self.map.is_some() {
                v.push(ConfigViolation::new("map", "projected samplers work in the primal space"));
            }
        } else {
            let map = self.map.or_else(|| domain.mirror_map());
            match map {
                None => v.push(ConfigViolation::new(
                    "map",
                    format!("target {} has no mirror map", self.target.name()),
                )),
                Some(m) => {
                    if let Err(Error::Config(mut e)) = MirroredTarget::new(self.target.clone(), m) {
                        v.append(&mut e);
                    }
                }
            }
        }
        if matches!(self.sampler, SamplerKind::Mlawgd | SamplerKind::CoinMlawgd) {
            if self.spectral.is_none() {
                v.push(ConfigViolation::new("spectral", "mlawgd needs a spectral kernel"));
            }
            if !matches!(self.target, ConstrainedTarget::LogNormal { dim: 1 }) {
                v.push(ConfigViolation::new(
                    "target",
                    "the Hermite spectral kernel assumes a 1-D standard Gaussian dual target (lognormal, dim 1)",
                ));
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

fn numeric(iteration: usize, e: Error) -> Error {
    match e {
        Error::NumericFailure { .. } | Error::Config(_) => e,
        other => Error::NumericFailure {
            iteration,
            reason: other.to_string(),
        },
    }
}

fn record(
    trace: &mut Vec<TraceRow>,
    hooks: &[&dyn MetricHook],
    snap: &Snapshot,
    start: &Instant,
) -> Result<()> {
    for hook in hooks {
        let value = hook.evaluate(snap).map_err(|e| numeric(snap.iteration, e))?;
        trace.push(TraceRow {
            iteration: snap.iteration,
            metric: hook.name(),
            value,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    Ok(())
}

fn snap(iteration: usize, xs: &Array2<f64>) -> Snapshot<'_> {
    Snapshot { iteration, primal: xs.view(), dual: None }
}

fn to_primal(map: &MirrorMap, ys: &Array2<f64>, iteration: usize) -> Result<Array2<f64>> {
    let mut xs = Array2::zeros(ys.dim());
    for (i, row) in ys.rows().into_iter().enumerate() {
        let jet = map.jet(&row.to_vec()).map_err(|e| numeric(iteration, e))?;
        if !jet.is_strictly_interior() {
            return Err(Error::NumericFailure {
                iteration,
                reason: format!("particle {i} left the domain interior"),
            });
        }
        xs.row_mut(i).assign(&ndarray::ArrayView1::from(jet.x()));
    }
    Ok(xs)
}

fn check_finite(c: &Array2<f64>, iteration: usize) -> Result<()> {
    if c.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericFailure {
            iteration,
            reason: "non-finite update direction".into(),
        })
    }
}

/// Executes `spec.iterations` steps of the configured sampler.
pub fn run(spec: &RunSpec, hooks: &[&dyn MetricHook]) -> Result<RunRecord> {
    spec.validate()?;
    let start = Instant::now();
    let domain = spec.target.domain();
    let init = spec.init.unwrap_or_else(|| InitSpec::default_for(&domain));
    let mut init_rng = substream(spec.seed, TAG_INIT, 0);
    let mut trace = Vec::new();

    if spec.sampler.is_projected() {
        let (x0, _) = init.draw(&domain, None, spec.n, &mut init_rng)?;
        let mut xs = x0.clone();
        let mut stepper = Stepper::new(&spec.stepper, &x0);
        record(&mut trace, hooks, &snap(0, &xs), &start)?;
        for t in 1..=spec.iterations {
            if !stepper.take_free_step() {
                let h = spec.kernel.resolve(xs.view()).map_err(|e| numeric(t, e))?;
                let c = svgd_direction(xs.view(), &spec.target, spec.kernel.family, h).map_err(|e| numeric(t, e))?;
                check_finite(&c, t)?;
                stepper.advance(&mut xs, c.view());
                for mut row in xs.rows_mut() {
                    let p = project_to_domain(&domain, &row.to_vec());
                    row.assign(&ndarray::ArrayView1::from(&p));
                }
            }
            if t % spec.cadence == 0 || t == spec.iterations {
                record(&mut trace, hooks, &snap(t, &xs), &start)?;
            }
        }
        return Ok(RunRecord {
            trace,
            initial: x0,
            primal: xs,
            dual: None,
            iterations: spec.iterations,
        });
    }

    let map = spec.map.or_else(|| domain.mirror_map()).expect("validated");
    let mt = MirroredTarget::new(spec.target.clone(), map)?;
    let (x0, y0) = init.draw(&domain, Some(&map), spec.n, &mut init_rng)?;
    let mut ys = y0.expect("mirror map given");
    let mut xs = x0.clone();
    let mut stepper = Stepper::new(&spec.stepper, &ys);
    let mut noise_rng = substream(spec.seed, TAG_LANGEVIN, 0);
    record(
        &mut trace,
        hooks,
        &Snapshot { iteration: 0, primal: xs.view(), dual: Some(ys.view()) },
        &start,
    )?;
    for t in 1..=spec.iterations {
        if spec.sampler == SamplerKind::Mla {
            let h = spec.stepper.lr().expect("validated");
            ys = mla_step(&ys, &mt, h, &mut noise_rng).map_err(|e| numeric(t, e))?;
        } else if !stepper.take_free_step() {
            let c = match spec.sampler {
                SamplerKind::Msvgd | SamplerKind::CoinMsvgd => {
                    let h = spec.kernel.resolve(ys.view()).map_err(|e| numeric(t, e))?;
                    let jets = mt.jets(ys.view()).map_err(|e| numeric(t, e))?;
                    let scores = jets
                        .iter()
                        .map(|j| mt.dual_score_jet(j))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| numeric(t, e))?;
                    msvgd_from_parts(&jets, &scores, spec.kernel.family, h)
                }
                SamplerKind::Mksdd | SamplerKind::CoinMksdd => {
                    let h = spec.kernel.resolve(ys.view()).map_err(|e| numeric(t, e))?;
                    let pts = stein_points(ys.view(), &mt).map_err(|e| numeric(t, e))?;
                    mksdd_from_points(&pts, spec.kernel.family, h)
                }
                SamplerKind::Mlawgd | SamplerKind::CoinMlawgd => {
                    mlawgd_direction(ys.view(), spec.spectral.as_ref().expect("validated"))
                        .map_err(|e| numeric(t, e))?
                }
                _ => unreachable!("projected samplers handled above"),
            };
            check_finite(&c, t)?;
            stepper.advance(&mut ys, c.view());
        }
        xs = to_primal(&map, &ys, t)?;
        if t % spec.cadence == 0 || t == spec.iterations {
            record(
                &mut trace,
                hooks,
                &Snapshot { iteration: t, primal: xs.view(), dual: Some(ys.view()) },
                &start,
            )?;
        }
    }
    Ok(RunRecord {
        trace,
        initial: x0,
        primal: xs,
        dual: Some(ys),
        iterations: spec.iterations,
    })
}
