use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, GroundTruthSource, MetricKind, SamplerChoice, TargetSpec};
use super::io::{fmt_f64, read_matrix_csv, write_json, write_matrix_csv, write_trace_csv};
use crate::coin::CoinGuard;
use crate::error::{Error, Result};
use crate::metrics::{energy_distance, EnergyDistanceHook, KsdHook, MeanHook, MetricReport};
use crate::mied::{run_mied, Mollifier, MiedSpec};
use crate::rng::{substream, TAG_GROUND_TRUTH};
use crate::samplers::{run, MetricHook, RunRecord, RunSpec, StepperConfig};
use crate::targets::{ConstrainedTarget, MirroredTarget};

const RNG_NOTE: &str = "ChaCha20 keyed by SHA-256(seed LE || tag || 0x00 || index LE)";

/// Reference sample and a description of where it came from.
pub fn load_ground_truth(
    cfg: &ExperimentConfig,
    target: &ConstrainedTarget,
) -> Result<Option<(Array2<f64>, String)>> {
    match &cfg.ground_truth {
        GroundTruthSource::File(path) => {
            let m = read_matrix_csv(path)?;
            if m.ncols() != target.dim() {
                return Err(Error::Shape(format!(
                    "ground truth {} has {} columns, target has dimension {}",
                    path.display(),
                    m.ncols(),
                    target.dim()
                )));
            }
            Ok(Some((m, format!("file:{}", path.display()))))
        }
        GroundTruthSource::Builtin { n, seed } => {
            let mut rng = substream(seed.unwrap_or(cfg.seed), TAG_GROUND_TRUTH, 0);
            match target.sample_ground_truth(*n, &mut rng) {
                Ok(gt) => Ok(Some((gt.samples, gt.method))),
                Err(Error::Unsupported(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

/// Builds the target and hooks, then runs the configured sampler.
pub fn execute(cfg: &ExperimentConfig) -> Result<(RunRecord, Option<String>)> {
    let target = cfg.target.build()?;
    let wanted = cfg.metrics.clone();
    let need_gt = wanted.as_ref().map_or(true, |m| m.contains(&MetricKind::EnergyDistance));
    let gt = if need_gt { load_ground_truth(cfg, &target)? } else { None };
    if gt.is_none() && wanted.as_ref().is_some_and(|m| m.contains(&MetricKind::EnergyDistance)) {
        return Err(Error::Unsupported(format!(
            "no built-in ground truth for target {}; set ground_truth to a sample file",
            target.name()
        )));
    }
    let metrics = wanted.unwrap_or_else(|| if gt.is_some() { vec![MetricKind::EnergyDistance] } else { vec![] });

    let mut owned: Vec<Box<dyn MetricHook>> = Vec::new();
    for m in &metrics {
        match m {
            MetricKind::EnergyDistance => {
                let (samples, _) = gt.as_ref().expect("checked above");
                owned.push(Box::new(EnergyDistanceHook::new(samples)?));
            }
            MetricKind::Ksd => {
                let map = match (cfg.sampler, cfg.map) {
                    (SamplerChoice::Particle(k), _) if k.is_projected() => None,
                    (SamplerChoice::Particle(_), Some(kind)) => Some(kind.with_dim(target.dim())),
                    (SamplerChoice::Particle(_), None) => target.domain().mirror_map(),
                    _ => None,
                };
                let map = map.ok_or_else(|| Error::config("metrics", "ksd needs a mirrored sampler"))?;
                owned.push(Box::new(KsdHook {
                    target: MirroredTarget::new(target.clone(), map)?,
                    kernel: cfg.kernel,
                }));
            }
            MetricKind::Mean => {
                for c in 0..target.dim() {
                    owned.push(Box::new(MeanHook { coordinate: c }));
                }
            }
        }
    }
    let hooks: Vec<&dyn MetricHook> = owned.iter().map(|b| b.as_ref()).collect();

    let record = match cfg.sampler {
        SamplerChoice::Particle(kind) => run(
            &RunSpec {
                sampler: kind,
                map: cfg.map.map(|m| m.with_dim(target.dim())),
                target,
                kernel: cfg.kernel,
                spectral: cfg.spectral,
                stepper: cfg.stepper,
                n: cfg.n,
                iterations: cfg.iterations,
                init: cfg.init,
                seed: cfg.seed,
                cadence: cfg.cadence,
            },
            &hooks,
        )?,
        SamplerChoice::Mied | SamplerChoice::CoinMied => run_mied(
            &MiedSpec {
                reparam: cfg.reparam.ok_or_else(|| Error::config("reparam", "missing"))?,
                mollifier: match cfg.mollifier {
                    Some(m) => m,
                    None => Mollifier::riesz_for_dim(target.dim(), 1e-8)?,
                },
                target,
                stepper: cfg.stepper,
                n: cfg.n,
                iterations: cfg.iterations,
                init: cfg.init,
                seed: cfg.seed,
                cadence: cfg.cadence,
            },
            &hooks,
        )?,
    };
    Ok((record, gt.map(|(_, method)| method)))
}

fn meta(cfg: &ExperimentConfig, status: Value, extra: Value, wall_ms: f64) -> Value {
    json!({
        "config": cfg.echo,
        "sampler": cfg.sampler.name(),
        "seed": cfg.seed,
        "n": cfg.n,
        "iterations": cfg.iterations,
        "version": env!("CARGO_PKG_VERSION"),
        "rng": RNG_NOTE,
        "status": status,
        "result": extra,
        "wall_time_ms": wall_ms,
    })
}

/// Runs one experiment and writes `particles_final.csv`, `trace.csv` and
/// `meta.json` into `out`.
pub fn cmd_sample(cfg: &ExperimentConfig, out: &Path) -> Result<RunRecord> {
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    match execute(cfg) {
        Ok((record, gt)) => {
            write_matrix_csv(&out.join("particles_final.csv"), &record.primal)?;
            if let Some(y) = &record.dual {
                write_matrix_csv(&out.join("particles_final_dual.csv"), y)?;
            }
            write_trace_csv(&out.join("trace.csv"), &record.trace)?;
            let mut finals = serde_json::Map::new();
            for row in &record.trace {
                finals.insert(row.metric.clone(), json!(fmt_f64(row.value)));
            }
            let extra = json!({ "ground_truth": gt, "final_metrics": finals });
            write_json(&out.join("meta.json"), &meta(cfg, json!("ok"), extra, start.elapsed().as_secs_f64() * 1e3))?;
            Ok(record)
        }
        Err(e) => {
            if let Error::NumericFailure { iteration, reason } = &e {
                let status = json!({ "numeric_failure": { "iteration": iteration, "reason": reason } });
                write_json(&out.join("meta.json"), &meta(cfg, status, Value::Null, start.elapsed().as_secs_f64() * 1e3))?;
            }
            Err(e)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sampler: String,
    /// `None` for the learning-rate-free reference runs.
    pub lr: Option<f64>,
    pub seed: u64,
    /// Final energy distance; `None` if the sub-run failed.
    pub final_metric: Option<f64>,
    pub status: String,
}

fn with_lr(st: StepperConfig, lr: f64) -> StepperConfig {
    match st {
        StepperConfig::FixedLr { .. } => StepperConfig::FixedLr { lr },
        _ => StepperConfig::RmsProp { lr },
    }
}

/// One baseline run per `(lr, seed)` and one coin run per seed, written to
/// `out/sweep.csv` ordered by sampler, learning rate and seed.
pub fn cmd_sweep(cfg: &ExperimentConfig, lrs: &[f64], seeds: &[u64], out: &Path) -> Result<Vec<SweepRow>> {
    if cfg.sampler.is_coin() {
        return Err(Error::config("sampler", "a sweep needs a learning-rate baseline sampler"));
    }
    let coin = cfg
        .sampler
        .coin_counterpart()
        .ok_or_else(|| Error::config("sampler", format!("{} has no coin counterpart", cfg.sampler.name())))?;
    if let Some(bad) = lrs.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::config("lrs", format!("learning rates must be positive, got {bad}")));
    }
    // Every sub-run scores against ground truth.
    let target = cfg.target.build()?;
    if load_ground_truth(cfg, &target)?.is_none() {
        return Err(Error::Unsupported(format!(
            "no built-in ground truth for target {}; set ground_truth to a sample file",
            target.name()
        )));
    }
    std::fs::create_dir_all(out)?;

    let mut jobs: Vec<(ExperimentConfig, Option<f64>)> = Vec::new();
    for &seed in seeds {
        for &lr in lrs {
            let mut c = cfg.clone();
            c.seed = seed;
            c.stepper = with_lr(cfg.stepper, lr);
            c.metrics = Some(vec![MetricKind::EnergyDistance]);
            jobs.push((c, Some(lr)));
        }
        let mut c = cfg.clone();
        c.seed = seed;
        c.sampler = coin;
        c.stepper = StepperConfig::CoinAdaptive { guard: CoinGuard::None };
        c.metrics = Some(vec![MetricKind::EnergyDistance]);
        jobs.push((c, None));
    }
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|(c, lr)| {
            let (final_metric, status) = match execute(c) {
                Ok((rec, _)) => (rec.final_metric(EnergyDistanceHook::NAME), "ok".to_string()),
                Err(Error::NumericFailure { iteration, .. }) => (None, format!("numeric_failure@{iteration}")),
                Err(e) => (None, format!("error: {e}")),
            };
            SweepRow {
                sampler: c.sampler.name().to_string(),
                lr: *lr,
                seed: c.seed,
                final_metric,
                status,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.sampler
            .cmp(&b.sampler)
            .then(match (a.lr, b.lr) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (x, y) => x.is_none().cmp(&y.is_none()),
            })
            .then(a.seed.cmp(&b.seed))
    });

    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    w.write_record(["sampler", "lr", "seed", "final_metric", "status"])?;
    for r in &rows {
        w.write_record([
            r.sampler.clone(),
            r.lr.map_or("NA".to_string(), |v| v.to_string()),
            r.seed.to_string(),
            r.final_metric.map_or("NA".to_string(), fmt_f64),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}

/// Writes `n` reference draws to `out` and a `<out>.meta.json` sidecar.
pub fn cmd_ground_truth(target: &TargetSpec, n: usize, seed: u64, out: &Path) -> Result<Array2<f64>> {
    let t = target.build()?;
    let gt = t.sample_ground_truth(n, &mut substream(seed, TAG_GROUND_TRUTH, 0))?;
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_matrix_csv(out, &gt.samples)?;
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".meta.json");
    write_json(
        &PathBuf::from(sidecar),
        &json!({
            "target": t.name(),
            "n": n,
            "seed": seed,
            "method": gt.method,
            "rng": RNG_NOTE,
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )?;
    Ok(gt.samples)
}

/// Energy distance between two sample files; optionally appended as a row
/// to `out`.
pub fn cmd_metrics(a: &Path, b: &Path, out: Option<&Path>) -> Result<MetricReport> {
    let (ma, mb) = (read_matrix_csv(a)?, read_matrix_csv(b)?);
    let value = energy_distance(ma.view(), mb.view())?;
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("a".to_string(), a.display().to_string());
    metadata.insert("b".to_string(), b.display().to_string());
    let report = MetricReport {
        name: "energy_distance".into(),
        value,
        n_a: ma.nrows(),
        n_b: mb.nrows(),
        metadata,
    };
    if let Some(path) = out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "value", "n_a", "n_b", "a", "b"])?;
        w.write_record([
            report.name.clone(),
            fmt_f64(report.value),
            report.n_a.to_string(),
            report.n_b.to_string(),
            a.display().to_string(),
            b.display().to_string(),
        ])?;
        w.flush()?;
    }
    Ok(report)
}
