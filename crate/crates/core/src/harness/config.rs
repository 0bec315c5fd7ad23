//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment, dotted keys group related
//! settings (`target.dim`, `stepper.guard`, ...). Lists are comma separated.
//! Every problem found is reported, not just the first.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::coin::CoinGuard;
use crate::error::{ConfigViolation, Error, Result};
use crate::geometry::MirrorMap;
use crate::kernels::{Bandwidth, KernelConfig, KernelFamily};
use crate::mied::{Mollifier, MollifierFamily, Reparam};
use crate::rng::{substream, TAG_PROBLEM};
use crate::samplers::{HermiteKernel, InitSpec, SamplerKind, StepperConfig};
use crate::targets::{ConstrainedTarget, SelectiveLasso};

#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    SparseDirichlet { alpha: Vec<f64>, counts: Vec<f64> },
    /// Random PSD matrix drawn from the problem stream of `problem_seed`.
    QuadraticSimplex { dim: usize, sigma: f64, problem_seed: u64 },
    UniformBox { dim: usize, lo: f64, hi: f64 },
    /// Synthetic randomized-Lasso selection drawn from the problem stream.
    SelectiveLasso { n: usize, p: usize, rho: f64, lambda: f64, tau: f64, problem_seed: u64 },
    Exponential { dim: usize },
    LogNormal { dim: usize },
}

impl TargetSpec {
    pub fn build(&self) -> Result<ConstrainedTarget> {
        match self {
            TargetSpec::SparseDirichlet { alpha, counts } => {
                ConstrainedTarget::sparse_dirichlet(alpha.clone(), counts.clone())
            }
            TargetSpec::QuadraticSimplex { dim, sigma, problem_seed } => {
                ConstrainedTarget::random_quadratic(*dim, *sigma, &mut substream(*problem_seed, TAG_PROBLEM, 0))
            }
            TargetSpec::UniformBox { dim, lo, hi } => ConstrainedTarget::uniform_box(*dim, *lo, *hi),
            TargetSpec::SelectiveLasso { n, p, rho, lambda, tau, problem_seed } => {
                let mut rng = substream(*problem_seed, TAG_PROBLEM, 0);
                let l = SelectiveLasso::synthetic(*n, *p, *rho, *lambda, *tau, &mut rng)?;
                Ok(ConstrainedTarget::SelectiveLasso(Box::new(l)))
            }
            TargetSpec::Exponential { dim } => Ok(ConstrainedTarget::Exponential { dim: *dim }),
            TargetSpec::LogNormal { dim } => Ok(ConstrainedTarget::LogNormal { dim: *dim }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerChoice {
    Particle(SamplerKind),
    Mied,
    CoinMied,
}

impl SamplerChoice {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "mied" => Some(SamplerChoice::Mied),
            "coin_mied" => Some(SamplerChoice::CoinMied),
            other => SamplerKind::parse(other).map(SamplerChoice::Particle),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerChoice::Particle(k) => k.name(),
            SamplerChoice::Mied => "mied",
            SamplerChoice::CoinMied => "coin_mied",
        }
    }

    pub fn is_coin(&self) -> bool {
        match self {
            SamplerChoice::Particle(k) => k.is_coin(),
            SamplerChoice::Mied => false,
            SamplerChoice::CoinMied => true,
        }
    }

    pub fn coin_counterpart(&self) -> Option<Self> {
        match self {
            SamplerChoice::Particle(k) => k.coin_counterpart().map(SamplerChoice::Particle),
            SamplerChoice::Mied => Some(SamplerChoice::CoinMied),
            SamplerChoice::CoinMied => None,
        }
    }
}

/// Mirror map family; the dimension comes from the built target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    EntropicSimplex,
    PositiveOrthant,
}

impl MapKind {
    pub fn with_dim(&self, dim: usize) -> MirrorMap {
        match self {
            MapKind::EntropicSimplex => MirrorMap::EntropicSimplex { dim },
            MapKind::PositiveOrthant => MirrorMap::PositiveOrthant { dim },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruthSource {
    Builtin { n: usize, seed: Option<u64> },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    EnergyDistance,
    Ksd,
    Mean,
}

impl MetricKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "energy_distance" => Some(MetricKind::EnergyDistance),
            "ksd" => Some(MetricKind::Ksd),
            "mean" => Some(MetricKind::Mean),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub sampler: SamplerChoice,
    pub map: Option<MapKind>,
    pub kernel: KernelConfig,
    pub spectral: Option<HermiteKernel>,
    pub mollifier: Option<Mollifier>,
    pub reparam: Option<Reparam>,
    pub stepper: StepperConfig,
    pub n: usize,
    pub iterations: usize,
    pub seed: u64,
    pub cadence: usize,
    pub init: Option<InitSpec>,
    pub ground_truth: GroundTruthSource,
    /// `None`: energy distance whenever ground truth is available.
    pub metrics: Option<Vec<MetricKind>>,
    pub out: Option<PathBuf>,
    /// Effective key/value pairs after overrides, echoed into metadata.
    pub echo: BTreeMap<String, String>,
}

struct Fields {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
    errs: Vec<ConfigViolation>,
}

impl Fields {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.map.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn bad(&mut self, key: &str, reason: impl Into<String>) {
        self.errs.push(ConfigViolation::new(key, reason));
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<T> {
        let raw = self.raw(key)?;
        match raw.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.bad(key, format!("expected {what}, got {raw:?}"));
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.parsed::<f64>(key, "a number").unwrap_or(default)
    }

    fn positive(&mut self, key: &str, default: f64) -> f64 {
        let v = self.f64_or(key, default);
        if !(v.is_finite() && v > 0.0) {
            self.bad(key, format!("must be positive, got {v}"));
            return default;
        }
        v
    }

    fn usize_or(&mut self, key: &str, default: usize) -> usize {
        self.parsed::<usize>(key, "a non-negative integer").unwrap_or(default)
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let raw = self.raw(key)?;
        let parsed: std::result::Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) => Some(v),
            Err(_) => {
                self.bad(key, format!("expected a comma-separated list of numbers, got {raw:?}"));
                None
            }
        }
    }
}

/// Splits the text into key/value pairs.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut errs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errs.push(ConfigViolation::new(format!("line {}", no + 1), "expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if k.is_empty() {
            errs.push(ConfigViolation::new(format!("line {}", no + 1), "empty key"));
        } else if map.insert(k.clone(), v).is_some() {
            errs.push(ConfigViolation::new(k, "key given more than once"));
        }
    }
    if errs.is_empty() {
        Ok(map)
    } else {
        Err(Error::Config(errs))
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, &[])
}

/// Parses `text` after replacing or adding the `overrides` pairs.
pub fn parse_config_with(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut map = parse_pairs(text)?;
    for (k, v) in overrides {
        map.insert(k.clone(), v.clone());
    }
    from_pairs(map)
}

pub fn from_pairs(map: BTreeMap<String, String>) -> Result<ExperimentConfig> {
    let echo = map.clone();
    let mut f = Fields {
        map,
        used: BTreeSet::new(),
        errs: Vec::new(),
    };

    let sampler = match f.raw("sampler") {
        None => {
            f.bad("sampler", "missing");
            None
        }
        Some(name) => {
            let s = SamplerChoice::parse(&name);
            if s.is_none() {
                f.bad("sampler", format!("unknown sampler {name:?}"));
            }
            s
        }
    };
    let target = parse_target(&mut f);
    let dim = target.as_ref().map(target_dim);

    let coin = sampler.map_or(false, |s| s.is_coin());
    for key in ["lr", "stepper.lr"] {
        if coin && f.has(key) {
            f.raw(key);
            f.bad(key, "learning-rate key forbidden for coin steppers");
        }
    }
    let stepper = parse_stepper(&mut f, sampler);

    let map = match f.raw("map").as_deref() {
        None => None,
        Some("entropic_simplex") => Some(MapKind::EntropicSimplex),
        Some("positive_orthant") => Some(MapKind::PositiveOrthant),
        Some(other) => {
            f.bad("map", format!("unknown mirror map {other:?}"));
            None
        }
    };

    let family = match f.raw("kernel").as_deref() {
        None | Some("imq") => KernelFamily::Imq,
        Some("rbf") => KernelFamily::Rbf,
        Some(other) => {
            f.bad("kernel", format!("unknown kernel {other:?}"));
            KernelFamily::Imq
        }
    };
    let bandwidth = match f.raw("kernel.bandwidth").as_deref() {
        None | Some("median") => Bandwidth::MedianHeuristic,
        Some(v) => match v.parse::<f64>() {
            Ok(h) if h.is_finite() && h > 0.0 => Bandwidth::Fixed(h),
            _ => {
                f.bad("kernel.bandwidth", format!("expected `median` or a positive number, got {v:?}"));
                Bandwidth::MedianHeuristic
            }
        },
    };
    let kernel = KernelConfig { family, bandwidth };

    let spectral = if matches!(
        sampler,
        Some(SamplerChoice::Particle(SamplerKind::Mlawgd | SamplerKind::CoinMlawgd))
    ) {
        let terms = f.usize_or("spectral.terms", 30);
        match HermiteKernel::new(terms) {
            Ok(k) => Some(k),
            Err(_) => {
                f.bad("spectral.terms", "need at least one term");
                None
            }
        }
    } else {
        None
    };

    let is_mied = matches!(sampler, Some(SamplerChoice::Mied | SamplerChoice::CoinMied));
    let (mollifier, reparam) = if is_mied {
        parse_mied(&mut f, target.as_ref(), dim)
    } else {
        (None, None)
    };

    let n = f.usize_or("n", 50);
    if n == 0 {
        f.bad("n", "need at least one particle");
    }
    let iterations = f.usize_or("iterations", 500);
    let seed = f.parsed::<u64>("seed", "a 64-bit unsigned integer").unwrap_or(0);
    let cadence = f.usize_or("metrics.cadence", 10);
    if cadence == 0 {
        f.bad("metrics.cadence", "must be at least 1");
    }
    let init = parse_init(&mut f);

    let ground_truth = match f.raw("ground_truth").as_deref() {
        None | Some("builtin") => GroundTruthSource::Builtin {
            n: f.usize_or("ground_truth.n", 1000),
            seed: f.parsed::<u64>("ground_truth.seed", "a 64-bit unsigned integer"),
        },
        Some(path) => GroundTruthSource::File(PathBuf::from(path)),
    };
    let metrics = f.raw("metrics").map(|raw| {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .filter_map(|s| {
                let m = MetricKind::parse(s);
                if m.is_none() {
                    f.errs.push(ConfigViolation::new("metrics", format!("unknown metric {s:?}")));
                }
                m
            })
            .collect()
    });
    let out = f.raw("out").map(PathBuf::from);

    let unknown: Vec<String> = f.map.keys().filter(|k| !f.used.contains(*k)).cloned().collect();
    for k in unknown {
        f.bad(&k, "unknown key or not used by this sampler/target");
    }

    if !f.errs.is_empty() {
        return Err(Error::Config(f.errs));
    }
    Ok(ExperimentConfig {
        target: target.expect("validated"),
        sampler: sampler.expect("validated"),
        map,
        kernel,
        spectral,
        mollifier,
        reparam,
        stepper: stepper.expect("validated"),
        n,
        iterations,
        seed,
        cadence,
        init,
        ground_truth,
        metrics,
        out,
        echo,
    })
}

fn target_dim(t: &TargetSpec) -> usize {
    match t {
        TargetSpec::SparseDirichlet { alpha, .. } => alpha.len().saturating_sub(1),
        TargetSpec::QuadraticSimplex { dim, .. }
        | TargetSpec::UniformBox { dim, .. }
        | TargetSpec::Exponential { dim }
        | TargetSpec::LogNormal { dim } => *dim,
        // Resolved only after the selection step; placeholder for map parsing.
        TargetSpec::SelectiveLasso { .. } => 0,
    }
}

fn parse_target(f: &mut Fields) -> Option<TargetSpec> {
    let name = match f.raw("target") {
        Some(n) => n,
        None => {
            f.bad("target", "missing");
            return None;
        }
    };
    let dim_key = "target.dim";
    let problem_seed = f.parsed::<u64>("target.seed", "a 64-bit unsigned integer");
    let spec = match name.as_str() {
        "sparse_dirichlet" => {
            let dim = f.usize_or(dim_key, 20);
            let k = dim + 1;
            let alpha = match f.list("target.alpha") {
                None => vec![0.1; k],
                Some(v) if v.len() == 1 => vec![v[0]; k],
                Some(v) if v.len() == k => v,
                Some(v) => {
                    f.bad("target.alpha", format!("need 1 or {k} values, got {}", v.len()));
                    return None;
                }
            };
            let mut counts = f.list("target.counts").unwrap_or_else(|| vec![90.0, 5.0, 5.0]);
            if counts.len() > k {
                f.bad("target.counts", format!("at most {k} values for dim {dim}"));
                return None;
            }
            counts.resize(k, 0.0);
            TargetSpec::SparseDirichlet { alpha, counts }
        }
        "quadratic_simplex" => TargetSpec::QuadraticSimplex {
            dim: f.usize_or(dim_key, 20),
            sigma: f.positive("target.sigma", 0.1),
            problem_seed: problem_seed.unwrap_or(0),
        },
        "uniform_box" => {
            let lo = f.f64_or("target.lo", -1.0);
            let hi = f.f64_or("target.hi", 1.0);
            if !(lo < hi) {
                f.bad("target.hi", format!("need lo < hi, got [{lo}, {hi}]"));
            }
            TargetSpec::UniformBox {
                dim: f.usize_or(dim_key, 2),
                lo,
                hi,
            }
        }
        "selective_lasso" => TargetSpec::SelectiveLasso {
            n: f.usize_or("target.n", 100),
            p: f.usize_or("target.p", 20),
            rho: f.f64_or("target.rho", 0.3),
            lambda: f.positive("target.lambda", 1.0),
            tau: f.positive("target.tau", 1.0),
            problem_seed: problem_seed.unwrap_or(0),
        },
        "exponential" => TargetSpec::Exponential { dim: f.usize_or(dim_key, 2) },
        "lognormal" => TargetSpec::LogNormal { dim: f.usize_or(dim_key, 1) },
        other => {
            f.bad("target", format!("unknown target {other:?}"));
            return None;
        }
    };
    if target_dim(&spec) == 0 && !matches!(spec, TargetSpec::SelectiveLasso { .. }) {
        f.bad(dim_key, "dimension must be at least 1");
    }
    if problem_seed.is_some() && !matches!(spec, TargetSpec::QuadraticSimplex { .. } | TargetSpec::SelectiveLasso { .. }) {
        f.bad("target.seed", "only random problem instances take a seed");
    }
    Some(spec)
}

fn parse_stepper(f: &mut Fields, sampler: Option<SamplerChoice>) -> Option<StepperConfig> {
    let sampler = sampler?;
    let default = if sampler.is_coin() {
        "coin_adaptive"
    } else if sampler == SamplerChoice::Particle(SamplerKind::Mla) {
        "fixed"
    } else {
        "rmsprop"
    };
    let kind = f.raw("stepper").unwrap_or_else(|| default.to_string());
    let lr = |f: &mut Fields| -> f64 {
        let key = if f.has("stepper.lr") { "stepper.lr" } else { "lr" };
        if !f.has(key) {
            f.bad("lr", format!("stepper {kind} needs a learning rate"));
            return 1.0;
        }
        f.positive(key, 1.0)
    };
    let st = match kind.as_str() {
        "fixed" => StepperConfig::FixedLr { lr: lr(f) },
        "rmsprop" => StepperConfig::RmsProp { lr: lr(f) },
        "coin_kt" => StepperConfig::CoinKt {
            scale: f.parsed::<f64>("stepper.scale", "a positive number"),
        },
        "coin_adaptive" => {
            let guard = match f.raw("stepper.guard").as_deref() {
                None | Some("none") => CoinGuard::None,
                Some("max100l") => CoinGuard::Max100L,
                Some(other) => {
                    f.bad("stepper.guard", format!("expected `none` or `max100l`, got {other:?}"));
                    CoinGuard::None
                }
            };
            StepperConfig::CoinAdaptive { guard }
        }
        other => {
            f.bad("stepper", format!("unknown stepper {other:?}"));
            return None;
        }
    };
    if st.is_coin() != sampler.is_coin() {
        f.bad(
            "stepper",
            format!("stepper {kind} does not fit sampler {}", sampler.name()),
        );
    }
    if let Err(Error::Config(mut e)) = st.validate() {
        f.errs.append(&mut e);
    }
    Some(st)
}

fn parse_mied(f: &mut Fields, target: Option<&TargetSpec>, dim: Option<usize>) -> (Option<Mollifier>, Option<Reparam>) {
    let eps = f.positive("mollifier.eps", 1e-8);
    let family = match f.raw("mollifier").as_deref() {
        None | Some("riesz") => {
            let s = f.positive("mollifier.s", dim.unwrap_or(1) as f64 + 1e-4);
            MollifierFamily::Riesz { s }
        }
        Some("gaussian") => MollifierFamily::Gaussian,
        Some("laplace") => MollifierFamily::Laplace,
        Some(other) => {
            f.bad("mollifier", format!("unknown mollifier {other:?}"));
            return (None, None);
        }
    };
    let reparam = match (f.raw("reparam").as_deref(), target) {
        (None | Some("tanh"), Some(TargetSpec::UniformBox { lo, hi, .. })) => Some(Reparam::TanhBox { lo: *lo, hi: *hi }),
        (None | Some("tanh"), Some(_)) => {
            f.bad("reparam", "tanh reparameterisation needs a box target");
            None
        }
        (Some("identity"), _) => Some(Reparam::Identity),
        (Some(other), _) => {
            f.bad("reparam", format!("unknown reparameterisation {other:?}"));
            None
        }
        (_, None) => None,
    };
    (Mollifier::new(family, eps).ok(), reparam)
}

fn parse_init(f: &mut Fields) -> Option<InitSpec> {
    let kind = f.raw("init")?;
    match kind.as_str() {
        "dirichlet" => Some(InitSpec::Dirichlet {
            concentration: f.positive("init.concentration", 5.0),
        }),
        "uniform" => {
            let lo = f.f64_or("init.lo", -0.5);
            let hi = f.f64_or("init.hi", 0.5);
            if !(lo < hi) {
                f.bad("init.hi", format!("need lo < hi, got [{lo}, {hi}]"));
            }
            Some(InitSpec::Uniform { lo, hi })
        }
        "dual_normal" => {
            let mean = f.f64_or("init.mean", 0.0);
            let std = f.f64_or("init.std", 1.0);
            if !(std >= 0.0) {
                f.bad("init.std", "must be non-negative");
            }
            Some(InitSpec::DualNormal { mean, std })
        }
        other => {
            f.bad("init", format!("unknown init {other:?}"));
            None
        }
    }
}
