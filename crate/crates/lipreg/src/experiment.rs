//! Synthetic consistency experiments: draw samples from a generator, fit by
//! empirical risk minimization at a scheduled Lipschitz budget, and measure
//! held-out risk of the approximate extension on fresh draws.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use lipreg_core::bounds::{self, BoundParams, Loss};
use lipreg_core::extension::build_predictor;
use lipreg_core::net::estimate_ddim;
use lipreg_core::spanner::build_spanner;
use lipreg_core::srm::{empirical_risk, search_r, SearchContext};
use lipreg_core::{Dataset, Discrete, Metric, Minkowski, Norm, Torus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sample space. Coordinates are uniform on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// The unit-circumference circle with arc-length distance.
    Cycle,
    /// `[0, 1)^dim` with wrap-around ℓ2 distance.
    Torus { dim: usize },
    /// `[0, 1]^dim` under an ℓp norm.
    Cube { dim: usize, norm: Norm },
    /// `size` points at mutual distance 1.
    Uniform { size: usize },
}

/// Regression function. `Smooth` and `Linear` are 1-Lipschitz in the raw
/// metric of every generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `0.5 + 0.25 sin(4x₁)` on the cube, `0.5 + 0.15 sin(2πθ₁)` on the cycle
    /// and torus, an evenly spaced table on the uniform metric.
    Smooth,
    /// `x₁` on the cube, `min(θ₁, 1 − θ₁)` on the cycle and torus.
    Linear,
    /// Labels uniform on `[0, 1]`, independent of the point.
    Noise,
}

/// ERM accuracy used at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    Fixed(f64),
    /// `min(c·n^(-a), 1/4)` for `Power { c, a }`.
    Power { c: f64, a: f64 },
}

impl EtaRule {
    pub fn eta(self, n: usize) -> f64 {
        match self {
            EtaRule::Fixed(eta) => eta,
            EtaRule::Power { c, a } => (c * (n as f64).powf(-a)).min(0.25),
        }
    }
}

/// Lipschitz budget used at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LipschitzRule {
    /// `ln n`.
    Log,
    Fixed(f64),
}

impl LipschitzRule {
    pub fn budget(self, n: usize) -> f64 {
        match self {
            LipschitzRule::Log => (n as f64).ln(),
            LipschitzRule::Fixed(l) => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub target: Target,
    /// Half-width of the additive uniform label noise; labels are clamped
    /// to `[0, 1]`.
    pub noise: f64,
    /// Sample sizes, strictly increasing.
    pub schedule: Vec<usize>,
    /// Independent replicas per sample size.
    pub replicas: usize,
    pub seed: u64,
    pub rule: LipschitzRule,
    pub loss: Loss,
    pub eta: EtaRule,
    pub spanner_delta: f64,
    pub delta_conf: f64,
    pub test_draws: usize,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: Generator::Cube { dim: 1, norm: Norm::L2 },
            target: Target::Smooth,
            noise: 0.0,
            schedule: vec![50, 100, 200, 400, 800],
            replicas: 5,
            seed: 0,
            rule: LipschitzRule::Log,
            loss: Loss::Absolute,
            eta: EtaRule::Power { c: 4.0, a: 1.0 },
            spanner_delta: 0.25,
            delta_conf: 0.05,
            test_draws: 2000,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.schedule.is_empty() || self.schedule[0] == 0 {
            return Err("the n schedule must be non-empty and positive".into());
        }
        if self.schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err("the n schedule must be strictly increasing".into());
        }
        if self.replicas == 0 || self.test_draws == 0 {
            return Err("replicas and test draws must be positive".into());
        }
        if !(self.noise >= 0.0 && self.noise <= 1.0) {
            return Err(format!("noise {} outside [0, 1]", self.noise));
        }
        match self.eta {
            EtaRule::Fixed(eta) if !(eta > 0.0 && eta <= 0.25) => return Err(format!("eta {eta} outside (0, 1/4]")),
            EtaRule::Power { c, a } if !(c > 0.0 && c.is_finite() && a >= 0.0 && a.is_finite()) => {
                return Err(format!("eta schedule c = {c}, a = {a} is invalid"))
            }
            _ => {}
        }
        match self.generator {
            Generator::Torus { dim } | Generator::Cube { dim, .. } if dim == 0 => Err("dimension must be positive".into()),
            Generator::Uniform { size } if size < 2 => Err("the uniform metric needs at least 2 points".into()),
            _ => match self.rule {
                LipschitzRule::Fixed(l) if !(l >= 0.0 && l.is_finite()) => Err(format!("Lipschitz budget {l} is invalid")),
                _ => Ok(()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub replica: usize,
    pub eta: f64,
    pub lipschitz: f64,
    pub empirical_risk: f64,
    pub risk_bound: f64,
    pub test_risk: f64,
}

trait Family: Sync {
    type M: Metric<Point = Self::P> + Clone;
    type P: Clone;
    fn metric(&self) -> Self::M;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Self::P;
    fn target(&self, target: Target, x: &Self::P) -> f64;
}

struct Periodic {
    dim: usize,
}

impl Family for Periodic {
    type M = Torus;
    type P = Vec<f64>;

    fn metric(&self) -> Torus {
        Torus(Norm::L2)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen::<f64>()).collect()
    }

    fn target(&self, target: Target, x: &Vec<f64>) -> f64 {
        match target {
            Target::Smooth => 0.5 + 0.15 * (2.0 * std::f64::consts::PI * x[0]).sin(),
            Target::Linear => x[0].min(1.0 - x[0]),
            Target::Noise => 0.5,
        }
    }
}

struct Cube {
    dim: usize,
    norm: Norm,
}

impl Family for Cube {
    type M = Minkowski;
    type P = Vec<f64>;

    fn metric(&self) -> Minkowski {
        Minkowski(self.norm)
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim).map(|_| rng.gen::<f64>()).collect()
    }

    fn target(&self, target: Target, x: &Vec<f64>) -> f64 {
        match target {
            Target::Smooth => 0.5 + 0.25 * (4.0 * x[0]).sin(),
            Target::Linear => x[0],
            Target::Noise => 0.5,
        }
    }
}

struct UniformSpace {
    size: usize,
}

impl Family for UniformSpace {
    type M = Discrete;
    type P = usize;

    fn metric(&self) -> Discrete {
        Discrete
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.gen_range(0..self.size)
    }

    fn target(&self, target: Target, &x: &usize) -> f64 {
        let t = x as f64 / (self.size - 1) as f64;
        match target {
            Target::Smooth => 0.25 + 0.5 * t,
            Target::Linear => t,
            Target::Noise => 0.5,
        }
    }
}

fn label(cfg: &ExperimentConfig, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    match cfg.target {
        Target::Noise => rng.gen::<f64>(),
        _ if cfg.noise > 0.0 => (mean + cfg.noise * rng.gen_range(-1.0..=1.0)).clamp(0.0, 1.0),
        _ => mean,
    }
}

fn replica_rng(seed: u64, n: usize, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 24) | replica as u64);
    rng
}

fn run_replica<F: Family>(family: &F, cfg: &ExperimentConfig, n: usize, replica: usize) -> lipreg_core::Result<ExperimentRow> {
    let mut rng = replica_rng(cfg.seed, n, replica);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = family.draw(&mut rng);
        labels.push(label(cfg, family.target(cfg.target, &x), &mut rng));
        points.push(x);
    }
    let d = Dataset::new(family.metric(), points, labels)?.normalize_diameter()?;
    let lipschitz = cfg.rule.budget(n);
    let eta = cfg.eta.eta(n);
    let sp = build_spanner(&d, cfg.spanner_delta)?;
    let mut ctx = SearchContext::default();
    let found = search_r(&d, &sp, lipschitz, cfg.loss, eta, &mut ctx)?;
    let values = found.solution.values;
    let emp = empirical_risk(d.labels(), &values, cfg.loss);
    let ddim = if n >= 2 { estimate_ddim(&d) } else { 0.0 };
    let params = BoundParams::new(n as u64, lipschitz, cfg.loss, ddim, cfg.delta_conf, eta)?;
    let report = bounds::total_bound(emp.min(1.0), &params, eta)?;

    let predictor = build_predictor(&d, &values, eta)?;
    let mut test = 0.0;
    for _ in 0..cfg.test_draws {
        let x = family.draw(&mut rng);
        let y = label(cfg, family.target(cfg.target, &x), &mut rng);
        test += cfg.loss.eval(predictor.predict(&x), y);
    }
    Ok(ExperimentRow {
        n,
        replica,
        eta,
        lipschitz,
        empirical_risk: emp,
        risk_bound: report.total,
        test_risk: test / cfg.test_draws as f64,
    })
}

fn run_family<F: Family>(family: &F, cfg: &ExperimentConfig) -> lipreg_core::Result<Vec<ExperimentRow>> {
    let jobs: Vec<(usize, usize)> = cfg
        .schedule
        .iter()
        .flat_map(|&n| (0..cfg.replicas).map(move |r| (n, r)))
        .collect();
    // Largest samples first so the slowest jobs start early.
    let order: Vec<usize> = (0..jobs.len()).rev().collect();
    let threads = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |t| t.get()),
        t => t,
    }
    .min(jobs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<lipreg_core::Result<ExperimentRow>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&job) = order.get(k) else { break };
                let (n, r) = jobs[job];
                let row = run_replica(family, cfg, n, r);
                results.lock().unwrap()[job] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Runs every `(n, replica)` job. Rows come back ordered by `n`, then by
/// replica, independent of the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> lipreg_core::Result<Vec<ExperimentRow>> {
    cfg.validate().map_err(|_| lipreg_core::Error::Domain("invalid experiment configuration"))?;
    match cfg.generator {
        Generator::Cycle => run_family(&Periodic { dim: 1 }, cfg),
        Generator::Torus { dim } => run_family(&Periodic { dim }, cfg),
        Generator::Cube { dim, norm } => run_family(&Cube { dim, norm }, cfg),
        Generator::Uniform { size } => run_family(&UniformSpace { size }, cfg),
    }
}

/// Median test risk per sample size, in schedule order.
pub fn median_test_risk(rows: &[ExperimentRow]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.test_risk).collect();
            v.sort_by(f64::total_cmp);
            let m = v.len();
            let median = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
            (n, median)
        })
        .collect()
}

pub const CSV_HEADER: [&str; 8] = ["n", "replica", "seed", "eta", "lipschitz", "empirical_risk", "risk_bound", "test_risk"];

pub fn write_csv<W: Write>(out: W, seed: u64, rows: &[ExperimentRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.replica.to_string(),
            seed.to_string(),
            r.eta.to_string(),
            r.lipschitz.to_string(),
            r.empirical_risk.to_string(),
            r.risk_bound.to_string(),
            r.test_risk.to_string(),
        ])?;
    }
    w.flush()
}
