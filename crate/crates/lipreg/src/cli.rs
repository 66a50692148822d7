//! Argument definitions and subcommand drivers.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lipreg_core::bounds::{self, BoundParams, Loss, RiskReport};
use lipreg_core::extension::build_predictor;
use lipreg_core::solver::SolverOptions;
use lipreg_core::spanner::{build_spanner_with, SpannerMode, CERTIFY_LIMIT};
use lipreg_core::{fit, Dataset, DistanceMatrix, Error, FitOptions, MatrixPoint, Metric, Minkowski};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{AppError, AppResult};
use crate::experiment::{self, EtaRule, ExperimentConfig, Generator, LipschitzRule, Target};
use crate::io::{self, LabelColumn, MetricKind};
use crate::model::{ModelFile, ModelPoint, MODEL_VERSION};

#[derive(Debug, Parser)]
#[command(name = "lipreg", version, about = "Lipschitz regression in metric spaces")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a hypothesis and write a model file.
    Fit(FitArgs),
    /// Evaluate a model at query points.
    Predict(PredictArgs),
    /// Evaluate the risk bound for given parameters.
    Bound(BoundArgs),
    /// Build a spanner and report its size, degree, hops and stretch.
    SpannerStats(SpannerArgs),
    /// Run a synthetic consistency experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    L1,
    L2,
    Linf,
    Matrix,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> MetricKind {
        match m {
            MetricArg::L1 => MetricKind::L1,
            MetricArg::L2 => MetricKind::L2,
            MetricArg::Linf => MetricKind::Linf,
            MetricArg::Matrix => MetricKind::Matrix,
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Point CSV (`id,x1,..,xd,label`), or a headerless distance matrix.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::L2)]
    pub metric: MetricArg,
    /// `id,label` CSV in matrix order; required with `--metric matrix`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Loss exponent.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub q: u32,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    /// Confidence parameter of the risk bound.
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Spanner stretch slack; defaults to `--eta`.
    #[arg(long)]
    pub spanner_delta: Option<f64>,
    /// Iteration ceiling per program solve.
    #[arg(long, default_value_t = lipreg_core::solver::DEFAULT_HARD_CAP)]
    pub max_iterations: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Query CSV `id,x1,..,xd`; for matrix models `id,d1,..,dn` with the
    /// distances to the training samples.
    #[arg(long)]
    pub queries: PathBuf,
    /// Extension accuracy; defaults to the model's η.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub lipschitz: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub q: u32,
    #[arg(long)]
    pub ddim: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    /// Stratification step; defaults to `--eta` when positive, else 0.05.
    #[arg(long)]
    pub grid: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub empirical_risk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Certified,
    Eager,
}

#[derive(Debug, Args)]
pub struct SpannerArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorArg {
    Cycle,
    Torus,
    Cube,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Smooth,
    Linear,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaRuleArg {
    Fixed,
    Power,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum, default_value_t = GeneratorArg::Cube)]
    pub generator: GeneratorArg,
    /// Dimension of the torus or cube.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Norm of the cube.
    #[arg(long, value_enum, default_value_t = MetricArg::L2)]
    pub norm: MetricArg,
    /// Number of points of the uniform metric.
    #[arg(long, default_value_t = 16)]
    pub size: usize,
    #[arg(long, value_enum, default_value_t = TargetArg::Smooth)]
    pub target: TargetArg,
    /// Half-width of additive uniform label noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Comma-separated, strictly increasing sample sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [50, 100, 200, 400, 800])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub replicas: usize,
    /// `log` for `ln n`, or a fixed budget.
    #[arg(long, default_value = "log")]
    pub lipschitz: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub q: u32,
    /// `power` uses η = min(c·n^(-a), 1/4) with c = `--eta`.
    #[arg(long, value_enum, default_value_t = EtaRuleArg::Power)]
    pub eta_rule: EtaRuleArg,
    /// Fixed η (default 0.02), or the constant c (default 4).
    #[arg(long)]
    pub eta: Option<f64>,
    /// The exponent a of the power rule.
    #[arg(long, default_value_t = 1.0)]
    pub eta_exponent: f64,
    #[arg(long, default_value_t = 0.25)]
    pub spanner_delta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 2000)]
    pub test_draws: usize,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Also write the CSV here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn loss_of(q: u32) -> Loss {
    Loss::from_exponent(q).expect("clap restricts q to 1 or 2")
}

/// Parsed training data under either metric representation.
enum Training {
    Coords {
        ids: Vec<String>,
        data: Dataset<Minkowski>,
    },
    Matrix {
        ids: Vec<String>,
        data: Dataset<DistanceMatrix>,
    },
}

fn load_training(input: &InputArgs, seed: u64, column: LabelColumn) -> AppResult<Training> {
    let kind = MetricKind::from(input.metric);
    match kind.norm() {
        Some(norm) => {
            if input.labels.is_some() {
                return Err(AppError::Usage("--labels is only used with --metric matrix".into()));
            }
            let table = io::read_points(&input.input, column)?;
            let dim = table.coords[0].len();
            if let Some(k) = table.coords.iter().position(|c| c.len() != dim) {
                return Err(AppError::file(&input.input, format!("row {} has a different dimension", k + 1)));
            }
            let labels = if table.labels.is_empty() { vec![0.0; table.ids.len()] } else { table.labels };
            let data = Dataset::new(Minkowski(norm), table.coords, labels)?;
            Ok(Training::Coords { ids: table.ids, data })
        }
        None => {
            let (n, entries) = io::read_matrix(&input.input)?;
            let (ids, labels) = match &input.labels {
                Some(path) => {
                    let (ids, labels) = io::read_labels(path)?;
                    if ids.len() != n {
                        return Err(AppError::file(path, format!("{} labels for a {n}-point matrix", ids.len())));
                    }
                    (ids, labels)
                }
                None if column == LabelColumn::Required => {
                    return Err(AppError::Usage("--metric matrix needs --labels".into()));
                }
                None => ((0..n).map(|i| i.to_string()).collect(), vec![0.0; n]),
            };
            let matrix = DistanceMatrix::new(n, entries).expect("read_matrix returns n² entries");
            let points = matrix.samples();
            let data = Dataset::new(matrix, points, labels)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            data.validate_metric(&mut rng).map_err(|e| match e {
                Error::TriangleViolation { i, j, k } => AppError::file(
                    &input.input,
                    format!("triangle inequality fails for rows {}, {}, {}", i + 1, j + 1, k + 1),
                ),
                other => other.into(),
            })?;
            Ok(Training::Matrix { ids, data })
        }
    }
}

fn print_table<W: Write>(out: &mut W, format: Format, rows: &[(&str, String)]) -> std::io::Result<()> {
    match format {
        Format::Text => {
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in rows {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(rows.iter().map(|(k, _)| *k))?;
            w.write_record(rows.iter().map(|(_, v)| v.as_str()))?;
            w.flush()?;
        }
    }
    Ok(())
}

fn report_rows(report: &RiskReport) -> Vec<(&'static str, String)> {
    vec![
        ("empirical_risk", report.empirical_risk.to_string()),
        ("stratum", report.stratum.to_string()),
        ("penalty", report.penalty.to_string()),
        ("perturbation", report.perturbation.to_string()),
        ("risk_bound", report.total.to_string()),
    ]
}

fn stdout_err(e: std::io::Error) -> AppError {
    AppError::io("<stdout>", e)
}

fn run_fit(args: &FitArgs, seed: u64, format: Format, out: &mut impl Write) -> AppResult<()> {
    if !(args.eta > 0.0 && args.eta <= 0.25) {
        return Err(AppError::Usage(format!("--eta {} must lie in (0, 0.25]", args.eta)));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(AppError::Usage(format!("--delta {} must lie in (0, 1)", args.delta)));
    }
    let mut options = FitOptions::new(loss_of(args.q), args.eta, args.delta);
    options.spanner_delta = args.spanner_delta;
    options.solver = SolverOptions {
        hard_cap: args.max_iterations,
        ..SolverOptions::default()
    };
    let training = load_training(&args.input, seed, LabelColumn::Required)?;

    fn fitted<M: Metric>(data: Dataset<M>, options: &FitOptions) -> AppResult<(lipreg_core::srm::Fit, f64)> {
        let data = data.normalize_diameter()?;
        let result = fit(&data, options)?;
        Ok((result, data.scale()))
    }

    let (result, scale, ids, coords) = match training {
        Training::Coords { ids, data, .. } => {
            let coords = data.points().to_vec();
            let (result, scale) = fitted(data, &options)?;
            (result, scale, ids, coords)
        }
        Training::Matrix { ids, data } => {
            let n = data.len();
            let coords = (0..n).map(|i| (0..n).map(|j| data.metric().get(i, j)).collect()).collect();
            let (result, scale) = fitted(data, &options)?;
            (result, scale, ids, coords)
        }
    };
    let h = &result.hypothesis;
    let report = *h.risk();
    let model = ModelFile {
        version: MODEL_VERSION,
        q: args.q,
        eta: args.eta,
        delta_conf: args.delta,
        lipschitz: h.lipschitz(),
        penalty: report.penalty,
        stratum: report.stratum,
        empirical_risk: report.empirical_risk,
        risk_bound: report.total,
        ddim: result.ddim,
        metric: MetricKind::from(args.input.metric).to_string(),
        scale,
        spanner_delta: result.spanner.delta(),
        fitted_at: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        points: ids
            .into_iter()
            .zip(coords)
            .zip(h.values())
            .map(|((id, coords), &value)| ModelPoint { id, value, coords })
            .collect(),
    };
    model.write(&args.output)?;
    let mut rows = vec![
        ("n", h.len().to_string()),
        ("lipschitz", h.lipschitz().to_string()),
        ("ddim", result.ddim.to_string()),
    ];
    rows.extend(report_rows(&report));
    rows.push(("solves", result.solves.to_string()));
    print_table(out, format, &rows).map_err(stdout_err)
}

fn predict_all<M: Metric>(data: &Dataset<M>, values: &[f64], eta: f64, queries: &[M::Point]) -> AppResult<Vec<f64>> {
    let predictor = build_predictor(data, values, eta)?;
    Ok(queries.iter().map(|x| predictor.predict(x)).collect())
}

fn run_predict(args: &PredictArgs, format: Format, out: &mut impl Write) -> AppResult<()> {
    let model = ModelFile::read(&args.model)?;
    let eta = args.eta.unwrap_or(model.eta);
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(AppError::Usage(format!("--eta {eta} must lie in (0, 1]")));
    }
    let values = model.values();
    let width = model.points[0].coords.len();
    let table = io::read_points(&args.queries, LabelColumn::Optional)?;
    if let Some(k) = table.coords.iter().position(|c| c.len() != width) {
        return Err(AppError::file(
            &args.queries,
            format!("query row {} has {} coordinates, the model expects {width}", k + 1, table.coords[k].len()),
        ));
    }
    let kind = model.metric_kind()?;
    let predictions = match kind.norm() {
        Some(norm) => {
            let points: Vec<Vec<f64>> = model.points.iter().map(|p| p.coords.clone()).collect();
            let data = Dataset::new(Minkowski(norm), points, values.clone())?.with_scale(model.scale)?;
            predict_all(&data, &values, eta, &table.coords)?
        }
        None => {
            let n = model.points.len();
            let entries = model.points.iter().flat_map(|p| p.coords.iter().copied()).collect();
            let matrix = DistanceMatrix::new(n, entries).expect("validated square matrix");
            let points = matrix.samples();
            let data = Dataset::new(matrix, points, values.clone())?.with_scale(model.scale)?;
            if let Some(k) = table.coords.iter().position(|c| c.iter().any(|&v| v < 0.0)) {
                return Err(AppError::file(&args.queries, format!("query row {} has a negative distance", k + 1)));
            }
            let queries: Vec<MatrixPoint> = table.coords.into_iter().map(MatrixPoint::External).collect();
            predict_all(&data, &values, eta, &queries)?
        }
    };
    let write = |w: &mut dyn Write| -> std::io::Result<()> {
        match format {
            Format::Csv => io::write_predictions(w, &table.ids, &predictions),
            Format::Text => {
                for (id, p) in table.ids.iter().zip(&predictions) {
                    writeln!(w, "{id}  {p}")?;
                }
                Ok(())
            }
        }
    };
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| AppError::io(path, e))?;
            io::write_predictions(std::io::BufWriter::new(file), &table.ids, &predictions).map_err(|e| AppError::io(path, e))
        }
        None => write(out).map_err(stdout_err),
    }
}

fn run_bound(args: &BoundArgs, format: Format, out: &mut impl Write) -> AppResult<()> {
    let grid = args.grid.unwrap_or(if args.eta > 0.0 { args.eta } else { 0.05 });
    if !(grid > 0.0) {
        return Err(AppError::Usage(format!("--grid {grid} must be positive")));
    }
    if !(0.0..=1.0).contains(&args.empirical_risk) {
        return Err(AppError::Usage("--empirical-risk must lie in [0, 1]".into()));
    }
    let params = BoundParams::new(args.n, args.lipschitz, loss_of(args.q), args.ddim, args.delta, args.eta)
        .map_err(|e| AppError::Usage(e.to_string()))?;
    let report = bounds::total_bound(args.empirical_risk, &params, grid)?;
    let mut rows = vec![("n", args.n.to_string()), ("lipschitz", args.lipschitz.to_string())];
    rows.extend(report_rows(&report));
    print_table(out, format, &rows).map_err(stdout_err)
}

fn spanner_rows<M: Metric>(data: Dataset<M>, delta: f64, mode: SpannerMode) -> AppResult<Vec<(&'static str, String)>> {
    let data = data.normalize_diameter()?;
    let start = Instant::now();
    let sp = build_spanner_with(&data, delta, mode)?;
    let seconds = start.elapsed().as_secs_f64();
    let stretch = if data.len() <= CERTIFY_LIMIT {
        sp.measured_stretch(&data).to_string()
    } else {
        "skipped".into()
    };
    Ok(vec![
        ("n", sp.n().to_string()),
        ("delta", delta.to_string()),
        ("edges", sp.edges().len().to_string()),
        ("max_degree", sp.max_degree().to_string()),
        ("hop_bound", sp.hop_bound().to_string()),
        ("hop_diameter", sp.hop_diameter().to_string()),
        ("certified", sp.certified().to_string()),
        ("stretch", stretch),
        ("build_seconds", format!("{seconds:.3}")),
    ])
}

fn run_spanner(args: &SpannerArgs, seed: u64, format: Format, out: &mut impl Write) -> AppResult<()> {
    let mode = match args.mode {
        ModeArg::Auto => SpannerMode::Auto,
        ModeArg::Certified => SpannerMode::Certified,
        ModeArg::Eager => SpannerMode::Eager,
    };
    if !(args.delta > 0.0 && args.delta <= 0.5) {
        return Err(AppError::Usage(format!("--delta {} must lie in (0, 0.5]", args.delta)));
    }
    let rows = match load_training(&args.input, seed, LabelColumn::Optional)? {
        Training::Coords { data, .. } => spanner_rows(data, args.delta, mode)?,
        Training::Matrix { data, .. } => spanner_rows(data, args.delta, mode)?,
    };
    print_table(out, format, &rows).map_err(stdout_err)
}

/// Builds the experiment configuration from command-line arguments.
pub fn experiment_config(args: &ExperimentArgs, seed: u64) -> AppResult<ExperimentConfig> {
    let norm = MetricKind::from(args.norm)
        .norm()
        .ok_or_else(|| AppError::Usage("--norm must be l1, l2 or linf".into()))?;
    let generator = match args.generator {
        GeneratorArg::Cycle => Generator::Cycle,
        GeneratorArg::Torus => Generator::Torus { dim: args.dim },
        GeneratorArg::Cube => Generator::Cube { dim: args.dim, norm },
        GeneratorArg::Uniform => Generator::Uniform { size: args.size },
    };
    let rule = match args.lipschitz.as_str() {
        "log" => LipschitzRule::Log,
        v => LipschitzRule::Fixed(
            v.parse()
                .map_err(|_| AppError::Usage(format!("--lipschitz `{v}` is neither `log` nor a number")))?,
        ),
    };
    let cfg = ExperimentConfig {
        generator,
        target: match args.target {
            TargetArg::Smooth => Target::Smooth,
            TargetArg::Linear => Target::Linear,
            TargetArg::Noise => Target::Noise,
        },
        noise: args.noise,
        schedule: args.n.clone(),
        replicas: args.replicas,
        seed,
        rule,
        loss: loss_of(args.q),
        eta: match args.eta_rule {
            EtaRuleArg::Fixed => EtaRule::Fixed(args.eta.unwrap_or(0.02)),
            EtaRuleArg::Power => EtaRule::Power {
                c: args.eta.unwrap_or(4.0),
                a: args.eta_exponent,
            },
        },
        spanner_delta: args.spanner_delta,
        delta_conf: args.delta,
        test_draws: args.test_draws,
        threads: args.threads,
    };
    if !(cfg.spanner_delta > 0.0 && cfg.spanner_delta <= 0.5) {
        return Err(AppError::Usage("--spanner-delta must lie in (0, 0.5]".into()));
    }
    cfg.validate().map_err(AppError::Usage)?;
    Ok(cfg)
}

fn run_experiment(args: &ExperimentArgs, seed: u64, format: Format, out: &mut impl Write) -> AppResult<()> {
    let cfg = experiment_config(args, seed)?;
    let rows = experiment::run_experiment(&cfg)?;
    if let Some(path) = &args.output {
        let file = std::fs::File::create(path).map_err(|e| AppError::io(path, e))?;
        experiment::write_csv(std::io::BufWriter::new(file), seed, &rows).map_err(|e| AppError::io(path, e))?;
    }
    match format {
        Format::Csv => experiment::write_csv(out, seed, &rows).map_err(stdout_err),
        Format::Text => {
            let w = &mut *out;
            (|| -> std::io::Result<()> {
                writeln!(
                    w,
                    "{:>6} {:>8} {:>8} {:>10} {:>12} {:>12} {:>12}",
                    "n", "replica", "eta", "L", "emp_risk", "bound", "test_risk"
                )?;
                for r in &rows {
                    writeln!(
                        w,
                        "{:>6} {:>8} {:>8.4} {:>10.4} {:>12.6} {:>12.6} {:>12.6}",
                        r.n, r.replica, r.eta, r.lipschitz, r.empirical_risk, r.risk_bound, r.test_risk
                    )?;
                }
                writeln!(w)?;
                writeln!(w, "{:>6} {:>18}", "n", "median test risk")?;
                for (n, m) in experiment::median_test_risk(&rows) {
                    writeln!(w, "{n:>6} {m:>18.6}")?;
                }
                Ok(())
            })()
            .map_err(stdout_err)
        }
    }
}

/// Runs a parsed command, writing reports to `out`.
pub fn run(cli: &Cli, out: &mut impl Write) -> AppResult<()> {
    match &cli.command {
        Command::Fit(a) => run_fit(a, cli.seed, cli.format, out),
        Command::Predict(a) => run_predict(a, cli.format, out),
        Command::Bound(a) => run_bound(a, cli.format, out),
        Command::SpannerStats(a) => run_spanner(a, cli.seed, cli.format, out),
        Command::Experiment(a) => run_experiment(a, cli.seed, cli.format, out),
    }
}
