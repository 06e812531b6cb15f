//! Command-line interface.

mod manifest;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};

pub use manifest::RunManifest;

use crate::config::ModelConfig;
use crate::continuous::{oracle_log_z_mc, tonks_log_z, ContinuousSampler, DiscreteSampler, SamplerOptions};
use crate::discretize::export::{is_binary_graph, is_text_graph, read_binary, read_text, write_binary, write_text};
use crate::discretize::{
    build_graph, interval_dp, resolution_for_error, resolution_for_error_adaptive,
    sampling_resolution, smallest_feasible_resolution, CanonicalPointSet,
    ExplicitPointSet, HardCoreGraph, PointSet,
};
use crate::error::Error;
use crate::estimate::{estimate_log_z_mcmc, estimate_log_z_weitz, McmcOptions};
use crate::experiments;
use crate::glauber::{self, Regime, SampleOptions};
use crate::hardcore::{exact_log_z, tree_threshold, Graph};
use crate::model::{check_clique_condition, check_uniform_condition, ModelSpec};
use crate::rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_REGIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hardgrid", version, about = "Discretize continuous hard-constraint point processes into hard-core models")]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 3 when a sampling or estimation guarantee does not apply.
    #[arg(long, global = true)]
    strict: bool,
    /// Where to write the run manifest.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect model configurations.
    Model {
        #[command(subcommand)]
        action: ModelAction,
    },
    /// Build the hard-core graph of a model and write it to a file.
    Discretize(DiscretizeArgs),
    /// Approximate ln Z of a hard-core graph or a discretized model.
    Zhat {
        #[command(subcommand)]
        method: ZhatMethod,
    },
    /// Draw a configuration.
    Sample {
        #[command(subcommand)]
        kind: SampleKind,
    },
    /// Reference values of ln Z for continuous models.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
    /// Random-discretization experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
}

#[derive(Subcommand, Debug)]
enum ModelAction {
    /// Parse a configuration and report its conditions.
    Validate { config: PathBuf },
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    config: PathBuf,
    #[arg(long)]
    eps_d: f64,
    /// Smallest grid meeting the error bound instead of the closed-form resolution.
    #[arg(long)]
    adaptive: bool,
    /// Use this many uniform random points instead of a grid.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: PathBuf,
    /// Write a text edge list instead of the binary format.
    #[arg(long)]
    text: bool,
}

#[derive(Args, Debug)]
struct ZhatArgs {
    /// Model configuration (JSON) or binary graph file.
    input: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    eps_a: f64,
    /// Discretization error for configuration inputs (default: eps-a).
    #[arg(long)]
    eps_d: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ZhatMethod {
    Exact(ZhatArgs),
    Mcmc(ZhatArgs),
    Weitz(ZhatArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerChoice {
    Auto,
    Glauber,
    IntervalExact,
}

impl From<SamplerChoice> for DiscreteSampler {
    fn from(c: SamplerChoice) -> Self {
        match c {
            SamplerChoice::Auto => DiscreteSampler::Auto,
            SamplerChoice::Glauber => DiscreteSampler::Glauber,
            SamplerChoice::IntervalExact => DiscreteSampler::IntervalExact,
        }
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    config: PathBuf,
    #[arg(long)]
    eps_s: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 16)]
    max_retries: usize,
    #[arg(long, value_enum, default_value_t = SamplerChoice::Auto)]
    sampler: SamplerChoice,
    /// Grid resolution override.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SampleKind {
    /// A set of occupied grid points of the hard-core model.
    Discrete(SampleArgs),
    /// A configuration of the continuous model.
    Continuous(SampleArgs),
}

#[derive(Args, Debug)]
struct OracleArgs {
    config: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum OracleKind {
    /// Monte Carlo estimate of the truncated cluster series.
    Mc(OracleArgs),
    /// Closed form for hard rods on an interval.
    Tonks(OracleArgs),
}

#[derive(Args, Debug)]
struct TrialArgs {
    config: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    eps_d: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV file with one row per trial.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TightnessArgs {
    config: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1.0)]
    eps_d: f64,
}

#[derive(Subcommand, Debug)]
enum ExperimentKind {
    Concentration(TrialArgs),
    Expectation(TrialArgs),
    Tightness(TightnessArgs),
}

#[derive(Debug)]
enum Failure {
    Validation(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Validation(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.into())
    }
}

type Outcome = Result<(), Failure>;

struct Context<'a> {
    stdout: &'a mut (dyn Write + Send),
    seed: Option<u64>,
    config_hash: Option<String>,
    outputs: Vec<PathBuf>,
    primary_output: Option<PathBuf>,
    warnings: Vec<String>,
    start: Instant,
}

impl Context<'_> {
    fn resolve_seed(&mut self, flag: Option<u64>) -> Result<u64, Failure> {
        let seed = match flag {
            Some(s) => s,
            None => match std::env::var("HARDGRID_SEED") {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("HARDGRID_SEED must be an unsigned integer, got {v:?}")))?,
                Err(_) => 0,
            },
        };
        self.seed = Some(seed);
        Ok(seed)
    }

    fn read_input(&mut self, path: &Path) -> Result<(), Failure> {
        self.config_hash = Some(manifest::hash_file(path)?);
        Ok(())
    }

    fn load_model(&mut self, path: &Path) -> Result<ModelSpec, Failure> {
        self.read_input(path)?;
        Ok(ModelConfig::from_path(path)?.to_model()?)
    }

    fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    fn wall_time_ms(&self) -> u128 {
        self.start.elapsed().as_millis()
    }

    /// Writes a JSON document to `output` or stdout.
    fn emit(&mut self, value: &impl Serialize, output: Option<&Path>) -> Outcome {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        self.write_text(&text, output)
    }

    fn write_text(&mut self, text: &str, output: Option<&Path>) -> Outcome {
        match output {
            Some(path) => {
                std::fs::write(path, text)?;
                self.record_output(path);
            }
            None => self.stdout.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn record_output(&mut self, path: &Path) {
        if self.primary_output.is_none() {
            self.primary_output = Some(path.to_path_buf());
        }
        self.outputs.push(path.to_path_buf());
    }
}

/// Runs the CLI with the process arguments and standard streams.
pub fn run() -> i32 {
    let mut out = std::io::stdout();
    let mut err = std::io::stderr().lock();
    run_with(std::env::args_os(), &mut out, &mut err)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start {threads} worker threads: {e}");
            return EXIT_USAGE;
        }
    };

    let mut cx = Context {
        stdout,
        seed: None,
        config_hash: None,
        outputs: Vec::new(),
        primary_output: None,
        warnings: Vec::new(),
        start: Instant::now(),
    };
    let result = pool.install(|| dispatch(&cli.command, &mut cx));

    for w in &cx.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let code = match result {
        Ok(()) if cli.strict && !cx.warnings.is_empty() => {
            let _ = writeln!(stderr, "error: --strict is set and a guarantee does not apply");
            EXIT_REGIME
        }
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Validation(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_VALIDATION
        }
    };

    let manifest = RunManifest {
        command_line: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
        config_hash: cx.config_hash.clone(),
        seed: cx.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_ms: cx.wall_time_ms(),
        outputs: cx.outputs.clone(),
        exit_code: code,
    };
    let path = cli.manifest.clone().unwrap_or_else(|| manifest::default_path(cx.primary_output.as_deref()));
    if let Err(e) = manifest.write(&path) {
        let _ = writeln!(stderr, "warning: could not write manifest {}: {e}", path.display());
    }
    code
}

fn dispatch(command: &Command, cx: &mut Context) -> Outcome {
    match command {
        Command::Model { action: ModelAction::Validate { config } } => model_validate(config, cx),
        Command::Discretize(args) => discretize(args, cx),
        Command::Zhat { method } => zhat(method, cx),
        Command::Sample { kind: SampleKind::Discrete(args) } => sample_discrete(args, cx),
        Command::Sample { kind: SampleKind::Continuous(args) } => sample_continuous(args, cx),
        Command::Oracle { kind } => oracle(kind, cx),
        Command::Experiment { kind } => experiment(kind, cx),
    }
}

fn model_validate(path: &Path, cx: &mut Context) -> Outcome {
    let model = cx.load_model(path)?;
    let (uniform, clique) = if model.interaction().is_unconstrained() {
        (Value::Null, Value::Null)
    } else {
        let u = check_uniform_condition(&model)?;
        let c = check_clique_condition(&model);
        (json!({ "satisfied": u.satisfied, "lhs": u.lhs, "rhs": u.rhs, "message": u.describe() }), serde_json::to_value(c).map_err(Error::from)?)
    };
    let doc = json!({
        "valid": true,
        "dimension": model.dimension(),
        "side_length": model.region().side_length(),
        "volume": model.volume(),
        "q": model.q(),
        "unconstrained": model.interaction().is_unconstrained(),
        "uniform_condition": uniform,
        "clique_condition": clique,
    });
    cx.emit(&doc, None)
}

fn grid_for_error(model: &ModelSpec, eps_d: f64, adaptive: bool) -> Result<(CanonicalPointSet, Option<f64>), Failure> {
    if adaptive {
        let choice = resolution_for_error_adaptive(model, eps_d)?;
        let grid = CanonicalPointSet::with_cells_per_axis(model.region().clone(), choice.cells_per_axis)?;
        Ok((grid, choice.error_factor))
    } else {
        let rho = resolution_for_error(model, eps_d)?;
        let rho = smallest_feasible_resolution(model.region().side_length(), rho);
        Ok((CanonicalPointSet::new(model.region().clone(), rho)?, None))
    }
}

fn discretize(args: &DiscretizeArgs, cx: &mut Context) -> Outcome {
    let model = cx.load_model(&args.config)?;
    let (points, error_factor) = match args.random {
        Some(n) => {
            let seed = cx.resolve_seed(args.seed)?;
            (PointSet::Explicit(ExplicitPointSet::random(model.region().clone(), n, seed)), None)
        }
        None => {
            let (grid, factor) = grid_for_error(&model, args.eps_d, args.adaptive)?;
            (PointSet::Canonical(grid), factor)
        }
    };
    let graph = build_graph(&model, &points)?;
    if args.text {
        write_text(&graph.to_graph(), &args.output)?;
    } else {
        write_binary(&graph, &args.output)?;
    }
    cx.record_output(&args.output);
    let g = graph.to_graph();
    let doc = json!({
        "output": args.output,
        "format": if args.text { "text" } else { "binary" },
        "resolution": graph.resolution(),
        "seed": graph.seed(),
        "num_points": graph.num_points(),
        "num_vertices": g.num_vertices(),
        "num_edges": g.num_edges(),
        "max_degree": g.max_degree(),
        "error_factor": error_factor,
    });
    cx.emit(&doc, None)
}

/// The graph a `zhat` input refers to, plus the model when it was a configuration.
struct ZhatInput {
    graph: Option<Graph>,
    model: Option<ModelSpec>,
    points: Option<PointSet>,
    info: Value,
}

fn zhat_input(args: &ZhatArgs, need_graph: bool, cx: &mut Context) -> Result<ZhatInput, Failure> {
    if is_binary_graph(&args.input) {
        cx.read_input(&args.input)?;
        let file = read_binary(&args.input)?;
        let info = json!({ "input": "graph", "resolution": file.resolution, "num_points": file.num_points });
        return Ok(ZhatInput { graph: Some(file.graph), model: None, points: None, info });
    }
    if is_text_graph(&args.input) {
        cx.read_input(&args.input)?;
        let graph = read_text(&args.input)?;
        let info = json!({ "input": "graph", "num_vertices": graph.num_vertices() });
        return Ok(ZhatInput { graph: Some(graph), model: None, points: None, info });
    }
    let model = cx.load_model(&args.input)?;
    let eps_d = args.eps_d.unwrap_or(args.eps_a);
    let (grid, factor) = grid_for_error(&model, eps_d, true)?;
    let info = json!({ "input": "model", "eps_d": eps_d, "resolution": grid.resolution(), "num_points": grid.len(), "error_factor": factor });
    let points = PointSet::Canonical(grid);
    let graph = if need_graph { Some(built(&model, &points)?.to_graph()) } else { None };
    Ok(ZhatInput { graph, model: Some(model), points: Some(points), info })
}

fn built(model: &ModelSpec, points: &PointSet) -> Result<HardCoreGraph, Failure> {
    Ok(build_graph(model, points)?)
}

fn is_interval_model(model: &ModelSpec) -> bool {
    model.dimension() == 1 && model.q() == 1 && !model.interaction().is_unconstrained()
}

#[derive(Serialize)]
struct ZhatOutput {
    method: &'static str,
    ln_z: f64,
    eps_a: f64,
    seed: u64,
    wall_time_ms: u128,
    diagnostics: Value,
}

fn graph_summary(g: &Graph) -> Value {
    json!({ "num_vertices": g.num_vertices(), "num_edges": g.num_edges(), "max_degree": g.max_degree(), "max_weight": g.max_weight() })
}

fn regime_warning(regime: Regime, g: &Graph) -> Option<String> {
    (regime == Regime::Unverified).then(|| {
        let delta = g.max_degree().max(2);
        let lc = tree_threshold(delta).unwrap_or(f64::NAN);
        format!(
            "condition max w < λ_c(Δ) fails ({} ≥ {lc} for Δ = {delta}) and no clique-condition witness is available; the total variation guarantee is void",
            g.max_weight()
        )
    })
}

fn zhat(method: &ZhatMethod, cx: &mut Context) -> Outcome {
    let (name, args) = match method {
        ZhatMethod::Exact(a) => ("exact", a),
        ZhatMethod::Mcmc(a) => ("mcmc", a),
        ZhatMethod::Weitz(a) => ("weitz", a),
    };
    let seed = cx.resolve_seed(args.seed)?;
    let interval = name == "exact";
    let mut input = zhat_input(args, true, cx).or_else(|e| match e {
        // the exact 1-d recursion does not need the graph
        Failure::Validation(Error::GraphTooLarge { .. }) if interval => zhat_input(args, false, cx),
        e => Err(e),
    })?;
    let (ln_z, mut diagnostics) = match name {
        "exact" => match (&input.model, &input.points) {
            (Some(m), Some(p)) if is_interval_model(m) => {
                let dp = interval_dp(m, p)?;
                (dp.log_z().ln(), json!({ "algorithm": "interval_recursion", "num_vertices": dp.len() }))
            }
            _ => {
                let g = input.graph.as_ref().expect("graph built");
                (exact_log_z(g)?.ln(), json!({ "algorithm": "enumeration", "graph": graph_summary(g) }))
            }
        },
        "mcmc" => {
            let g = input.graph.take().expect("graph built");
            let witness = input.model.as_ref().is_some_and(|m| {
                m.interaction().is_unconstrained() || check_clique_condition(m).is_feasible()
            });
            let opts = McmcOptions { chain: SampleOptions { clique_witness: witness, ..Default::default() }, ..Default::default() };
            let e = estimate_log_z_mcmc(&g, args.eps_a, seed, &opts)?;
            if let Some(w) = regime_warning(e.regime, &g) {
                cx.warn(w);
            }
            let sampled: Vec<_> = e.ratios.iter().filter(|r| r.restarts > 0).collect();
            let diag = json!({
                "regime": e.regime,
                "graph": graph_summary(&g),
                "ratios_sampled": sampled.len(),
                "restarts_total": sampled.iter().map(|r| r.restarts as u64).sum::<u64>(),
                "largest_component": e.ratios.iter().map(|r| r.component_size).max().unwrap_or(0),
                "min_probability": e.ratios.iter().map(|r| r.probability).fold(1.0, f64::min),
            });
            (e.ln_z.ln(), diag)
        }
        _ => {
            let g = input.graph.take().expect("graph built");
            let e = estimate_log_z_weitz(&g, args.eps_a)?;
            if !e.below_tree_threshold {
                let delta = g.max_degree().max(2);
                cx.warn(format!(
                    "condition max w < λ_c(Δ) fails ({} ≥ {} for Δ = {delta}); correlation decay is not guaranteed",
                    g.max_weight(),
                    tree_threshold(delta)?
                ));
            }
            if !e.converged {
                cx.warn(format!("successive depths did not agree within eps_a/2 up to depth {}", e.depth));
            }
            let diag = json!({
                "depth": e.depth,
                "exact": e.exact,
                "converged": e.converged,
                "below_tree_threshold": e.below_tree_threshold,
                "graph": graph_summary(&g),
            });
            (e.ln_z.ln(), diag)
        }
    };
    diagnostics["input"] = input.info;
    let doc = ZhatOutput { method: name, ln_z, eps_a: args.eps_a, seed, wall_time_ms: cx.wall_time_ms(), diagnostics };
    cx.emit(&doc, args.output.as_deref())
}

fn raw_number(x: f64) -> Box<RawValue> {
    RawValue::from_string(format!("{x:.16e}")).expect("finite float is valid JSON")
}

#[derive(Serialize)]
struct SampleOutput {
    n: usize,
    points: Vec<Vec<Box<RawValue>>>,
    types: Vec<usize>,
    valid: bool,
    retries: usize,
    seed: u64,
}

fn sample_document(points: &[Vec<f64>], types: &[usize], valid: bool, retries: usize, seed: u64) -> SampleOutput {
    SampleOutput {
        n: points.len(),
        points: points.iter().map(|p| p.iter().map(|&x| raw_number(x)).collect()).collect(),
        types: types.to_vec(),
        valid,
        retries,
        seed,
    }
}

fn sample_resolution(model: &ModelSpec, args: &SampleArgs) -> Result<f64, Failure> {
    let rho = match args.resolution {
        Some(r) => r,
        None => sampling_resolution(model, args.eps_s)?,
    };
    Ok(smallest_feasible_resolution(model.region().side_length(), rho))
}

fn sample_discrete(args: &SampleArgs, cx: &mut Context) -> Outcome {
    let model = cx.load_model(&args.config)?;
    let seed = cx.resolve_seed(args.seed)?;
    let rho = sample_resolution(&model, args)?;
    let grid = CanonicalPointSet::new(model.region().clone(), rho)?;
    let points = PointSet::Canonical(grid.clone());
    let q = model.q();
    let interval = match args.sampler {
        SamplerChoice::Auto => is_interval_model(&model),
        SamplerChoice::IntervalExact => true,
        SamplerChoice::Glauber => false,
    };
    let vertices = if interval {
        let dp = interval_dp(&model, &points)?;
        dp.sample(&mut rng::stream(seed, rng::domain::GLAUBER, 0))
    } else {
        let g = built(&model, &points)?.to_graph();
        let witness = model.interaction().is_unconstrained() || check_clique_condition(&model).is_feasible();
        let opts = SampleOptions { clique_witness: witness, ..Default::default() };
        let s = glauber::sample(&g, args.eps_s, seed, &opts);
        if let Some(w) = regime_warning(s.regime, &g) {
            cx.warn(w);
        }
        s.vertices
    };
    let coords: Vec<Vec<f64>> = vertices.iter().map(|&v| grid.point(v / q)).collect();
    let types: Vec<usize> = vertices.iter().map(|&v| v % q).collect();
    let doc = sample_document(&coords, &types, true, 0, seed);
    cx.emit(&doc, args.output.as_deref())
}

fn sample_continuous(args: &SampleArgs, cx: &mut Context) -> Outcome {
    let model = cx.load_model(&args.config)?;
    let seed = cx.resolve_seed(args.seed)?;
    let witness = model.interaction().is_unconstrained() || check_clique_condition(&model).is_feasible();
    let opts = SamplerOptions {
        max_retries: args.max_retries,
        discrete: args.sampler.into(),
        glauber: SampleOptions { clique_witness: witness, ..Default::default() },
        resolution: match args.resolution {
            Some(_) => Some(sample_resolution(&model, args)?),
            None => None,
        },
    };
    let sampler = ContinuousSampler::new(&model, args.eps_s, opts)?;
    let s = sampler.sample(seed)?;
    if s.regime == Some(Regime::Unverified) {
        cx.warn("condition max w < λ_c(Δ) fails on the discretized model and no clique-condition witness is available; the total variation guarantee is void".into());
    }
    if !s.valid {
        cx.warn(format!("no valid configuration after {} retries", s.retries));
    }
    let c = &s.configuration;
    let doc = sample_document(&c.points, &c.types, s.valid, s.retries, seed);
    cx.emit(&doc, args.output.as_deref())
}

fn oracle(kind: &OracleKind, cx: &mut Context) -> Outcome {
    match kind {
        OracleKind::Mc(args) => {
            let model = cx.load_model(&args.config)?;
            let seed = cx.resolve_seed(args.seed)?;
            let e = oracle_log_z_mc(&model, args.tol, seed)?;
            let doc = json!({
                "method": "mc",
                "ln_z": e.ln_z,
                "std_error": e.std_error,
                "tail_bound": e.tail_bound,
                "truncation": e.truncation,
                "samples_per_term": e.samples_per_term,
                "tol": args.tol,
                "seed": seed,
            });
            cx.emit(&doc, args.output.as_deref())
        }
        OracleKind::Tonks(args) => {
            let model = cx.load_model(&args.config)?;
            if model.dimension() != 1 || model.q() != 1 {
                return Err(Error::invalid("model", "the closed form needs d = 1 and a single type").into());
            }
            let r = model.interaction().get(0, 0) / 2.0;
            let ln_z = tonks_log_z(model.region().side_length(), r, model.fugacities().get(0))?.ln();
            cx.emit(&json!({ "method": "tonks", "ln_z": ln_z }), args.output.as_deref())
        }
    }
}

fn write_csv(rows: &[experiments::TrialRow], output: Option<&Path>, cx: &mut Context) -> Outcome {
    if let Some(path) = output {
        experiments::write_trials_csv(rows, std::fs::File::create(path)?)?;
        cx.record_output(path);
    }
    Ok(())
}

fn experiment(kind: &ExperimentKind, cx: &mut Context) -> Outcome {
    match kind {
        ExperimentKind::Concentration(args) => {
            let model = cx.load_model(&args.config)?;
            let seed = cx.resolve_seed(args.seed)?;
            let report = experiments::concentration_trial(&model, args.n, args.trials, args.eps_d, seed)?;
            write_csv(&report.rows, args.output.as_deref(), cx)?;
            let doc = json!({
                "experiment": "concentration",
                "n": report.n,
                "trials": report.rows.len(),
                "eps_d": report.eps_d,
                "reference_ln_z": report.reference_ln_z,
                "fraction_within": report.fraction_within,
                "min_deviation": report.min_deviation,
                "median_deviation": report.median_deviation,
                "max_deviation": report.max_deviation,
                "seed": seed,
            });
            cx.emit(&doc, None)
        }
        ExperimentKind::Expectation(args) => {
            let model = cx.load_model(&args.config)?;
            let seed = cx.resolve_seed(args.seed)?;
            let report = experiments::expectation_check(&model, args.n, args.trials, seed)?;
            write_csv(&report.rows, args.output.as_deref(), cx)?;
            let doc = json!({
                "experiment": "expectation",
                "n": report.n,
                "trials": report.rows.len(),
                "mean_ln_z": report.mean_ln_z,
                "relative_std_error": report.relative_std_error,
                "ln_z_ref": report.ln_z_ref,
                "ci_low": if report.ci_low.is_finite() { json!(report.ci_low) } else { Value::Null },
                "ci_high": report.ci_high,
                "pass": report.pass,
                "seed": seed,
            });
            cx.emit(&doc, None)
        }
        ExperimentKind::Tightness(args) => {
            let model = cx.load_model(&args.config)?;
            let lambda = model.fugacities().sum();
            let r = experiments::tightness_report(lambda, model.volume(), args.n, args.eps_d)?;
            let doc = json!({
                "experiment": "tightness",
                "lambda": lambda,
                "volume": model.volume(),
                "n": args.n,
                "eps_d": args.eps_d,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "gap": r.gap,
            });
            cx.emit(&doc, None)
        }
    }
}
