use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nogam::harness::{
    example1_data, run_example1, write_discovery, DiscoveryConfig, ExperimentConfig, GenConfig, GraphType, Method,
    EXAMPLE1_SETUPS,
};
use nogam::entropy::fit_both_directions;
use nogam::{discover, run_experiment, Dataset, NoiseKind, RegressorKind};

#[derive(Parser)]
#[command(name = "nogam", version, about = "Causal discovery for additive noise models with arbitrary noise")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded benchmark sweep and write the results CSV.
    Bench(BenchArgs),
    /// Infer a DAG from a data CSV.
    Discover(DiscoverArgs),
    /// Bivariate entropy comparison on uniform-noise data.
    Example1(Example1Args),
    /// Export a synthetic dataset with its ground-truth graph.
    Gen(GenArgs),
}

/// Overrides for the estimator settings shared by `bench` and `discover`.
#[derive(Args, Default)]
struct EstimatorArgs {
    /// Regressor: kernel_ridge or linear_l1.
    #[arg(long)]
    regressor: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    /// Stein ridge regularizer.
    #[arg(long)]
    eta: Option<f64>,
    /// Fixed Stein kernel bandwidth instead of the median heuristic.
    #[arg(long)]
    stein_bandwidth: Option<f64>,
    /// Pruning p-value cutoff.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Spline basis functions per parent during pruning.
    #[arg(long)]
    basis_size: Option<usize>,
}

impl EstimatorArgs {
    fn apply(&self, cfg: &mut DiscoveryConfig) -> Result<()> {
        if let Some(r) = &self.regressor {
            cfg.regressor.kind = serde_json::from_value::<RegressorKind>(serde_json::Value::String(r.clone()))
                .with_context(|| format!("unknown regressor '{r}'"))?;
        }
        set(&mut cfg.regressor.alpha, self.alpha);
        set(&mut cfg.regressor.gamma, self.gamma);
        set(&mut cfg.regressor.folds, self.folds);
        set(&mut cfg.stein.eta, self.eta);
        if let Some(h) = self.stein_bandwidth {
            cfg.stein.bandwidth = nogam::Bandwidth::Fixed(h);
        }
        set(&mut cfg.prune.cutoff, self.cutoff);
        set(&mut cfg.prune.basis_size, self.basis_size);
        cfg.validate()?;
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config (JSON). Omitted fields take their defaults.
    config: Option<PathBuf>,
    /// Results CSV path; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads for seeds (0 = one per core).
    #[arg(short, long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    graph: Option<GraphType>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    density: Option<usize>,
    #[arg(long)]
    noise: Option<NoiseKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated methods: nogam, score-baseline.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    record_wall_time: bool,
    #[command(flatten)]
    est: EstimatorArgs,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Numeric CSV, one column per variable.
    data: PathBuf,
    /// Skip the first line as a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "nogam")]
    method: Method,
    /// Estimator settings (JSON with regressor/stein/prune sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for graph.txt and ordering.json.
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    est: EstimatorArgs,
}

#[derive(Args)]
struct Example1Args {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write x, y and both residuals per setup to this directory.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Generator config (JSON).
    config: Option<PathBuf>,
    #[arg(short, long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
}

fn read_json<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = read_json(args.config.as_deref())?;
    set(&mut cfg.graph, args.graph);
    set(&mut cfg.d, args.d);
    set(&mut cfg.density, args.density);
    set(&mut cfg.noise, args.noise);
    set(&mut cfg.n, args.n);
    set(&mut cfg.seeds, args.seeds);
    set(&mut cfg.methods, args.methods);
    cfg.record_wall_time |= args.record_wall_time;
    let mut est = cfg.discovery();
    args.est.apply(&mut est)?;
    cfg.regressor = est.regressor;
    cfg.stein = est.stein;
    cfg.prune = est.prune;
    cfg.validate()?;
    log::info!("config {}: {} seeds x {} methods", cfg.hash(), cfg.seeds.len(), cfg.methods.len());
    let results = run_experiment(&cfg, args.jobs)?;
    match args.out {
        Some(path) => {
            fs::write(&path, results.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            print!("{}", results.summary_table());
        }
        None => {
            print!("{}", results.to_csv());
            eprint!("{}", results.summary_table());
        }
    }
    Ok(())
}

fn discover_cmd(args: DiscoverArgs) -> Result<()> {
    let data = Dataset::read_csv_path(&args.data, args.header)
        .with_context(|| format!("reading {}", args.data.display()))?;
    let mut cfg: DiscoveryConfig = read_json(args.config.as_deref())?;
    args.est.apply(&mut cfg)?;
    let found = discover(&data, args.method, &cfg)?;
    let (graph, ordering) = write_discovery(&found, &args.out_dir)?;
    log::info!("wrote {} and {}", graph.display(), ordering.display());
    print!("{}", found.graph.to_edge_list());
    Ok(())
}

fn example1(args: Example1Args) -> Result<()> {
    let reg = nogam::RegressorConfig::default();
    let report = run_example1(args.seed, &reg)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{:<18} {:<14} {:>9} {:>9}  verdict", "setup", "mode", "forward", "reverse");
        for c in &report.cases {
            let setup = match c.setup {
                nogam::harness::Example1Setup::Linear => "linear".to_string(),
                nogam::harness::Example1Setup::Nonlinear { delta } => format!("nonlinear d={delta}"),
            };
            println!(
                "{:<18} {:<14} {:>9.3} {:>9.3}  {:?}{}",
                setup,
                c.verdict.mode.to_string(),
                c.verdict.total_entropy_forward,
                c.verdict.total_entropy_reverse,
                c.verdict.direction,
                if c.verdict.tie { " (tie)" } else { "" }
            );
        }
    }
    if let Some(dir) = args.csv_dir {
        fs::create_dir_all(&dir)?;
        for (k, setup) in EXAMPLE1_SETUPS.into_iter().enumerate() {
            let (x, y) = example1_data(setup, args.seed);
            let fit = fit_both_directions(x.view(), y.view(), &reg)?;
            let name = if k == 0 { "linear.csv" } else { "nonlinear.csv" };
            let mut w = csv::Writer::from_path(dir.join(name))?;
            w.write_record(["x", "y", "residual_y_given_x", "residual_x_given_y"])?;
            for i in 0..x.len() {
                w.write_record([x[i], y[i], fit.residual_forward[i], fit.residual_reverse[i]].map(nogam::dataset::format_g17))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let mut cfg: GenConfig = read_json(args.config.as_deref())?;
    set(&mut cfg.seed, args.seed);
    set(&mut cfg.n, args.n);
    let generated = nogam::harness::generate(&cfg)?;
    generated.write_to(&args.out_dir)?;
    println!(
        "wrote {} x {} samples and a {}-edge graph to {}",
        generated.data.n(),
        generated.data.d(),
        generated.spec.graph.edge_count(),
        args.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let outcome = match cli.command {
        Command::Bench(a) => bench(a),
        Command::Discover(a) => discover_cmd(a),
        Command::Example1(a) => example1(a),
        Command::Gen(a) => gen(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
