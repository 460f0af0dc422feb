//! `fillorder`: reorder, evaluate, train, compare and verify.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! failure.

mod train_config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use fillorder::bench::{self, GraphModel, Method, VerifyOrdering};
use fillorder::cfp::{self, CfpModel, CfpTrainConfig, GraphContext};
use fillorder::matrix_io::{parse_matrix_market, read_permutation, write_permutation};
use fillorder::{AdjacencyGraph, SparseSymmetricPattern};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Environment variable read for the default `--seed`.
const SEED_ENV: &str = "FILLORDER_SEED";

#[derive(Parser)]
#[command(name = "fillorder", version, about = "Fill-reducing orderings for sparse symmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an elimination ordering and write it as a permutation file.
    Reorder {
        /// MatrixMarket input.
        input: PathBuf,
        #[arg(short, long)]
        method: Method,
        /// Checkpoint for the learned method.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        /// Fine-tune the learned encoder on this matrix for this many epochs.
        #[arg(long, default_value_t = 0)]
        fine_tune_epochs: usize,
        #[arg(long, default_value_t = fillorder::autodiff::DEFAULT_LEARNING_RATE)]
        fine_tune_lr: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a permutation file against a matrix; prints one CSV row.
    Evaluate {
        input: PathBuf,
        permutation: PathBuf,
        /// Also time numeric Cholesky of Laplacian + I and report speedup.
        #[arg(long)]
        numeric: bool,
        /// Seconds spent computing the permutation, used in the speedup.
        #[arg(long, default_value_t = 0.0)]
        reorder_time: f64,
        /// Name in the matrix column (default: the input file stem).
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        omit_timing: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Train the network from a TOML configuration.
    Train {
        config: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stage: Option<train_config::Stage>,
        /// Checkpoint to write (overrides the configuration).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Checkpoint to continue from (overrides the configuration).
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run several methods on every matrix matching a glob.
    Compare {
        pattern: String,
        #[arg(long, value_delimiter = ',', default_value = "natural,rcm,md,nd,fiedler")]
        methods: Vec<Method>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        numeric: bool,
        #[arg(long)]
        omit_timing: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the fill-path oracle against the elimination game.
    Verify {
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Erdos)]
        graph: ModelArg,
        /// Edge probability for the Erdős–Rényi model.
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = OrderingArg::Random)]
        ordering: OrderingArg,
        #[arg(long, env = SEED_ENV, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Erdos,
    Grid,
    Path,
    Star,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Random,
    LeafFirst,
}

enum Failure {
    Usage(String),
    Data(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<fillorder::Error> for Failure {
    fn from(e: fillorder::Error) -> Self {
        match e {
            fillorder::Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Reorder { input, method, model, seed, fine_tune_epochs, fine_tune_lr, output } => {
            cmd_reorder(&input, method, model.as_deref(), seed, fine_tune_epochs, fine_tune_lr, &output)
        }
        Command::Evaluate { input, permutation, numeric, reorder_time, name, omit_timing, output } => {
            cmd_evaluate(&input, &permutation, numeric, reorder_time, name, omit_timing, output.as_deref())
        }
        Command::Train { config, epochs, lr, seed, stage, checkpoint, resume } => {
            let overrides = train_config::Overrides { epochs, lr, seed, stage, checkpoint, resume };
            cmd_train(&config, overrides)
        }
        Command::Compare { pattern, methods, model, seed, numeric, omit_timing, output } => {
            cmd_compare(&pattern, &methods, model.as_deref(), seed, numeric, omit_timing, output.as_deref())
        }
        Command::Verify { n_min, n_max, graph, p, trials, ordering, seed } => {
            cmd_verify(n_min, n_max, graph, p, trials, ordering, seed)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn read_matrix(path: &Path) -> Result<SparseSymmetricPattern, Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    parse_matrix_market(BufReader::new(file)).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_model(path: Option<&Path>) -> Result<Option<CfpModel>, Failure> {
    path.map(|p| {
        cfp::load_checkpoint_file(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
    })
    .transpose()
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn cmd_reorder(
    input: &Path,
    method: Method,
    model_path: Option<&Path>,
    seed: u64,
    fine_tune_epochs: usize,
    fine_tune_lr: f64,
    output: &Path,
) -> CmdResult {
    if method == Method::Cfp && model_path.is_none() {
        return Err(Failure::Usage("method cfp requires --model".into()));
    }
    let pattern = read_matrix(input)?;
    let graph = AdjacencyGraph::from_pattern(&pattern);
    let mut model = load_model(model_path)?;
    let start = Instant::now();
    if let (Some(m), true) = (model.as_mut(), fine_tune_epochs > 0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = GraphContext::new(&graph, &mut rng)?;
        let config = CfpTrainConfig { epochs: fine_tune_epochs, lr: fine_tune_lr, ..Default::default() };
        cfp::train_cfp(m, std::slice::from_ref(&ctx), &config, &mut rng)?;
    }
    let ordering = bench::compute_ordering(method, &graph, model.as_ref(), seed)?;
    let elapsed = start.elapsed();
    let mut sink = BufWriter::new(File::create(output)?);
    write_permutation(&ordering, &mut sink)?;
    sink.flush()?;
    println!("n={} m={} method={} time_s={:.6}", graph.n(), graph.m(), method, elapsed.as_secs_f64());
    Ok(())
}

fn write_table(records: &[bench::EvaluationRecord], omit_timing: bool, output: Option<&Path>) -> CmdResult {
    match output {
        Some(p) => {
            let mut sink = BufWriter::new(File::create(p)?);
            bench::write_records(records, &mut sink, omit_timing)?;
            sink.flush()?;
        }
        None => bench::write_records(records, io::stdout().lock(), omit_timing)?,
    }
    Ok(())
}

fn cmd_evaluate(
    input: &Path,
    permutation: &Path,
    numeric: bool,
    reorder_time: f64,
    name: Option<String>,
    omit_timing: bool,
    output: Option<&Path>,
) -> CmdResult {
    if !(reorder_time >= 0.0 && reorder_time.is_finite()) {
        return Err(Failure::Usage(format!("--reorder-time {reorder_time} must be a finite non-negative number")));
    }
    let pattern = read_matrix(input)?;
    let ordering = read_permutation(BufReader::new(File::open(permutation)?))
        .map_err(|e| Failure::Data(format!("{}: {e}", permutation.display())))?;
    let name = name.unwrap_or_else(|| stem(input));
    let record = bench::evaluate(
        &name,
        &pattern,
        &stem(permutation),
        &ordering,
        Duration::from_secs_f64(reorder_time),
        numeric,
    )?;
    write_table(&[record], omit_timing, output)
}

fn cmd_compare(
    pattern: &str,
    methods: &[Method],
    model_path: Option<&Path>,
    seed: u64,
    numeric: bool,
    omit_timing: bool,
    output: Option<&Path>,
) -> CmdResult {
    if methods.is_empty() {
        return Err(Failure::Usage("no methods given".into()));
    }
    if methods.contains(&Method::Cfp) && model_path.is_none() {
        return Err(Failure::Usage("method cfp requires --model".into()));
    }
    let paths = expand_glob(pattern)?;
    let model = load_model(model_path)?;
    let inputs: Vec<(String, Result<SparseSymmetricPattern, String>)> = paths
        .iter()
        .map(|p| (stem(p), read_matrix(p).map_err(|f| f.message().to_string())))
        .collect();
    let records = bench::compare_inputs(&inputs, methods, model.as_ref(), seed, numeric);
    write_table(&records, omit_timing, output)
}

fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, Failure> {
    let mut paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| Failure::Usage(format!("bad glob '{pattern}': {e}")))?
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Data(e.to_string()))?;
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::Data(format!("no files match '{pattern}'")));
    }
    Ok(paths)
}

fn cmd_verify(
    n_min: usize,
    n_max: usize,
    graph: ModelArg,
    p: f64,
    trials: usize,
    ordering: OrderingArg,
    seed: u64,
) -> CmdResult {
    let model = match graph {
        ModelArg::Erdos => GraphModel::Erdos { p },
        ModelArg::Grid => GraphModel::Grid,
        ModelArg::Path => GraphModel::Path,
        ModelArg::Star => GraphModel::Star,
    };
    let ordering = match ordering {
        OrderingArg::Random => VerifyOrdering::Random,
        OrderingArg::LeafFirst => VerifyOrdering::LeafFirst,
    };
    let report = bench::verify(model, n_min, n_max, trials, ordering, seed)?;
    println!("trials={} passed={} zero_fill={}", report.trials, report.passed, report.zero_fill);
    match report.counterexample {
        None => Ok(()),
        Some(c) => {
            println!("counterexample n={}", c.n);
            println!("edges={:?}", c.edges);
            println!("elim_seq={:?}", c.elim_seq);
            println!("oracle_only={:?}", c.oracle_only);
            println!("game_only={:?}", c.game_only);
            Err(Failure::Verification(format!("{} of {} trials disagree", report.trials - report.passed, report.trials)))
        }
    }
}

fn cmd_train(config_path: &Path, overrides: train_config::Overrides) -> CmdResult {
    let cfg = train_config::TrainConfig::load(config_path, overrides)?;
    let paths = expand_glob(&cfg.training_set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = match &cfg.resume {
        Some(p) => {
            let m = cfp::load_checkpoint_file(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            if m.config != cfg.model_config() {
                return Err(Failure::Usage(format!(
                    "{} was trained with hidden={} activation={}, configuration asks for hidden={} activation={}",
                    p.display(),
                    m.config.hidden,
                    m.config.activation.name(),
                    cfg.hidden,
                    cfg.activation.name()
                )));
            }
            m
        }
        None => CfpModel::new(cfg.model_config(), &mut rng)?,
    };
    if cfg.stage == train_config::Stage::Cfp && cfg.resume.is_none() {
        eprintln!("warning: training stage cfp on an untrained spectral stage");
    }
    let mut graphs = Vec::with_capacity(paths.len());
    for p in &paths {
        let graph = AdjacencyGraph::from_pattern(&read_matrix(p)?);
        graphs.push(GraphContext::new(&graph, &mut rng)?);
    }

    let mut spectral_log = Vec::new();
    let mut cfp_log = Vec::new();
    let mut outcome: CmdResult = Ok(());
    if cfg.stage.runs_spectral() {
        match cfp::train_spectral(&mut model, &graphs, cfg.spectral_epochs(), cfg.spectral_lr()) {
            Ok(log) => spectral_log = log,
            Err(e) => outcome = Err(e.into()),
        }
    }
    if outcome.is_ok() && cfg.stage.runs_cfp() {
        match cfp::train_cfp(&mut model, &graphs, &cfg.cfp_config(), &mut rng) {
            Ok(log) => cfp_log = log,
            Err(e) => outcome = Err(e.into()),
        }
    }
    // written on failure too: parameters are never updated by a failed step
    cfp::save_checkpoint_file(&model, &cfg.checkpoint)?;
    if let Some(log_path) = &cfg.log {
        let mut sink = BufWriter::new(File::create(log_path)?);
        cfp::write_training_log(&[("spectral", &spectral_log), ("cfp", &cfp_log)], &mut sink)?;
        sink.flush()?;
    }
    outcome?;
    let last = |log: &[cfp::EpochLog]| log.last().map_or("-".to_string(), |e| format!("{:.6}", e.loss));
    println!(
        "graphs={} spectral_loss={} cfp_loss={} checkpoint={}",
        graphs.len(),
        last(&spectral_log),
        last(&cfp_log),
        cfg.checkpoint.display()
    );
    Ok(())
}
