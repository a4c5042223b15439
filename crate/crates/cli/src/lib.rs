//! `pbs-ofa` command-line front end. Each subcommand parses flags into core
//! types, calls one core operation, and serializes the result.

pub mod ingest;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pbs_ofa_core::analytic::{ratio_grid, write_sweep_csv};
use pbs_ofa_core::econometrics::{
    self, logit_fit, logit_predict, mnl_predict, LogitModel, MNLModel, SyntheticParams, DEFAULT_FIT_TOL,
    DEFAULT_MAX_ITER,
};
use pbs_ofa_core::format::to_json;
use pbs_ofa_core::mc::{self, MCRecord, MCReport, GENERATOR};
use pbs_ofa_core::stochgame::{self, OfaValuationReport};
use pbs_ofa_core::{
    solve_scenario1, solve_scenario2, sweep_comparative_statics, Builder, DeterministicGame, GameOutcome, MCConfig,
    Scenario, StochasticGame, ValueDistribution,
};
use serde::Serialize;
use thiserror::Error;

pub use ingest::{ingest_csv, IngestError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] pbs_ofa_core::Error),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Output { .. } => EXIT_IO,
            CliError::Ingest(IngestError::Io { .. }) => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pbs-ofa", version, about = "Order flow auction and PBS block auction solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A distribution is either a bare exponential rate or a JSON object such as
/// `{"family":"exponential","rate":2}`.
fn parse_dist(s: &str) -> Result<ValueDistribution, String> {
    match s.trim().parse::<f64>() {
        Ok(rate) => ValueDistribution::exponential(rate).map_err(|e| e.to_string()),
        Err(_) => serde_json::from_str(s).map_err(|e| format!("expected a rate or a distribution object: {e}")),
    }
}

fn parse_builder(s: &str) -> Result<Builder, String> {
    match s {
        "A" | "a" => Ok(Builder::A),
        "B" | "b" => Ok(Builder::B),
        _ => Err(format!("expected A or B, got `{s}`")),
    }
}

#[derive(Debug, Args)]
struct GameArgs {
    /// Builder A's value distribution.
    #[arg(long, value_parser = parse_dist)]
    dist_a: ValueDistribution,
    /// Builder B's value distribution.
    #[arg(long, value_parser = parse_dist)]
    dist_b: ValueDistribution,
    /// Transaction value.
    #[arg(long)]
    vt: f64,
}

impl GameArgs {
    fn game(&self) -> Result<StochasticGame, CliError> {
        Ok(StochasticGame::new(self.dist_a, self.dist_b, self.vt)?)
    }
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    chunk_size: Option<u64>,
}

impl McArgs {
    fn config(&self) -> Result<MCConfig, CliError> {
        Ok(match self.chunk_size {
            Some(c) => MCConfig::with_chunk_size(self.n, self.seed, c)?,
            None => MCConfig::new(self.n, self.seed)?,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a game with known builder values.
    SolveDet {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        scenario: u8,
        #[arg(long)]
        va: f64,
        #[arg(long)]
        vb: f64,
        #[arg(long)]
        vt: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Each builder's ex-ante valuation of the transaction in the OFA.
    ValueOfa {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Win probabilities and expected profits in both scenarios.
    Compare {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form sweep over A's share of the total exponential rate.
    Sweep {
        #[arg(long)]
        vt: f64,
        #[arg(long, default_value_t = 2.0)]
        rate_sum: f64,
        /// Inclusive grid `lo:hi:step`.
        #[arg(long, default_value = "0.05:0.5:0.05")]
        ratios: String,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimates for one scenario.
    Simulate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        scenario: u8,
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimate of a builder's per-draw transaction valuation.
    DirectOfa {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_parser = parse_builder)]
        builder: Option<Builder>,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Logistic regression of `is_hft` on the price-change column.
    FitLogit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FIT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Logit probability at `x`.
    #[command(allow_negative_numbers = true)]
    PredictLogit {
        #[arg(long)]
        b0: f64,
        #[arg(long)]
        b1: f64,
        #[arg(long)]
        x: f64,
    },
    /// Multinomial class probabilities at `x`.
    #[command(allow_negative_numbers = true)]
    PredictMnl {
        #[arg(long)]
        x: f64,
        /// JSON model file; defaults to the published six-builder table.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Synthetic observations from the structural model.
    GenSynthetic {
        #[arg(long)]
        kappa_a: f64,
        #[arg(long)]
        kappa_b: f64,
        #[arg(long)]
        vt: f64,
        /// Volatility distribution.
        #[arg(long, value_parser = parse_dist)]
        volatility: ValueDistribution,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Serialize)]
struct SolveDetOutput {
    scenario: u8,
    #[serde(flatten)]
    outcome: GameOutcome,
}

#[derive(Serialize)]
struct ValueOfaOutput {
    #[serde(flatten)]
    quadrature: OfaValuationReport,
    taylor_v_ta: f64,
    taylor_v_tb: f64,
}

#[derive(Serialize)]
struct SimulateOutput {
    generator: &'static str,
    scenario: u8,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ofa_price: Option<f64>,
    results: Vec<MCRecord>,
}

#[derive(Serialize)]
struct LogitFitOutput {
    rows: usize,
    beta0: f64,
    beta1: f64,
    std_errors: [f64; 2],
    z_scores: [f64; 2],
    iterations: usize,
    log_likelihood: f64,
}

#[derive(Serialize)]
struct ProbabilityOutput {
    probability: f64,
}

#[derive(Serialize)]
struct SyntheticSummary {
    rows: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with injectable output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_VALIDATION
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut text = to_json(value).expect("output types serialize to JSON");
    text.push('\n');
    text
}

fn emit(target: &Output, body: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match &target.out {
        Some(path) => write_file(path, |w| w.write_all(body)),
        None => out.write_all(body).map_err(|source| CliError::Output { path: "<stdout>".into(), source }),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let wrap = |source| CliError::Output { path: path.display().to_string(), source };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(CliError::Usage(format!("--ratios must be lo:hi:step, got `{spec}`")));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("--ratios: `{s}`: {e}")));
    Ok(ratio_grid(num(lo)?, num(hi)?, num(step)?)?)
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::SolveDet { scenario, va, vb, vt, output } => {
            let game = DeterministicGame::new(va, vb, vt)?;
            let outcome = match Scenario::try_from(scenario)? {
                Scenario::One => solve_scenario1(&game),
                Scenario::Two => solve_scenario2(&game),
            };
            emit(&output, json(&SolveDetOutput { scenario, outcome }).as_bytes(), out)
        }
        Command::ValueOfa { game, output } => {
            let game = game.game()?;
            let report = ValueOfaOutput {
                quadrature: stochgame::ofa_valuations(&game)?,
                taylor_v_ta: stochgame::taylor_ofa_valuation(&game, Builder::A)?,
                taylor_v_tb: stochgame::taylor_ofa_valuation(&game, Builder::B)?,
            };
            emit(&output, json(&report).as_bytes(), out)
        }
        Command::Compare { game, output } => {
            let cmp = stochgame::compare_scenarios(&game.game()?)?;
            emit(&output, json(&cmp).as_bytes(), out)
        }
        Command::Sweep { vt, rate_sum, ratios, output } => {
            let rows = sweep_comparative_statics(vt, rate_sum, &parse_grid(&ratios)?)?;
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf).expect("writing to memory cannot fail");
            emit(&output, &buf, out)
        }
        Command::Simulate { scenario, game, mc, output } => {
            let (game, cfg) = (game.game()?, mc.config()?);
            let (ofa_price, results) = match Scenario::try_from(scenario)? {
                Scenario::One => (None, mc::simulate_scenario1(&game, &cfg)?.records(cfg.seed)),
                Scenario::Two => {
                    let sim = mc::simulate_scenario2(&game, &cfg)?;
                    (Some(sim.ofa_price), sim.records(cfg.seed))
                }
            };
            let doc = SimulateOutput { generator: GENERATOR, scenario, seed: cfg.seed, ofa_price, results };
            emit(&output, json(&doc).as_bytes(), out)
        }
        Command::DirectOfa { game, builder, mc, output } => {
            let (game, cfg) = (game.game()?, mc.config()?);
            let builders = match builder {
                Some(b) => vec![b],
                None => vec![Builder::A, Builder::B],
            };
            let mut results = Vec::new();
            for b in builders {
                let est = mc::direct_ofa_valuation(&game, b, &cfg)?;
                results.push(MCRecord::new(&format!("direct_ofa_{}", b.to_string().to_lowercase()), &est, cfg.seed));
            }
            emit(&output, json(&MCReport::new(results)).as_bytes(), out)
        }
        Command::FitLogit { data, tol, max_iter, output } => {
            let rows = ingest_csv(&data)?;
            let fit = logit_fit(&rows, tol, max_iter)?;
            let doc = LogitFitOutput {
                rows: rows.len(),
                beta0: fit.model.beta0,
                beta1: fit.model.beta1,
                std_errors: fit.std_errors,
                z_scores: fit.z_scores(),
                iterations: fit.iterations,
                log_likelihood: fit.log_likelihood,
            };
            emit(&output, json(&doc).as_bytes(), out)
        }
        Command::PredictLogit { b0, b1, x } => {
            let model = LogitModel::new(b0, b1)?;
            if !x.is_finite() {
                return Err(CliError::Usage(format!("--x must be finite, got {x}")));
            }
            let p = logit_predict(&model, x);
            out.write_all(json(&ProbabilityOutput { probability: p }).as_bytes())
                .map_err(|source| CliError::Output { path: "<stdout>".into(), source })
        }
        Command::PredictMnl { x, model } => {
            let model = match model {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|source| CliError::Output { path: path.display().to_string(), source })?;
                    let raw: MNLModel = serde_json::from_str(&text)
                        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                    MNLModel::new(raw.classes, raw.reference)?
                }
                None => MNLModel::table2(),
            };
            let probs = mnl_predict(&model, x)?;
            out.write_all(json(&probs).as_bytes())
                .map_err(|source| CliError::Output { path: "<stdout>".into(), source })
        }
        Command::GenSynthetic { kappa_a, kappa_b, vt, volatility, n, seed, output } => {
            let params = SyntheticParams { kappa_a, kappa_b, v_t: vt, volatility, n, seed };
            let rows = econometrics::generate_synthetic(&params)?;
            let mut buf = Vec::new();
            ingest::write_observations(&rows, &mut buf).expect("writing to memory cannot fail");
            emit(&output, &buf, out)?;
            let summary = SyntheticSummary {
                rows: rows.len(),
                seed,
                out: output.out.as_ref().map(|p| p.display().to_string()),
            };
            // With CSV on stdout the metadata goes to stderr so the table stays parseable.
            let meta = json(&summary);
            let sink: &mut dyn Write = if output.out.is_some() { out } else { err };
            sink.write_all(meta.as_bytes()).map_err(|source| CliError::Output { path: "<stdout>".into(), source })
        }
    }
}
