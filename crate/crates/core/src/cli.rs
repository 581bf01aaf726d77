//! Command-line front end. Every command prints one JSON payload (or flat
//! `key,value` CSV) on stdout and logs on stderr.

use std::path::PathBuf;

use chrono::NaiveTime;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analytic::{self, MarketOrderMode};
use crate::error::{Error, Result};
use crate::estimation::{hill_estimate, loglog_fit, EmpiricalTail, FitWindow, TailSide};
use crate::pipeline::{self, PipelineOptions, ReferenceRule, ReportOptions};
use crate::placement::PlacementModel;
use crate::simulate::{self, SimulationConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "auction-tails",
    version,
    about = "Call-auction clearing prices and their tails"
)]
pub struct Cli {
    /// Overrides the seed of any command that draws random numbers.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate auctions from a TOML config and write the returns as CSV.
    Simulate(SimulateArgs),
    /// Evaluate the exact or asymptotic clearing-price law.
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Fit a power-law tail to a single-column CSV sample.
    Fit(FitArgs),
    /// Aggregate order data and write per-stock and group reports.
    Pipeline(PipelineArgs),
    /// Write a synthetic orders/trades/metadata fixture.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; the metadata goes next to it as `.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    With,
    Without,
}

impl From<ModeArg> for MarketOrderMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::With => MarketOrderMode::With,
            ModeArg::Without => MarketOrderMode::Without,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    /// P(X_lower > M | N_A, N_B, Δ) from F_A(M) and F_B(M).
    Survival {
        #[arg(long)]
        pa: f64,
        #[arg(long)]
        pb: f64,
        #[arg(long)]
        na: u32,
        #[arg(long)]
        nb: u32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        delta: i64,
    },
    /// Leading-order tail of the conditional survival for Pareto placements.
    Asymptote {
        #[arg(long)]
        m: f64,
        #[arg(long)]
        a_sell: f64,
        #[arg(long)]
        a_buy: f64,
        #[arg(long, default_value_t = 1.0)]
        scale_sell: f64,
        #[arg(long, default_value_t = 1.0)]
        scale_buy: f64,
        #[arg(long)]
        na: u32,
        #[arg(long)]
        nb: u32,
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<i64>,
    },
    /// Predicted return tail exponents with and without market orders.
    Exponents {
        #[arg(long)]
        a_a: f64,
        #[arg(long)]
        a_b: f64,
        #[arg(long)]
        c: f64,
        /// Also minimize over the (n, d) grid up to this count.
        #[arg(long)]
        bruteforce_n: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Right,
    Left,
}

impl From<SideArg> for TailSide {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Right => TailSide::Right,
            SideArg::Left => TailSide::Left,
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    pub side: SideArg,
    /// `quantiles:START,STOP`, `sigma:K` or `range:LO,HI`.
    #[arg(long, default_value = "quantiles:0.05,0.001")]
    pub window: String,
    /// Resolve quantile windows on this sample instead of the input.
    #[arg(long)]
    pub bounded_by: Option<PathBuf>,
    #[arg(long)]
    pub binned: bool,
    /// Also report the Hill estimate from the top K order statistics.
    #[arg(long)]
    pub hill_k: Option<usize>,
    /// Write `log10_x,log10_ccdf` plot data here.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub orders: PathBuf,
    #[arg(long)]
    pub trades: PathBuf,
    #[arg(long)]
    pub metadata: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Tick size for stocks without one in the metadata.
    #[arg(long, default_value = "0.01")]
    pub tick_size: String,
    /// End of continuous trading (HH:MM:SS); defaults to the last trade.
    #[arg(long)]
    pub close_time: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub vwap_minutes: i64,
    /// Subtract per-stock means before standardizing returns.
    #[arg(long)]
    pub demean: bool,
    #[arg(long)]
    pub binned: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub days: Option<u32>,
}

fn parse_window(spec: &str) -> Result<(String, Vec<f64>)> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("window {spec:?} needs KIND:VALUES")))?;
    let values = rest
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("window {spec:?} has a non-numeric value")))?;
    let arity = match kind {
        "quantiles" | "range" => 2,
        "sigma" => 1,
        _ => return Err(Error::Config(format!("unknown window kind {kind:?}"))),
    };
    if values.len() != arity {
        return Err(Error::Config(format!(
            "window {spec:?} needs {arity} values"
        )));
    }
    Ok((kind.to_string(), values))
}

fn cmd_simulate(args: &SimulateArgs, seed: Option<u64>) -> Result<Value> {
    let mut config = SimulationConfig::from_file(&args.config)?;
    if let Some(n) = args.n {
        config.n_auctions = n;
    }
    if let Some(m) = args.mode {
        config.mode = m.into();
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    let sample = simulate::simulate_auctions(&config)?;
    let meta = simulate::write_sample(&sample, &args.out)?;
    log::info!(
        "wrote {} returns to {}",
        sample.values.len(),
        args.out.display()
    );
    Ok(json!({
        "n_auctions": config.n_auctions,
        "returns": sample.values.len(),
        "failures": sample.failures(),
        "seed": config.seed,
        "mode": config.mode,
        "config_hash": sample.metadata.config_hash,
        "output": args.out,
        "metadata": meta,
    }))
}

fn cmd_analytic(cmd: &AnalyticCommand) -> Result<Value> {
    match *cmd {
        AnalyticCommand::Survival {
            pa,
            pb,
            na,
            nb,
            delta,
        } => {
            let s = analytic::survival_lower_delta(pa, pb, na, nb, delta)?;
            Ok(json!({ "pa": pa, "pb": pb, "na": na, "nb": nb, "delta": delta, "survival": s }))
        }
        AnalyticCommand::Asymptote {
            m,
            a_sell,
            a_buy,
            scale_sell,
            scale_buy,
            na,
            nb,
            delta,
        } => {
            let sell = PlacementModel::pareto(a_sell, scale_sell)?;
            let buy = PlacementModel::pareto(a_buy, scale_buy)?;
            let value = match delta {
                Some(d) => analytic::asymptote_conditional_delta(m, &sell, &buy, na, nb, d)?,
                None => analytic::asymptote_conditional(m, &sell, &buy, na, nb)?,
            };
            let exact = match delta {
                Some(d) => analytic::survival_lower_delta_tails(
                    sell.survival(m),
                    buy.survival(m),
                    na,
                    nb,
                    d,
                ),
                None => analytic::survival_lower_delta_tails(
                    sell.survival(m),
                    buy.survival(m),
                    na,
                    nb,
                    0,
                ),
            }
            .ok();
            Ok(
                json!({ "m": m, "na": na, "nb": nb, "delta": delta, "asymptote": value, "exact": exact }),
            )
        }
        AnalyticCommand::Exponents {
            a_a,
            a_b,
            c,
            bruteforce_n,
        } => {
            let p = analytic::predict_exponents(a_a, a_b, c)?;
            let left = analytic::ExponentPrediction::left_tail(a_a, a_b, c);
            let brute = bruteforce_n
                .map(|n| analytic::exponent_bruteforce(a_a, a_b, c, n))
                .transpose()?;
            Ok(json!({
                "a_a": a_a,
                "a_b": a_b,
                "c": c,
                "no_mo": p.no_mo,
                "with_mo": p.with_mo,
                "heavier_without_mo": p.heavier_without_mo,
                "swapped": { "no_mo": left.no_mo, "with_mo": left.with_mo },
                "bruteforce_with_mo": brute,
            }))
        }
    }
}

fn cmd_fit(args: &FitArgs) -> Result<Value> {
    let values = simulate::read_sample_column(&args.input)?;
    let side: TailSide = args.side.into();
    let tail = EmpiricalTail::new(&values, side)?;
    let (kind, v) = parse_window(&args.window)?;
    let window = match kind.as_str() {
        "quantiles" => match &args.bounded_by {
            Some(path) => {
                let bounding = EmpiricalTail::new(&simulate::read_sample_column(path)?, side)?;
                FitWindow::bounded_by(&bounding, v[0], v[1])?
            }
            None => FitWindow::Quantiles {
                start: v[0],
                stop: v[1],
            },
        },
        "sigma" => FitWindow::Sigma { threshold: v[0] },
        _ => FitWindow::Range { lo: v[0], hi: v[1] },
    };
    let fit = loglog_fit(&tail, window, args.binned)?;
    let hill = args.hill_k.map(|k| hill_estimate(&tail, k)).transpose()?;
    if let Some(path) = &args.plot {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["log10_x", "log10_ccdf"])?;
        for (x, y) in tail.loglog_points() {
            w.write_record([format!("{x:.6}"), format!("{y:.6}")])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(json!({
        "input": args.input,
        "side": side,
        "n": tail.len(),
        "fit": fit,
        "hill": hill,
        "plot": args.plot,
    }))
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<Value> {
    let close_time = args
        .close_time
        .as_deref()
        .map(|t| {
            NaiveTime::parse_from_str(t, "%H:%M:%S")
                .map_err(|e| Error::Config(format!("close time {t:?}: {e}")))
        })
        .transpose()?;
    let options = PipelineOptions {
        default_tick_size: Some(args.tick_size.clone()),
        reference: ReferenceRule {
            window_minutes: args.vwap_minutes,
            close_time,
        },
        report: ReportOptions {
            demean: args.demean,
            binned: args.binned,
            ..ReportOptions::default()
        },
    };
    let summary = pipeline::run_to_dir(
        &args.orders,
        &args.trades,
        &args.metadata,
        &args.out,
        &options,
    )?;
    Ok(serde_json::to_value(summary)?)
}

fn cmd_synth(args: &SynthArgs, seed: Option<u64>) -> Result<Value> {
    let mut fixture = pipeline::synthetic::SyntheticFixture::default();
    if let Some(d) = args.days {
        fixture.days = d;
    }
    if let Some(s) = seed {
        fixture.seed = s;
    }
    pipeline::synthetic::write_fixture(&fixture, &args.out)?;
    Ok(json!({ "out": args.out, "fixture": fixture }))
}

/// Runs a parsed command and returns its result payload.
pub fn execute(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, cli.seed),
        Command::Analytic(c) => cmd_analytic(c),
        Command::Fit(a) => cmd_fit(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Synth(a) => cmd_synth(a, cli.seed),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Analytic(AnalyticCommand::Survival { .. }) => "analytic.survival",
        Command::Analytic(AnalyticCommand::Asymptote { .. }) => "analytic.asymptote",
        Command::Analytic(AnalyticCommand::Exponents { .. }) => "analytic.exponents",
        Command::Fit(_) => "fit",
        Command::Pipeline(_) => "pipeline",
        Command::Synth(_) => "synth",
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::FailedAuction(_) => "failed_auction",
        Error::Domain(_) => "domain",
        Error::InvalidOrder(_) => "invalid_order",
        Error::InsufficientTailData { .. } => "insufficient_tail_data",
        Error::NonPositiveValues(_) => "non_positive_values",
        Error::DegenerateSample(_) => "degenerate_sample",
        Error::ZeroVariance(_) => "zero_variance",
        Error::InsufficientData(_) => "insufficient_data",
        Error::NoTradesInWindow => "no_trades_in_window",
        Error::ResamplingExhausted(_) => "resampling_exhausted",
        Error::Config(_) => "config",
        Error::Parse { .. } => "parse",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
        Error::Io { .. } => "io",
    }
}

/// `key,value` rows for the top-level scalar fields, nested values as JSON.
fn to_csv(payload: &Value) -> String {
    let mut out = String::from("key,value\n");
    if let Value::Object(map) = payload {
        for (k, v) in map {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let quoted = if text.contains([',', '"', '\n']) {
                format!("\"{}\"", text.replace('"', "\"\""))
            } else {
                text
            };
            out.push_str(&format!("{k},{quoted}\n"));
        }
    }
    out
}

/// Runs the CLI with the given arguments and returns the process exit code.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let name = command_name(&cli.command);
    let (payload, code) = match execute(&cli) {
        Ok(result) => (
            json!({ "schema_version": SCHEMA_VERSION, "command": name, "result": result }),
            0,
        ),
        Err(e) => {
            log::error!("{e}");
            (
                json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": name,
                    "error": { "kind": error_kind(&e), "message": e.to_string() },
                }),
                e.exit_code(),
            )
        }
    };
    match cli.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&payload).expect("json payload")
        ),
        Format::Csv => {
            let body = payload
                .get("result")
                .or_else(|| payload.get("error"))
                .unwrap_or(&payload);
            print!("{}", to_csv(body));
        }
    }
    code
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}
