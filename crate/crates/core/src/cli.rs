//! Command-line front end. Every subcommand reads CSV inputs, writes its
//! results under the output directory and returns a process exit status.
//!
//! Exit status: 0 success, 2 usage, 3 data, 4 numerical.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{describe_measures, descriptive_table};
use crate::error::Error;
use crate::estimation::{Bandwidth, FitOptions};
use crate::evaluation::{dm_matrix, dm_table, dm_test, loss_table, losses, LossKind, LossReport};
use crate::features::ModelSpec;
use crate::forecast::{read_forecasts, rolling_panel, write_forecasts, write_model_series, ForecastPanel};
use crate::ingest::{self, DATE_FORMAT};
use crate::measures::{self, DailyMeasures};
use crate::models::{fit_suite, suite_table};
use crate::simulator::{self, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "harvol", version, about = "Realized volatility measures and HAR-family volatility models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Flags,
}

/// Tunables shared by all subcommands. Unset flags fall back to the JSON
/// config file, then to the defaults.
#[derive(Debug, Args, Default)]
struct Flags {
    /// Output directory [default: out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Rolling window, in regression rows [default: 1000]
    #[arg(long, global = true)]
    window: Option<usize>,
    /// Newey-West lag count, or `auto` [default: auto]
    #[arg(long, global = true)]
    bandwidth: Option<String>,
    /// Bartlett lag of the Diebold-Mariano long-run variance [default: 0]
    #[arg(long, global = true)]
    dm_lag: Option<usize>,
    /// Minimum ticks for a session to be kept [default: 10]
    #[arg(long, global = true)]
    min_obs: Option<usize>,
    /// Report variance-type statistics unscaled instead of multiplied by 1,000
    #[arg(long, global = true)]
    no_scale: bool,
    /// Multiply HAC covariances by n/(n-k)
    #[arg(long, global = true)]
    small_sample: bool,
    /// Simulation seed [default: 1]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulated trading days [default: 1000]
    #[arg(long, global = true)]
    days: Option<usize>,
    /// Intraday returns per simulated day [default: 78]
    #[arg(long, global = true)]
    n_per_day: Option<usize>,
    /// Correlation of a simulated day's return shock with the next log-variance shock [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true)]
    leverage_rho: Option<f64>,
    /// Worker threads for parallel sections [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Market label used in file names and report headers
    #[arg(long, global = true)]
    market: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tick CSV -> daily measures CSV and plot series
    ComputeMeasures {
        #[arg(long)]
        input: PathBuf,
    },
    /// Descriptive statistics and Ljung-Box Q(20) of the daily variables
    Describe {
        #[arg(long)]
        input: PathBuf,
    },
    /// Full-sample estimates of all eight models
    Fit {
        #[arg(long)]
        input: PathBuf,
    },
    /// Rolling one-day-ahead forecasts of every available model
    Forecast {
        #[arg(long)]
        input: PathBuf,
    },
    /// Losses and the full Diebold-Mariano matrix from a forecast CSV
    Evaluate {
        #[arg(long)]
        forecasts: PathBuf,
    },
    /// One Diebold-Mariano comparison, printed to stdout
    DmTest {
        #[arg(long)]
        forecasts: PathBuf,
        #[arg(long)]
        benchmark: ModelSpec,
        #[arg(long)]
        comparison: ModelSpec,
        #[arg(long, default_value = "mse")]
        loss: LossKind,
    },
    /// Simulate a jump-diffusion tick file with its ground truth
    Simulate,
    /// Ticks (or measures) -> measures, describe, fit, forecast, evaluate
    Pipeline {
        /// Tick CSV
        #[arg(long, conflicts_with = "measures", required_unless_present = "measures")]
        input: Option<PathBuf>,
        /// Measures CSV, skipping the tick stage
        #[arg(long)]
        measures: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    out: Option<PathBuf>,
    window: Option<usize>,
    bandwidth: Option<String>,
    dm_lag: Option<usize>,
    min_obs: Option<usize>,
    display_scaling: Option<bool>,
    small_sample: Option<bool>,
    seed: Option<u64>,
    days: Option<usize>,
    n_per_day: Option<usize>,
    leverage_rho: Option<f64>,
    threads: Option<usize>,
    market: Option<String>,
}

/// Resolved settings of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub out: PathBuf,
    pub window: usize,
    pub bandwidth: Bandwidth,
    pub dm_lag: usize,
    pub min_obs: usize,
    pub display_scaling: bool,
    pub small_sample: bool,
    pub seed: u64,
    pub days: usize,
    pub n_per_day: usize,
    pub leverage_rho: f64,
    pub threads: Option<usize>,
    pub market: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Module { module: &'static str, err: Error },
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Module { err, .. } if err.is_numerical() => EXIT_NUMERICAL,
            Failure::Module { .. } => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Module { module, err } => write!(f, "{module}: {err}"),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

trait In<T> {
    fn within(self, module: &'static str) -> Outcome<T>;
}

impl<T, E: Into<Error>> In<T> for std::result::Result<T, E> {
    fn within(self, module: &'static str) -> Outcome<T> {
        self.map_err(|e| Failure::Module { module, err: e.into() })
    }
}

fn resolve(flags: &Flags) -> Outcome<RunConfig> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text)
                .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let bandwidth = match flags.bandwidth.clone().or(file.bandwidth) {
        Some(s) => s.parse::<Bandwidth>().map_err(|e| Failure::Usage(e.to_string()))?,
        None => Bandwidth::Auto,
    };
    let cfg = RunConfig {
        out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        window: flags.window.or(file.window).unwrap_or(crate::forecast::DEFAULT_WINDOW),
        bandwidth,
        dm_lag: flags.dm_lag.or(file.dm_lag).unwrap_or(0),
        min_obs: flags.min_obs.or(file.min_obs).unwrap_or(ingest::DEFAULT_MIN_OBS),
        display_scaling: if flags.no_scale { false } else { file.display_scaling.unwrap_or(true) },
        small_sample: flags.small_sample || file.small_sample.unwrap_or(false),
        seed: flags.seed.or(file.seed).unwrap_or(1),
        days: flags.days.or(file.days).unwrap_or(1000),
        n_per_day: flags.n_per_day.or(file.n_per_day).unwrap_or(78),
        leverage_rho: flags.leverage_rho.or(file.leverage_rho).unwrap_or(0.0),
        threads: flags.threads.or(file.threads),
        market: flags.market.clone().or(file.market).unwrap_or_else(|| "market".into()),
    };
    if cfg.window == 0 {
        return Err(Failure::Usage("--window must be positive".into()));
    }
    if cfg.threads == Some(0) {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    if cfg.market.is_empty() || cfg.market.contains(['/', '\\']) {
        return Err(Failure::Usage(format!("--market `{}` is not a valid file-name prefix", cfg.market)));
    }
    Ok(cfg)
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let result = resolve(&cli.opts).and_then(|cfg| {
        std::fs::create_dir_all(&cfg.out)
            .map_err(|e| Failure::Usage(format!("output directory {}: {e}", cfg.out.display())))?;
        match cfg.threads {
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
                pool.install(|| dispatch(&cli.command, &cfg))
            }
            None => dispatch(&cli.command, &cfg),
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Outcome<()> {
    match command {
        Command::ComputeMeasures { input } => compute_measures(input, cfg).map(|_| ()),
        Command::Describe { input } => describe(&read_measures(input)?, cfg),
        Command::Fit { input } => fit(&read_measures(input)?, cfg),
        Command::Forecast { input } => forecast(&read_measures(input)?, cfg).map(|_| ()),
        Command::Evaluate { forecasts } => {
            let recs = read_forecasts(open(forecasts)?).within("forecast")?;
            let panel = ForecastPanel::from_records(cfg.window, recs).within("evaluation")?;
            evaluate(&panel, cfg)
        }
        Command::DmTest { forecasts, benchmark, comparison, loss } => {
            let recs = read_forecasts(open(forecasts)?).within("forecast")?;
            let panel = ForecastPanel::from_records(cfg.window, recs).within("evaluation")?;
            let side = |m: ModelSpec| {
                panel.for_model(m).ok_or_else(|| Failure::Module {
                    module: "evaluation",
                    err: Error::Unavailable(format!("no forecasts for {m} in {}", forecasts.display())),
                })
            };
            let r = dm_test(side(*benchmark)?, side(*comparison)?, *loss, cfg.dm_lag).within("evaluation")?;
            println!(
                "benchmark={} comparison={} loss={} DM={:.4}{} p={:.4e} m={} lag={}",
                r.benchmark,
                r.comparison,
                r.loss,
                r.statistic,
                r.significance().stars(),
                r.p_value,
                r.m,
                r.lrv_lag
            );
            Ok(())
        }
        Command::Simulate => simulate(cfg),
        Command::Pipeline { input, measures } => {
            let m = match (input, measures) {
                (Some(ticks), _) => compute_measures(ticks, cfg)?,
                (None, Some(path)) => {
                    let m = read_measures(path)?;
                    emit_plot_series(&m, &cfg.out, &cfg.market).within("cli")?;
                    m
                }
                (None, None) => return Err(Failure::Usage("pipeline needs --input or --measures".into())),
            };
            describe(&m, cfg)?;
            fit(&m, cfg)?;
            let panel = forecast(&m, cfg)?;
            evaluate(&panel, cfg)
        }
    }
}

fn open(path: &Path) -> Outcome<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Module { module: "ingest", err: Error::Invalid(format!("{}: {e}", path.display())) })
}

fn read_measures(path: &Path) -> Outcome<Vec<DailyMeasures>> {
    ingest::load_measures(open(path)?).within("ingest")
}

fn create(dir: &Path, market: &str, suffix: &str) -> std::io::Result<BufWriter<File>> {
    File::create(dir.join(format!("{market}_{suffix}"))).map(BufWriter::new)
}

/// JSON documents carry their units in a leading field.
#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    units: &'a str,
    market: &'a str,
    data: T,
}

fn write_json<T: Serialize>(cfg: &RunConfig, suffix: &str, units: &str, data: T) -> crate::Result<()> {
    let mut w = create(&cfg.out, &cfg.market, suffix)?;
    serde_json::to_writer_pretty(&mut w, &Document { units, market: &cfg.market, data })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_text(cfg: &RunConfig, suffix: &str, text: &str) -> crate::Result<()> {
    let mut w = create(&cfg.out, &cfg.market, suffix)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Writes `<market>_rv.csv` (`date,rv`) and `<market>_ln_rv.csv` (`date,ln_rv`).
pub fn emit_plot_series(measures: &[DailyMeasures], dir: &Path, market: &str) -> crate::Result<()> {
    let mut rv = create(dir, market, "rv.csv")?;
    let mut ln = create(dir, market, "ln_rv.csv")?;
    writeln!(rv, "# {market}: daily realized variance; units: squared log returns; no display scaling")?;
    writeln!(rv, "date,rv")?;
    writeln!(ln, "# {market}: natural log of daily realized variance; units: ln(squared log returns)")?;
    writeln!(ln, "date,ln_rv")?;
    for m in measures {
        let d = m.date.format(DATE_FORMAT);
        writeln!(rv, "{d},{:.16e}", m.rv)?;
        writeln!(ln, "{d},{:.16e}", m.rv.ln())?;
    }
    rv.flush()?;
    ln.flush()?;
    Ok(())
}

fn compute_measures(input: &Path, cfg: &RunConfig) -> Outcome<Vec<DailyMeasures>> {
    let ticks = ingest::parse_ticks(open(input)?).within("ingest")?;
    let sess = ingest::sessions_from_ticks(&ticks, cfg.min_obs, cfg.market.clone()).within("ingest")?;
    let m = measures::compute_all(&sess.dataset).within("measures")?;
    let write = || -> crate::Result<()> {
        let mut w = create(&cfg.out, &cfg.market, "measures.csv")?;
        measures::write_measures(&mut w, &m)?;
        w.flush()?;
        let mut w = create(&cfg.out, &cfg.market, "dropped_days.csv")?;
        writeln!(w, "# sessions dropped for having fewer than {} ticks; units: tick counts", cfg.min_obs.max(2))?;
        writeln!(w, "date,ticks")?;
        for d in &sess.dropped {
            writeln!(w, "{},{}", d.date.format(DATE_FORMAT), d.ticks)?;
        }
        w.flush()?;
        emit_plot_series(&m, &cfg.out, &cfg.market)
    };
    write().within("measures")?;
    Ok(m)
}

fn describe(m: &[DailyMeasures], cfg: &RunConfig) -> Outcome<()> {
    let rows = describe_measures(m, cfg.display_scaling).within("diagnostics")?;
    write_text(cfg, "describe.txt", &descriptive_table(&cfg.market, &rows)).within("diagnostics")?;
    let units = if cfg.display_scaling {
        "rows flagged `scaled` have mean, median, max, min and std_dev multiplied by 1,000; kurtosis is excess"
    } else {
        "raw units, no display scaling; kurtosis is excess"
    };
    write_json(cfg, "describe.json", units, &rows).within("diagnostics")
}

fn fit(m: &[DailyMeasures], cfg: &RunConfig) -> Outcome<()> {
    let options = FitOptions { bandwidth: cfg.bandwidth, small_sample: cfg.small_sample };
    let suite = fit_suite(&cfg.market, m, &options).within("models")?;
    write_text(cfg, "fit.txt", &suite_table(&suite)).within("models")?;
    write_json(cfg, "fit.json", "dependent variable ln RV; regressors as labelled; HAC standard errors", &suite)
        .within("models")
}

fn forecast(m: &[DailyMeasures], cfg: &RunConfig) -> Outcome<ForecastPanel> {
    let panel = rolling_panel(m, &ModelSpec::ALL, cfg.window).within("forecast")?;
    let write = || -> crate::Result<()> {
        let mut w = create(&cfg.out, &cfg.market, "forecasts.csv")?;
        write_forecasts(&mut w, &panel)?;
        w.flush()?;
        for model in &panel.models {
            let slug = model.name().to_ascii_lowercase();
            let mut w = create(&cfg.out, &cfg.market, &format!("forecast_{slug}.csv"))?;
            write_model_series(&mut w, &panel.records[model])?;
            w.flush()?;
        }
        let mut w = create(&cfg.out, &cfg.market, "forecast_skipped.csv")?;
        writeln!(w, "# forecast origins skipped for a singular window; dates are target dates")?;
        writeln!(w, "date,model,reason")?;
        for s in &panel.skipped {
            writeln!(w, "{},{},\"{}\"", s.date.format(DATE_FORMAT), s.model, s.reason.replace('"', "'"))?;
        }
        w.flush()?;
        Ok(())
    };
    write().within("forecast")?;
    Ok(panel)
}

fn evaluate(panel: &ForecastPanel, cfg: &RunConfig) -> Outcome<()> {
    let reports: Vec<LossReport> = panel
        .models
        .iter()
        .map(|m| losses(&panel.records[m]))
        .collect::<crate::Result<_>>()
        .within("evaluation")?;
    let dm = dm_matrix(panel, &LossKind::ALL, cfg.dm_lag).within("evaluation")?;
    let write = || -> crate::Result<()> {
        write_text(cfg, "losses.txt", &loss_table(&reports))?;
        write_json(cfg, "losses.json", "losses on ln RV; no display scaling", &reports)?;
        write_text(cfg, "dm.txt", &dm_table(&dm))?;
        write_json(cfg, "dm.json", "Diebold-Mariano statistics, d = L(benchmark) - L(comparison)", &dm)?;
        let mut w = create(&cfg.out, &cfg.market, "dm.csv")?;
        writeln!(w, "# Diebold-Mariano statistics, d = L(benchmark) - L(comparison); losses on ln RV; lag {}", cfg.dm_lag)?;
        writeln!(w, "benchmark,comparison,loss,statistic,p_value,stars,m")?;
        for r in &dm {
            writeln!(
                w,
                "{},{},{},{:.16e},{:.16e},{},{}",
                r.benchmark,
                r.comparison,
                r.loss,
                r.statistic,
                r.p_value,
                r.significance().stars(),
                r.m
            )?;
        }
        w.flush()?;
        Ok(())
    };
    write().within("evaluation")
}

fn simulate(cfg: &RunConfig) -> Outcome<()> {
    let sim = SimConfig {
        days: cfg.days,
        n_per_day: cfg.n_per_day,
        seed: cfg.seed,
        leverage_rho: cfg.leverage_rho,
        market: cfg.market.clone(),
        ..SimConfig::default()
    };
    sim.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let (dataset, truth) = simulator::simulate(&sim).within("simulator")?;
    let write = || -> crate::Result<()> {
        let ticks = ingest::ticks_from_dataset(&dataset, 100.0);
        let mut w = create(&cfg.out, &cfg.market, "ticks.csv")?;
        ingest::write_ticks(
            &mut w,
            &ticks,
            &format!("simulated jump-diffusion, seed {}, {} returns per day; units: price levels", sim.seed, sim.n_per_day),
        )?;
        w.flush()?;
        let mut w = create(&cfg.out, &cfg.market, "truth.csv")?;
        simulator::write_truth(&mut w, &truth)?;
        w.flush()?;
        write_json(cfg, "sim_config.json", "daily variance units; jump sizes in log-price units", &sim)
    };
    write().within("simulator")
}
