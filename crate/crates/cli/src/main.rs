//! Command-line front end: fBm path generation, per-path functional export,
//! Monte Carlo verification suites, and the drawdown risk report.
//!
//! Exit codes: 0 when every verdict passes, 2 on any failed verdict or a
//! usage/configuration error, 3 when the only non-passing verdicts are
//! inconclusive, 4 on an I/O failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbmx_core::ensemble::{DEFAULT_CENSOR_FACTOR, DEFAULT_PATHS, DEFAULT_STEPS_PER_UNIT};
use fbmx_core::{
    drawdown_report, ensemble_stream, overall_exit_code, parse_suites, path_from_increments,
    run_suites, simulate_ensemble, write_records_csv, CirculantSampler, Error, Extent, Hurst,
    RiskModelParams, RiskReport, RngSpec, SimulationConfig, Verdict, VerificationReport,
    SUITE_LIST,
};
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Random-stream family used by the `generate` and `functionals` export
/// subcommands; the verification suites draw from their own families, so
/// exports never share randomness with verification runs under one seed.
const EXPORT_STREAM_FAMILY: u32 = 0;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(err) => err.fmt(f),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Core(err)
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Core(Error::Io(err))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Core(Error::Io(io::Error::other(err)))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Io(_)) => 4,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "fbmx",
    version,
    about = "Exact fractional Brownian motion simulation, extreme-value functionals, \
             closed-form bounds, and Monte Carlo verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate fBm sample paths and write them as `t,value` CSV
    Generate(GenerateCmd),
    /// Simulate an ensemble and export its per-path extreme-value functionals as CSV
    Functionals(FunctionalsCmd),
    /// Run verification suites and write a JSON array of reports
    Verify(VerifyCmd),
    /// Drawdown/gap risk study of the scaled log-price component
    Report(ReportCmd),
}

/// Output format for subcommands that support more than one.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_hurst(raw: &str) -> Result<Hurst, String> {
    let value: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    Hurst::new(value).map_err(|e| e.to_string())
}

/// Simulation flags shared by every subcommand. Defaults that depend on
/// other flags (steps, censor horizon) or on the subcommand (paths) are
/// resolved in [`SimArgs::resolve`].
#[derive(Args)]
struct SimArgs {
    /// Hurst exponent H; must satisfy 0 < H < 1
    #[arg(long, value_parser = parse_hurst, allow_negative_numbers = true)]
    hurst: Hurst,

    /// Observation-window horizon a
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,

    /// Grid steps across the horizon [default: 16384 per unit horizon]
    #[arg(long)]
    steps: Option<usize>,

    /// Number of replications [default: 10000; 1 for generate]
    #[arg(long)]
    paths: Option<usize>,

    /// Master seed; every random stream is a pure function of (seed,
    /// subcommand stream family, replication index). Required by verify.
    #[arg(long)]
    seed: Option<u64>,

    /// Confidence level in (0,1) for every reported interval; the law
    /// tests run at significance 1 - confidence
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,

    /// Horizon at which hitting times are censored [default: 4 x horizon]
    #[arg(long)]
    censor_horizon: Option<f64>,

    /// Comma-separated tail thresholds x
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0, 3.0])]
    x_grid: Vec<f64>,

    /// Comma-separated gap thresholds y
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    y_grid: Vec<f64>,

    /// Comma-separated rates lambda for the Laplace-transform and
    /// exponential-horizon checks
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    lambda_grid: Vec<f64>,

    /// Worker threads for ensemble simulation (0 = one per CPU core);
    /// results are bit-identical for any value
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl SimArgs {
    fn resolve(&self, default_paths: usize) -> CliResult<SimulationConfig> {
        let steps = self.steps.unwrap_or_else(|| {
            (self.horizon * DEFAULT_STEPS_PER_UNIT as f64)
                .ceil()
                .max(0.0) as usize
        });
        let config = SimulationConfig {
            hurst: self.hurst,
            horizon: self.horizon,
            steps,
            paths: self.paths.unwrap_or(default_paths),
            master_seed: self.seed.unwrap_or(0),
            confidence: self.confidence,
            censor_horizon: self
                .censor_horizon
                .unwrap_or(DEFAULT_CENSOR_FACTOR * self.horizon),
            x_grid: self.x_grid.clone(),
            y_grid: self.y_grid.clone(),
            lambda_grid: self.lambda_grid.clone(),
        };
        config.validate()?;
        Ok(config)
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Core(Error::Io(io::Error::other(e))))
    }
}

#[derive(Args)]
struct GenerateCmd {
    #[command(flatten)]
    sim: SimArgs,

    /// Output CSV file; with --paths N > 1 each path i is written to a
    /// separate file with `-i` inserted before the extension. Stdout if
    /// omitted (single path only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FunctionalsCmd {
    #[command(flatten)]
    sim: SimArgs,

    /// Output CSV file; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    sim: SimArgs,

    /// Comma-separated suites to run; `all` expands to every suite whose
    /// Hurst precondition holds. Suites: thm1-identity, thm1-moment,
    /// corollary-tail, thm2-tail, thm2-expsup, eq15-laplace, thm3-gap,
    /// bm-sanity, risk-report.
    #[arg(long)]
    suite: String,

    /// Output file for the JSON report array; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format (verify reports are JSON)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ReportCmd {
    #[command(flatten)]
    sim: SimArgs,

    /// Output file; stdout if omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// json = full report; csv = the quantile table only
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Generate(cmd) => cmd_generate(cmd),
        Command::Functionals(cmd) => cmd_functionals(cmd),
        Command::Verify(cmd) => cmd_verify(cmd),
        Command::Report(cmd) => cmd_report(cmd),
    }
}

/// Echoes the fully resolved configuration (defaults filled) so every run
/// records exactly what it executed; JSON outputs additionally embed the
/// same configuration in each report.
fn echo_config(config: &SimulationConfig) -> CliResult<()> {
    eprintln!("config: {}", serde_json::to_string(config)?);
    Ok(())
}

fn summary_line(report: &VerificationReport) -> String {
    let verdict = match report.verdict {
        Verdict::Pass => "pass        ",
        Verdict::Fail => "FAIL        ",
        Verdict::Inconclusive => "inconclusive",
    };
    format!(
        "{verdict} {:<28} empirical {:.6} ci [{:.6}, {:.6}] analytic {:.6} (raw {:.6}) \
         samples {} censored {}",
        report.claim_id,
        report.empirical.estimate,
        report.empirical.ci_low,
        report.empirical.ci_high,
        report.analytic.clamped,
        report.analytic.unclamped,
        report.samples_used,
        report.censored_count,
    )
}

fn write_text(target: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match target {
        None => io::stdout().lock().write_all(text.as_bytes())?,
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// `base` with `-index` inserted before the extension.
fn indexed_path(base: &Path, index: usize) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{index}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{index}"),
    };
    base.with_file_name(name)
}

fn cmd_generate(cmd: &GenerateCmd) -> CliResult<u8> {
    let config = cmd.sim.resolve(1)?;
    if cmd.out.is_none() && config.paths > 1 {
        return Err(CliError::Usage(
            "writing more than one path requires --out".to_string(),
        ));
    }
    echo_config(&config)?;
    let grid = config.grid()?;
    let sampler = CirculantSampler::new(grid, config.hurst)?;
    for i in 0..config.paths {
        let spec = RngSpec::new(
            config.master_seed,
            ensemble_stream(EXPORT_STREAM_FAMILY, i as u32),
        );
        let mut rng = spec.rng();
        let increments = sampler.sample_increments(&mut rng);
        let path = path_from_increments(grid, config.hurst, &increments)?;
        match (&cmd.out, config.paths) {
            (None, _) => path.write_csv(io::stdout().lock())?,
            (Some(target), 1) => path.write_csv(BufWriter::new(File::create(target)?))?,
            (Some(target), _) => {
                path.write_csv(BufWriter::new(File::create(indexed_path(target, i))?))?
            }
        }
    }
    Ok(0)
}

fn cmd_functionals(cmd: &FunctionalsCmd) -> CliResult<u8> {
    let config = cmd.sim.resolve(DEFAULT_PATHS)?;
    echo_config(&config)?;
    let pool = cmd.sim.pool()?;
    let ensemble =
        pool.install(|| simulate_ensemble(&config, EXPORT_STREAM_FAMILY, Extent::CensorHorizon))?;
    match &cmd.out {
        None => write_records_csv(ensemble.records(), io::stdout().lock())?,
        Some(target) => {
            write_records_csv(ensemble.records(), BufWriter::new(File::create(target)?))?
        }
    }
    Ok(0)
}

fn cmd_verify(cmd: &VerifyCmd) -> CliResult<u8> {
    if cmd.sim.seed.is_none() {
        return Err(CliError::Usage(
            "--seed is required by verify: verification artifacts must be reproducible".to_string(),
        ));
    }
    if cmd.format == Format::Csv {
        return Err(CliError::Usage(
            "verify emits JSON report arrays; --format csv is not available here".to_string(),
        ));
    }
    let config = cmd.sim.resolve(DEFAULT_PATHS)?;
    // Suite names and Hurst preconditions are checked before any simulation.
    let suites = parse_suites(&cmd.suite, config.hurst).map_err(|e| match e {
        Error::UnknownSuite(name, _) => CliError::Usage(format!(
            "unknown suite '{name}'; valid suites: {SUITE_LIST}"
        )),
        other => CliError::Core(other),
    })?;
    echo_config(&config)?;
    let pool = cmd.sim.pool()?;
    let reports = pool.install(|| run_suites(&config, &suites))?;
    for report in &reports {
        eprintln!("{}", summary_line(report));
    }
    write_text(&cmd.out, &to_json(&reports)?)?;
    Ok(overall_exit_code(&reports) as u8)
}

fn quantile_csv(report: &RiskReport) -> String {
    let mut text = String::from("level,scaled_drawdown,scaled_gap\n");
    for row in &report.quantiles {
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            row.level, row.scaled_drawdown, row.scaled_gap
        ));
    }
    text
}

fn cmd_report(cmd: &ReportCmd) -> CliResult<u8> {
    let config = cmd.sim.resolve(DEFAULT_PATHS)?;
    let params = RiskModelParams::default_for(&config);
    echo_config(&config)?;
    let pool = cmd.sim.pool()?;
    let report = pool.install(|| drawdown_report(&params, &config))?;
    for sub in &report.reports {
        eprintln!("{}", summary_line(sub));
    }
    let text = match cmd.format {
        Format::Json => to_json(&report)?,
        Format::Csv => quantile_csv(&report),
    };
    write_text(&cmd.out, &text)?;
    Ok(overall_exit_code(&report.reports) as u8)
}
