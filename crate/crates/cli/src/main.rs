use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use zeroacf::analysis::{analyze, AnalysisOptions, AnalysisReport};
use zeroacf::dgp::{self, Case, DgpConfig, Innovation, ThresholdRule};
use zeroacf::kernel::{
    argmin_cv, cv_curve, cv_curve_marginal_pair, BandwidthPolicy, GridSpec, Kernel, MarginalTarget,
};
use zeroacf::montecarlo::{write_summary_csv, ExperimentConfig};
use zeroacf::series::{read_csv_path, ReturnSeries};
use zeroacf::{Error, Result};

#[derive(Parser)]
#[command(
    name = "zeroacf",
    version,
    about = "Autocorrelation of non-zero returns for illiquid assets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate corrected autocorrelations, null bands and the index for one series.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo experiment and write summary tables.
    Simulate(SimulateArgs),
    /// Print the leave-one-out CV curve for one lag.
    Bandwidth(BandwidthArgs),
    /// Write one simulated return trajectory as CSV.
    Sample(SampleArgs),
}

#[derive(Args)]
struct SmoothingArgs {
    /// epa, rect or tri
    #[arg(long, default_value = "epa")]
    kernel: Kernel,
    /// Fixed bandwidth in (0, 1], or "auto" for leave-one-out selection
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Search grid lo:hi:k (log-spaced)
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Score the marginal bandwidth against a_t a_{t-1} instead of a_t
    #[arg(long)]
    pair_target: bool,
}

impl SmoothingArgs {
    fn policy(&self) -> Result<BandwidthPolicy> {
        let target = if self.pair_target {
            MarginalTarget::LagOnePair
        } else {
            MarginalTarget::Indicator
        };
        if self.bandwidth.eq_ignore_ascii_case("auto") {
            return Ok(BandwidthPolicy::Loocv {
                grid: self.grid,
                marginal_target: target,
            });
        }
        let bandwidth: f64 = self.bandwidth.parse().map_err(|_| {
            Error::Config(format!(
                "bandwidth must be a number or auto, got {:?}",
                self.bandwidth
            ))
        })?;
        if !(bandwidth > 0.0 && bandwidth <= 1.0) {
            return Err(Error::Config(format!(
                "bandwidth must lie in (0, 1], got {bandwidth}"
            )));
        }
        Ok(BandwidthPolicy::Fixed { bandwidth })
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV with date,close columns or a single return column
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    lags: usize,
    #[command(flatten)]
    smoothing: SmoothingArgs,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Returns with |r| at or below this count as zero
    #[arg(long, default_value_t = 0.0)]
    zero_tol: f64,
    /// Subtract the sample mean before estimation
    #[arg(long)]
    demean: bool,
    /// Stationary trajectories simulated for the index reference (0 disables)
    #[arg(long, default_value_t = 200)]
    reference_trials: usize,
    #[arg(long, default_value_t = AnalysisOptions::default().reference_seed)]
    seed: u64,
    /// Also write a per-lag CSV table here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// File of key=value settings; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<Case>,
    /// Trajectory lengths, comma separated
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    kernel: Option<Kernel>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    grid: Option<GridSpec>,
    /// correlated or uncorrelated
    #[arg(long)]
    innovation: Option<Innovation>,
    /// Directory for mc_summary.csv and mc_summary.json; JSON to stdout otherwise
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BandwidthArgs {
    #[arg(long)]
    input: PathBuf,
    /// Lag; 0 selects the marginal bandwidth
    #[arg(long, default_value_t = 0)]
    h: usize,
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long, default_value = "epa")]
    kernel: Kernel,
    #[arg(long, default_value_t = 0.0)]
    zero_tol: f64,
    /// At h = 0, score against a_t a_{t-1} instead of a_t
    #[arg(long)]
    pair_target: bool,
    /// CSV destination; stdout otherwise
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value = "iv")]
    case: Case,
    #[arg(long, default_value_t = 1500)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "correlated")]
    innovation: Innovation,
    /// Use the one-sided 0.01 threshold for uncorrelated innovations
    #[arg(long)]
    one_sided: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let reason = text
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ");
            eprintln!("{}", json!({ "error": "validation", "message": reason }));
            return ExitCode::from(2);
        }
    };
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bandwidth(args) => cmd_bandwidth(args),
        Command::Sample(args) => cmd_sample(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    let kind = e.kind();
    eprintln!("{}", json!({ "error": kind, "message": e.to_string() }));
    ExitCode::from(match kind {
        "validation" => 2,
        "io" => 3,
        _ => 4,
    })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("ZEROACF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Config(format!(
            "ZEROACF_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn load_series(path: &Path, zero_tol: f64) -> Result<ReturnSeries> {
    read_csv_path(path)?.into_series(zero_tol)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let series = load_series(&args.input, args.zero_tol)?;
    let options = AnalysisOptions {
        m: args.lags,
        kernel: args.smoothing.kernel,
        bandwidth: args.smoothing.policy()?,
        level: args.level,
        demean: args.demean,
        reference_trials: args.reference_trials,
        reference_seed: args.seed,
    };
    let report = analyze(&series, &options)?;
    if let Some(path) = &args.out {
        write_lag_table(&report, create(path)?)?;
    }
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| Error::Degenerate(e.to_string()))?;
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

/// Per-lag table with the columns of a stock-by-stock summary.
fn write_lag_table<W: Write>(report: &AnalysisReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lag",
        "n",
        "zero_fraction",
        "rho0",
        "rho_pr",
        "rho_vpr",
        "halfwidth_pr",
        "halfwidth_vpr",
        "delta",
        "kappa",
    ])?;
    let acf = &report.acf;
    for (i, band) in report.bands.iter().enumerate() {
        w.write_record([
            band.lag.to_string(),
            report.series.n.to_string(),
            report.series.zero_fraction.to_string(),
            acf.rho0[i].to_string(),
            acf.rho_pr[i].to_string(),
            acf.rho_vpr[i].to_string(),
            band.halfwidth_pr.to_string(),
            band.halfwidth_vpr.to_string(),
            report.index.delta_h[i].to_string(),
            report.index.kappa.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut text = match &args.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut push = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            text.push_str(&format!("\n{key}={v}"));
        }
    };
    push("case", args.case.map(|c| c.label().to_string()));
    push("n", args.n.clone());
    push("trials", args.trials.map(|v| v.to_string()));
    push("seed", args.seed.map(|v| v.to_string()));
    push("level", args.level.map(|v| v.to_string()));
    push("lags", args.lags.map(|v| v.to_string()));
    push("kernel", args.kernel.map(|k| k.short_name().to_string()));
    push("bandwidth", args.bandwidth.clone());
    push("grid", args.grid.map(|g| g.to_string()));
    push("innovation", args.innovation.map(|i| i.to_string()));
    let config = ExperimentConfig::parse(&text)?;
    let summaries = config.run()?;
    let doc = json!({ "config": config, "summaries": summaries });
    let body = serde_json::to_string_pretty(&doc).map_err(|e| Error::Degenerate(e.to_string()))?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_summary_csv(&summaries, create(&dir.join("mc_summary.csv"))?)?;
            let mut f = create(&dir.join("mc_summary.json"))?;
            writeln!(f, "{body}")?;
            f.flush()?;
        }
        None => writeln!(io::stdout().lock(), "{body}")?,
    }
    Ok(())
}

fn cmd_bandwidth(args: BandwidthArgs) -> Result<()> {
    let series = load_series(&args.input, args.zero_tol)?;
    let a = series.amplitude();
    let range = args.grid.unwrap_or_else(|| GridSpec::default_for(a.len()));
    range.validate()?;
    let grid = range.points();
    let curve = if args.h == 0 && args.pair_target {
        cv_curve_marginal_pair(&a, 1, &grid, args.kernel)?
    } else {
        cv_curve(&a, args.h, &grid, args.kernel)?
    };
    let chosen = argmin_cv(&curve)?;
    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bandwidth", "cv", "selected"])?;
    for (i, p) in curve.iter().enumerate() {
        let cv = p.cv.map_or_else(|| "inf".to_string(), |v| v.to_string());
        w.write_record([p.bandwidth.to_string(), cv, (i == chosen).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let mut config = DgpConfig::preset(args.case, args.n, args.innovation, args.seed);
    if args.one_sided {
        config.threshold = ThresholdRule::OneSided;
    }
    let series = dgp::simulate(&config)?;
    let out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["return"])?;
    for r in series.values() {
        w.write_record([r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
