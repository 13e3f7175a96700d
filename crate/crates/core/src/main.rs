use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use postsel::criteria::Criterion;
use postsel::error::{Error, Result};
use postsel::harness::{analyze_csv, emit_report, simulate_coverage, AnalysisOptions, Report, ReportFormat, SimulationConfig};
use postsel::inference::SigmaSpec;

#[derive(Parser)]
#[command(name = "postsel", version, about = "Confidence intervals that account for best-subset selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every candidate model and report the selected one.
    Select(DataArgs),
    /// Classical and corrected intervals for chosen targets.
    Ci {
        #[command(flatten)]
        data: DataArgs,
        /// coef:NAME, point:v1,v2,... or combo:c1,c2,... (repeatable)
        #[arg(long = "target", required = true)]
        targets: Vec<String>,
    },
    /// Coverage study driven by a TOML configuration file.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        criterion: Option<Criterion>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "sigma")]
        sigma: Vec<String>,
        #[arg(long)]
        intercept: bool,
        #[arg(long = "skip-supersets")]
        skip_supersets: Option<Switch>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Selection plus intervals for every selected coefficient.
    Analyze(DataArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    response: String,
    /// Predictor columns (default: every other column).
    #[arg(long = "predictor")]
    predictors: Vec<String>,
    #[arg(long, default_value = "aic")]
    criterion: Criterion,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// known:<v>, mse-aic, mse-full or external:<v> (repeatable; default mse-full)
    #[arg(long = "sigma")]
    sigma: Vec<String>,
    /// Add an intercept that every candidate model keeps.
    #[arg(long)]
    intercept: bool,
    #[arg(long = "skip-supersets", default_value = "on")]
    skip_supersets: Switch,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "json")]
    format: Format,
    /// Directory for report files; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plotdata,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Plotdata => ReportFormat::PlotData,
        }
    }
}

fn parse_sigmas(raw: &[String]) -> Result<Vec<SigmaSpec>> {
    raw.iter().map(|s| s.parse()).collect()
}

fn options(args: &DataArgs, targets: Option<Vec<String>>) -> Result<AnalysisOptions> {
    let sigma = parse_sigmas(&args.sigma)?;
    Ok(AnalysisOptions {
        response: args.response.clone(),
        predictors: (!args.predictors.is_empty()).then(|| args.predictors.clone()),
        criterion: args.criterion,
        alpha: args.alpha,
        sigma_strategies: if sigma.is_empty() { vec![SigmaSpec::MseFull] } else { sigma },
        intercept: args.intercept,
        skip_supersets: matches!(args.skip_supersets, Switch::On),
        targets,
    })
}

fn output(report: &Report, out: &OutputArgs) -> Result<()> {
    let format = ReportFormat::from(out.format);
    let text = match &out.out {
        Some(dir) => emit_report(report, format, dir)?
            .iter()
            .map(|p| format!("{}\n", p.display()))
            .collect(),
        None => match format {
            ReportFormat::Json => format!("{}\n", report.to_json()),
            ReportFormat::Csv => report.to_csv(),
            ReportFormat::PlotData => report
                .plot_tables()
                .into_iter()
                .map(|(name, table)| format!("# {name}\n{table}"))
                .collect(),
        },
    };
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load_config(path: Option<&Path>) -> Result<SimulationConfig> {
    match path {
        Some(p) => SimulationConfig::load(p),
        None => Ok(SimulationConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Select(args) => {
            let report = analyze_csv(&args.data, &options(&args, Some(Vec::new()))?)?;
            output(&Report::from_analysis(&report), &args.output)
        }
        Command::Ci { data, targets } => {
            let report = analyze_csv(&data.data, &options(&data, Some(targets))?)?;
            output(&Report::from_analysis(&report), &data.output)
        }
        Command::Analyze(args) => {
            let report = analyze_csv(&args.data, &options(&args, None)?)?;
            output(&Report::from_analysis(&report), &args.output)
        }
        Command::Simulate {
            config,
            reps,
            seed,
            criterion,
            alpha,
            sigma,
            intercept,
            skip_supersets,
            output: out,
        } => {
            let mut config = load_config(config.as_deref())?;
            if let Some(r) = reps {
                config.reps = r;
            }
            if let Some(s) = seed {
                config.master_seed = s;
            }
            if let Some(c) = criterion {
                config.criterion = c;
            }
            if let Some(a) = alpha {
                config.alpha = a;
            }
            if !sigma.is_empty() {
                config.sigma_strategies = parse_sigmas(&sigma)?;
            }
            if intercept {
                config.intercept = true;
            }
            if let Some(s) = skip_supersets {
                config.skip_supersets = matches!(s, Switch::On);
            }
            let report = simulate_coverage(&config)?;
            output(&Report::from_coverage(&report), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
