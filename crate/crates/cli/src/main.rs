use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use errcorr::correlation::{corr_matrix, MethodChoice};
use errcorr::data::{gen_synthetic, Nonlinearity, SyntheticConfig, Task, TaskKind};
use errcorr::error::{Error, ErrorClass, Result};
use errcorr::external::read_prediction_errors;
use errcorr::report::{self, default_out_dir, HeatmapStyle};
use errcorr::scenarios::ScenarioConfig;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Train model fleets and measure how correlated their errors are.
#[derive(Debug, Parser)]
#[command(name = "errcorr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Different model families on one dataset.
    Scenario1(ScenarioArgs),
    /// One model family, each member missing one feature.
    Scenario2(ScenarioArgs),
    /// Heads fine-tuned on several pretrained encoders.
    Scenario3(ScenarioArgs),
    /// Error correlations of externally produced predictions.
    Corr(CorrArgs),
    /// Render a matrix JSON file as an SVG heatmap.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NonlinearityArg {
    None,
    Squares,
    Interactions,
}

#[derive(Debug, clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// Comma-separated signal weights, one per feature [default: all 1]
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5)]
    noise_sd: f64,
    #[arg(long, value_enum, default_value = "none")]
    nonlinearity: NonlinearityArg,
    /// Number of classes; omit for a regression target
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "y")]
    target_name: String,
    /// Output CSV [default: synthetic.csv in the output directory]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ScenarioArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory [default: $ERRCORR_OUT_DIR or the working directory]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Pearson,
    Phik,
}

#[derive(Debug, clap::Args)]
struct CorrArgs {
    /// CSV with a `y_true` column followed by one column per model
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Output directory [default: $ERRCORR_OUT_DIR or the working directory]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    svg: PathBuf,
    /// Decimals printed in each cell
    #[arg(long, default_value_t = 2)]
    precision: usize,
    #[arg(long, default_value_t = 48)]
    cell_size: u32,
}

fn gen(args: GenArgs) -> Result<Vec<PathBuf>> {
    let task = match args.classes {
        Some(k) => Task::Classification { n_classes: k },
        None => Task::Regression,
    };
    let config = SyntheticConfig {
        n: args.n,
        p: args.p,
        signal_weights: args.weights.unwrap_or_else(|| vec![1.0; args.p]),
        noise_sd: args.noise_sd,
        nonlinearity: match args.nonlinearity {
            NonlinearityArg::None => Nonlinearity::None,
            NonlinearityArg::Squares => Nonlinearity::Squares,
            NonlinearityArg::Interactions => Nonlinearity::Interactions,
        },
        task,
    };
    let data = gen_synthetic(&config, args.seed)?;
    let out = args.out.unwrap_or_else(|| default_out_dir().join("synthetic.csv"));
    report::write_atomic(&out, data.to_csv_string(&args.target_name).as_bytes())?;
    Ok(vec![out])
}

fn scenario(n: u8, args: ScenarioArgs) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut config = ScenarioConfig::parse(n, &text)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    config.resolve_paths(base);
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    let report = config.run()?;
    report.write_outputs(args.out.unwrap_or_else(default_out_dir), &HeatmapStyle::default())
}

fn corr(args: CorrArgs) -> Result<Vec<PathBuf>> {
    let task = match args.task {
        TaskArg::Regression => TaskKind::Regression,
        TaskArg::Classification => TaskKind::Classification,
    };
    let method = match args.method {
        MethodArg::Auto => MethodChoice::Auto,
        MethodArg::Pearson => MethodChoice::Pearson,
        MethodArg::Phik => MethodChoice::Phik,
    };
    let errors = read_prediction_errors(&args.predictions, task)?;
    let m = corr_matrix(&errors, method)?;
    let dir = args.out.unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let paths = ["matrix.json", "matrix.csv", "matrix.svg", "errors.csv"].map(|f| dir.join(f));
    report::emit_matrix_json(&m, &paths[0])?;
    report::emit_matrix_csv(&m, &paths[1])?;
    report::emit_heatmap_svg(&m, &HeatmapStyle::default(), &paths[2])?;
    let mut buf = Vec::new();
    errcorr::error_metrics::write_errors_csv(&errors, &mut buf)?;
    report::write_atomic(&paths[3], &buf)?;
    Ok(paths.to_vec())
}

fn render(args: ReportArgs) -> Result<Vec<PathBuf>> {
    let m: errcorr::CorrelationMatrixF64 = report::read_matrix_json(&args.matrix)?;
    let style = HeatmapStyle {
        precision: args.precision,
        cell_size: args.cell_size,
        ..HeatmapStyle::default()
    };
    report::emit_heatmap_svg(&m, &style, &args.svg)?;
    Ok(vec![args.svg])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Scenario1(a) => scenario(1, a),
        Command::Scenario2(a) => scenario(2, a),
        Command::Scenario3(a) => scenario(3, a),
        Command::Corr(a) => corr(a),
        Command::Report(a) => render(a),
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numeric => EXIT_NUMERIC,
            })
        }
    }
}
