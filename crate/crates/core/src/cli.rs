//! `mcband` command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage or input errors, 2 when a fit or
//! study fails. Data goes to stdout or the named files; diagnostics go to
//! stderr.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::datagen::{generate_dataset, make_grid, GenConfig, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::io;
use crate::models::{
    forest_fit, forest_predict, ols_fit, ols_prediction_band, BandKind, ForestConfig, TreeConfig,
};
use crate::montecarlo::{run_study_with_threads, ModelSpec, StudyConfig};
use crate::stats::{band_curve, band_slope, DistributionReport};

#[derive(Debug, Parser)]
#[command(
    name = "mcband",
    version,
    about = "Monte Carlo uncertainty bands for linear and random-forest regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one synthetic dataset and write it as `x,y` CSV.
    Generate(GenerateArgs),
    /// Fit a single model to a CSV dataset.
    Fit(FitArgs),
    /// Run a Monte Carlo study and write band and coefficient CSVs.
    Study(StudyArgs),
    /// Histogram, box plot and Gaussian overlay for one sample column.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Linear,
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandArg {
    Mean,
    Observation,
}

impl From<BandArg> for BandKind {
    fn from(b: BandArg) -> Self {
        match b {
            BandArg::Mean => BandKind::Mean,
            BandArg::Observation => BandKind::Observation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Seed for the data stream (master seed for studies).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Observations per dataset.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub slope: f64,
    #[arg(long, default_value_t = -100.0, allow_hyphen_values = true)]
    pub intercept: f64,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 10.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 150.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 200.0, allow_hyphen_values = true)]
    pub x_max: f64,
}

impl DataArgs {
    fn config(&self) -> GenConfig {
        GenConfig {
            intercept: self.intercept,
            slope: self.slope,
            x_low: self.x_min,
            x_high: self.x_max,
            noise_sigma: self.noise_sigma,
            n_samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Unlimited when omitted.
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Minimum rows per leaf; nodes with fewer than twice this are not split.
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
}

impl ForestArgs {
    fn config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            n_trees: self.trees,
            tree: TreeConfig {
                max_depth: self.max_depth,
                min_samples_leaf: self.min_leaf,
                min_samples_split: 2 * self.min_leaf,
            },
            bootstrap: true,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with `x` and `y` columns, `-` for stdin.
    pub input: String,
    #[arg(long, value_enum, default_value_t = ModelKind::Linear)]
    pub model: ModelKind,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Forest bootstrap seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Analytical band type for the linear model.
    #[arg(long, value_enum, default_value_t = BandArg::Mean)]
    pub band: BandArg,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 101)]
    pub grid_points: usize,
    /// Grid start; the smallest x in the data when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Grid end; the largest x in the data when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Band CSV (linear) or prediction CSV (forest), `-` for stdout. The
    /// forest model writes to stdout when omitted.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Linear)]
    pub model: ModelKind,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = crate::montecarlo::DEFAULT_REPLICATIONS)]
    pub replications: usize,
    #[arg(long, default_value_t = crate::montecarlo::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Hold out this fraction of each dataset and record its MSE.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Worker cap; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Directory for band.csv, coefficients.csv and matrix.csv.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
    /// Also write the full prediction matrix.
    #[arg(long)]
    pub emit_matrix: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Sample CSV (coefficients, matrix, or any numeric table), `-` for stdin.
    pub input: String,
    /// Column to summarise by header name.
    #[arg(long, conflicts_with = "at_x")]
    pub column: Option<String>,
    /// Matrix column for this grid value.
    #[arg(long, allow_hyphen_values = true)]
    pub at_x: Option<f64>,
    /// Histogram bins; ceil(sqrt(n)) when omitted.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub points_per_bin: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, default_value = "-")]
    pub output: String,
}

fn open_input(path: &str) -> Result<Box<dyn Read>> {
    if path == "-" {
        Ok(Box::new(std::io::stdin().lock()))
    } else {
        Ok(Box::new(BufReader::new(File::open(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{path}: {e}")))
        })?)))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Sends file output either to a path or to `stdout`.
fn with_output<F>(path: &str, stdout: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    if path == "-" {
        f(stdout)?;
        stdout.flush()?;
    } else {
        let mut w = create(Path::new(path))?;
        f(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let cfg = args.data.config();
    let data = generate_dataset(&cfg)?;
    with_output(&args.output, stdout, |w| io::write_dataset(&data, w))?;
    writeln!(
        stderr,
        "generated {} rows with seed {}",
        data.len(),
        cfg.seed
    )?;
    if args.output != "-" {
        writeln!(stdout, "{}", args.output)?;
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let data = io::read_dataset(open_input(&args.input)?)?;
    let (lo, hi) = data.x_range();
    let grid = || {
        make_grid(
            args.x_min.unwrap_or(lo),
            args.x_max.unwrap_or(hi),
            args.grid_points,
        )
    };

    match args.model {
        ModelKind::Linear => {
            let fit = ols_fit(&data)?;
            let grid = grid()?;
            let band = match &args.output {
                Some(_) => Some(ols_prediction_band(
                    &fit,
                    grid.points(),
                    args.level,
                    args.band.into(),
                )?),
                None => None,
            };
            let to_stdout = args.output.as_deref() == Some("-");
            let report: &mut dyn Write = if to_stdout { stderr } else { stdout };
            writeln!(report, "model = linear")?;
            writeln!(report, "n = {}", fit.n)?;
            writeln!(report, "a = {:?}", fit.a)?;
            writeln!(report, "b = {:?}", fit.b)?;
            writeln!(report, "sigma_a = {:?}", fit.sigma_a)?;
            writeln!(report, "sigma_b = {:?}", fit.sigma_b)?;
            writeln!(report, "s = {:?}", fit.s)?;
            writeln!(report, "{fit}")?;
            if let (Some(path), Some(band)) = (&args.output, band) {
                with_output(path, stdout, |w| io::write_analytic_band(&band, w))?;
            }
        }
        ModelKind::Forest => {
            let cfg = args.forest.config(args.seed);
            let forest = forest_fit(&data, &cfg)?;
            let grid = grid()?;
            let pred = forest_predict(&forest, grid.points());
            let path = args.output.as_deref().unwrap_or("-");
            let report: &mut dyn Write = if path == "-" { stderr } else { stdout };
            writeln!(report, "model = forest")?;
            writeln!(report, "n = {}", data.len())?;
            writeln!(report, "trees = {}", cfg.n_trees)?;
            match cfg.tree.max_depth {
                Some(d) => writeln!(report, "max_depth = {d}")?,
                None => writeln!(report, "max_depth = unlimited")?,
            }
            writeln!(report, "min_samples_leaf = {}", cfg.tree.min_samples_leaf)?;
            writeln!(report, "min_samples_split = {}", cfg.tree.min_samples_split)?;
            writeln!(report, "bootstrap = {}", cfg.bootstrap)?;
            writeln!(report, "seed = {}", cfg.seed)?;
            with_output(path, stdout, |w| io::write_curve(&grid, &pred, w))?;
        }
    }
    Ok(())
}

pub fn study_config(args: &StudyArgs) -> Result<StudyConfig> {
    let gen = args.data.config();
    gen.validate()?;
    let model = match args.model {
        ModelKind::Linear => ModelSpec::Linear,
        ModelKind::Forest => ModelSpec::Forest(args.forest.config(gen.seed)),
    };
    Ok(StudyConfig {
        grid: make_grid(gen.x_low, gen.x_high, args.grid_points)?,
        gen,
        model,
        replications: args.replications,
        test_fraction: args.test_fraction,
    })
}

fn cmd_study(args: &StudyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = study_config(args)?;
    config.validate()?;
    let out = run_study_with_threads(&config, args.threads)?;
    let curve = band_curve(&out.matrix)?;

    fs::create_dir_all(&args.output)?;
    let mut written = Vec::new();

    let band_path = args.output.join("band.csv");
    let mut w = create(&band_path)?;
    io::write_band_curve(&curve, &mut w)?;
    w.flush()?;
    written.push(band_path);

    let coef = &out.coefficients;
    if !coef.slopes.is_empty() || coef.test_mse.is_some() {
        let path = args.output.join("coefficients.csv");
        let mut w = create(&path)?;
        io::write_coefficients(coef, &mut w)?;
        w.flush()?;
        written.push(path);
    }

    if args.emit_matrix {
        let path = args.output.join("matrix.csv");
        let mut w = create(&path)?;
        io::write_matrix(&out.matrix, &mut w)?;
        w.flush()?;
        written.push(path);
    }

    let model = match args.model {
        ModelKind::Linear => "linear",
        ModelKind::Forest => "forest",
    };
    writeln!(
        stderr,
        "{model} study: {} replications x {} grid points, seed {}, median-curve slope {:.4}",
        config.replications,
        config.grid.len(),
        config.master_seed(),
        band_slope(&curve)?
    )?;
    for p in written {
        writeln!(stdout, "{}", p.display())?;
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let table = io::SampleTable::read(open_input(&args.input)?)?;
    let values = match (&args.column, args.at_x) {
        (Some(name), _) => table.by_name(name)?,
        (None, Some(x)) => table.at_x(x)?,
        (None, None) => table.default_column()?,
    };
    if values.is_empty() {
        return Err(Error::Selection("selected column has no rows".into()));
    }
    let report = DistributionReport::new(values, args.bins, args.points_per_bin)?;
    with_output(&args.output, stdout, |w| match args.format {
        Format::Json => io::write_report_json(&report, w),
        Format::Csv => io::write_report_csv(&report, w),
    })
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, stdout, stderr),
        Command::Fit(a) => cmd_fit(a, stdout, stderr),
        Command::Study(a) => cmd_study(a, stdout, stderr),
        Command::Report(a) => cmd_report(a, stdout),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}
