//! The `gdiv` command line: prior tables, posterior estimation on frequency
//! count data, Monte Carlo sampling of diversity indices and the built-in
//! validation suites.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gdiv::check::Suite;
use gdiv::estimators::FrequencyCounts;
use gdiv::fixtures::load_fixture;
use gdiv::sampler::{write_binary_dump, write_text_dump};
use gdiv::{DiversityIndex, Multiplicities};

pub mod commands;
pub mod config;
pub mod error;
pub mod render;

use commands::{EstimateArgs, GridFamily, Method, SampleArgs};
use config::{Family, Format, GridSpec, ModelSpec, RunConfig};
pub use error::CliError;

/// Seed used when neither `--seed` nor `GDIV_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_130_101;

#[derive(Debug, Parser)]
#[command(name = "gdiv", version, about = "Bayesian nonparametric estimation of Tsallis and Shannon diversity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prior mean and coefficient of variation of H_m over a parameter grid.
    PriorTable(PriorTableCmd),
    /// Posterior estimates of a diversity index from frequency counts.
    Estimate(EstimateCmd),
    /// Monte Carlo draws of a diversity index, binned.
    Sample(SampleCmd),
    /// Run the validation suites.
    Check(CheckCmd),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Family,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelSpec, CliError> {
        ModelSpec::resolve(self.model, self.alpha, self.theta, self.psi, self.gamma)
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Seed; falls back to GDIV_SEED, then a fixed default.
    #[arg(long, env = "GDIV_SEED")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl CommonArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFamily {
    Pd,
    Gf,
}

#[derive(Debug, Args)]
pub struct PriorTableCmd {
    /// Poisson–Dirichlet grid over (alpha, theta) or Gnedin–Fisher over (psi, gamma).
    #[arg(long, value_enum, default_value = "pd")]
    pub model: TableFamily,
    /// Index order m, or `shannon`.
    #[arg(long, default_value = "2")]
    pub m: String,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub thetas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub psis: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gammas: Option<Vec<f64>>,
    /// Report H_m itself rather than (m-1) H_m.
    #[arg(long)]
    pub raw: bool,
    /// Decimal places in CSV/TSV output.
    #[arg(long, default_value_t = 3)]
    pub digits: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["data", "fixture"]))]
pub struct EstimateCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Index order m, or `shannon`.
    #[arg(long, default_value = "shannon")]
    pub m: String,
    /// Frequency counts file (`j<TAB>m_j` lines or one line of multiplicities).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// A shipped dataset instead of a file: beetles, uniform10, singleton100.
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
    /// Monte Carlo draws; 5000 for Poisson–Dirichlet, 10000 for Gnedin–Fisher by default.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = commands::DEFAULT_LEVEL)]
    pub level: f64,
    /// Minimum stick-breaking atoms per draw.
    #[arg(long, default_value_t = commands::DEFAULT_ATOMS)]
    pub atoms: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SampleCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "shannon")]
    pub m: String,
    /// Draw from the posterior given --data (or --fixture).
    #[arg(long)]
    pub posterior: bool,
    #[arg(long, conflicts_with = "fixture")]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    #[arg(long, default_value_t = commands::DEFAULT_LEVEL)]
    pub level: f64,
    #[arg(long, default_value_t = commands::DEFAULT_ATOMS)]
    pub atoms: usize,
    /// Write the raw draws here.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub dump_format: DumpFormat,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    /// One value per line.
    Text,
    /// Little-endian u64 count followed by f64 values.
    Binary,
}

#[derive(Debug, Args)]
pub struct CheckCmd {
    /// `all` or one of: recursion, eppf, dual-path, oracle, mc.
    #[arg(default_value = "all")]
    pub scope: String,
    /// Draws per Monte Carlo case.
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
    /// Run against a deliberately broken model to confirm the checks fail.
    #[arg(long, value_parser = ["gf-sign"], hide = true)]
    pub inject_fault: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_index(m: &str) -> Result<DiversityIndex, CliError> {
    m.parse::<DiversityIndex>().map_err(|e| CliError::Usage(e.to_string()))
}

fn read_counts(data: Option<&PathBuf>, fixture: Option<&str>) -> Result<(FrequencyCounts, Option<String>), CliError> {
    match (data, fixture) {
        (Some(path), _) => Ok((FrequencyCounts::from_path(path)?, Some(path.display().to_string()))),
        (None, Some(name)) => Ok((load_fixture(name)?, Some(format!("fixture:{name}")))),
        (None, None) => Ok((FrequencyCounts::default(), None)),
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// the report to `out`. Returns the process exit code; errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::PriorTable(c) => {
            let index = parse_index(&c.m)?;
            let (family, columns, rows) = match c.model {
                TableFamily::Pd => {
                    if c.psis.is_some() || c.gammas.is_some() {
                        return Err(CliError::Usage("--psis/--gammas need --model gf".into()));
                    }
                    let cols = c.alphas.clone().unwrap_or_else(|| commands::DEFAULT_ALPHAS.to_vec());
                    (GridFamily::Pd, cols, c.thetas.clone().unwrap_or_else(|| commands::DEFAULT_THETAS.to_vec()))
                }
                TableFamily::Gf => {
                    if c.alphas.is_some() || c.thetas.is_some() {
                        return Err(CliError::Usage("--alphas/--thetas need --model pd".into()));
                    }
                    let cols = c.psis.clone().unwrap_or_else(|| commands::DEFAULT_PSIS.to_vec());
                    (GridFamily::Gf, cols, c.gammas.clone().unwrap_or_else(|| commands::DEFAULT_GAMMAS.to_vec()))
                }
            };
            let table = commands::prior_table(family, &columns, &rows, index, !c.raw)?;
            let mut config = RunConfig::new("prior-table", c.common.seed(), c.common.format);
            config.index = Some(index.to_string());
            config.grid = Some(GridSpec { family, columns, rows, standardize: !c.raw, digits: c.digits });
            let report = commands::PriorTableReport { config, table };
            out.write_all(render::prior_table(&report, c.common.format, c.digits).as_bytes())?;
            Ok(0)
        }
        Command::Estimate(c) => {
            let spec = c.model.resolve()?;
            let model = spec.build()?;
            let index = parse_index(&c.m)?;
            let (counts, source) = read_counts(c.data.as_ref(), c.fixture.as_deref())?;
            let samples = c.samples.unwrap_or_else(|| spec.default_samples());
            let mut config = RunConfig::new("estimate", c.common.seed(), c.common.format);
            config.model = Some(spec);
            config.index = Some(index.to_string());
            config.data = source;
            config.method = Some(format!("{:?}", c.method).to_lowercase());
            if c.method != Method::Analytic {
                config.samples = Some(samples);
                config.level = Some(c.level);
                config.atoms = Some(c.atoms);
            }
            let args = EstimateArgs {
                model: &model,
                counts: &counts,
                index,
                method: c.method,
                samples,
                seed: c.common.seed(),
                level: c.level,
                atoms: c.atoms,
            };
            let report = commands::estimate(&args, config)?;
            out.write_all(render::estimate(&report, c.common.format).as_bytes())?;
            Ok(0)
        }
        Command::Sample(c) => {
            let spec = c.model.resolve()?;
            let model = spec.build()?;
            let index = parse_index(&c.m)?;
            let has_data = c.data.is_some() || c.fixture.is_some();
            if c.posterior != has_data {
                return Err(CliError::Usage("--posterior and --data/--fixture go together".into()));
            }
            let (counts, source) = read_counts(c.data.as_ref(), c.fixture.as_deref())?;
            let data = Multiplicities::from(&counts);
            let samples = c.samples.unwrap_or_else(|| spec.default_samples());
            let mut config = RunConfig::new("sample", c.common.seed(), c.common.format);
            config.model = Some(spec);
            config.index = Some(index.to_string());
            config.data = source;
            config.samples = Some(samples);
            config.level = Some(c.level);
            config.atoms = Some(c.atoms);
            let args = SampleArgs {
                model: &model,
                data: &data,
                index,
                samples,
                seed: c.common.seed(),
                level: c.level,
                atoms: c.atoms,
                bins: c.bins,
            };
            let (report, values) = commands::sample(&args, config)?;
            if let Some(path) = &c.dump {
                let file = BufWriter::new(File::create(path)?);
                match c.dump_format {
                    DumpFormat::Text => write_text_dump(&values, file)?,
                    DumpFormat::Binary => write_binary_dump(&values, file)?,
                }
            }
            out.write_all(render::sample(&report, c.common.format).as_bytes())?;
            Ok(0)
        }
        Command::Check(c) => {
            let suites: Vec<Suite> =
                if c.scope == "all" { Suite::ALL.to_vec() } else { vec![c.scope.parse::<Suite>()?] };
            let mut config = RunConfig::new("check", c.common.seed(), c.common.format);
            config.samples = Some(c.samples);
            let report = commands::check(&suites, c.samples, c.common.seed(), c.inject_fault.is_some(), config);
            out.write_all(render::check(&report, c.common.format).as_bytes())?;
            Ok(if report.ok { 0 } else { 3 })
        }
    }
}
