//! Command implementations. Each returns a serializable report; rendering
//! lives in `render`.

use serde::Serialize;

use gdiv::check::{run_suite_on, standard_models, SignFlippedGnedinFisher, Suite, SuiteReport, Target};
use gdiv::estimators::{bias_corrected_ml, chao_shen_entropy, ml_entropy, FrequencyCounts};
use gdiv::models::{AnyModel, GnedinFisher, GnedinFisherParams, PoissonDirichlet, PoissonDirichletParams};
use gdiv::moments::{posterior_moments, prior_moments, summarize, DEFAULT_CHEBYSHEV_EPSILON};
use gdiv::sampler::{histogram, sample_indices, summarize_samples, Histogram, McConfig, SampleSummary, StickBreaking};
use gdiv::{DiversityIndex, Multiplicities};

use crate::config::RunConfig;
use crate::error::CliError;

pub const DEFAULT_ALPHAS: [f64; 6] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_THETAS: [f64; 9] = [0.0, 0.1, 0.5, 1.0, 1.5, 2.0, 4.0, 10.0, 12.0];
pub const DEFAULT_PSIS: [f64; 4] = [0.0, 0.2, 0.5, 0.8];
pub const DEFAULT_GAMMAS: [f64; 6] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.9];
pub const DEFAULT_LEVEL: f64 = 0.95;
pub const DEFAULT_ATOMS: usize = 1000;
pub const NO_DATA_BANNER: &str = "no data: prior report";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridFamily {
    Pd,
    Gf,
}

/// Prior mean and coefficient of variation over a parameter grid.
/// Cells whose parameters are invalid are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorTable {
    pub family: GridFamily,
    pub index: DiversityIndex,
    pub standardized: bool,
    /// `alpha` for Poisson–Dirichlet, `psi` for Gnedin–Fisher.
    pub column_parameter: &'static str,
    /// `theta` for Poisson–Dirichlet, `gamma` for Gnedin–Fisher.
    pub row_parameter: &'static str,
    pub columns: Vec<f64>,
    pub rows: Vec<f64>,
    pub mean: Vec<Vec<Option<f64>>>,
    pub cv: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorTableReport {
    pub config: RunConfig,
    #[serde(flatten)]
    pub table: PriorTable,
}

impl PriorTable {
    /// `(mean, cv)` at row `r`, column `c`.
    pub fn cell(&self, r: usize, c: usize) -> (Option<f64>, Option<f64>) {
        (self.mean[r][c], self.cv[r][c])
    }
}

/// Standardizing only applies to Tsallis indices; it is dropped for Shannon.
pub fn prior_table(
    family: GridFamily,
    columns: &[f64],
    rows: &[f64],
    index: DiversityIndex,
    standardize: bool,
) -> Result<PriorTable, CliError> {
    if columns.is_empty() || rows.is_empty() {
        return Err(CliError::Usage("prior table grid needs at least one row and one column".into()));
    }
    let standardized = standardize && index != DiversityIndex::Shannon;
    let mut mean = vec![vec![None; columns.len()]; rows.len()];
    let mut cv = mean.clone();
    for (r, &row) in rows.iter().enumerate() {
        for (c, &col) in columns.iter().enumerate() {
            let model: AnyModel<f64> = match family {
                GridFamily::Pd => match PoissonDirichlet::new(PoissonDirichletParams { alpha: col, theta: row }) {
                    Ok(m) => m.into(),
                    Err(_) => continue,
                },
                GridFamily::Gf => match GnedinFisher::new(GnedinFisherParams { psi: col, gamma: row }) {
                    Ok(m) => m.into(),
                    Err(_) => continue,
                },
            };
            let ms = prior_moments::<f64, _>(&model, index, 2)?;
            let s = summarize(&ms, standardized, DEFAULT_CHEBYSHEV_EPSILON);
            let s = match s {
                Ok(s) => s,
                Err(gdiv::Error::Undefined(_)) => {
                    mean[r][c] = Some(0.0);
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            mean[r][c] = Some(s.mean);
            cv[r][c] = s.cv;
        }
    }
    let (column_parameter, row_parameter) = match family {
        GridFamily::Pd => ("alpha", "theta"),
        GridFamily::Gf => ("psi", "gamma"),
    };
    Ok(PriorTable {
        family,
        index,
        standardized,
        column_parameter,
        row_parameter,
        columns: columns.to_vec(),
        rows: rows.to_vec(),
        mean,
        cv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Mc,
    Both,
}

impl Method {
    fn analytic(self) -> bool {
        self != Method::Mc
    }

    fn mc(self) -> bool {
        self != Method::Analytic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSummary {
    pub n: usize,
    pub k: usize,
    pub singletons: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: Option<f64>,
    pub sd: Option<f64>,
    pub skewness: Option<f64>,
    pub cv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpdReport {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparators {
    /// Plug-in estimate of the requested index.
    pub ml: f64,
    /// Shannon only; absent when coverage is zero.
    pub chao_shen: Option<f64>,
    /// Shannon only.
    pub bias_corrected_ml: Option<f64>,
    /// True when the bias correction fell back to the no-doubleton richness.
    pub bias_corrected_fallback: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest per-draw truncation bias bound.
    pub tail_bias: Option<f64>,
    /// Standard error of the Monte Carlo mean.
    pub mc_se: Option<f64>,
    pub mc_mean: Option<f64>,
    pub flagged_draws: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub banner: Option<&'static str>,
    pub data: DataSummary,
    pub point: f64,
    pub moments: Option<MomentReport>,
    pub hpd: Option<HpdReport>,
    pub comparators: Option<Comparators>,
    pub diagnostics: Diagnostics,
}

pub struct EstimateArgs<'a> {
    pub model: &'a AnyModel<f64>,
    pub counts: &'a FrequencyCounts,
    pub index: DiversityIndex,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    pub level: f64,
    pub atoms: usize,
}

fn mc_config(samples: usize, seed: u64, atoms: usize) -> McConfig {
    let mut cfg = McConfig::new(samples, seed);
    if atoms != DEFAULT_ATOMS {
        cfg.sticks = StickBreaking::with_atoms(atoms);
    }
    cfg
}

/// Posterior point estimate, moments, HPD interval and frequentist
/// comparators. With no data the prior is reported instead.
pub fn estimate(args: &EstimateArgs<'_>, config: RunConfig) -> Result<EstimateReport, CliError> {
    let data = Multiplicities::from(args.counts);
    let order = if args.index == DiversityIndex::Shannon { 2 } else { 3 };
    let moments = if args.method.analytic() {
        let ms = if data.is_empty() {
            prior_moments::<f64, _>(args.model, args.index, order)?
        } else {
            posterior_moments::<f64, _>(args.model, &data, args.index, order)?
        };
        let cv = ms.sd.filter(|_| ms.mean != 0.0).map(|sd| sd / ms.mean);
        Some(MomentReport { mean: ms.mean, variance: ms.variance, sd: ms.sd, skewness: ms.skewness, cv })
    } else {
        None
    };

    let mut diagnostics =
        Diagnostics { tail_bias: None, mc_se: None, mc_mean: None, flagged_draws: None, warnings: Vec::new() };
    let mut hpd = None;
    if args.method.mc() {
        let draws = sample_indices(args.model, &data, &[args.index], &mc_config(args.samples, args.seed, args.atoms))?;
        let s = summarize_samples(&draws.values[0], args.level, args.seed)?;
        hpd = Some(HpdReport { level: args.level, lower: s.hpd.0, upper: s.hpd.1 });
        diagnostics.tail_bias = Some(draws.max_tail_bias[0]);
        diagnostics.mc_se = Some(s.mean_se);
        diagnostics.mc_mean = Some(s.mean);
        diagnostics.flagged_draws = Some(draws.flagged_draws);
        if draws.flagged_draws > 0 {
            diagnostics.warnings.push(format!(
                "{} draws have a truncation bias bound above {}; consider more --atoms",
                draws.flagged_draws,
                gdiv::sampler::TAIL_BIAS_FLAG
            ));
        }
    }

    let comparators = if data.is_empty() { None } else { Some(comparators(args.counts, args.index)?) };
    let point = match (&moments, diagnostics.mc_mean) {
        (Some(m), _) => m.mean,
        (None, Some(mc)) => mc,
        (None, None) => unreachable!("at least one method runs"),
    };
    Ok(EstimateReport {
        config,
        banner: data.is_empty().then_some(NO_DATA_BANNER),
        data: DataSummary { n: data.n(), k: data.k(), singletons: args.counts.singletons() },
        point,
        moments,
        hpd,
        comparators,
        diagnostics,
    })
}

fn comparators(counts: &FrequencyCounts, index: DiversityIndex) -> Result<Comparators, CliError> {
    let ml = ml_entropy(counts, index.order())?;
    if index != DiversityIndex::Shannon {
        return Ok(Comparators { ml, chao_shen: None, bias_corrected_ml: None, bias_corrected_fallback: None });
    }
    let chao_shen = match chao_shen_entropy(counts) {
        Ok(v) => Some(v),
        Err(gdiv::Error::Undefined(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let bc = bias_corrected_ml(counts)?;
    Ok(Comparators { ml, chao_shen, bias_corrected_ml: Some(bc.value), bias_corrected_fallback: Some(bc.fallback) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub config: RunConfig,
    pub target: &'static str,
    pub summary: SampleSummary,
    /// Fraction of draws exactly zero (a single species carries all mass).
    pub zero_mass: f64,
    pub tail_bias: f64,
    pub flagged_draws: usize,
    pub histogram: Histogram,
}

pub struct SampleArgs<'a> {
    pub model: &'a AnyModel<f64>,
    /// Empty for prior draws.
    pub data: &'a Multiplicities,
    pub index: DiversityIndex,
    pub samples: usize,
    pub seed: u64,
    pub level: f64,
    pub atoms: usize,
    pub bins: usize,
}

/// Draws the index and bins it. Also returns the raw draws for dumping.
pub fn sample(args: &SampleArgs<'_>, config: RunConfig) -> Result<(SampleReport, Vec<f64>), CliError> {
    let draws = sample_indices(args.model, args.data, &[args.index], &mc_config(args.samples, args.seed, args.atoms))?;
    let values = draws.values.into_iter().next().expect("one index requested");
    let summary = summarize_samples(&values, args.level, args.seed)?;
    let zero_mass = values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64;
    let report = SampleReport {
        config,
        target: if args.data.is_empty() { "prior" } else { "posterior" },
        summary,
        zero_mass,
        tail_bias: draws.max_tail_bias[0],
        flagged_draws: draws.flagged_draws,
        histogram: histogram(&values, args.bins)?,
    };
    Ok((report, values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub injected_fault: Option<&'static str>,
    pub ok: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs the validation suites. With `inject_fault` the deterministic suites
/// run against a deliberately broken Gnedin–Fisher model instead.
pub fn check(suites: &[Suite], mc_samples: usize, seed: u64, inject_fault: bool, config: RunConfig) -> CheckReport {
    let models = standard_models();
    let faulty = SignFlippedGnedinFisher {
        inner: GnedinFisher::new(GnedinFisherParams { psi: 0.2, gamma: 0.5 }).expect("valid"),
    };
    let targets: Vec<Target<'_>> =
        if inject_fault { vec![faulty.target()] } else { models.iter().map(Target::from).collect() };
    let reports: Vec<SuiteReport> = suites.iter().map(|&s| run_suite_on(s, &targets, mc_samples, seed)).collect();
    CheckReport {
        config,
        injected_fault: inject_fault.then_some("gf-sign"),
        ok: reports.iter().all(SuiteReport::ok),
        suites: reports,
    }
}
