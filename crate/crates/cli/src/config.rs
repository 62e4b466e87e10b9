//! Resolved run configuration, echoed in every report.

use serde::Serialize;

use gdiv::models::{AnyModel, GnedinFisher, GnedinFisherParams, PoissonDirichlet, PoissonDirichletParams};

use crate::commands::GridFamily;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Two-parameter Poisson–Dirichlet (α < 0 gives a finite symmetric Dirichlet).
    Pd,
    /// Dirichlet process, α = 0.
    Dirichlet,
    /// Normalized stable, θ = 0.
    Stable,
    /// Gnedin–Fisher.
    Gf,
}

/// Model family plus the parameters it was resolved with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

impl ModelSpec {
    /// Fills family defaults and rejects parameters the family does not take.
    pub fn resolve(
        family: Family,
        alpha: Option<f64>,
        theta: Option<f64>,
        psi: Option<f64>,
        gamma: Option<f64>,
    ) -> Result<Self, CliError> {
        let unused = |name: &str, v: Option<f64>| match v {
            Some(_) => Err(CliError::Usage(format!("--{name} does not apply to --model {}", family_name(family)))),
            None => Ok(()),
        };
        let needed = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| CliError::Usage(format!("--model {} needs --{name}", family_name(family))))
        };
        let spec = |alpha, theta, psi, gamma| ModelSpec { family, alpha, theta, psi, gamma };
        match family {
            Family::Pd => {
                unused("psi", psi)?;
                unused("gamma", gamma)?;
                Ok(spec(Some(needed("alpha", alpha)?), Some(needed("theta", theta)?), None, None))
            }
            Family::Dirichlet => {
                unused("psi", psi)?;
                unused("gamma", gamma)?;
                if alpha.is_some_and(|a| a != 0.0) {
                    return Err(CliError::Usage("--model dirichlet fixes alpha = 0".into()));
                }
                Ok(spec(Some(0.0), Some(needed("theta", theta)?), None, None))
            }
            Family::Stable => {
                unused("psi", psi)?;
                unused("gamma", gamma)?;
                if theta.is_some_and(|t| t != 0.0) {
                    return Err(CliError::Usage("--model stable fixes theta = 0".into()));
                }
                Ok(spec(Some(needed("alpha", alpha)?), Some(0.0), None, None))
            }
            Family::Gf => {
                unused("alpha", alpha)?;
                unused("theta", theta)?;
                Ok(spec(None, None, Some(psi.unwrap_or(0.0)), Some(needed("gamma", gamma)?)))
            }
        }
    }

    pub fn build(&self) -> Result<AnyModel<f64>, CliError> {
        let model = match self.family {
            Family::Gf => GnedinFisher::new(GnedinFisherParams {
                psi: self.psi.unwrap_or(0.0),
                gamma: self.gamma.unwrap_or(f64::NAN),
            })?
            .into(),
            Family::Stable => PoissonDirichlet::stable(self.alpha.unwrap_or(f64::NAN))?.into(),
            Family::Pd | Family::Dirichlet => PoissonDirichlet::new(PoissonDirichletParams {
                alpha: self.alpha.unwrap_or(f64::NAN),
                theta: self.theta.unwrap_or(f64::NAN),
            })?
            .into(),
        };
        Ok(model)
    }

    /// Default number of Monte Carlo draws for this family.
    pub fn default_samples(&self) -> usize {
        match self.family {
            Family::Gf => 10_000,
            _ => 5_000,
        }
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Pd => "pd",
        Family::Dirichlet => "dirichlet",
        Family::Stable => "stable",
        Family::Gf => "gf",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

/// Parameter grid of a prior table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub family: GridFamily,
    pub columns: Vec<f64>,
    pub rows: Vec<f64>,
    pub standardize: bool,
    /// Rounding of csv/tsv cells.
    pub digits: usize,
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<usize>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: &'static str, seed: u64, format: Format) -> Self {
        RunConfig {
            command,
            model: None,
            grid: None,
            index: None,
            data: None,
            method: None,
            samples: None,
            seed,
            level: None,
            atoms: None,
            format,
        }
    }
}
