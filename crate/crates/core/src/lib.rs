//! Bayesian nonparametric estimation of Tsallis diversity indices (Shannon
//! entropy and Simpson's index as special cases) under Gibbs-type priors.
//!
//! The analytic layers (`special`, `gibbs`, `models`, `moments`) are generic
//! over the float type; the f64 aliases below are what most callers want.
//! Monte Carlo, the brute-force oracle and the frequentist comparators run in
//! f64 only.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod error;
pub mod estimators;
pub mod fixtures;
pub mod gibbs;
pub mod jet;
pub mod models;
pub mod moments;
pub mod oracle;
pub mod sampler;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use gibbs::{GibbsModel, Multiplicities};
pub use moments::{DiversityIndex, MomentSet};
pub use scalar::Real;

pub type PoissonDirichlet = models::PoissonDirichlet<f64>;
pub type GnedinFisher = models::GnedinFisher<f64>;
pub type AnyModel = models::AnyModel<f64>;
pub type PoissonDirichletParams = models::PoissonDirichletParams<f64>;
pub type GnedinFisherParams = models::GnedinFisherParams<f64>;
