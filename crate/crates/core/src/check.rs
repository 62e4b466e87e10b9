//! Self-validation suites: weight recursions, EPPF normalization, agreement
//! between independent evaluation paths, the brute-force oracle and Monte
//! Carlo.
//!
//! Each suite returns a [`SuiteReport`] listing how many cases ran and which
//! failed; nothing here panics on a numerical mismatch.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{
    eppf, finite_difference_v_stars, k_n_distribution, recursion_residual, total_mass, GibbsModel, Multiplicities,
};
use crate::models::{AnyModel, GnedinFisher, GnedinFisherParams, PoissonDirichlet, PoissonDirichletParams};
use crate::moments::{
    posterior_hm_moments, posterior_moments, posterior_shannon_mean, prior_hm_moments, prior_moments,
    prior_shannon_moments, DiversityIndex, MomentSet,
};
use crate::oracle::{self, closed_form_reference, enumerate_set_partitions, OracleModel, Quantity};
use crate::sampler::{sample_indices, summarize_samples, McConfig};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub enum Suite {
    Recursion,
    Eppf,
    DualPath,
    Oracle,
    MonteCarlo,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Recursion, Suite::Eppf, Suite::DualPath, Suite::Oracle, Suite::MonteCarlo];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Recursion => "recursion",
            Suite::Eppf => "eppf",
            Suite::DualPath => "dual-path",
            Suite::Oracle => "oracle",
            Suite::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Suite> for String {
    fn from(s: Suite) -> String {
        s.name().to_string()
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::param(format!("unknown check suite `{s}`")))
    }
}

/// One failed comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub case: String,
    /// Error measure that exceeded the tolerance (relative error, residual or z-score).
    pub error: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub cases: usize,
    pub passed: usize,
    /// Largest error seen relative to its tolerance.
    pub worst_ratio: f64,
    pub failures: Vec<Failure>,
    pub elapsed_secs: f64,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }
}

struct Tally {
    suite: Suite,
    start: Instant,
    cases: usize,
    worst_ratio: f64,
    failures: Vec<Failure>,
}

impl Tally {
    fn new(suite: Suite) -> Self {
        Tally { suite, start: Instant::now(), cases: 0, worst_ratio: 0.0, failures: Vec::new() }
    }

    fn record(&mut self, case: impl FnOnce() -> String, error: f64, tolerance: f64) {
        self.cases += 1;
        let ratio = if error.is_nan() { f64::INFINITY } else { error / tolerance };
        self.worst_ratio = self.worst_ratio.max(ratio);
        if !(error <= tolerance) {
            self.failures.push(Failure { case: case(), error, tolerance });
        }
    }

    /// Records an evaluation that should have produced a value but errored.
    fn record_error(&mut self, case: String, err: &Error) {
        self.cases += 1;
        self.worst_ratio = f64::INFINITY;
        self.failures.push(Failure { case: format!("{case}: {err}"), error: f64::INFINITY, tolerance: 0.0 });
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            passed: self.cases - self.failures.len(),
            cases: self.cases,
            worst_ratio: self.worst_ratio,
            failures: self.failures,
            elapsed_secs: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// A model under test and the parameters it claims to implement. The
/// oracle and the closed forms work from the declared parameters, so a
/// model whose weights disagree with its declaration is caught.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub model: &'a dyn GibbsModel<f64>,
    pub declared: OracleModel,
}

impl<'a> From<&'a AnyModel<f64>> for Target<'a> {
    fn from(m: &'a AnyModel<f64>) -> Self {
        Target { model: m, declared: OracleModel::from(m) }
    }
}

/// Five parameter points per family, covering the Dirichlet, stable and
/// finite-species special cases.
pub fn standard_models() -> Vec<AnyModel<f64>> {
    let pd = |alpha, theta| PoissonDirichlet::new(PoissonDirichletParams { alpha, theta }).expect("valid").into();
    let gf = |psi, gamma| GnedinFisher::new(GnedinFisherParams { psi, gamma }).expect("valid").into();
    vec![
        pd(0.3, 1.0),
        pd(0.0, 1.5),
        pd(0.5, 0.0),
        pd(-0.5, 2.0),
        pd(0.7, 4.0),
        gf(0.0, 0.5),
        gf(0.2, 0.5),
        gf(0.5, 1.2),
        gf(0.9, 0.3),
        gf(0.1, 1.05),
    ]
}

/// Multiplicity vectors of every integer partition of `1..=n_max`.
pub fn data_grid(n_max: usize) -> Result<Vec<Multiplicities>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.extend(enumerate_set_partitions(n)?.into_iter().map(|c| c.parts));
    }
    Ok(out)
}

fn supports(model: &dyn GibbsModel<f64>, data: &Multiplicities) -> bool {
    data.is_empty() || model.log_v(data.n(), data.k()) > f64::NEG_INFINITY
}

pub const RECURSION_TOLERANCE: f64 = 1e-10;
pub const RECURSION_N_MAX: usize = 50;

/// Backward recursion residuals for `1 ≤ k ≤ n ≤ 50`, plus the law of `K_n`
/// summing to one.
pub fn recursion_suite(targets: &[Target<'_>]) -> SuiteReport {
    let mut t = Tally::new(Suite::Recursion);
    for target in targets {
        let model = target.model;
        for n in 1..=RECURSION_N_MAX {
            for k in 1..=n {
                let r = recursion_residual(model, n, k);
                t.record(|| format!("{} n={n} k={k}", model.label()), r, RECURSION_TOLERANCE);
            }
            match k_n_distribution(model, n) {
                Ok(p) => t.record(
                    || format!("{} K_{n} mass", model.label()),
                    (total_mass(&p) - 1.0).abs(),
                    RECURSION_TOLERANCE,
                ),
                Err(e) => t.record_error(format!("{} K_{n}", model.label()), &e),
            }
        }
    }
    t.finish()
}

pub const EPPF_TOLERANCE: f64 = 1e-10;
pub const EPPF_N_MAX: usize = 8;

/// `Σ p(partition) = 1` over all set partitions of `[n]`, `n ≤ 8`, and the
/// oracle's own plain-product EPPF agreeing with the analytic one.
pub fn eppf_suite(targets: &[Target<'_>]) -> SuiteReport {
    let mut t = Tally::new(Suite::Eppf);
    for target in targets {
        let model = target.model;
        for n in 1..=EPPF_N_MAX {
            let classes = match enumerate_set_partitions(n) {
                Ok(c) => c,
                Err(e) => {
                    t.record_error(format!("partitions of {n}"), &e);
                    continue;
                }
            };
            let mut terms = Vec::with_capacity(classes.len());
            for c in &classes {
                match eppf::<f64, _>(model, &c.parts) {
                    Ok(p) => {
                        terms.push(c.count as f64 * p);
                        let blocks: Vec<f64> = c.parts.counts().iter().map(|&x| x as f64).collect();
                        let reference = target.declared.eppf(&blocks);
                        t.record(
                            || format!("{} eppf{:?} vs oracle", model.label(), c.parts.counts()),
                            relative_error(p, reference),
                            EPPF_TOLERANCE,
                        );
                    }
                    Err(e) => t.record_error(format!("{} eppf{:?}", model.label(), c.parts.counts()), &e),
                }
            }
            t.record(
                || format!("{} n={n} total mass", model.label()),
                (total_mass(&terms) - 1.0).abs(),
                EPPF_TOLERANCE,
            );
        }
    }
    t.finish()
}

pub const DUAL_PATH_TOLERANCE: f64 = 1e-10;
/// Finite differences in `m` are only good to about this.
pub const FINITE_DIFFERENCE_TOLERANCE: f64 = 1e-5;

fn dual_path_data() -> Vec<Multiplicities> {
    [vec![], vec![1], vec![3, 2, 1, 1], vec![5, 1], vec![2, 2, 2]]
        .into_iter()
        .map(|c| Multiplicities::new(c).expect("valid"))
        .collect()
}

/// Identities checked by two independent routes:
/// * weight ratios from the model's short products against differences of `ln V`;
/// * `V*`, `V**` in closed form against finite differences;
/// * general-formula moments against the family closed forms;
/// * posterior operations with no data against the prior ones.
pub fn dual_path_suite(targets: &[Target<'_>]) -> SuiteReport {
    let mut t = Tally::new(Suite::DualPath);
    for target in targets {
        let model = target.model;
        let label = model.label();
        for n in 0..=30usize {
            for k in 0..=n {
                if (n == 0) != (k == 0) || model.log_v(n, k) == f64::NEG_INFINITY {
                    continue;
                }
                for dn in [1.0, 2.0, 3.0, 2.5] {
                    for dk in 0..=2usize {
                        let fast = model.log_v_ratio(n, k, dn, dk);
                        let slow = model.log_v_at(n as f64 + dn, k + dk) - model.log_v(n, k);
                        let err = if fast == slow { 0.0 } else { (fast - slow).abs() / fast.abs().max(1.0) };
                        t.record(|| format!("{label} ratio n={n} k={k} dn={dn} dk={dk}"), err, DUAL_PATH_TOLERANCE);
                    }
                }
            }
        }
        for (n, xi, s) in [(0, 1, 1), (0, 2, 1), (0, 2, 2), (0, 3, 2), (5, 1, 2), (5, 2, 3), (10, 3, 4)] {
            let x = (n + xi) as f64;
            if model.log_v_at(x, s) == f64::NEG_INFINITY {
                continue;
            }
            let (fd1, fd2) = finite_difference_v_stars(model, n, xi, s);
            let (a1, a2) = (model.v_star_shifted(n, xi, s), model.v_dstar_shifted(n, xi, s));
            // Derivatives can cancel to near zero, so errors are measured against V itself too.
            let v = model.log_v_at(x, s).exp();
            let err = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(v);
            t.record(|| format!("{label} V* n={n} xi={xi} s={s}"), err(a1, fd1), FINITE_DIFFERENCE_TOLERANCE);
            t.record(|| format!("{label} V** n={n} xi={xi} s={s}"), err(a2, fd2), FINITE_DIFFERENCE_TOLERANCE);
        }
        for data in dual_path_data() {
            if !supports(model, &data) {
                continue;
            }
            closed_form_cases(&mut t, target, &data);
        }
        empty_data_cases(&mut t, model);
    }
    t.finish()
}

fn closed_form_cases(t: &mut Tally, target: &Target<'_>, data: &Multiplicities) {
    let model = target.model;
    for q in Quantity::ALL {
        let posterior = q.id().starts_with("posterior");
        if posterior != !data.is_empty() {
            continue;
        }
        let shannon = q.id().ends_with("shannon");
        let orders: &[usize] = if shannon { &[1] } else { &[2, 3] };
        for &m in orders {
            let reference = match closed_form_reference(&target.declared, q.id(), (!shannon).then_some(m), data) {
                Ok(v) => v,
                Err(Error::UnknownQuantity(_)) => continue,
                Err(e) => {
                    t.record_error(format!("{} {} reference", model.label(), q.id()), &e);
                    continue;
                }
            };
            let analytic = analytic_quantity(model, q, m, data);
            let case = || format!("{} {} m={m} data={:?}", model.label(), q.id(), data.counts());
            match analytic {
                Ok(v) => t.record(case, relative_error(v, reference), DUAL_PATH_TOLERANCE),
                Err(e) => t.record_error(case(), &e),
            }
        }
    }
}

fn variance_of(ms: Result<MomentSet<f64>>) -> Result<f64> {
    ms.and_then(|m| m.variance.ok_or_else(|| Error::Undefined("variance".into())))
}

fn analytic_quantity(model: &dyn GibbsModel<f64>, q: Quantity, m: usize, data: &Multiplicities) -> Result<f64> {
    match q {
        Quantity::PriorMeanHm => Ok(prior_hm_moments(model, m, 1)?.mean),
        Quantity::PriorVarHm => variance_of(prior_hm_moments(model, m, 2)),
        Quantity::PriorMeanShannon => Ok(prior_shannon_moments(model)?.mean),
        Quantity::PriorVarShannon => variance_of(prior_shannon_moments(model)),
        Quantity::PosteriorMeanHm => Ok(posterior_hm_moments(model, data, m, 1)?.mean),
        Quantity::PosteriorVarHm => variance_of(posterior_hm_moments(model, data, m, 2)),
        Quantity::PosteriorMeanShannon => posterior_shannon_mean(model, data),
    }
}

fn empty_data_cases(t: &mut Tally, model: &dyn GibbsModel<f64>) {
    let empty = Multiplicities::empty();
    let indices = [DiversityIndex::Shannon, DiversityIndex::Tsallis(2), DiversityIndex::Tsallis(3)];
    for index in indices {
        let order = if index == DiversityIndex::Shannon { 2 } else { 3 };
        let case = || format!("{} {index} posterior(no data) = prior", model.label());
        match (prior_moments(model, index, order), posterior_moments(model, &empty, index, order)) {
            (Ok(a), Ok(b)) => {
                let err = a.raw.iter().zip(&b.raw).map(|(x, y)| relative_error(*x, *y)).fold(0.0, f64::max);
                t.record(case, err, 1e-14);
            }
            (Err(e), _) | (_, Err(e)) => t.record_error(case(), &e),
        }
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const ORACLE_N_MAX: usize = 6;

/// Power-sum moments `E[S_m^ξ]`, `ξ ≤ 3`, `m ∈ {2, 3}`, against the
/// composition-sum oracle, for the prior and every data vector with `n ≤ 6`.
pub fn oracle_suite(targets: &[Target<'_>]) -> SuiteReport {
    let mut t = Tally::new(Suite::Oracle);
    let grid = match data_grid(ORACLE_N_MAX) {
        Ok(g) => g,
        Err(e) => {
            t.record_error("data grid".into(), &e);
            return t.finish();
        }
    };
    for target in targets {
        let model = target.model;
        for data in std::iter::once(Multiplicities::empty()).chain(grid.iter().cloned()) {
            if !supports(model, &data) {
                continue;
            }
            for m in [2usize, 3] {
                let analytic = crate::moments::posterior_power_sum_moments::<f64, _>(model, &data, m, 3);
                for xi in 1..=3usize {
                    let case = || format!("{} E[S_{m}^{xi}] data={:?}", model.label(), data.counts());
                    let reference = oracle::posterior_powersum_moment(&target.declared, &data, m, xi);
                    match (&analytic, reference) {
                        (Ok(a), Ok(r)) => t.record(case, relative_error(a.values[xi - 1], r), ORACLE_TOLERANCE),
                        (Err(e), _) => t.record_error(case(), e),
                        (_, Err(e)) => t.record_error(case(), &e),
                    }
                }
            }
        }
    }
    t.finish()
}

pub const MC_Z_LIMIT: f64 = 3.0;

/// Monte Carlo means and variances of `H_1` and `H_2` against the analytic
/// values for PD(0.3, 1) and GF(0, 0.5), prior and posterior given
/// `(3, 2, 1, 1)`. A case passes when the z-score is at most 3.
pub fn monte_carlo_suite(samples: usize, seed: u64) -> SuiteReport {
    let mut t = Tally::new(Suite::MonteCarlo);
    let models = standard_models();
    let models = [&models[0], &models[5]];
    let datasets = [Multiplicities::empty(), Multiplicities::new(vec![3, 2, 1, 1]).unwrap()];
    let indices = [DiversityIndex::Shannon, DiversityIndex::Tsallis(2)];
    for (mi, model) in models.iter().enumerate() {
        for (di, data) in datasets.iter().enumerate() {
            let cfg = McConfig::new(samples, seed.wrapping_add((2 * mi + di) as u64));
            let draws = match sample_indices(model, data, &indices, &cfg) {
                Ok(d) => d,
                Err(e) => {
                    t.record_error(format!("{} sampling", model.label()), &e);
                    continue;
                }
            };
            for (ii, &index) in indices.iter().enumerate() {
                let exact = posterior_moments::<f64, _>(*model, data, index, 2);
                let summary = summarize_samples(&draws.values[ii], 0.95, cfg.seed);
                let case = |what: &str| format!("{} k={} {index} {what}", model.label(), data.k());
                match (exact, summary) {
                    (Ok(e), Ok(s)) => {
                        let var = e.variance.unwrap_or(0.0);
                        t.record(|| case("mean"), ((s.mean - e.mean) / s.mean_se).abs(), MC_Z_LIMIT);
                        t.record(|| case("variance"), ((s.variance - var) / s.variance_se).abs(), MC_Z_LIMIT);
                    }
                    (Err(e), _) | (_, Err(e)) => t.record_error(case("moments"), &e),
                }
            }
        }
    }
    t.finish()
}

/// Runs `suite` on the standard models.
pub fn run_suite(suite: Suite, mc_samples: usize, seed: u64) -> SuiteReport {
    let models = standard_models();
    let targets: Vec<Target<'_>> = models.iter().map(Target::from).collect();
    run_suite_on(suite, &targets, mc_samples, seed)
}

/// Runs `suite` on explicit targets; the Monte Carlo suite ignores them.
pub fn run_suite_on(suite: Suite, targets: &[Target<'_>], mc_samples: usize, seed: u64) -> SuiteReport {
    match suite {
        Suite::Recursion => recursion_suite(targets),
        Suite::Eppf => eppf_suite(targets),
        Suite::DualPath => dual_path_suite(targets),
        Suite::Oracle => oracle_suite(targets),
        Suite::MonteCarlo => monte_carlo_suite(mc_samples, seed),
    }
}

/// A Gnedin–Fisher model with a deliberate sign error: `ln V` uses
/// `(1+γ+ψ)` where `(1+γ-ψ)` belongs, while the ratio shortcut stays
/// correct. Exists only to show that the checks catch such a slip.
#[derive(Debug, Clone)]
pub struct SignFlippedGnedinFisher {
    pub inner: GnedinFisher<f64>,
}

impl SignFlippedGnedinFisher {
    pub fn target(&self) -> Target<'_> {
        Target { model: self, declared: OracleModel::from(&self.inner) }
    }
}

impl GibbsModel<f64> for SignFlippedGnedinFisher {
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn log_v_at(&self, x: f64, k: usize) -> f64 {
        let base = self.inner.log_v_at(x, k);
        if k == 0 || base == f64::NEG_INFINITY {
            return base;
        }
        let (psi, gamma) = (self.inner.psi(), self.inner.gamma());
        let log_rise = |a: f64| ln_gamma(a + x - 1.0).unwrap_or(f64::NAN) - ln_gamma(a).unwrap_or(f64::NAN);
        base + log_rise(1.0 + gamma - psi) - log_rise(1.0 + gamma + psi)
    }

    fn dlog_v(&self, x: f64, k: usize) -> f64 {
        self.inner.dlog_v(x, k)
    }

    fn d2log_v(&self, x: f64, k: usize) -> f64 {
        self.inner.d2log_v(x, k)
    }

    fn label(&self) -> String {
        format!("sign-flipped {}", self.inner.label())
    }

    fn log_v_ratio(&self, n: usize, k: usize, dn: f64, dk: usize) -> f64 {
        self.inner.log_v_ratio(n, k, dn, dk)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn deterministic_suites_pass() {
        for suite in [Suite::Recursion, Suite::Eppf, Suite::DualPath] {
            let r = run_suite(suite, 0, 0);
            assert!(r.ok(), "{suite}: {:?}", &r.failures[..r.failures.len().min(5)]);
        }
    }

    #[test]
    fn sign_flip_is_caught() {
        let inner = GnedinFisher::new(GnedinFisherParams { psi: 0.2, gamma: 0.5 }).unwrap();
        let faulty = SignFlippedGnedinFisher { inner };
        let r = dual_path_suite(&[faulty.target()]);
        assert!(!r.failures.is_empty());
        assert!(r.failures.iter().any(|f| f.case.contains("ratio")));
        let r = recursion_suite(&[faulty.target()]);
        assert!(!r.ok());
    }

    #[test]
    fn relative_error_edges() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(1.0, 2.0) - 0.5).abs() < 1e-15);
    }
}
