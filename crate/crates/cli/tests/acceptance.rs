//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! shown.

use std::process::ExitCode;
use std::time::Instant;

use gdiv::check::{data_grid, relative_error, standard_models};
use gdiv::estimators::{bias_corrected_ml, chao_shen_entropy, counts_to_multiplicities, ml_entropy};
use gdiv::fixtures::{load_fixture, load_golden, GoldenFile};
use gdiv::gibbs::{eppf, recursion_residual, total_mass};
use gdiv::models::{AnyModel, GnedinFisher, GnedinFisherParams, PoissonDirichlet, PoissonDirichletParams};
use gdiv::moments::{
    posterior_moments, posterior_power_sum_moments, posterior_shannon_mean, prior_moments, prior_power_sum_moments,
    prior_shannon_moments,
};
use gdiv::oracle::{
    enumerate_set_partitions, posterior_powersum_moment, prior_powersum_moment, shannon_limit_richardson, OracleModel,
};
use gdiv::sampler::{hpd_interval, sample_indices, summarize_samples, McConfig};
use gdiv::{DiversityIndex, GibbsModel, Multiplicities};
use gdiv_cli::commands::{prior_table, GridFamily, DEFAULT_ALPHAS, DEFAULT_THETAS};

const PRIOR_TABLE_TOL: f64 = 1e-3;
const PRIOR_TABLE_MAX_SECS: f64 = 1.0;
const BEETLES_POINT_TOL: f64 = 1e-3;
const BEETLES_HPD_TOL: f64 = 0.05;
const BEETLES_SAMPLES: usize = 100_000;
const BEETLES_MAX_SECS: f64 = 60.0;
const ML_TOL: f64 = 0.01;
const CHAO_SHEN_TOL: f64 = 0.02;
const BIAS_CORRECTED_TOL: f64 = 0.05;
const ORACLE_REL_TOL: f64 = 1e-10;
const ORACLE_MAX_SECS: f64 = 60.0;
const EPPF_TOL: f64 = 1e-10;
const RECURSION_TOL: f64 = 1e-10;
const MC_SAMPLES: usize = 100_000;
const MC_Z: f64 = 3.0;
const RICHARDSON_REL_TOL: f64 = 1e-5;
const EMPTY_DATA_REL_TOL: f64 = 1e-14;
const SPIKE_SAMPLES: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pd(alpha: f64, theta: f64) -> AnyModel<f64> {
    PoissonDirichlet::new(PoissonDirichletParams { alpha, theta }).unwrap().into()
}

fn gf(psi: f64, gamma: f64) -> AnyModel<f64> {
    GnedinFisher::new(GnedinFisherParams { psi, gamma }).unwrap().into()
}

fn prior_table_cells(golden: &GoldenFile) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut blank_ok = true;
    for m in [2usize, 3] {
        let table =
            prior_table(GridFamily::Pd, &DEFAULT_ALPHAS, &DEFAULT_THETAS, DiversityIndex::Tsallis(m), true).unwrap();
        for (r, &theta) in DEFAULT_THETAS.iter().enumerate() {
            for (c, &alpha) in DEFAULT_ALPHAS.iter().enumerate() {
                let (mean, cv) = table.cell(r, c);
                for (stat, got) in [("mean", mean), ("cv", cv)] {
                    let id = format!("table1/m{m}/{stat}/alpha={alpha:?}/theta={theta:?}");
                    match (golden.get(&id), got) {
                        (Some(rec), Some(v)) => {
                            worst = worst.max((v - rec.expected).abs());
                            checked += 1;
                        }
                        (None, None) => {}
                        _ => blank_ok = false,
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= PRIOR_TABLE_TOL && blank_ok && checked == 212 && secs < PRIOR_TABLE_MAX_SECS,
        format!(
            "{checked} cells, max |diff| {worst:.2e} (tol {PRIOR_TABLE_TOL}), blanks match: {blank_ok}, {secs:.3}s"
        ),
    )
}

fn beetles_posterior(golden: &GoldenFile) -> Outcome {
    let start = Instant::now();
    let data = counts_to_multiplicities(&load_fixture("beetles").unwrap());
    let mut point_ok = true;
    let mut hpd_ok = true;
    let mut parts = Vec::new();
    for gamma in [0.05, 0.1, 0.2, 0.3] {
        let model = gf(0.0, gamma);
        let key = |s: &str| format!("table2/gf/gamma={gamma:?}/{s}");
        let expected = |s: &str| golden.get(&key(s)).unwrap().expected;
        let mean = posterior_shannon_mean(&model, &data).unwrap();
        let draws =
            sample_indices(&model, &data, &[DiversityIndex::Shannon], &McConfig::new(BEETLES_SAMPLES, 2013)).unwrap();
        let (lo, hi) = hpd_interval(&draws.values[0], 0.95).unwrap();
        let dp = mean - expected("posterior_mean");
        point_ok &= dp.abs() <= BEETLES_POINT_TOL;
        hpd_ok &= (lo - expected("hpd_lower")).abs() <= BEETLES_HPD_TOL
            && (hi - expected("hpd_upper")).abs() <= BEETLES_HPD_TOL;
        parts.push(format!("g={gamma}: mean {mean:.4} ({dp:+.4}) hpd ({lo:.3}, {hi:.3})"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        point_ok && hpd_ok && secs < BEETLES_MAX_SECS,
        format!(
            "points within {BEETLES_POINT_TOL}: {point_ok}; HPD within {BEETLES_HPD_TOL}: {hpd_ok}; {}; {secs:.1}s",
            parts.join("; ")
        ),
    )
}

fn beetles_comparators(golden: &GoldenFile) -> Outcome {
    let expected = |s: &str| golden.get(&format!("table2/comparator/{s}")).unwrap().expected;
    let fc = load_fixture("beetles").unwrap();
    let ml = ml_entropy(&fc, 1).unwrap();
    let cs = chao_shen_entropy(&fc).unwrap();
    let bc = bias_corrected_ml(&fc).unwrap().value;
    let pass = (ml - expected("ml")).abs() <= ML_TOL
        && (cs - expected("chao_shen")).abs() <= CHAO_SHEN_TOL
        && (bc - expected("bias_corrected_ml")).abs() <= BIAS_CORRECTED_TOL;
    outcome(pass, format!("ML {ml:.4}, Chao-Shen {cs:.4}, bias-corrected ML {bc:.4}"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let grid = data_grid(6).unwrap();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for model in standard_models() {
        let oracle = OracleModel::from(&model);
        for m in [2usize, 3] {
            let prior = prior_power_sum_moments::<f64, _>(&model, m, 3).unwrap();
            for xi in 1..=3 {
                worst = worst.max(relative_error(prior.values[xi - 1], prior_powersum_moment(&oracle, m, xi).unwrap()));
                cases += 1;
            }
            for data in &grid {
                if model.log_v(data.n(), data.k()) == f64::NEG_INFINITY {
                    continue;
                }
                let post = posterior_power_sum_moments::<f64, _>(&model, data, m, 3).unwrap();
                for xi in 1..=3 {
                    let reference = posterior_powersum_moment(&oracle, data, m, xi).unwrap();
                    worst = worst.max(relative_error(post.values[xi - 1], reference));
                    cases += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= ORACLE_REL_TOL && secs < ORACLE_MAX_SECS,
        format!("{cases} moments over 10 models, max rel err {worst:.2e} (tol {ORACLE_REL_TOL:e}), {secs:.2}s"),
    )
}

fn eppf_and_recursion() -> Outcome {
    let mut mass_err: f64 = 0.0;
    let mut rec_err: f64 = 0.0;
    for model in standard_models() {
        for n in 1..=8 {
            let terms: Vec<f64> = enumerate_set_partitions(n)
                .unwrap()
                .iter()
                .map(|c| c.count as f64 * eppf::<f64, _>(&model, &c.parts).unwrap())
                .collect();
            mass_err = mass_err.max((total_mass(&terms) - 1.0).abs());
        }
        for n in 1..=50 {
            for k in 1..=n {
                rec_err = rec_err.max(recursion_residual(&model, n, k));
            }
        }
    }
    outcome(
        mass_err <= EPPF_TOL && rec_err <= RECURSION_TOL,
        format!("max |mass-1| {mass_err:.2e}, max recursion residual {rec_err:.2e} (tol 1e-10)"),
    )
}

fn monte_carlo() -> Outcome {
    let datasets = [Multiplicities::empty(), Multiplicities::new(vec![3, 2, 1, 1]).unwrap()];
    let indices = [DiversityIndex::Shannon, DiversityIndex::Tsallis(2)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (mi, model) in [pd(0.3, 1.0), gf(0.0, 0.5)].iter().enumerate() {
        for (di, data) in datasets.iter().enumerate() {
            let seed = 1000 + (2 * mi + di) as u64;
            let draws = sample_indices(model, data, &indices, &McConfig::new(MC_SAMPLES, seed)).unwrap();
            for (ii, &index) in indices.iter().enumerate() {
                let exact = posterior_moments::<f64, _>(model, data, index, 2).unwrap();
                let s = summarize_samples(&draws.values[ii], 0.95, seed).unwrap();
                let zm = (s.mean - exact.mean) / s.mean_se;
                let zv = (s.variance - exact.variance.unwrap()) / s.variance_se;
                worst = worst.max(zm.abs()).max(zv.abs());
                parts.push(format!(
                    "{}{}/H{}: {zm:+.2},{zv:+.2}",
                    if mi == 0 { "PD" } else { "GF" },
                    if di == 0 { "prior" } else { "post" },
                    index.order()
                ));
            }
        }
    }
    outcome(worst <= MC_Z, format!("max |z| {worst:.2} (limit {MC_Z}); z(mean),z(var): {}", parts.join(" ")))
}

/// Agreement is measured relative to the exact moments; the absolute gap is
/// reported alongside.
fn shannon_limit() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_abs: f64 = 0.0;
    for model in standard_models() {
        let oracle = OracleModel::from(&model);
        let (mean, second) = shannon_limit_richardson(&oracle, &Multiplicities::empty(), (1e-3, 1e-4)).unwrap();
        let exact = prior_shannon_moments::<f64, _>(&model).unwrap();
        worst = worst.max(relative_error(mean, exact.raw[0])).max(relative_error(second, exact.raw[1]));
        worst_abs = worst_abs.max((mean - exact.raw[0]).abs()).max((second - exact.raw[1]).abs());
    }
    outcome(
        worst <= RICHARDSON_REL_TOL,
        format!(
            "10 models, max rel err of E[H], E[H^2]: {worst:.2e} (tol {RICHARDSON_REL_TOL:e}), max abs err {worst_abs:.2e}"
        ),
    )
}

fn reduce_to_prior() -> Outcome {
    let empty = Multiplicities::empty();
    let mut worst: f64 = 0.0;
    let mut bitwise = 0;
    let mut total = 0;
    for model in standard_models() {
        for (index, order) in
            [(DiversityIndex::Shannon, 2), (DiversityIndex::Tsallis(2), 3), (DiversityIndex::Tsallis(3), 3)]
        {
            let a = prior_moments::<f64, _>(&model, index, order).unwrap();
            let b = posterior_moments::<f64, _>(&model, &empty, index, order).unwrap();
            for (x, y) in a.raw.iter().zip(&b.raw) {
                total += 1;
                bitwise += (x.to_bits() == y.to_bits()) as usize;
                worst = worst.max(relative_error(*x, *y));
            }
        }
    }
    outcome(
        worst <= EMPTY_DATA_REL_TOL,
        format!("{bitwise}/{total} bitwise equal, max rel err {worst:.2e} (tol {EMPTY_DATA_REL_TOL:e})"),
    )
}

/// Draws with a single species have `H = 0`; under GF(0, γ) that happens
/// with probability γ.
fn gf_spike_at_zero() -> Outcome {
    let mut worst: f64 = 0.0;
    for gamma in [0.1, 0.3, 0.5] {
        let draws = sample_indices(
            &gf(0.0, gamma),
            &Multiplicities::empty(),
            &[DiversityIndex::Shannon],
            &McConfig::new(SPIKE_SAMPLES, 7),
        )
        .unwrap();
        let p = draws.values[0].iter().filter(|&&h| h == 0.0).count() as f64 / SPIKE_SAMPLES as f64;
        let se = (gamma * (1.0 - gamma) / SPIKE_SAMPLES as f64).sqrt();
        worst = worst.max(((p - gamma) / se).abs());
    }
    outcome(worst <= MC_Z, format!("max |z| of P(H=0) against gamma: {worst:.2}"))
}

fn main() -> ExitCode {
    let golden = load_golden().expect("golden file parses");
    golden.validate().expect("golden file is consistent");
    type Criterion<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let criteria: Vec<Criterion<'_>> = vec![
        ("1 prior table", Box::new(|| prior_table_cells(&golden))),
        ("2 beetles posterior (GF)", Box::new(|| beetles_posterior(&golden))),
        ("3 beetles comparators", Box::new(|| beetles_comparators(&golden))),
        ("4 oracle equivalence", Box::new(oracle_equivalence)),
        ("5 EPPF mass and recursion", Box::new(eppf_and_recursion)),
        ("6 Monte Carlo consistency", Box::new(monte_carlo)),
        ("7 Shannon limit", Box::new(shannon_limit)),
        ("8 reduce to prior", Box::new(reduce_to_prior)),
        ("GF spike at zero", Box::new(gf_spike_at_zero)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let o = run();
        failed += !o.pass as usize;
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
