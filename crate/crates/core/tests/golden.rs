//! Replays the golden records that do not need Monte Carlo.

use gdiv::estimators::{bias_corrected_ml, chao_shen_entropy, counts_to_multiplicities, ml_entropy};
use gdiv::fixtures::{config_hash, fixture_names, load_fixture, load_golden, Provenance};
use gdiv::moments::{posterior_moments, prior_moments, summarize, DEFAULT_CHEBYSHEV_EPSILON};
use gdiv::{
    AnyModel, DiversityIndex, GnedinFisher, GnedinFisherParams, Multiplicities, PoissonDirichlet,
    PoissonDirichletParams,
};
use serde_json::Value;

fn num(config: &Value, key: &str) -> f64 {
    config[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {config}"))
}

fn model_from(config: &Value) -> AnyModel {
    match config["model"].as_str().unwrap() {
        "pd" | "dirichlet" => {
            PoissonDirichlet::new(PoissonDirichletParams { alpha: num(config, "alpha"), theta: num(config, "theta") })
                .unwrap()
                .into()
        }
        "gf" => GnedinFisher::new(GnedinFisherParams { psi: num(config, "psi"), gamma: num(config, "gamma") })
            .unwrap()
            .into(),
        other => panic!("unknown model {other}"),
    }
}

fn data_from(config: &Value) -> Multiplicities {
    match config.get("data") {
        Some(Value::Array(v)) => Multiplicities::new(v.iter().map(|x| x.as_u64().unwrap() as usize).collect()).unwrap(),
        _ => Multiplicities::empty(),
    }
}

#[test]
fn golden_file_is_consistent() {
    let golden = load_golden().unwrap();
    golden.validate().unwrap();
    for r in &golden.records {
        assert_eq!(config_hash(&r.config), r.config_hash, "{}", r.id);
        assert_eq!(r.oracle.is_some(), r.provenance == Provenance::Derived, "{}", r.id);
    }
}

#[test]
fn prior_table_records() {
    let golden = load_golden().unwrap();
    let records: Vec<_> = golden.with_prefix("table1/").collect();
    assert_eq!(records.len(), 212);
    for r in records {
        let c = &r.config;
        let m = c["m"].as_u64().unwrap() as usize;
        let ms = prior_moments::<f64, _>(&model_from(c), DiversityIndex::Tsallis(m), 2).unwrap();
        let s = summarize(&ms, true, DEFAULT_CHEBYSHEV_EPSILON).unwrap();
        let got = match c["statistic"].as_str().unwrap() {
            "mean" => s.mean,
            "cv" => s.cv.unwrap(),
            other => panic!("unknown statistic {other}"),
        };
        assert!(r.accepts(got), "{}: {got} vs {}", r.id, r.expected);
    }
}

#[test]
fn comparator_records() {
    let golden = load_golden().unwrap();
    let fc = load_fixture("beetles").unwrap();
    let check = |id: &str, v: f64| {
        let r = golden.get(id).unwrap();
        assert!(r.accepts(v), "{id}: {v} vs {}", r.expected);
    };
    check("table2/comparator/ml", ml_entropy(&fc, 1).unwrap());
    check("table2/comparator/chao_shen", chao_shen_entropy(&fc).unwrap());
    check("table2/comparator/bias_corrected_ml", bias_corrected_ml(&fc).unwrap().value);
}

#[test]
fn derived_records() {
    let golden = load_golden().unwrap();
    let records: Vec<_> = golden.with_prefix("oracle/").collect();
    assert!(!records.is_empty());
    for r in records {
        let c = &r.config;
        let m = c["m"].as_u64().unwrap() as usize;
        let ms = posterior_moments::<f64, _>(&model_from(c), &data_from(c), DiversityIndex::Tsallis(m), 2).unwrap();
        let got = if c["statistic"] == "mean" { ms.mean } else { ms.variance.unwrap() };
        assert!(r.accepts(got), "{}: {got} vs {}", r.id, r.expected);
    }
}

#[test]
fn fixtures_load() {
    for name in fixture_names() {
        let fc = load_fixture(name).unwrap();
        assert!(fc.n() > 0, "{name}");
        assert_eq!(counts_to_multiplicities(&fc).n(), fc.n());
    }
    let beetles = load_fixture("beetles").unwrap();
    assert!(beetles.singletons() > 0);
    assert!(load_fixture("no-such-fixture").is_err());
}
