use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gdiv::sampler::{
    gf_species_pmf, histogram, hpd_interval, read_binary_dump, sample_indices, sample_pd_posterior, sample_pd_prior,
    summarize_samples, write_binary_dump, write_text_dump, McConfig, StickBreaking, CHUNK,
};
use gdiv::{AnyModel, DiversityIndex, Error, GnedinFisher, Multiplicities, PoissonDirichlet, PoissonDirichletParams};

fn pd(alpha: f64, theta: f64) -> PoissonDirichlet {
    PoissonDirichlet::new(PoissonDirichletParams { alpha, theta }).unwrap()
}

fn shannon_draws(model: &AnyModel, data: &Multiplicities, samples: usize, seed: u64) -> Vec<f64> {
    sample_indices(model, data, &[DiversityIndex::Shannon], &McConfig::new(samples, seed)).unwrap().values.remove(0)
}

#[test]
fn same_seed_same_draws_regardless_of_threads() {
    let model = AnyModel::from(GnedinFisher::one_parameter(0.3).unwrap());
    let data = Multiplicities::new(vec![5, 2, 1]).unwrap();
    let samples = 2 * CHUNK + 17;
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| shannon_draws(&model, &data, samples, 11));
    let b = four.install(|| shannon_draws(&model, &data, samples, 11));
    assert_eq!(a.len(), samples);
    assert_eq!(a, b);
    assert_ne!(a, shannon_draws(&model, &data, samples, 12));
}

#[test]
fn pd_draws_carry_unit_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let trunc = StickBreaking::with_atoms(200);
    let data = Multiplicities::new(vec![4, 1, 1]).unwrap();
    for model in [pd(0.3, 1.0), pd(0.0, 5.0), PoissonDirichlet::stable(0.6).unwrap()] {
        for _ in 0..50 {
            let prior = sample_pd_prior(&model, &trunc, &mut rng).unwrap();
            assert!((prior.total_mass() - 1.0).abs() < 1e-12);
            assert!(prior.weights.iter().all(|&w| w >= 0.0));
            let post = sample_pd_posterior(&model, &data, &trunc, &mut rng).unwrap();
            assert!((post.total_mass() - 1.0).abs() < 1e-12);
            assert!(post.weights.len() > 3);
        }
    }
}

#[test]
fn stable_prior_spreads_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = PoissonDirichlet::stable(0.5).unwrap();
    let w = sample_pd_prior(&model, &StickBreaking::default(), &mut rng).unwrap();
    assert!(w.weights.len() >= 1000);
    assert!(w.weights.iter().filter(|&&x| x > 0.0).count() > 1);
}

#[test]
fn finite_dirichlet_draws_have_exactly_the_declared_species() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let model = PoissonDirichlet::finite_dirichlet(6, 0.5).unwrap();
    let data = Multiplicities::new(vec![3, 3, 1]).unwrap();
    let w = sample_pd_posterior(&model, &data, &StickBreaking::default(), &mut rng).unwrap();
    assert_eq!(w.weights.len(), 6);
    assert_eq!(w.tail_mass, 0.0);
    assert!((w.total_mass() - 1.0).abs() < 1e-12);
    let too_many = Multiplicities::new(vec![1; 7]).unwrap();
    assert!(matches!(
        sample_pd_posterior(&model, &too_many, &StickBreaking::default(), &mut rng),
        Err(Error::InvalidData(_))
    ));
}

#[test]
fn gf_species_law_puts_gamma_on_one_species() {
    for gamma in [0.05, 0.3, 0.9] {
        let pmf = gf_species_pmf(&GnedinFisher::one_parameter(gamma).unwrap(), 100_000).unwrap();
        assert_eq!(pmf.offset, 1);
        // exact up to the Pareto approximation of the untabulated tail
        assert!((pmf.pmf[0] - gamma).abs() < 1e-6 * gamma, "{gamma}: {}", pmf.pmf[0]);
        let total = pmf.pmf.iter().sum::<f64>() + pmf.tail_mass;
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn hpd_interval_is_the_shortest_window() {
    let values: Vec<f64> = (0..1000).map(|i| (i as f64 / 1000.0).powi(3)).collect();
    let (lo, hi) = hpd_interval(&values, 0.5).unwrap();
    assert_eq!(lo, 0.0);
    assert!(hi < 0.13);
    assert!(matches!(hpd_interval(&values[..10], 0.5), Err(Error::TooFewSamples { .. })));
    assert!(hpd_interval(&values, 1.0).is_err());
}

#[test]
fn summary_and_histogram_agree() {
    let model = AnyModel::from(pd(0.3, 1.0));
    let values = shannon_draws(&model, &Multiplicities::empty(), 500, 1);
    let s = summarize_samples(&values, 0.9, 1).unwrap();
    let h = histogram(&values, 12).unwrap();
    assert_eq!(h.counts.iter().sum::<u64>(), 500);
    assert_eq!(h.edges.len(), 13);
    assert!(s.hpd.0 >= h.edges[0] && s.hpd.1 <= h.edges[12] + 1e-12);
    assert!(s.mean > h.edges[0] && s.mean < h.edges[12]);
}

#[test]
fn dumps_round_trip() {
    let values = vec![0.0, 1.5, -2.25e-300, f64::MAX, 3.0e-7];
    let mut bin = Vec::new();
    write_binary_dump(&values, &mut bin).unwrap();
    assert_eq!(read_binary_dump(bin.as_slice()).unwrap(), values);
    let mut text = Vec::new();
    write_text_dump(&values, &mut text).unwrap();
    let parsed: Vec<f64> = String::from_utf8(text).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(parsed, values);
}

#[test]
fn zero_samples_rejected() {
    let model = AnyModel::from(pd(0.3, 1.0));
    let r = sample_indices(&model, &Multiplicities::empty(), &[DiversityIndex::Shannon], &McConfig::new(0, 1));
    assert!(matches!(r, Err(Error::InvalidParameter(_))));
}
