use gdiv::oracle::{
    closed_form_reference, compositions, enumerate_set_partitions, eppf_total_mass, weak_compositions, OracleModel,
    Quantity,
};
use gdiv::{Error, Multiplicities};

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn composition_counts() {
    for total in 1..=9 {
        for parts in 1..=total {
            assert_eq!(compositions(total, parts).len(), binomial(total - 1, parts - 1));
            assert_eq!(weak_compositions(total, parts).len(), binomial(total + parts - 1, parts - 1));
        }
    }
    assert!(compositions(3, 4).is_empty());
    let c = &compositions(4, 2)[0];
    assert_eq!(c.total(), 4);
    assert_eq!(c.multinomial(), 4.0);
}

#[test]
fn set_partitions_count_to_bell_numbers() {
    let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
    for (i, &b) in bell.iter().enumerate() {
        let classes = enumerate_set_partitions(i + 1).unwrap();
        assert_eq!(classes.iter().map(|c| c.count).sum::<u64>(), b);
        assert!(classes.iter().all(|c| c.parts.n() == i + 1));
    }
    assert!(matches!(enumerate_set_partitions(11), Err(Error::SizeGuard(_))));
    assert!(enumerate_set_partitions(0).is_err());
}

#[test]
fn oracle_eppf_is_normalized() {
    let models = [
        OracleModel::PoissonDirichlet { alpha: 0.4, theta: 0.7 },
        OracleModel::PoissonDirichlet { alpha: -1.0, theta: 4.0 },
        OracleModel::GnedinFisher { psi: 0.5, gamma: 1.2 },
    ];
    for model in models {
        for n in 1..=7 {
            assert!((eppf_total_mass(&model, n).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn quantities_parse_by_id() {
    for q in Quantity::ALL {
        assert_eq!(q.id().parse::<Quantity>().unwrap(), q);
    }
    assert!(matches!("median".parse::<Quantity>(), Err(Error::UnknownQuantity(_))));
    let model = OracleModel::PoissonDirichlet { alpha: 0.0, theta: 1.0 };
    let empty = Multiplicities::empty();
    assert!(closed_form_reference(&model, "prior_mean_hm", None, &empty).is_err());
    // E[H_2] = θ/(1+θ) under the Dirichlet process
    let v = closed_form_reference(&model, "prior_mean_hm", Some(2), &empty).unwrap();
    assert!((v - 0.5).abs() < 1e-14);
}
