//! Frequency-count data and the frequentist entropy estimators used as
//! comparators for the Bayesian estimates.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::Multiplicities;
use crate::scalar::ksum;

/// `m_j`: the number of species observed exactly `j` times.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FrequencyCounts {
    counts: BTreeMap<usize, usize>,
}

impl FrequencyCounts {
    /// Builds from `(j, m_j)` pairs. Zero `m_j` entries are dropped; `j = 0`
    /// and repeated `j` are rejected.
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for (j, mj) in pairs {
            if j == 0 {
                return Err(Error::InvalidData("frequency class j must be >= 1".into()));
            }
            if mj == 0 {
                continue;
            }
            if counts.insert(j, mj).is_some() {
                return Err(Error::InvalidData(format!("frequency class {j} given twice")));
            }
        }
        Ok(FrequencyCounts { counts })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&j, &m)| (j, m))
    }

    /// `m_j`, zero when absent.
    pub fn get(&self, j: usize) -> usize {
        self.counts.get(&j).copied().unwrap_or(0)
    }

    /// Number of distinct species.
    pub fn k(&self) -> usize {
        self.counts.values().sum()
    }

    /// Sample size.
    pub fn n(&self) -> usize {
        self.counts.iter().map(|(j, m)| j * m).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn singletons(&self) -> usize {
        self.get(1)
    }

    pub fn doubletons(&self) -> usize {
        self.get(2)
    }

    /// Reads a counts file; see [`FromStr`] for the format.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }
}

/// Accepts `j<TAB>m_j` lines (any whitespace separator works) with `#`
/// comments, or a single line of raw multiplicities `n_1 n_2 … n_k`.
/// A file with no content lines is an empty sample.
impl FromStr for FrequencyCounts {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lines: Vec<(usize, Vec<&str>)> = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
            .filter(|(_, f)| !f.is_empty())
            .collect();
        let number = |line: usize, tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse { line, msg: format!("`{tok}` is not a non-negative integer") })
        };

        let raw = match lines.as_slice() {
            [(_, fields)] => fields.len() != 2 || !s.contains('\t'),
            _ => false,
        };
        if raw {
            let (line, fields) = &lines[0];
            let counts = fields.iter().map(|t| number(*line, t)).collect::<Result<Vec<_>>>()?;
            if counts.contains(&0) {
                return Err(Error::Parse { line: *line, msg: "multiplicities must be >= 1".into() });
            }
            return Ok(multiplicities_to_counts(&Multiplicities::new(counts)?));
        }

        let mut pairs = Vec::with_capacity(lines.len());
        for (line, fields) in &lines {
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("expected `j<TAB>m_j`, found {} fields", fields.len()),
                });
            }
            pairs.push((number(*line, fields[0])?, number(*line, fields[1])?));
        }
        FrequencyCounts::new(pairs)
    }
}

impl fmt::Display for FrequencyCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, m) in self.iter() {
            writeln!(f, "{j}\t{m}")?;
        }
        Ok(())
    }
}

/// Expands counts into a multiplicity vector, largest species first.
pub fn counts_to_multiplicities(fc: &FrequencyCounts) -> Multiplicities {
    let counts: Vec<usize> = fc.counts.iter().rev().flat_map(|(&j, &m)| std::iter::repeat_n(j, m)).collect();
    Multiplicities::new(counts).expect("frequency classes are >= 1")
}

pub fn multiplicities_to_counts(data: &Multiplicities) -> FrequencyCounts {
    let mut counts = BTreeMap::new();
    for &c in data.counts() {
        *counts.entry(c).or_insert(0) += 1;
    }
    FrequencyCounts { counts }
}

impl From<&FrequencyCounts> for Multiplicities {
    fn from(fc: &FrequencyCounts) -> Self {
        counts_to_multiplicities(fc)
    }
}

impl From<&Multiplicities> for FrequencyCounts {
    fn from(data: &Multiplicities) -> Self {
        multiplicities_to_counts(data)
    }
}

fn require_data(fc: &FrequencyCounts) -> Result<f64> {
    match fc.n() {
        0 => Err(Error::InvalidData("estimator needs at least one observation".into())),
        n => Ok(n as f64),
    }
}

/// Plug-in `H_m` of the empirical frequencies; `m = 1` is Shannon.
pub fn ml_entropy(fc: &FrequencyCounts, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::param("index order m must be >= 1"));
    }
    let n = require_data(fc)?;
    let terms = fc.iter().map(|(j, mj)| {
        let p = j as f64 / n;
        if m == 1 {
            -(mj as f64) * p * p.ln()
        } else {
            mj as f64 * p.powi(m as i32)
        }
    });
    let s = ksum(terms);
    Ok(if m == 1 { s } else { (1.0 - s) / (m as f64 - 1.0) })
}

/// Chao–Shen coverage-adjusted Horvitz–Thompson estimator of Shannon entropy.
pub fn chao_shen_entropy(fc: &FrequencyCounts) -> Result<f64> {
    let n = require_data(fc)?;
    if fc.singletons() == fc.n() {
        return Err(Error::Undefined("zero sample coverage: every species is a singleton".into()));
    }
    let coverage = 1.0 - fc.singletons() as f64 / n;
    Ok(ksum(fc.iter().map(|(j, mj)| {
        let pa = coverage * j as f64 / n;
        let inclusion = -(n * (-pa).ln_1p()).exp_m1();
        -(mj as f64) * pa * pa.ln() / inclusion
    })))
}

/// Richness estimate used by [`bias_corrected_ml`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasCorrected {
    pub value: f64,
    pub richness: f64,
    /// True when `m_2 = 0` forced the bias-corrected Chao1 richness.
    pub fallback: bool,
}

/// Plug-in Shannon entropy plus the Miller–Madow term `(Ŝ - 1)/(2n)`, with
/// `Ŝ = k + m_1²/(2 m_2)` (Chao1). Without doubletons
/// `Ŝ = k + m_1(m_1-1)/2` is used and the result is flagged.
pub fn bias_corrected_ml(fc: &FrequencyCounts) -> Result<BiasCorrected> {
    let n = require_data(fc)?;
    let (k, f1, f2) = (fc.k() as f64, fc.singletons() as f64, fc.doubletons() as f64);
    let fallback = fc.doubletons() == 0;
    let richness = if fallback { k + f1 * (f1 - 1.0) / 2.0 } else { k + f1 * f1 / (2.0 * f2) };
    let value = ml_entropy(fc, 1)? + (richness - 1.0) / (2.0 * n);
    Ok(BiasCorrected { value, richness, fallback })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn beetles() -> FrequencyCounts {
        FrequencyCounts::new([(1, 59), (2, 9), (3, 3), (4, 2), (5, 2), (6, 2), (11, 1)]).unwrap()
    }

    #[test]
    fn beetles_totals() {
        let fc = beetles();
        assert_eq!((fc.k(), fc.n()), (78, 127));
        let data = counts_to_multiplicities(&fc);
        assert_eq!((data.k(), data.n()), (78, 127));
        assert_eq!(data.counts()[0], 11);
    }

    #[test]
    fn parse_formats() {
        let pairs: FrequencyCounts = "# beetles\n1\t59\n2\t9\n\n3\t3 # trailing\n".parse().unwrap();
        assert_eq!(pairs.k(), 71);
        let raw: FrequencyCounts = "3 1 2 1\n".parse().unwrap();
        assert_eq!((raw.get(1), raw.get(2), raw.get(3)), (2, 1, 1));
        let two_raw: FrequencyCounts = "5 5".parse().unwrap();
        assert_eq!(two_raw.get(5), 2);
        let empty: FrequencyCounts = "# nothing\n".parse().unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn parse_errors_carry_line() {
        match "1\t2\nx\t3\n".parse::<FrequencyCounts>() {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!("1\t2\n1\t3\n".parse::<FrequencyCounts>().is_err());
        assert!("0\t2\n".parse::<FrequencyCounts>().is_err());
        assert!("1\t2\t3\n2\t1\n".parse::<FrequencyCounts>().is_err());
        assert!("3 0 1\n".parse::<FrequencyCounts>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let fc = beetles();
        assert_eq!(fc.to_string().parse::<FrequencyCounts>().unwrap(), fc);
    }

    #[test]
    fn ml_simple_cases() {
        let one = FrequencyCounts::new([(5, 1)]).unwrap();
        assert_eq!(ml_entropy(&one, 1).unwrap(), 0.0);
        let uniform = FrequencyCounts::new([(1, 12)]).unwrap();
        assert_relative_eq!(ml_entropy(&uniform, 1).unwrap(), 12f64.ln(), max_relative = 1e-14);
        assert!(ml_entropy(&FrequencyCounts::default(), 1).is_err());
    }

    #[test]
    fn beetles_comparators() {
        let fc = beetles();
        assert!((ml_entropy(&fc, 1).unwrap() - 4.08).abs() <= 0.01);
        assert!((chao_shen_entropy(&fc).unwrap() - 4.70).abs() <= 0.02);
        let bc = bias_corrected_ml(&fc).unwrap();
        assert!(!bc.fallback);
        assert!((bc.value - 5.11).abs() <= 0.05);
    }

    #[test]
    fn chao_shen_full_coverage() {
        let fc = FrequencyCounts::new([(10, 2)]).unwrap();
        let cs = chao_shen_entropy(&fc).unwrap();
        assert_relative_eq!(cs, 2f64.ln(), max_relative = 1e-5);
        let singletons = FrequencyCounts::new([(1, 4)]).unwrap();
        assert!(matches!(chao_shen_entropy(&singletons), Err(Error::Undefined(_))));
    }

    #[test]
    fn bias_correction_variants() {
        let no_singletons = FrequencyCounts::new([(3, 4), (7, 1)]).unwrap();
        let bc = bias_corrected_ml(&no_singletons).unwrap();
        let n = no_singletons.n() as f64;
        assert_relative_eq!(bc.value, ml_entropy(&no_singletons, 1).unwrap() + 4.0 / (2.0 * n), max_relative = 1e-14);

        let no_doubletons = FrequencyCounts::new([(1, 4), (3, 1)]).unwrap();
        let bc = bias_corrected_ml(&no_doubletons).unwrap();
        assert!(bc.fallback);
        assert_eq!(bc.richness, 5.0 + 6.0);

        let big = FrequencyCounts::new([(10_000, 10)]).unwrap();
        let bc = bias_corrected_ml(&big).unwrap();
        assert!(bc.value - ml_entropy(&big, 1).unwrap() < 1e-4);
    }

    fn arb_counts() -> impl Strategy<Value = FrequencyCounts> {
        prop::collection::vec((1usize..40, 1usize..20), 1..12).prop_map(|v| {
            let map: BTreeMap<usize, usize> = v.into_iter().collect();
            FrequencyCounts::new(map).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip(fc in arb_counts()) {
            let data = counts_to_multiplicities(&fc);
            prop_assert_eq!((data.n(), data.k()), (fc.n(), fc.k()));
            prop_assert_eq!(multiplicities_to_counts(&data), fc);
        }

        #[test]
        fn simpson_is_one_minus_sum_of_squares(fc in arb_counts()) {
            let n = fc.n() as f64;
            let s: f64 = fc.iter().map(|(j, m)| m as f64 * (j as f64 / n).powi(2)).sum();
            prop_assert!((ml_entropy(&fc, 2).unwrap() - (1.0 - s)).abs() < 1e-14);
        }

        #[test]
        fn chao_shen_dominates_plug_in(f1 in 1usize..60, rest in arb_counts()) {
            let pairs = rest.iter().filter(|&(j, _)| j > 1).chain(std::iter::once((1, f1)));
            let fc = FrequencyCounts::new(pairs.collect::<Vec<_>>()).unwrap();
            prop_assume!(fc.singletons() < fc.n());
            prop_assert!(chao_shen_entropy(&fc).unwrap() >= ml_entropy(&fc, 1).unwrap() - 1e-12);
        }
    }
}
