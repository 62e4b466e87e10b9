//! Brute-force reference implementations used to validate the analytic code.
//!
//! Everything here runs in plain `f64` products (no log space) on small
//! sizes, and the few Gamma-function values needed for real arguments come
//! from `statrs`, so no numeric path is shared with [`crate::special`] or
//! [`crate::moments`]. Moments of power sums are obtained by expanding
//! `S_m^ξ` over integer compositions and weighting each term by an EPPF.

use std::collections::BTreeMap;
use std::str::FromStr;

use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::gibbs::Multiplicities;
use crate::models;

/// Plain-arithmetic weights of a supported family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleModel {
    PoissonDirichlet { alpha: f64, theta: f64 },
    GnedinFisher { psi: f64, gamma: f64 },
}

impl From<&models::PoissonDirichlet<f64>> for OracleModel {
    fn from(m: &models::PoissonDirichlet<f64>) -> Self {
        let p = m.params();
        OracleModel::PoissonDirichlet { alpha: p.alpha, theta: p.theta }
    }
}

impl From<&models::GnedinFisher<f64>> for OracleModel {
    fn from(m: &models::GnedinFisher<f64>) -> Self {
        OracleModel::GnedinFisher { psi: m.psi(), gamma: m.gamma() }
    }
}

impl From<&models::AnyModel<f64>> for OracleModel {
    fn from(m: &models::AnyModel<f64>) -> Self {
        match m {
            models::AnyModel::PoissonDirichlet(pd) => pd.into(),
            models::AnyModel::GnedinFisher(gf) => gf.into(),
        }
    }
}

/// Largest integer length evaluated as an explicit product.
const PRODUCT_LIMIT: f64 = 400.0;

/// `(a)_len`; integer lengths multiply factors out, others use Gamma ratios.
fn rising(a: f64, len: f64) -> f64 {
    if len == len.floor() && (0.0..=PRODUCT_LIMIT).contains(&len) {
        let mut p = 1.0;
        for j in 0..len as usize {
            p *= a + j as f64;
        }
        p
    } else {
        (ln_gamma(a + len) - ln_gamma(a)).exp()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl OracleModel {
    pub fn alpha(&self) -> f64 {
        match *self {
            OracleModel::PoissonDirichlet { alpha, .. } => alpha,
            OracleModel::GnedinFisher { .. } => -1.0,
        }
    }

    /// `V_{x,k}` for a real first argument.
    pub fn v(&self, x: f64, k: usize) -> f64 {
        if k == 0 {
            return if x == 0.0 { 1.0 } else { 0.0 };
        }
        match *self {
            OracleModel::PoissonDirichlet { alpha, theta } => {
                let mut num = 1.0;
                for i in 1..k {
                    num *= theta + i as f64 * alpha;
                }
                num / rising(theta + 1.0, x - 1.0)
            }
            OracleModel::GnedinFisher { psi, gamma } => {
                let kf = k as f64;
                rising(gamma, x - kf) * rising(1.0 - psi, kf - 1.0) * rising(1.0 - gamma + psi, kf - 1.0)
                    / (rising(1.0 + psi, x - 1.0) * rising(1.0 + gamma - psi, x - 1.0))
            }
        }
    }

    /// EPPF at (possibly real) block sizes.
    pub fn eppf(&self, blocks: &[f64]) -> f64 {
        let n: f64 = blocks.iter().sum();
        let b = 1.0 - self.alpha();
        let prod: f64 = blocks.iter().map(|&x| rising(b, x - 1.0)).product();
        self.v(n, blocks.len()) * prod
    }
}

/// A sequence of positive integers, the unit of the moment expansions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Composition {
    pub parts: Vec<usize>,
}

impl Composition {
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    /// `total! / ∏ parts_i!`.
    pub fn multinomial(&self) -> f64 {
        factorial(self.total()) / self.parts.iter().map(|&p| factorial(p)).product::<f64>()
    }
}

fn extend_compositions(total: usize, parts: usize, min: usize, prefix: &mut Vec<usize>, out: &mut Vec<Composition>) {
    if parts == 0 {
        if total == 0 {
            out.push(Composition { parts: prefix.clone() });
        }
        return;
    }
    if total < min * parts {
        return;
    }
    for first in min..=total - min * (parts - 1) {
        prefix.push(first);
        extend_compositions(total - first, parts - 1, min, prefix, out);
        prefix.pop();
    }
}

/// All compositions of `total` into exactly `parts` positive parts.
pub fn compositions(total: usize, parts: usize) -> Vec<Composition> {
    let mut out = Vec::new();
    extend_compositions(total, parts, 1, &mut Vec::new(), &mut out);
    out
}

/// All sequences of `parts` nonnegative integers summing to `total`.
pub fn weak_compositions(total: usize, parts: usize) -> Vec<Composition> {
    let mut out = Vec::new();
    extend_compositions(total, parts, 0, &mut Vec::new(), &mut out);
    out
}

/// Set partitions of `[n]` sharing one multiplicity vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionClass {
    /// Block sizes in decreasing order.
    pub parts: Multiplicities,
    /// Number of set partitions with these block sizes.
    pub count: u64,
}

pub const MAX_SET_PARTITION_N: usize = 10;

/// Enumerates every set partition of `[n]` (restricted growth strings) and
/// groups them by block sizes.
pub fn enumerate_set_partitions(n: usize) -> Result<Vec<PartitionClass>> {
    if n == 0 || n > MAX_SET_PARTITION_N {
        return Err(Error::SizeGuard(format!(
            "set partitions enumerated for 1 <= n <= {MAX_SET_PARTITION_N}, got {n}"
        )));
    }
    let mut classes: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut sizes = vec![0usize; blocks];
        for &b in &rgs {
            sizes[b] += 1;
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        *classes.entry(sizes).or_insert(0) += 1;

        // Next restricted growth string: a[i] <= 1 + max(a[..i]).
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(classes
                    .into_iter()
                    .rev()
                    .map(|(sizes, count)| PartitionClass {
                        parts: Multiplicities::new(sizes).expect("block sizes are positive"),
                        count,
                    })
                    .collect());
            }
            let prefix_max = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for r in rgs.iter_mut().skip(i + 1) {
                    *r = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// `Σ_partitions p(partition)`, which must be one.
pub fn eppf_total_mass(model: &OracleModel, n: usize) -> Result<f64> {
    Ok(enumerate_set_partitions(n)?
        .iter()
        .map(|c| {
            let blocks: Vec<f64> = c.parts.counts().iter().map(|&x| x as f64).collect();
            c.count as f64 * model.eppf(&blocks)
        })
        .sum())
}

/// Law of `K_n` by enumeration; entry `k-1` holds `P(K_n = k)`.
pub fn k_n_by_enumeration(model: &OracleModel, n: usize) -> Result<Vec<f64>> {
    let mut pmf = vec![0.0; n];
    for c in enumerate_set_partitions(n)? {
        let blocks: Vec<f64> = c.parts.counts().iter().map(|&x| x as f64).collect();
        pmf[c.parts.k() - 1] += c.count as f64 * model.eppf(&blocks);
    }
    Ok(pmf)
}

/// EPPF-weighted sum over all ways of spreading `r` labelled factors of
/// `S_m^r` over distinct new species, next to the blocks in `old_blocks`.
fn new_species_terms(model: &OracleModel, old_blocks: &[f64], r: usize, m: f64) -> f64 {
    if r == 0 {
        return model.eppf(old_blocks);
    }
    let mut acc = 0.0;
    for j in 1..=r {
        let inv_j_fact = 1.0 / factorial(j);
        for comp in compositions(r, j) {
            let mut blocks = old_blocks.to_vec();
            blocks.extend(comp.parts.iter().map(|&f| m * f as f64));
            acc += inv_j_fact * comp.multinomial() * model.eppf(&blocks);
        }
    }
    acc
}

fn check_xi(xi: usize) -> Result<()> {
    if (1..=3).contains(&xi) {
        Ok(())
    } else {
        Err(Error::domain(format!("oracle moments cover xi = 1..=3, got {xi}")))
    }
}

/// Prior `E[(S_m)^ξ]` for real `m > 0`.
pub fn prior_powersum_moment_real(model: &OracleModel, m: f64, xi: usize) -> Result<f64> {
    check_xi(xi)?;
    if m * xi as f64 > 30.0 {
        return Err(Error::SizeGuard(format!("m * xi must be <= 30, got {}", m * xi as f64)));
    }
    Ok(new_species_terms(model, &[], xi, m))
}

/// Prior `E[(S_m)^ξ]`, enumerating compositions of `ξ`.
pub fn prior_powersum_moment(model: &OracleModel, m: usize, xi: usize) -> Result<f64> {
    prior_powersum_moment_real(model, m as f64, xi)
}

/// Posterior `E[(S_m)^ξ | data]` for real `m > 0`: the `ξ` factors of
/// `S^ξ` are split between old species (weak compositions over the `k`
/// observed species) and new species (compositions into new blocks).
pub fn posterior_powersum_moment_real(model: &OracleModel, data: &Multiplicities, m: f64, xi: usize) -> Result<f64> {
    check_xi(xi)?;
    if m * xi as f64 > 20.0 || data.k() > 20 {
        return Err(Error::SizeGuard("posterior oracle needs m * xi <= 20 and k <= 20".into()));
    }
    let base: Vec<f64> = data.counts().iter().map(|&c| c as f64).collect();
    let norm = if base.is_empty() { 1.0 } else { model.eppf(&base) };
    if !(norm > 0.0) {
        return Err(Error::InvalidData("data has zero probability under the model".into()));
    }
    let mut acc = 0.0;
    for q in 0..=xi {
        let choose = factorial(xi) / (factorial(q) * factorial(xi - q));
        for e in weak_compositions(q, data.k()) {
            let coef = choose * e.multinomial();
            let old: Vec<f64> = base.iter().zip(&e.parts).map(|(&n, &ej)| n + m * ej as f64).collect();
            acc += coef * new_species_terms(model, &old, xi - q, m);
        }
    }
    Ok(acc / norm)
}

/// Posterior `E[(S_m)^ξ | data]` for integer `m`.
pub fn posterior_powersum_moment(model: &OracleModel, data: &Multiplicities, m: usize, xi: usize) -> Result<f64> {
    posterior_powersum_moment_real(model, data, m as f64, xi)
}

/// Shannon mean and second moment as the `m → 1` limit of the real-`m`
/// oracle: `E[H_m]` and `E[H_m²]` at `m = 1+ε` for two values of `ε`,
/// combined by Richardson extrapolation to remove the `O(ε)` term.
pub fn shannon_limit_richardson(model: &OracleModel, data: &Multiplicities, eps: (f64, f64)) -> Result<(f64, f64)> {
    let at = |e: f64| -> Result<(f64, f64)> {
        let m = 1.0 + e;
        let s1 = posterior_powersum_moment_real(model, data, m, 1)?;
        let s2 = posterior_powersum_moment_real(model, data, m, 2)?;
        Ok(((1.0 - s1) / e, (1.0 - 2.0 * s1 + s2) / (e * e)))
    };
    let (e1, e2) = eps;
    let (m1, q1) = at(e1)?;
    let (m2, q2) = at(e2)?;
    let extrapolate = |f1: f64, f2: f64| (e1 * f2 - e2 * f1) / (e1 - e2);
    Ok((extrapolate(m1, m2), extrapolate(q1, q2)))
}

/// Trigamma by direct summation of `Σ 1/(x+j)²` plus an Euler–Maclaurin tail.
fn trigamma_series(x: f64) -> f64 {
    const TERMS: usize = 40;
    let mut acc = 0.0;
    for j in 0..TERMS {
        let z = x + j as f64;
        acc += 1.0 / (z * z);
    }
    let z = x + TERMS as f64;
    let z2 = z * z;
    acc + 1.0 / z + 1.0 / (2.0 * z2) + 1.0 / (6.0 * z2 * z) - 1.0 / (30.0 * z2 * z2 * z)
        + 1.0 / (42.0 * z2 * z2 * z2 * z)
}

/// Quantities available from [`closed_form_reference`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    PriorMeanHm,
    PriorVarHm,
    PriorMeanShannon,
    PriorVarShannon,
    PosteriorMeanHm,
    PosteriorVarHm,
    PosteriorMeanShannon,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [
        Quantity::PriorMeanHm,
        Quantity::PriorVarHm,
        Quantity::PriorMeanShannon,
        Quantity::PriorVarShannon,
        Quantity::PosteriorMeanHm,
        Quantity::PosteriorVarHm,
        Quantity::PosteriorMeanShannon,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Quantity::PriorMeanHm => "prior_mean_hm",
            Quantity::PriorVarHm => "prior_var_hm",
            Quantity::PriorMeanShannon => "prior_mean_shannon",
            Quantity::PriorVarShannon => "prior_var_shannon",
            Quantity::PosteriorMeanHm => "posterior_mean_hm",
            Quantity::PosteriorVarHm => "posterior_var_hm",
            Quantity::PosteriorMeanShannon => "posterior_mean_shannon",
        }
    }

    fn needs_m(&self) -> bool {
        matches!(
            self,
            Quantity::PriorMeanHm | Quantity::PriorVarHm | Quantity::PosteriorMeanHm | Quantity::PosteriorVarHm
        )
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL.iter().copied().find(|q| q.id() == s).ok_or_else(|| Error::UnknownQuantity(s.to_string()))
    }
}

/// Family-specific closed forms, written out independently of the generic
/// Gibbs machinery. `m` is required for the `H_m` quantities; `data` may be
/// empty for prior quantities and is ignored there.
pub fn closed_form_reference(
    model: &OracleModel,
    quantity: &str,
    m: Option<usize>,
    data: &Multiplicities,
) -> Result<f64> {
    let q: Quantity = quantity.parse()?;
    let m = if q.needs_m() {
        let m = m.ok_or_else(|| Error::domain(format!("`{quantity}` needs an index order m")))?;
        if m < 2 {
            return Err(Error::domain("closed forms for H_m need m >= 2"));
        }
        m as f64
    } else {
        1.0
    };
    let c = 1.0 / (m - 1.0);
    let n = data.n() as f64;
    let k = data.k() as f64;
    let unsupported = || Error::UnknownQuantity(format!("{quantity} has no closed form for {model:?}"));
    match *model {
        OracleModel::PoissonDirichlet { alpha, theta } => {
            let b = 1.0 - alpha;
            let u1 = rising(b, m - 1.0);
            let u2 = rising(b, 2.0 * m - 1.0);
            match q {
                Quantity::PriorMeanHm => Ok(c * (1.0 - u1 / rising(1.0 + theta, m - 1.0))),
                Quantity::PriorVarHm => {
                    let r1 = rising(1.0 + theta, m - 1.0);
                    Ok(c * c
                        * (u1 * u1 / r1 * ((theta + alpha) / rising(theta + m, m) - 1.0 / r1)
                            + u2 / rising(1.0 + theta, 2.0 * m - 1.0)))
                }
                Quantity::PriorMeanShannon => Ok(digamma(theta + 1.0) - digamma(b)),
                Quantity::PriorVarShannon => Ok((theta + alpha) / ((theta + 1.0).powi(2) * b)
                    + b / (theta + 1.0) * trigamma_series(2.0 - alpha)
                    - trigamma_series(2.0 + theta)),
                Quantity::PosteriorMeanHm => {
                    let old: f64 = data.counts().iter().map(|&x| rising(x as f64 - alpha, m)).sum();
                    let new = u1 * (theta + k * alpha);
                    Ok(c * (1.0 - (old + new) / rising(theta + n, m)))
                }
                Quantity::PosteriorVarHm => {
                    let t1: Vec<f64> = data.counts().iter().map(|&x| rising(x as f64 - alpha, m)).collect();
                    let t2: f64 = data.counts().iter().map(|&x| rising(x as f64 - alpha, 2.0 * m)).sum();
                    let p1: f64 = t1.iter().sum();
                    let mut unordered_pairs = 0.0;
                    for i in 0..t1.len() {
                        for j in i + 1..t1.len() {
                            unordered_pairs += t1[i] * t1[j];
                        }
                    }
                    let tk = theta + k * alpha;
                    let d2 = rising(theta + n, 2.0 * m);
                    let second = t2 / d2
                        + 2.0 * unordered_pairs / d2
                        + tk / d2 * ((tk + alpha) * u1 * u1 + u2)
                        + 2.0 * p1 * tk * u1 / d2;
                    let first = (p1 + u1 * tk) / rising(theta + n, m);
                    Ok(c * c * (second - first * first))
                }
                Quantity::PosteriorMeanShannon => {
                    let old: f64 =
                        data.counts().iter().map(|&x| (x as f64 - alpha) * digamma(x as f64 - alpha + 1.0)).sum();
                    Ok(digamma(theta + n + 1.0) - ((theta + k * alpha) * digamma(b) + old) / (theta + n))
                }
            }
        }
        OracleModel::GnedinFisher { psi, gamma } => {
            let two_m = rising(2.0, m - 1.0);
            match q {
                Quantity::PriorMeanHm => Ok(c
                    * (1.0
                        - rising(gamma, m - 1.0) * two_m
                            / (rising(1.0 + psi, m - 1.0) * rising(1.0 + gamma - psi, m - 1.0)))),
                Quantity::PriorVarHm => {
                    let den2 = rising(1.0 + psi, 2.0 * m - 1.0) * rising(1.0 + gamma - psi, 2.0 * m - 1.0);
                    let num2 = rising(gamma, 2.0 * m - 1.0) * rising(2.0, 2.0 * m - 1.0)
                        + rising(gamma, 2.0 * m - 2.0) * (1.0 - gamma + psi) * (1.0 - psi) * two_m * two_m;
                    let mean_s = rising(gamma, m - 1.0) * two_m
                        / (rising(1.0 + psi, m - 1.0) * rising(1.0 + gamma - psi, m - 1.0));
                    Ok(c * c * (num2 / den2 - mean_s * mean_s))
                }
                Quantity::PriorMeanShannon => {
                    Ok(-digamma(2.0) + digamma(1.0 + gamma - psi) - digamma(gamma) + digamma(1.0 + psi))
                }
                Quantity::PosteriorMeanHm => {
                    let den = rising(psi + n, m) * rising(gamma - psi + n, m);
                    let old: f64 = data.counts().iter().map(|&x| rising(x as f64 + 1.0, m)).sum();
                    let new = rising(gamma + n - k, m - 1.0) * (k - psi) * (k - gamma + psi) * two_m;
                    Ok(c * (1.0 - (rising(gamma + n - k, m) * old + new) / den))
                }
                Quantity::PosteriorMeanShannon => {
                    let den = (psi + n) * (gamma - psi + n);
                    let old: f64 = data.counts().iter().map(|&x| (x as f64 + 1.0) * digamma(x as f64 + 2.0)).sum();
                    Ok(digamma(gamma - psi + n + 1.0) + digamma(psi + n + 1.0)
                        - digamma(gamma + n - k)
                        - (gamma + n - k) * old / den
                        - (n + k) / den
                        - digamma(2.0) * (k - psi) * (k - gamma + psi) / den)
                }
                Quantity::PriorVarShannon | Quantity::PosteriorVarHm => Err(unsupported()),
            }
        }
    }
}
