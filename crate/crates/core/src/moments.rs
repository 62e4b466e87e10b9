//! Analytic prior and posterior moments of the Tsallis index `H_m` and of
//! Shannon entropy `H_1` under an arbitrary Gibbs-type prior.
//!
//! Everything goes through the power sum `S_m = Σ_i P_i^m`, since
//! `H_m = (1 - S_m)/(m - 1)`. The moments of `S_m` are sums over how `ξm`
//! future draws split between observed and new species; cross-species
//! sums are taken from power sums of the per-species factors, so the cost
//! is linear in the number of observed species.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{shifted_ratio_jet, GibbsModel, Multiplicities};
use crate::jet::Jet;
use crate::scalar::{ksum, Real};
use crate::special::{digamma_unchecked, log_rising_unchecked, trigamma_unchecked};

/// Which member of the index family to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiversityIndex {
    /// `H_1 = -Σ P_i ln P_i`.
    Shannon,
    /// `H_m` for an integer `m ≥ 2`; `m = 2` is Simpson's index.
    Tsallis(usize),
}

impl DiversityIndex {
    pub fn tsallis(m: usize) -> Result<Self> {
        match m {
            0 => Err(Error::domain("index order must be positive")),
            1 => Ok(DiversityIndex::Shannon),
            m => Ok(DiversityIndex::Tsallis(m)),
        }
    }

    /// Integer order, with Shannon reported as 1.
    pub fn order(&self) -> usize {
        match *self {
            DiversityIndex::Shannon => 1,
            DiversityIndex::Tsallis(m) => m,
        }
    }

    /// Largest attainable value, `1/(m-1)`; unbounded for Shannon.
    pub fn max_value(&self) -> Option<f64> {
        match *self {
            DiversityIndex::Shannon => None,
            DiversityIndex::Tsallis(m) => Some(1.0 / (m as f64 - 1.0)),
        }
    }
}

impl fmt::Display for DiversityIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiversityIndex::Shannon => f.write_str("shannon"),
            DiversityIndex::Tsallis(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for DiversityIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("shannon") {
            return Ok(DiversityIndex::Shannon);
        }
        let m: usize =
            s.parse().map_err(|_| Error::param(format!("index must be a positive integer or `shannon`, got `{s}`")))?;
        DiversityIndex::tsallis(m)
    }
}

impl Serialize for DiversityIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DiversityIndex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `E[(S_m)^ξ]` for `ξ = 1..=order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerSumMoments<T> {
    pub m: usize,
    pub values: Vec<T>,
}

/// Raw moments of a diversity index plus derived summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSet<T> {
    pub index: DiversityIndex,
    pub order: usize,
    /// `E[H^j]` for `j = 1..=order`.
    pub raw: Vec<T>,
    pub mean: T,
    /// Present for `order ≥ 2`; tiny negative round-off is clamped to zero.
    pub variance: Option<T>,
    pub sd: Option<T>,
    /// Present for `order = 3`.
    pub skewness: Option<T>,
}

impl<T: Real> MomentSet<T> {
    /// Moments of `H_m = (1 - S)/(m - 1)` from those of `S`.
    ///
    /// Central moments are taken on `S` directly rather than by subtracting
    /// raw moments of `H`, which keeps the variance accurate when `H` is
    /// close to its maximum.
    pub fn from_power_sums(ps: &PowerSumMoments<T>) -> Result<Self> {
        let order = ps.values.len();
        if !(1..=3).contains(&order) || ps.m < 2 {
            return Err(Error::domain("power-sum moments need m >= 2 and 1..=3 moments"));
        }
        let one = T::one();
        let c = T::from_count(ps.m - 1).recip();
        let v = &ps.values;
        let s1 = v[0];
        let mut raw = vec![(one - s1) * c];
        let mut variance = None;
        let mut skewness = None;
        if order >= 2 {
            let s2 = v[1];
            raw.push((one - T::lit(2.0) * s1 + s2) * c * c);
            let var_s = clamp_variance(s2 - s1 * s1);
            variance = Some(var_s * c * c);
            if order == 3 {
                let s3 = v[2];
                let three = T::lit(3.0);
                raw.push((one - three * s1 + three * s2 - s3) * c * c * c);
                let mu3 = s3 - three * s1 * s2 + T::lit(2.0) * s1 * s1 * s1;
                // H is a decreasing affine map of S, so its skewness flips sign.
                skewness = Some(if var_s > T::zero() { -mu3 / (var_s * var_s.sqrt()) } else { T::zero() });
            }
        }
        Ok(Self::assemble(DiversityIndex::Tsallis(ps.m), raw, variance, skewness))
    }

    /// Shannon moments from `E[H]` and `E[H²]`.
    pub fn from_first_two(index: DiversityIndex, mean: T, second: T) -> Self {
        let variance = clamp_variance(second - mean * mean);
        Self::assemble(index, vec![mean, second], Some(variance), None)
    }

    fn assemble(index: DiversityIndex, raw: Vec<T>, variance: Option<T>, skewness: Option<T>) -> Self {
        MomentSet { index, order: raw.len(), mean: raw[0], sd: variance.map(|v| v.sqrt()), raw, variance, skewness }
    }
}

fn clamp_variance<T: Real>(v: T) -> T {
    if v < T::zero() {
        T::zero()
    } else {
        v
    }
}

fn check_order(order: usize) -> Result<()> {
    if (1..=3).contains(&order) {
        Ok(())
    } else {
        Err(Error::domain(format!("moment order must be 1, 2 or 3, got {order}")))
    }
}

fn check_m(m: usize) -> Result<()> {
    if m >= 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("power-sum moments need integer m >= 2, got {m}")))
    }
}

fn check_data<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, data: &Multiplicities) -> Result<()> {
    if !data.is_empty() && model.log_v(data.n(), data.k()) == T::neg_infinity() {
        return Err(Error::InvalidData(format!(
            "{} observed species have zero probability under {}",
            data.k(),
            model.label()
        )));
    }
    Ok(())
}

/// Per-species factors `(n_j - α)_{rm}` rescaled by `e^{-rL}` with `L` the
/// largest `ln (n_j - α)_m`, plus the power sums the moment formulas need.
struct OldSpecies<T> {
    shift: T,
    p1: T,
    p2: T,
    p3: T,
    sum_t2: T,
    sum_t1t2: T,
    sum_t3: T,
}

impl<T: Real> OldSpecies<T> {
    fn new(alpha: T, data: &Multiplicities, m: usize, order: usize) -> Self {
        let a: Vec<T> = data.counts().iter().map(|&c| T::from_count(c) - alpha).collect();
        let log_t1: Vec<T> = a.iter().map(|&x| log_rising_unchecked(x, m)).collect();
        let shift = log_t1.iter().copied().fold(T::neg_infinity(), T::max);
        let shift = if shift.is_finite() { shift } else { T::zero() };
        let t1: Vec<T> = log_t1.iter().map(|&l| (l - shift).exp()).collect();
        let t2: Vec<T> = if order >= 2 {
            let two = T::lit(2.0);
            a.iter().map(|&x| (log_rising_unchecked(x, 2 * m) - two * shift).exp()).collect()
        } else {
            Vec::new()
        };
        let sum_t3 = if order >= 3 {
            let three = T::lit(3.0);
            ksum(a.iter().map(|&x| (log_rising_unchecked(x, 3 * m) - three * shift).exp()))
        } else {
            T::zero()
        };
        OldSpecies {
            shift,
            p1: ksum(t1.iter().copied()),
            p2: ksum(t1.iter().map(|&x| x * x)),
            p3: ksum(t1.iter().map(|&x| x * x * x)),
            sum_t2: ksum(t2.iter().copied()),
            sum_t1t2: ksum(t1.iter().zip(&t2).map(|(&x, &y)| x * y)),
            sum_t3,
        }
    }

    fn empty() -> Self {
        let z = T::zero();
        OldSpecies { shift: z, p1: z, p2: z, p3: z, sum_t2: z, sum_t1t2: z, sum_t3: z }
    }
}

/// Shared evaluation of `E[S^ξ]`; `log_r(ξ, i)` is `ln V_{n+ξm,k+i} / V_{n,k}`.
fn power_sum_core<T: Real>(
    log_r: impl Fn(usize, usize) -> T,
    old: &OldSpecies<T>,
    alpha: T,
    m: usize,
    order: usize,
) -> Vec<T> {
    let one_minus_alpha = T::one() - alpha;
    let lu1 = log_rising_unchecked(one_minus_alpha, m - 1);
    let lu2 = log_rising_unchecked(one_minus_alpha, 2 * m - 1);
    let lu3 = log_rising_unchecked(one_minus_alpha, 3 * m - 1);
    let l = old.shift;
    // exp(ln R + ln u + d·L): a ratio weight times the `u` factors, carrying
    // the scale removed from `d` powers of the per-species factors.
    let term = |xi: usize, i: usize, lu: T, d: usize| (log_r(xi, i) + lu + T::from_count(d) * l).exp();
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let zero = T::zero();
    let OldSpecies { p1, p2, p3, sum_t2, sum_t1t2, sum_t3, .. } = *old;
    let old_pairs = sum_t2 + p1 * p1 - p2;

    let mut out = Vec::with_capacity(order);
    out.push(term(1, 0, zero, 1) * p1 + term(1, 1, lu1, 0));
    if order >= 2 {
        out.push(
            term(2, 0, zero, 2) * old_pairs
                + term(2, 1, lu2, 0)
                + two * term(2, 1, lu1, 1) * p1
                + term(2, 2, two * lu1, 0),
        );
    }
    if order >= 3 {
        let old_triples = sum_t3 + three * (p1 * sum_t2 - sum_t1t2) + (p1 * p1 * p1 - three * p1 * p2 + two * p3);
        out.push(
            term(3, 0, zero, 3) * old_triples
                + three * term(3, 1, lu1, 2) * old_pairs
                + three * term(3, 1, lu2, 1) * p1
                + three * term(3, 2, two * lu1, 1) * p1
                + term(3, 1, lu3, 0)
                + three * term(3, 2, lu1 + lu2, 0)
                + term(3, 3, three * lu1, 0),
        );
    }
    out
}

/// Prior `E[(S_m)^ξ]`, `ξ = 1..=order`.
pub fn prior_power_sum_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    m: usize,
    order: usize,
) -> Result<PowerSumMoments<T>> {
    check_m(m)?;
    check_order(order)?;
    let values =
        power_sum_core(|xi, i| model.log_v_at(T::from_count(xi * m), i), &OldSpecies::empty(), model.alpha(), m, order);
    Ok(PowerSumMoments { m, values })
}

/// Posterior `E[(S_m)^ξ | data]`, `ξ = 1..=order`. Empty data gives the prior.
pub fn posterior_power_sum_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    data: &Multiplicities,
    m: usize,
    order: usize,
) -> Result<PowerSumMoments<T>> {
    check_m(m)?;
    check_order(order)?;
    check_data(model, data)?;
    let (n, k) = (data.n(), data.k());
    let alpha = model.alpha();
    let old = if data.is_empty() { OldSpecies::empty() } else { OldSpecies::new(alpha, data, m, order) };
    let values = power_sum_core(|xi, i| model.log_v_ratio(n, k, T::from_count(xi * m), i), &old, alpha, m, order);
    Ok(PowerSumMoments { m, values })
}

/// Prior moments of `H_m`, `m ≥ 2`.
pub fn prior_hm_moments<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, m: usize, order: usize) -> Result<MomentSet<T>> {
    MomentSet::from_power_sums(&prior_power_sum_moments(model, m, order)?)
}

/// Posterior moments of `H_m`, `m ≥ 2`.
pub fn posterior_hm_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    data: &Multiplicities,
    m: usize,
    order: usize,
) -> Result<MomentSet<T>> {
    MomentSet::from_power_sums(&posterior_power_sum_moments(model, data, m, order)?)
}

/// Prior mean and second moment of Shannon entropy from the `m → 1`
/// derivative limits `V*` and `V**`.
pub fn prior_shannon_moments<T: Real, M: GibbsModel<T> + ?Sized>(model: &M) -> Result<MomentSet<T>> {
    let one = T::one();
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    let b = one - model.alpha();
    let (p0a, p1a) = (digamma_unchecked(b), trigamma_unchecked(b));
    let (p0b, p1b) = (digamma_unchecked(b + one), trigamma_unchecked(b + one));
    let v21 = model.log_v(2, 1).exp();
    let v22 = model.log_v(2, 2).exp();

    let mean = -model.v_star(1, 1) - p0a;
    let same_species =
        b * (four * p0b * model.v_star(2, 1) + four * v21 * p0b * p0b + four * v21 * p1b + model.v_dstar(2, 1));
    let two_species = four * p0a * model.v_star(2, 2) + four * v22 * p0a * p0a + two * v22 * p1a + model.v_dstar(2, 2);
    let first_curvature = two * p0a * model.v_star(1, 1) + p0a * p0a + p1a + model.v_dstar(1, 1);
    let second = (same_species + two_species) / two - first_curvature;
    Ok(MomentSet::from_first_two(DiversityIndex::Shannon, mean, second))
}

/// Posterior mean of Shannon entropy.
pub fn posterior_shannon_mean<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, data: &Multiplicities) -> Result<T> {
    check_data(model, data)?;
    let (n, k) = (data.n(), data.k());
    let alpha = model.alpha();
    let one = T::one();
    let x = T::from_count(n + 1);
    // V*(n,1,s)/V_{n,k} = (V_{n+1,s}/V_{n,k}) · ∂ ln V(x, s) at x = n+1.
    let r_old = model.log_v_ratio(n, k, one, 0).exp();
    let g_old = model.dlog_v(x, k);
    let old = ksum(data.counts().iter().map(|&c| {
        let a = T::from_count(c) - alpha;
        a * r_old * (g_old + digamma_unchecked(a + one))
    }));
    let r_new = model.log_v_ratio(n, k, one, 1).exp();
    let new = r_new * (model.dlog_v(x, k + 1) + digamma_unchecked(one - alpha));
    Ok(-(old + new))
}

/// Jet at `m = 1` of `(x)_{rm+b}`.
fn rising_jet<T: Real>(x: T, r: usize, b: isize) -> Jet<T> {
    let len = (r as isize + b) as usize;
    let end = x + T::from_count(len);
    let rr = T::from_count(r);
    Jet::from_log_derivs(
        log_rising_unchecked(x, len).exp(),
        rr * digamma_unchecked(end),
        rr * rr * trigamma_unchecked(end),
    )
}

/// Posterior second moment of Shannon entropy.
///
/// With `S(m) = Σ P_i^m`, `S(1) = 1` and `S'(1) = -H_1`, so
/// `H_1² = ½ (S²)''(1) - S''(1)`. Both `E[S_m]` and `E[S_m²]` are analytic in
/// `m`, and their second derivatives at `m = 1` are accumulated with jets.
pub fn posterior_shannon_second<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, data: &Multiplicities) -> Result<T> {
    check_data(model, data)?;
    let (n, k) = (data.n(), data.k());
    let b = T::one() - model.alpha();
    let alpha = model.alpha();

    let mut a1 = Jet::zero();
    let mut a1_sq = Jet::zero();
    let mut a2 = Jet::zero();
    for &c in data.counts() {
        let a = T::from_count(c) - alpha;
        let t1 = rising_jet(a, 1, 0);
        a1 = a1 + t1;
        a1_sq = a1_sq + t1 * t1;
        a2 = a2 + rising_jet(a, 2, 0);
    }
    let u1 = rising_jet(b, 1, -1);
    let u2 = rising_jet(b, 2, -1);
    let two = Jet::constant(T::lit(2.0));

    let e_s = shifted_ratio_jet(model, n, k, 1, 0) * a1 + shifted_ratio_jet(model, n, k, 1, 1) * u1;
    let c0 = a2 + a1 * a1 - a1_sq;
    let c1 = u2 + two * u1 * a1;
    let c2 = u1 * u1;
    let e_s2 = shifted_ratio_jet(model, n, k, 2, 0) * c0
        + shifted_ratio_jet(model, n, k, 2, 1) * c1
        + shifted_ratio_jet(model, n, k, 2, 2) * c2;
    Ok(e_s2.dd / T::lit(2.0) - e_s.dd)
}

/// Posterior mean and second moment of Shannon entropy.
pub fn posterior_shannon_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    data: &Multiplicities,
) -> Result<MomentSet<T>> {
    let mean = posterior_shannon_mean(model, data)?;
    let second = posterior_shannon_second(model, data)?;
    Ok(MomentSet::from_first_two(DiversityIndex::Shannon, mean, second))
}

/// Prior moments of any index. Shannon supports `order ≤ 2`.
pub fn prior_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    index: DiversityIndex,
    order: usize,
) -> Result<MomentSet<T>> {
    match index {
        DiversityIndex::Tsallis(m) => prior_hm_moments(model, m, order),
        DiversityIndex::Shannon => {
            shannon_order(order)?;
            prior_shannon_moments(model)
        }
    }
}

/// Posterior moments of any index. Shannon supports `order ≤ 2`.
pub fn posterior_moments<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    data: &Multiplicities,
    index: DiversityIndex,
    order: usize,
) -> Result<MomentSet<T>> {
    match index {
        DiversityIndex::Tsallis(m) => posterior_hm_moments(model, data, m, order),
        DiversityIndex::Shannon => {
            shannon_order(order)?;
            posterior_shannon_moments(model, data)
        }
    }
}

fn shannon_order(order: usize) -> Result<()> {
    if order == 0 || order > 2 {
        Err(Error::domain("Shannon moments are available up to order 2"))
    } else {
        Ok(())
    }
}

/// Reported summary of a [`MomentSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary<T> {
    pub index: DiversityIndex,
    pub standardized: bool,
    pub mean: T,
    pub sd: Option<T>,
    pub cv: Option<T>,
    pub skewness: Option<T>,
    /// `mean ± sd/√ε`, covering at least `1 - ε` of the mass.
    pub chebyshev: Option<(T, T)>,
    pub chebyshev_epsilon: T,
}

/// Default Chebyshev tail level.
pub const DEFAULT_CHEBYSHEV_EPSILON: f64 = 0.05;

/// Summarize moments, optionally dividing by the maximum `1/(m-1)`.
///
/// The coefficient of variation is scale free and is the same either way.
pub fn summarize<T: Real>(ms: &MomentSet<T>, standardize: bool, epsilon: T) -> Result<Summary<T>> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::domain(format!("Chebyshev level must lie in (0, 1), got {epsilon}")));
    }
    let scale = match (standardize, ms.index) {
        (false, _) => T::one(),
        (true, DiversityIndex::Tsallis(m)) => T::from_count(m - 1),
        (true, DiversityIndex::Shannon) => {
            return Err(Error::domain("Shannon entropy has no finite maximum to standardize by"))
        }
    };
    let mean = ms.mean * scale;
    let sd = ms.sd.map(|s| s * scale);
    let cv = match sd {
        None => None,
        Some(s) if s == T::zero() => Some(T::zero()),
        Some(_) if mean == T::zero() => {
            return Err(Error::Undefined("coefficient of variation at zero mean".into()));
        }
        Some(s) => Some(s / mean),
    };
    let chebyshev = sd.map(|s| {
        let half = s / epsilon.sqrt();
        (mean - half, mean + half)
    });
    Ok(Summary {
        index: ms.index,
        standardized: standardize,
        mean,
        sd,
        cv,
        skewness: ms.skewness,
        chebyshev,
        chebyshev_epsilon: epsilon,
    })
}
