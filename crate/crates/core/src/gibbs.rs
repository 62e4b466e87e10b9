//! The Gibbs-type (Gnedin–Pitman) model interface and partition-level
//! computations that only need the weights `V_{n,k}` and the discount `α`.
//!
//! The EPPF of a Gibbs-type random partition of `[n]` with block sizes
//! `n_1, …, n_k` is `V_{n,k} ∏_j (1-α)_{n_j-1}`, with weights obeying the
//! backward recursion `V_{n,k} = (n - kα) V_{n+1,k} + V_{n+1,k+1}`.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{ksum, Real};
use crate::special::log_rising;

/// Abstract Gibbs-type prior.
///
/// Models supply `ln V` as an analytic function of a real first argument so
/// that the `m → 1` derivative limits of `V_{n+ξm, s}` are available in closed
/// form. A zero weight is reported as `-∞`.
pub trait GibbsModel<T: Real>: Debug + Send + Sync {
    /// Discount parameter, always `< 1`.
    fn alpha(&self) -> T;

    /// `ln V(x, k)` for real `x`. `(0, 0)` is the empty partition and has weight one.
    fn log_v_at(&self, x: T, k: usize) -> T;

    /// `∂/∂x ln V(x, k)`.
    fn dlog_v(&self, x: T, k: usize) -> T;

    /// `∂²/∂x² ln V(x, k)`.
    fn d2log_v(&self, x: T, k: usize) -> T;

    fn label(&self) -> String;

    /// `ln V_{n,k}`.
    fn log_v(&self, n: usize, k: usize) -> T {
        self.log_v_at(T::from_count(n), k)
    }

    /// `ln (V_{n+dn, k+dk} / V_{n,k})` for a real shift `dn`.
    ///
    /// The default differences `log_v_at`; models override it with the
    /// short products the ratio reduces to.
    fn log_v_ratio(&self, n: usize, k: usize, dn: T, dk: usize) -> T {
        let x = T::from_count(n);
        self.log_v_at(x + dn, k + dk) - self.log_v_at(x, k)
    }

    /// `lim_{m→1} ∂/∂m V_{n+ξm, s}`.
    fn v_star_shifted(&self, n: usize, xi: usize, s: usize) -> T {
        let x = T::from_count(n + xi);
        let v = self.log_v_at(x, s).exp();
        if v == T::zero() {
            return T::zero();
        }
        T::from_count(xi) * v * self.dlog_v(x, s)
    }

    /// `lim_{m→1} ∂²/∂m² V_{n+ξm, s}`.
    fn v_dstar_shifted(&self, n: usize, xi: usize, s: usize) -> T {
        let x = T::from_count(n + xi);
        let v = self.log_v_at(x, s).exp();
        if v == T::zero() {
            return T::zero();
        }
        let g1 = self.dlog_v(x, s);
        let xi = T::from_count(xi);
        xi * xi * v * (g1 * g1 + self.d2log_v(x, s))
    }

    /// `V*_{r,s} = lim_{m→1} ∂/∂m V_{rm,s}`.
    fn v_star(&self, r: usize, s: usize) -> T {
        self.v_star_shifted(0, r, s)
    }

    /// `V**_{r,s} = lim_{m→1} ∂²/∂m² V_{rm,s}`.
    fn v_dstar(&self, r: usize, s: usize) -> T {
        self.v_dstar_shifted(0, r, s)
    }
}

/// Jet in `m` at `m = 1` of `V_{n+ξm, k+dk} / V_{n,k}`.
pub fn shifted_ratio_jet<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    n: usize,
    k: usize,
    xi: usize,
    dk: usize,
) -> Jet<T> {
    let value = model.log_v_ratio(n, k, T::from_count(xi), dk).exp();
    if value == T::zero() {
        return Jet::zero();
    }
    let x = T::from_count(n + xi);
    let xi = T::from_count(xi);
    Jet::from_log_derivs(value, xi * model.dlog_v(x, k + dk), xi * xi * model.d2log_v(x, k + dk))
}

/// Finite-difference estimates of `(V*, V**)` at shifted arguments, used to
/// validate the closed forms. Differences are taken on `ln V` in `m`.
pub fn finite_difference_v_stars<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    n: usize,
    xi: usize,
    s: usize,
) -> (T, T) {
    let base = T::from_count(n);
    let xi_t = T::from_count(xi);
    let g = |m: T| model.log_v_at(base + xi_t * m, s);
    let one = T::one();
    let two = T::lit(2.0);
    let h1 = T::lit(1.0e-5);
    let h2 = T::lit(1.0e-4);
    let g0 = g(one);
    let g1 = (g(one + h1) - g(one - h1)) / (two * h1);
    let g2 = (g(one + h2) - two * g0 + g(one - h2)) / (h2 * h2);
    let v = g0.exp();
    (v * g1, v * (g1 * g1 + g2))
}

/// Ordered species counts `(n_1, …, n_k)` of an observed sample.
///
/// The empty vector is the "no data" sample with `n = k = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Multiplicities {
    counts: Vec<usize>,
}

impl Multiplicities {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if let Some(pos) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidData(format!("multiplicity at position {pos} is zero")));
        }
        Ok(Multiplicities { counts })
    }

    pub fn empty() -> Self {
        Multiplicities::default()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Sample size.
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Number of distinct species.
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Counts sorted in decreasing order, the canonical form of the partition.
    pub fn sorted(&self) -> Multiplicities {
        let mut counts = self.counts.clone();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        Multiplicities { counts }
    }
}

impl TryFrom<Vec<usize>> for Multiplicities {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Multiplicities::new(v)
    }
}

fn require_nonempty(parts: &Multiplicities) -> Result<()> {
    if parts.is_empty() {
        Err(Error::InvalidData("partition must have at least one block".into()))
    } else {
        Ok(())
    }
}

/// `ln p(n_1, …, n_k) = ln V_{n,k} + Σ_j ln (1-α)_{n_j-1}`.
pub fn log_eppf<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, parts: &Multiplicities) -> Result<T> {
    require_nonempty(parts)?;
    let one_minus_alpha = T::one() - model.alpha();
    let mut acc = model.log_v(parts.n(), parts.k());
    for &c in parts.counts() {
        acc = acc + log_rising(one_minus_alpha, c - 1)?;
    }
    Ok(acc)
}

/// Exchangeable partition probability function.
pub fn eppf<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, parts: &Multiplicities) -> Result<T> {
    Ok(log_eppf(model, parts)?.exp())
}

/// One-step predictive probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictive<T> {
    /// Probability that the next observation is species `j`.
    pub old: Vec<T>,
    /// Probability that the next observation is a new species.
    pub new: T,
}

pub fn predictive_probs<T: Real, M: GibbsModel<T> + ?Sized>(
    model: &M,
    parts: &Multiplicities,
) -> Result<Predictive<T>> {
    let (n, k) = (parts.n(), parts.k());
    let alpha = model.alpha();
    let old_ratio = model.log_v_ratio(n, k, T::one(), 0).exp();
    let new = model.log_v_ratio(n, k, T::one(), 1).exp();
    let old = parts.counts().iter().map(|&c| old_ratio * (T::from_count(c) - alpha)).collect();
    Ok(Predictive { old, new })
}

/// Relative residual of the backward recursion at `(n, k)`.
pub fn recursion_residual<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, n: usize, k: usize) -> T {
    let base = model.log_v(n, k);
    if base == T::neg_infinity() {
        return T::zero();
    }
    let r_same = (model.log_v(n + 1, k) - base).exp();
    let r_new = (model.log_v(n + 1, k + 1) - base).exp();
    let weight = T::from_count(n) - T::from_count(k) * model.alpha();
    (T::one() - weight * r_same - r_new).abs()
}

/// Law of the number of blocks `K_n`; entry `k-1` holds `P(K_n = k)`.
pub fn k_n_distribution<T: Real, M: GibbsModel<T> + ?Sized>(model: &M, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::domain("K_n is defined for n >= 1"));
    }
    let alpha = model.alpha();
    let mut pmf = vec![T::zero(); n];
    pmf[0] = T::one();
    let mut next = vec![T::zero(); n];
    for i in 1..n {
        // pmf holds the law of K_i over k = 1..=i
        for k in 1..=i + 1 {
            let mut p = T::zero();
            if k <= i && pmf[k - 1] > T::zero() {
                let w = T::from_count(i) - T::from_count(k) * alpha;
                p = p + pmf[k - 1] * w * model.log_v_ratio(i, k, T::one(), 0).exp();
            }
            if k >= 2 && pmf[k - 2] > T::zero() {
                p = p + pmf[k - 2] * model.log_v_ratio(i, k - 1, T::one(), 1).exp();
            }
            next[k - 1] = p;
        }
        std::mem::swap(&mut pmf, &mut next);
    }
    Ok(pmf)
}

/// Sum of a probability vector, compensated.
pub fn total_mass<T: Real>(p: &[T]) -> T {
    ksum(p.iter().copied())
}
