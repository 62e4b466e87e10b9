//! Concrete Gibbs-type priors: the two-parameter Poisson–Dirichlet family
//! (Dirichlet and normalized stable as special cases, finite symmetric
//! Dirichlet for `α < 0`) and the two-parameter Gnedin–Fisher family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::GibbsModel;
use crate::scalar::Real;
use crate::special::{digamma_unchecked, ln_gamma_unchecked, log_gen_rising, log_rising_unchecked, trigamma_unchecked};

/// `ln (a)_len = ln Γ(a+len) − ln Γ(a)` for real `len`, valid whenever
/// `a + len > 0`. Nonnegative integer lengths use the exact product.
pub(crate) fn log_rising_ext<T: Real>(a: T, len: T) -> T {
    if len >= T::zero() && len == len.floor() {
        if let Some(n) = len.to_usize() {
            return log_rising_unchecked(a, n);
        }
    }
    ln_gamma_unchecked(a + len) - ln_gamma_unchecked(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonDirichletParams<T> {
    pub alpha: T,
    pub theta: T,
}

/// Two-parameter Poisson–Dirichlet prior,
/// `V_{n,k} = (θ+α)_{k-1↑α} / (θ+1)_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonDirichlet<T> {
    alpha: T,
    theta: T,
    /// Number of species for the finite symmetric Dirichlet branch (`α < 0`).
    species: Option<usize>,
}

impl<T: Real> PoissonDirichlet<T> {
    /// Accepts `0 ≤ α < 1, θ > -α`, or `α < 0` with `θ = |α| ξ` for a
    /// positive integer `ξ`.
    pub fn new(params: PoissonDirichletParams<T>) -> Result<Self> {
        let PoissonDirichletParams { alpha, theta } = params;
        if !alpha.is_finite() || !theta.is_finite() || alpha >= T::one() {
            return Err(Error::param(format!("Poisson-Dirichlet needs alpha < 1, got alpha={alpha}")));
        }
        if alpha >= T::zero() {
            if theta <= -alpha {
                return Err(Error::param(format!(
                    "Poisson-Dirichlet needs theta > -alpha, got alpha={alpha}, theta={theta}"
                )));
            }
            return Ok(PoissonDirichlet { alpha, theta, species: None });
        }
        let ratio = theta / alpha.abs();
        let rounded = ratio.round();
        if rounded < T::one() || (ratio - rounded).abs() > T::lit(1e-9) * ratio.max(T::one()) {
            return Err(Error::param(format!(
                "for alpha < 0 theta must be |alpha| times a positive integer, got alpha={alpha}, theta={theta}"
            )));
        }
        let species = rounded.to_usize().ok_or_else(|| Error::param("species count out of range"))?;
        Ok(PoissonDirichlet { alpha, theta: alpha.abs() * rounded, species: Some(species) })
    }

    /// Dirichlet process prior, `α = 0`.
    pub fn dirichlet(theta: T) -> Result<Self> {
        Self::new(PoissonDirichletParams { alpha: T::zero(), theta })
    }

    /// Normalized stable prior, `θ = 0`.
    pub fn stable(alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::param(format!("normalized stable prior needs 0 < alpha < 1, got {alpha}")));
        }
        Self::new(PoissonDirichletParams { alpha, theta: T::zero() })
    }

    /// Finite symmetric Dirichlet on `species` categories with per-category
    /// parameter `concentration`.
    pub fn finite_dirichlet(species: usize, concentration: T) -> Result<Self> {
        if species == 0 || !(concentration > T::zero()) {
            return Err(Error::param("finite Dirichlet needs species >= 1 and concentration > 0"));
        }
        Self::new(PoissonDirichletParams { alpha: -concentration, theta: concentration * T::from_count(species) })
    }

    pub fn params(&self) -> PoissonDirichletParams<T> {
        PoissonDirichletParams { alpha: self.alpha, theta: self.theta }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn species(&self) -> Option<usize> {
        self.species
    }

    fn exceeds_species(&self, k: usize) -> bool {
        matches!(self.species, Some(s) if k > s)
    }
}

impl<T: Real> GibbsModel<T> for PoissonDirichlet<T> {
    fn alpha(&self) -> T {
        self.alpha
    }

    fn log_v_at(&self, x: T, k: usize) -> T {
        if k == 0 {
            return if x == T::zero() { T::zero() } else { T::neg_infinity() };
        }
        if self.exceeds_species(k) {
            return T::neg_infinity();
        }
        let num = log_gen_rising(self.theta + self.alpha, k - 1, self.alpha).unwrap_or_else(|_| T::neg_infinity());
        num - log_rising_ext(self.theta + T::one(), x - T::one())
    }

    fn dlog_v(&self, x: T, _k: usize) -> T {
        -digamma_unchecked(self.theta + x)
    }

    fn d2log_v(&self, x: T, _k: usize) -> T {
        -trigamma_unchecked(self.theta + x)
    }

    fn label(&self) -> String {
        match self.species {
            Some(s) => format!("finite-dirichlet(species={s}, alpha={}, theta={})", self.alpha, self.theta),
            None => format!("poisson-dirichlet(alpha={}, theta={})", self.alpha, self.theta),
        }
    }

    fn log_v_ratio(&self, n: usize, k: usize, dn: T, dk: usize) -> T {
        if n == 0 && k == 0 {
            return self.log_v_at(dn, dk);
        }
        if self.exceeds_species(k + dk) {
            return T::neg_infinity();
        }
        let base = self.theta + T::from_count(k) * self.alpha;
        let num = log_gen_rising(base, dk, self.alpha).unwrap_or_else(|_| T::neg_infinity());
        num - log_rising_ext(self.theta + T::from_count(n), dn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GnedinFisherParams<T> {
    pub psi: T,
    pub gamma: T,
}

/// Two-parameter Gnedin–Fisher prior (`α = -1`),
/// `V_{n,k} = (γ)_{n-k} (1-ψ)_{k-1} (1-γ+ψ)_{k-1} / ((1+ψ)_{n-1} (1+γ-ψ)_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GnedinFisher<T> {
    psi: T,
    gamma: T,
}

impl<T: Real> GnedinFisher<T> {
    /// Requires `0 ≤ ψ < 1` and `0 < γ < ψ + 1`.
    pub fn new(params: GnedinFisherParams<T>) -> Result<Self> {
        let GnedinFisherParams { psi, gamma } = params;
        if !(psi >= T::zero() && psi < T::one()) {
            return Err(Error::param(format!("Gnedin-Fisher needs 0 <= psi < 1, got {psi}")));
        }
        if !(gamma > T::zero() && gamma < psi + T::one()) {
            return Err(Error::param(format!("Gnedin-Fisher needs 0 < gamma < psi + 1, got psi={psi}, gamma={gamma}")));
        }
        Ok(GnedinFisher { psi, gamma })
    }

    /// One-parameter model, `ψ = 0`.
    pub fn one_parameter(gamma: T) -> Result<Self> {
        Self::new(GnedinFisherParams { psi: T::zero(), gamma })
    }

    pub fn params(&self) -> GnedinFisherParams<T> {
        GnedinFisherParams { psi: self.psi, gamma: self.gamma }
    }

    pub fn psi(&self) -> T {
        self.psi
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `ln π(ξ)` of the mixing law on the number of species, the `n → ∞`
    /// limit of `P(K_n = ξ)`:
    /// `π(ξ) = Γ(1+ψ)Γ(1+γ-ψ)/Γ(γ) · (1-ψ)_{ξ-1}(1-γ+ψ)_{ξ-1} / (ξ!(ξ-1)!)`.
    pub fn species_log_pmf(&self, xi: usize) -> T {
        if xi == 0 {
            return T::neg_infinity();
        }
        let one = T::one();
        let (psi, gamma) = (self.psi, self.gamma);
        let norm = ln_gamma_unchecked(one + psi) + ln_gamma_unchecked(one + gamma - psi) - ln_gamma_unchecked(gamma);
        norm + log_rising_unchecked(one - psi, xi - 1) + log_rising_unchecked(one - gamma + psi, xi - 1)
            - log_rising_unchecked(one, xi)
            - log_rising_unchecked(one, xi - 1)
    }

    /// `ln π(ξ)` for a real, large `ξ` through `ln Γ`.
    pub fn species_log_pmf_real(&self, xi: T) -> T {
        let one = T::one();
        let (psi, gamma) = (self.psi, self.gamma);
        ln_gamma_unchecked(one + psi) + ln_gamma_unchecked(one + gamma - psi) - ln_gamma_unchecked(gamma)
            + ln_gamma_unchecked(xi - psi)
            - ln_gamma_unchecked(one - psi)
            + ln_gamma_unchecked(xi - gamma + psi)
            - ln_gamma_unchecked(one - gamma + psi)
            - ln_gamma_unchecked(xi + one)
            - ln_gamma_unchecked(xi)
    }
}

impl<T: Real> GibbsModel<T> for GnedinFisher<T> {
    fn alpha(&self) -> T {
        -T::one()
    }

    fn log_v_at(&self, x: T, k: usize) -> T {
        if k == 0 {
            return if x == T::zero() { T::zero() } else { T::neg_infinity() };
        }
        let one = T::one();
        let kk = T::from_count(k);
        let (psi, gamma) = (self.psi, self.gamma);
        if gamma + x - kk <= T::zero() {
            return T::neg_infinity();
        }
        log_rising_ext(gamma, x - kk)
            + log_rising_unchecked(one - psi, k - 1)
            + log_rising_unchecked(one - gamma + psi, k - 1)
            - log_rising_ext(one + psi, x - one)
            - log_rising_ext(one + gamma - psi, x - one)
    }

    fn dlog_v(&self, x: T, k: usize) -> T {
        let (psi, gamma) = (self.psi, self.gamma);
        digamma_unchecked(gamma + x - T::from_count(k))
            - digamma_unchecked(psi + x)
            - digamma_unchecked(gamma - psi + x)
    }

    fn d2log_v(&self, x: T, k: usize) -> T {
        let (psi, gamma) = (self.psi, self.gamma);
        trigamma_unchecked(gamma + x - T::from_count(k))
            - trigamma_unchecked(psi + x)
            - trigamma_unchecked(gamma - psi + x)
    }

    fn label(&self) -> String {
        format!("gnedin-fisher(psi={}, gamma={})", self.psi, self.gamma)
    }

    fn log_v_ratio(&self, n: usize, k: usize, dn: T, dk: usize) -> T {
        if n == 0 && k == 0 {
            return self.log_v_at(dn, dk);
        }
        let (psi, gamma) = (self.psi, self.gamma);
        let nn = T::from_count(n);
        let kk = T::from_count(k);
        let dkk = T::from_count(dk);
        if gamma + nn - kk + dn - dkk <= T::zero() {
            return T::neg_infinity();
        }
        log_rising_ext(gamma + nn - kk, dn - dkk)
            + log_rising_unchecked(kk - psi, dk)
            + log_rising_unchecked(kk - gamma + psi, dk)
            - log_rising_ext(psi + nn, dn)
            - log_rising_ext(gamma - psi + nn, dn)
    }
}

/// Either supported family, for callers that pick the model at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel<T> {
    PoissonDirichlet(PoissonDirichlet<T>),
    GnedinFisher(GnedinFisher<T>),
}

impl<T: Real> AnyModel<T> {
    pub fn as_dyn(&self) -> &dyn GibbsModel<T> {
        match self {
            AnyModel::PoissonDirichlet(m) => m,
            AnyModel::GnedinFisher(m) => m,
        }
    }
}

impl<T: Real> GibbsModel<T> for AnyModel<T> {
    fn alpha(&self) -> T {
        self.as_dyn().alpha()
    }
    fn log_v_at(&self, x: T, k: usize) -> T {
        self.as_dyn().log_v_at(x, k)
    }
    fn dlog_v(&self, x: T, k: usize) -> T {
        self.as_dyn().dlog_v(x, k)
    }
    fn d2log_v(&self, x: T, k: usize) -> T {
        self.as_dyn().d2log_v(x, k)
    }
    fn label(&self) -> String {
        self.as_dyn().label()
    }
    fn log_v_ratio(&self, n: usize, k: usize, dn: T, dk: usize) -> T {
        self.as_dyn().log_v_ratio(n, k, dn, dk)
    }
}

impl<T> From<PoissonDirichlet<T>> for AnyModel<T> {
    fn from(m: PoissonDirichlet<T>) -> Self {
        AnyModel::PoissonDirichlet(m)
    }
}

impl<T> From<GnedinFisher<T>> for AnyModel<T> {
    fn from(m: GnedinFisher<T>) -> Self {
        AnyModel::GnedinFisher(m)
    }
}
