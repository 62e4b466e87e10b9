//! Monte Carlo draws of random relative abundances `P` from the prior and
//! posterior laws, evaluation of `H_m` on each draw, and HPD intervals.
//!
//! Poisson–Dirichlet draws use stick breaking. Gnedin–Fisher draws first
//! pick the number of species `ξ` from its mixing law and then draw uniform
//! Dirichlet weights. That law has a power-law tail, so `ξ` is tabulated up
//! to a cutoff and drawn from the matching Pareto tail beyond it. Very large
//! uniform blocks are represented by their total mass and a standardized
//! fluctuation (see [`UniformBulk`]) instead of explicit coordinates.
//!
//! Streams are `ChaCha8` seeded from a `u64`, with one stream per fixed-size
//! chunk of draws, so results do not depend on the number of worker threads.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gibbs::{GibbsModel, Multiplicities};
use crate::models::{AnyModel, GnedinFisher, PoissonDirichlet};
use crate::moments::DiversityIndex;
use crate::special::{digamma, ln_gamma, log_rising};

/// Block of `dim` exchangeable coordinates with joint law `mass · Dir(1, …, 1)`.
///
/// Only the block mass and one standard normal `z` are kept. The entropy and
/// power sums of a high-dimensional uniform Dirichlet vector are close to
/// normal, and a common `z` makes them move together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformBulk {
    pub dim: f64,
    pub mass: f64,
    pub z: f64,
}

impl UniformBulk {
    /// Shannon entropy of the normalized block.
    fn entropy(&self) -> f64 {
        let d = self.dim;
        let mean = digamma(d + 1.0).expect("positive dimension") - digamma(2.0).expect("positive");
        let sd = ((std::f64::consts::PI.powi(2) / 3.0 - 3.0) / d).sqrt();
        mean + self.z * sd
    }

    /// `Σ w_i^m` of the normalized block.
    fn power_sum(&self, m: usize) -> f64 {
        let d = self.dim;
        let ln_fact = |j: usize| (1..=j).map(|i| (i as f64).ln()).sum::<f64>();
        let mean = (ln_fact(m) - log_rising(d + 1.0, m - 1).expect("positive dimension")).exp();
        let var_coef = (ln_fact(2 * m)).exp() - (2.0 * ln_fact(m)).exp() * (1.0 + (m * m) as f64);
        let sd = (var_coef.max(0.0) * d.powi(1 - 2 * m as i32)).sqrt();
        (mean - self.z * sd).max(0.0)
    }
}

/// One realization of `P`: explicit weights, an optional uniform bulk and
/// the mass left unassigned by truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub tail_mass: f64,
    pub bulk: Option<UniformBulk>,
}

impl WeightVector {
    pub fn total_mass(&self) -> f64 {
        let explicit: f64 = self.weights.iter().sum();
        explicit + self.tail_mass + self.bulk.map_or(0.0, |b| b.mass)
    }
}

/// Value of an index on one draw with the bound on the bias caused by
/// truncated mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexValue {
    pub value: f64,
    pub tail_bias_bound: f64,
}

/// Truncated tail bias above which a Shannon value is flagged.
pub const TAIL_BIAS_FLAG: f64 = 1e-3;

/// `H_m` of a weight vector. The bound is `tail^m` for `m ≥ 2` and
/// `tail·(1 - ln tail)` for Shannon.
pub fn entropy_from_weights(w: &WeightVector, index: DiversityIndex) -> IndexValue {
    let tail = w.tail_mass;
    match index {
        DiversityIndex::Shannon => {
            let mut h: f64 = w.weights.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
            if let Some(b) = w.bulk {
                if b.mass > 0.0 {
                    h += -b.mass * b.mass.ln() + b.mass * b.entropy();
                }
            }
            let bound = if tail > 0.0 { tail * (1.0 - tail.ln()) } else { 0.0 };
            // `+ 0.0` turns the -0.0 of a single full-mass atom into 0.0
            IndexValue { value: h + 0.0, tail_bias_bound: bound }
        }
        DiversityIndex::Tsallis(m) => {
            let mut s: f64 = w.weights.iter().map(|&p| p.powi(m as i32)).sum();
            if let Some(b) = w.bulk {
                s += b.mass.powi(m as i32) * b.power_sum(m);
            }
            IndexValue { value: (1.0 - s) / (m as f64 - 1.0), tail_bias_bound: tail.powi(m as i32) }
        }
    }
}

/// Truncation policy for stick breaking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StickBreaking {
    /// Atoms always drawn.
    pub atoms: usize,
    /// More atoms are drawn until the expected remaining mass is below this...
    pub tail_tolerance: f64,
    /// ...up to this many atoms.
    pub max_atoms: usize,
}

impl Default for StickBreaking {
    fn default() -> Self {
        StickBreaking { atoms: 1000, tail_tolerance: 1e-8, max_atoms: 20_000 }
    }
}

impl StickBreaking {
    pub fn with_atoms(atoms: usize) -> Self {
        StickBreaking { atoms, max_atoms: atoms.max(1).saturating_mul(20), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.atoms == 0 || self.max_atoms < self.atoms {
            return Err(Error::param("stick breaking needs 1 <= atoms <= max_atoms"));
        }
        Ok(())
    }
}

/// Stick-breaking sampler for `PD(α, θ)` with `B_j ~ Beta(1-α, θ+jα)`,
/// drawn as `G/(G+G')` from precomputed Gamma laws.
///
/// The number of sticks is fixed up front: the smallest count at which the
/// expected leftover mass `E[scale] ∏_j E[1-B_j]` drops below the tolerance,
/// clamped to `[atoms, max_atoms]`.
#[derive(Debug, Clone)]
struct Sticks {
    head: Gamma<f64>,
    rest: Vec<Gamma<f64>>,
    /// The last stick takes all remaining mass (finitely many species).
    closes: bool,
}

impl Sticks {
    fn new(alpha: f64, theta: f64, species: Option<usize>, expected_scale: f64, trunc: &StickBreaking) -> Self {
        let head = Gamma::new(1.0 - alpha, 1.0).expect("1 - alpha > 0");
        if let Some(s) = species {
            let rest = (1..s).map(|j| Gamma::new(theta + j as f64 * alpha, 1.0).expect("positive")).collect();
            return Sticks { head, rest, closes: true };
        }
        let mut expected = expected_scale;
        let mut rest = Vec::with_capacity(trunc.atoms);
        let mut j = 1usize;
        while j <= trunc.max_atoms && (j <= trunc.atoms || expected >= trunc.tail_tolerance) {
            let b = theta + j as f64 * alpha;
            rest.push(Gamma::new(b, 1.0).expect("positive stick parameter"));
            expected *= b / (b + 1.0 - alpha);
            j += 1;
        }
        Sticks { head, rest, closes: false }
    }

    /// Appends atoms summing to `scale` minus the returned leftover.
    fn draw<R: Rng + ?Sized>(&self, scale: f64, rng: &mut R, out: &mut Vec<f64>) -> f64 {
        let mut rest = scale;
        for g in &self.rest {
            let a: f64 = self.head.sample(rng);
            let b: f64 = g.sample(rng);
            let v = a / (a + b);
            out.push(rest * v);
            rest *= 1.0 - v;
        }
        if self.closes {
            out.push(rest);
            0.0
        } else {
            rest
        }
    }
}

/// Poisson–Dirichlet prior or posterior sampler with tables built once.
#[derive(Debug, Clone)]
pub struct PdSampler {
    observed: Vec<Gamma<f64>>,
    remainder: Option<Gamma<f64>>,
    sticks: Option<Sticks>,
}

impl PdSampler {
    /// Posterior sampler; empty data gives the prior.
    ///
    /// Given data, `(W_1, …, W_k, R) ~ Dir(n_1-α, …, n_k-α, θ+kα)` for the
    /// observed species, and the remainder `R` is spread by an independent
    /// `PD(α, θ+kα)` stick-breaking vector.
    pub fn new(model: &PoissonDirichlet<f64>, data: &Multiplicities, trunc: &StickBreaking) -> Result<Self> {
        trunc.validate()?;
        let alpha = model.alpha();
        let (n, k) = (data.n(), data.k());
        let new_theta = model.theta() + k as f64 * alpha;
        let remaining_species = match model.species() {
            Some(s) if k > s => {
                return Err(Error::InvalidData(format!("{k} observed species exceed the model's {s}")));
            }
            Some(s) => Some(s - k),
            None => None,
        };
        let observed =
            data.counts().iter().map(|&c| Gamma::new(c as f64 - alpha, 1.0).expect("n_j - alpha > 0")).collect();
        let has_new = (k == 0 || new_theta > 0.0) && remaining_species != Some(0);
        let remainder = if has_new && k > 0 { Some(Gamma::new(new_theta, 1.0).expect("positive")) } else { None };
        let expected_scale = if k == 0 { 1.0 } else { new_theta / (model.theta() + n as f64) };
        let sticks = has_new.then(|| Sticks::new(alpha, new_theta, remaining_species, expected_scale, trunc));
        Ok(PdSampler { observed, remainder, sticks })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WeightVector {
        let cap = self.observed.len() + self.sticks.as_ref().map_or(0, |s| s.rest.len() + 1);
        let mut weights = Vec::with_capacity(cap);
        let mut scale = 1.0;
        if !self.observed.is_empty() {
            for g in &self.observed {
                weights.push(g.sample(rng));
            }
            let r = self.remainder.as_ref().map_or(0.0, |g| g.sample(rng));
            let total: f64 = weights.iter().sum::<f64>() + r;
            for w in &mut weights {
                *w /= total;
            }
            scale = r / total;
        }
        let tail = match &self.sticks {
            Some(s) if scale > 0.0 => s.draw(scale, rng, &mut weights),
            _ => 0.0,
        };
        WeightVector { weights, tail_mass: tail, bulk: None }
    }
}

/// Prior draw from a Poisson–Dirichlet model by stick breaking.
pub fn sample_pd_prior<R: Rng + ?Sized>(
    model: &PoissonDirichlet<f64>,
    trunc: &StickBreaking,
    rng: &mut R,
) -> Result<WeightVector> {
    Ok(PdSampler::new(model, &Multiplicities::empty(), trunc)?.sample(rng))
}

/// Posterior draw from a Poisson–Dirichlet model; see [`PdSampler::new`].
pub fn sample_pd_posterior<R: Rng + ?Sized>(
    model: &PoissonDirichlet<f64>,
    data: &Multiplicities,
    trunc: &StickBreaking,
    rng: &mut R,
) -> Result<WeightVector> {
    Ok(PdSampler::new(model, data, trunc)?.sample(rng))
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Mixing law of the number of species `ξ` for the Gnedin–Fisher model,
/// truncated to `1..=pmf.len()` with the remaining mass described by a
/// power-law tail `P(ξ > x) ≈ tail_mass · ((K + ½)/x)^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesPmf {
    /// Entry `j - offset` holds `P(ξ = j)`.
    pub pmf: Vec<f64>,
    pub offset: usize,
    pub tail_mass: f64,
    pub tail_exponent: f64,
}

impl SpeciesPmf {
    pub fn max_species(&self) -> usize {
        self.offset + self.pmf.len() - 1
    }
}

/// Default cutoff for tabulating `ξ`.
pub const DEFAULT_MAX_SPECIES: usize = 100_000;
/// Uniform blocks larger than this are kept as a [`UniformBulk`].
pub const DEFAULT_EXPLICIT_LIMIT: usize = 10_000;

/// Tabulates normalized weights `w(ξ)`, `ξ = start, start+1, …`, given as
/// successive log ratios, stopping when the Pareto tail beyond the current
/// point is negligible or at `max_species`.
fn tabulate_with_tail(
    start: usize,
    log_first: f64,
    log_ratio: impl Fn(usize) -> f64,
    exponent: f64,
    max_species: usize,
) -> Result<SpeciesPmf> {
    if max_species < start {
        return Err(Error::param(format!("max_species must be at least {start}")));
    }
    let mut logs = vec![log_first];
    let mut xi = start;
    let mut peak = log_first;
    let tail_estimate = |l: f64, xi: usize| {
        // c·x^{-1-e} matched at ξ, integrated from ξ + ½.
        let x = xi as f64;
        (l + (1.0 + exponent) * x.ln() - exponent * (x + 0.5).ln()).exp() / exponent
    };
    while xi < max_species {
        let next = logs[logs.len() - 1] + log_ratio(xi);
        xi += 1;
        logs.push(next);
        peak = peak.max(next);
        // Stop once past the mode and the remaining tail is negligible.
        if next < peak && tail_estimate(next - peak, xi) < 1e-14 {
            break;
        }
    }
    let unnorm: Vec<f64> = logs.iter().map(|&l| (l - peak).exp()).collect();
    let last = logs[logs.len() - 1] - peak;
    let tail = if xi < max_species { 0.0 } else { tail_estimate(last, xi) };
    let total: f64 = unnorm.iter().sum::<f64>() + tail;
    Ok(SpeciesPmf {
        pmf: unnorm.iter().map(|&w| w / total).collect(),
        offset: start,
        tail_mass: tail / total,
        tail_exponent: exponent,
    })
}

/// Prior law of the number of species,
/// `π(ξ) ∝ (1-ψ)_{ξ-1}(1-γ+ψ)_{ξ-1}/(ξ!(ξ-1)!)`, with `π(1) = γ` when `ψ = 0`.
pub fn gf_species_pmf(model: &GnedinFisher<f64>, max_species: usize) -> Result<SpeciesPmf> {
    let (psi, gamma) = (model.psi(), model.gamma());
    tabulate_with_tail(
        1,
        model.species_log_pmf(1),
        |x| {
            let x = x as f64;
            ((x - psi) * (x - gamma + psi) / ((x + 1.0) * x)).ln()
        },
        gamma,
        max_species,
    )
}

/// Posterior law of the number of species given data with `n` observations
/// of `k` species: `π(ξ | data) ∝ π(ξ) (ξ-1)! / ((ξ-k)! (ξ+1)_{n-1})`, `ξ ≥ k`.
pub fn gf_species_posterior(
    model: &GnedinFisher<f64>,
    data: &Multiplicities,
    max_species: usize,
) -> Result<SpeciesPmf> {
    if data.is_empty() {
        return gf_species_pmf(model, max_species);
    }
    let (n, k) = (data.n(), data.k());
    let (psi, gamma) = (model.psi(), model.gamma());
    let log_lik = |xi: usize| -> f64 {
        let x = xi as f64;
        ln_gamma(x).expect("positive")
            - ln_gamma(x - k as f64 + 1.0).expect("positive")
            - log_rising(x + 1.0, n - 1).expect("positive")
    };
    tabulate_with_tail(
        k,
        model.species_log_pmf(k) + log_lik(k),
        |x| {
            let xf = x as f64;
            let prior = ((xf - psi) * (xf - gamma + psi) / ((xf + 1.0) * xf)).ln();
            // (ξ-1)!/(ξ-k)! and (ξ+1)_{n-1} stepped from ξ to ξ+1.
            let lik = (xf / (xf + 1.0 - k as f64)).ln() + ((xf + 1.0) / (xf + n as f64)).ln();
            prior + lik
        },
        gamma + (n - k) as f64,
        max_species,
    )
}

/// Sampler for `ξ` built from a [`SpeciesPmf`].
#[derive(Debug, Clone)]
pub struct SpeciesSampler {
    cdf: Vec<f64>,
    offset: usize,
    tail_mass: f64,
    exponent: f64,
}

impl SpeciesSampler {
    pub fn new(pmf: &SpeciesPmf) -> Self {
        let mut acc = 0.0;
        let cdf = pmf
            .pmf
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        SpeciesSampler { cdf, offset: pmf.offset, tail_mass: pmf.tail_mass, exponent: pmf.tail_exponent }
    }

    /// Draws `ξ`; values beyond the table come from the Pareto tail and are
    /// returned as (possibly very large) integral `f64`s.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>();
        if u < 1.0 - self.tail_mass {
            let idx = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
            return (self.offset + idx) as f64;
        }
        let r = (1.0 - u) / self.tail_mass;
        let k0 = (self.offset + self.cdf.len() - 1) as f64;
        let x = (k0 + 0.5) * r.max(f64::MIN_POSITIVE).powf(-1.0 / self.exponent);
        x.round().max(k0 + 1.0)
    }
}

/// Unnormalized uniform Dirichlet coordinates: explicit `Exp(1)` draws, or
/// for large `dim` their `Gamma(dim)` total and a normal fluctuation.
fn uniform_block<R: Rng + ?Sized>(dim: f64, explicit_limit: usize, rng: &mut R) -> (Vec<f64>, Option<(f64, f64)>) {
    if dim <= explicit_limit as f64 {
        let v: Vec<f64> = (0..dim as usize).map(|_| Exp1.sample(rng)).collect();
        (v, None)
    } else {
        let t = gamma_draw(dim, rng);
        let z: f64 = StandardNormal.sample(rng);
        (Vec::new(), Some((t, z)))
    }
}

/// Prior draw from a Gnedin–Fisher model.
pub fn sample_gf_prior<R: Rng + ?Sized>(sampler: &SpeciesSampler, explicit_limit: usize, rng: &mut R) -> WeightVector {
    let xi = sampler.sample(rng);
    let (mut v, bulk) = uniform_block(xi, explicit_limit, rng);
    match bulk {
        None => {
            let total: f64 = v.iter().sum();
            for w in &mut v {
                *w /= total;
            }
            WeightVector { weights: v, tail_mass: 0.0, bulk: None }
        }
        Some((_, z)) => {
            WeightVector { weights: Vec::new(), tail_mass: 0.0, bulk: Some(UniformBulk { dim: xi, mass: 1.0, z }) }
        }
    }
}

/// Posterior draw from a Gnedin–Fisher model given `ξ ~ π(ξ | data)`:
/// weights `~ Dir(n_1+1, …, n_k+1, 1, …, 1)` with `ξ - k` trailing ones.
pub fn sample_gf_posterior<R: Rng + ?Sized>(
    sampler: &SpeciesSampler,
    data: &Multiplicities,
    explicit_limit: usize,
    rng: &mut R,
) -> WeightVector {
    if data.is_empty() {
        return sample_gf_prior(sampler, explicit_limit, rng);
    }
    let xi = sampler.sample(rng);
    let k = data.k();
    let mut weights: Vec<f64> = data.counts().iter().map(|&c| gamma_draw(c as f64 + 1.0, rng)).collect();
    let (extra, bulk) = uniform_block(xi - k as f64, explicit_limit, rng);
    weights.extend(extra);
    let total: f64 = weights.iter().sum::<f64>() + bulk.map_or(0.0, |(t, _)| t);
    for w in &mut weights {
        *w /= total;
    }
    let bulk = bulk.map(|(t, z)| UniformBulk { dim: xi - k as f64, mass: t / total, z });
    WeightVector { weights, tail_mass: 0.0, bulk }
}

/// Monte Carlo configuration shared by all draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub sticks: StickBreaking,
    pub max_species: usize,
    pub explicit_limit: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            sticks: StickBreaking::default(),
            max_species: DEFAULT_MAX_SPECIES,
            explicit_limit: DEFAULT_EXPLICIT_LIMIT,
        }
    }
}

/// Draws per RNG stream. Fixed so output is independent of thread count.
pub const CHUNK: usize = 1000;

/// Runs `draw` `samples` times over seeded substreams and returns the
/// results in a deterministic order.
pub fn run_chunks<T, F>(samples: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Draws of several indices from the same weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexDraws {
    pub indices: Vec<DiversityIndex>,
    /// `values[i][s]` is index `i` on draw `s`.
    pub values: Vec<Vec<f64>>,
    /// Largest per-draw truncation bias bound, per index.
    pub max_tail_bias: Vec<f64>,
    /// Draws whose Shannon bias bound exceeds [`TAIL_BIAS_FLAG`].
    pub flagged_draws: usize,
}

/// Draws `P` from the prior (empty data) or posterior of `model` and
/// evaluates every requested index on each draw.
pub fn sample_indices(
    model: &AnyModel<f64>,
    data: &Multiplicities,
    indices: &[DiversityIndex],
    cfg: &McConfig,
) -> Result<IndexDraws> {
    if cfg.samples == 0 {
        return Err(Error::param("number of samples must be positive"));
    }
    cfg.sticks.validate()?;
    if !data.is_empty() && model.log_v(data.n(), data.k()) == f64::NEG_INFINITY {
        return Err(Error::InvalidData("data have zero probability under the model".into()));
    }
    let evaluate =
        |w: &WeightVector| -> Vec<IndexValue> { indices.iter().map(|&i| entropy_from_weights(w, i)).collect() };
    let rows: Vec<Vec<IndexValue>> = match model {
        AnyModel::PoissonDirichlet(pd) => {
            let sampler = PdSampler::new(pd, data, &cfg.sticks)?;
            run_chunks(cfg.samples, cfg.seed, |rng| evaluate(&sampler.sample(rng)))
        }
        AnyModel::GnedinFisher(gf) => {
            let sampler = SpeciesSampler::new(&gf_species_posterior(gf, data, cfg.max_species)?);
            run_chunks(cfg.samples, cfg.seed, |rng| {
                evaluate(&sample_gf_posterior(&sampler, data, cfg.explicit_limit, rng))
            })
        }
    };
    let mut values = vec![Vec::with_capacity(cfg.samples); indices.len()];
    let mut max_tail_bias = vec![0.0f64; indices.len()];
    let mut flagged_draws = 0;
    for row in &rows {
        let mut flagged = false;
        for (i, v) in row.iter().enumerate() {
            values[i].push(v.value);
            max_tail_bias[i] = max_tail_bias[i].max(v.tail_bias_bound);
            if indices[i] == DiversityIndex::Shannon && v.tail_bias_bound > TAIL_BIAS_FLAG {
                flagged = true;
            }
        }
        flagged_draws += flagged as usize;
    }
    Ok(IndexDraws { indices: indices.to_vec(), values, max_tail_bias, flagged_draws })
}

/// Minimum number of samples accepted by [`hpd_interval`].
pub const MIN_HPD_SAMPLES: usize = 100;

/// Shortest interval spanning `⌈level·N⌉` consecutive order statistics.
/// Ties go to the lowest lower endpoint.
pub fn hpd_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < MIN_HPD_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_HPD_SAMPLES, got: samples.len() });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("HPD level must lie in (0, 1), got {level}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidData("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let w = ((level * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n - w {
        let width = sorted[i + w - 1] - sorted[i];
        if width < best.1 {
            best = (i, width);
        }
    }
    Ok((sorted[best.0], sorted[best.0 + w - 1]))
}

/// Mean, spread and HPD interval of a set of draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub n_samples: usize,
    pub seed: u64,
    pub mean: f64,
    /// Standard error of `mean`.
    pub mean_se: f64,
    pub variance: f64,
    /// Standard error of `variance`, `sqrt((μ₄ - σ⁴)/N)`.
    pub variance_se: f64,
    pub sd: f64,
    pub level: f64,
    pub hpd: (f64, f64),
}

pub fn summarize_samples(values: &[f64], level: f64, seed: u64) -> Result<SampleSummary> {
    let hpd = hpd_interval(values, level)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in values {
        let d = (x - mean) * (x - mean);
        m2 += d;
        m4 += d * d;
    }
    let var_pop = m2 / n;
    let variance = m2 / (n - 1.0);
    let mu4 = m4 / n;
    Ok(SampleSummary {
        n_samples: values.len(),
        seed,
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        variance_se: ((mu4 - var_pop * var_pop).max(0.0) / n).sqrt(),
        sd: variance.sqrt(),
        level,
        hpd,
    })
}

/// Histogram with `bins` equal-width bins spanning the sample range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 || values.is_empty() {
        return Err(Error::param("histogram needs at least one bin and one value"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Writes one value per line.
pub fn write_text_dump<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    for v in values {
        writeln!(out, "{v:e}")?;
    }
    Ok(())
}

/// Writes a little-endian `u64` count followed by the values as `f64`.
pub fn write_binary_dump<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    out.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary_dump<R: Read>(mut input: R) -> Result<Vec<f64>> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    let mut values = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        input.read_exact(&mut word)?;
        values.push(f64::from_le_bytes(word));
    }
    Ok(values)
}
