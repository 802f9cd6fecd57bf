//! Bootstrap sampling-importance-resampling (SIR) filter.
//!
//! One filter step at time `k`:
//!
//! 1. propagate every particle through the model transition with Gaussian
//!    noise of variance `q_prop` (inflating `q_prop` above the true
//!    transition variance is *direct roughening*);
//! 2. multiply weights by the observation likelihood of `y_k`;
//! 3. normalize;
//! 4. record the weighted-mean state estimate and diagnostics;
//! 5. resample (every step by default);
//! 6. optionally jitter the resampled particles (*separate roughening*).

mod resample;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::StateSpaceModel;
use crate::sampling::RandomStream;

pub use resample::{multinomial_resample, systematic_resample, unique_ancestor_count};

/// Particle states and their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub states: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ParticleEnsemble {
    /// Ensemble with uniform weights.
    pub fn uniform(states: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("an ensemble needs at least one particle"));
        }
        let w = 1.0 / states.len() as f64;
        let weights = vec![w; states.len()];
        Ok(ParticleEnsemble { states, weights })
    }

    pub fn new(states: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::invalid("an ensemble needs at least one particle"));
        }
        if states.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            )));
        }
        Ok(ParticleEnsemble { states, weights })
    }

    /// `N` draws from `N(mean, variance)`, uniformly weighted.
    pub fn gaussian(n: usize, mean: f64, variance: f64, stream: &mut RandomStream) -> Result<Self> {
        let states = (0..n)
            .map(|_| stream.gaussian(mean, variance))
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resampler {
    Multinomial,
    #[default]
    Systematic,
}

impl Resampler {
    pub fn name(self) -> &'static str {
        match self {
            Resampler::Multinomial => "multinomial",
            Resampler::Systematic => "systematic",
        }
    }

    /// Draws `n_out` ancestor indices. Systematic consumes one uniform;
    /// multinomial consumes `n_out`.
    pub fn resample(self, weights: &[f64], n_out: usize, stream: &mut RandomStream) -> Vec<usize> {
        match self {
            Resampler::Multinomial => multinomial_resample(weights, n_out, stream),
            Resampler::Systematic => systematic_resample(weights, n_out, stream.uniform())
                .expect("uniform draw lies in [0, 1)"),
        }
    }
}

impl fmt::Display for Resampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Resampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multinomial" => Ok(Resampler::Multinomial),
            "systematic" => Ok(Resampler::Systematic),
            other => Err(Error::invalid(format!(
                "unknown resampler '{other}' (expected 'multinomial' or 'systematic')"
            ))),
        }
    }
}

/// How artificial noise is added to fight impoverishment.
///
/// - `None`: propagate with the model's true transition variance; `q_prop`
///   and `sigma_r` are ignored.
/// - `Direct`: propagate with `q_prop`, the total (true + roughening)
///   variance.
/// - `Separate`: propagate with `q_prop`, then add `N(0, sigma_r)` jitter to
///   each particle after resampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Roughening {
    None,
    #[default]
    Direct,
    Separate,
}

impl Roughening {
    pub fn name(self) -> &'static str {
        match self {
            Roughening::None => "none",
            Roughening::Direct => "direct",
            Roughening::Separate => "separate",
        }
    }
}

impl fmt::Display for Roughening {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Roughening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Roughening::None),
            "direct" => Ok(Roughening::Direct),
            "separate" => Ok(Roughening::Separate),
            other => Err(Error::invalid(format!(
                "unknown roughening '{other}' (expected 'none', 'direct' or 'separate')"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub n_particles: usize,
    /// Propagation-noise variance.
    pub q_prop: f64,
    pub resampler: Resampler,
    pub roughening: Roughening,
    /// Jitter variance for separate roughening.
    pub sigma_r: f64,
    pub resample_every_step: bool,
    /// When `resample_every_step` is off, resample only if
    /// `ESS < ess_threshold · N`.
    pub ess_threshold: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            n_particles: 50,
            q_prop: 1.0,
            resampler: Resampler::Systematic,
            roughening: Roughening::Direct,
            sigma_r: 0.0,
            resample_every_step: true,
            ess_threshold: 0.5,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::invalid("n_particles must be >= 1"));
        }
        if !(self.q_prop >= 0.0) || !self.q_prop.is_finite() {
            return Err(Error::invalid(format!(
                "q_prop must be >= 0, got {}",
                self.q_prop
            )));
        }
        if !(self.sigma_r >= 0.0) || !self.sigma_r.is_finite() {
            return Err(Error::invalid(format!(
                "sigma_r must be >= 0, got {}",
                self.sigma_r
            )));
        }
        if !(self.ess_threshold > 0.0 && self.ess_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "ess_threshold must lie in (0, 1], got {}",
                self.ess_threshold
            )));
        }
        Ok(())
    }

    /// Variance actually used to propagate particles under `model`.
    pub fn propagation_variance<M: StateSpaceModel + ?Sized>(&self, model: &M) -> f64 {
        match self.roughening {
            Roughening::None => model.params().q_true,
            Roughening::Direct | Roughening::Separate => self.q_prop,
        }
    }
}

/// Impoverishment diagnostics for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// Effective sample size of the normalized weights, in `[1, N]`.
    pub ess: f64,
    /// Distinct ancestors chosen by resampling (`N` on steps that skip it).
    pub unique_ancestors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub estimates: Vec<f64>,
    /// Weighted ensemble mean of `g(x_i, 0)` after the weight update. Not
    /// used by RMSD, which evaluates `g` at the point estimate.
    pub ensemble_predicted_observations: Vec<f64>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Steps whose likelihood weights all underflowed to zero and were
    /// replaced by uniform weights.
    pub underflow_steps: usize,
}

impl FilterOutput {
    pub fn mean_ess(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.ess).sum::<f64>() / self.diagnostics.len() as f64
    }

    /// Mean over steps of `unique_ancestors / n_particles`.
    pub fn mean_unique_fraction(&self, n_particles: usize) -> f64 {
        let n = n_particles as f64;
        self.diagnostics
            .iter()
            .map(|d| d.unique_ancestors as f64 / n)
            .sum::<f64>()
            / self.diagnostics.len() as f64
    }
}

/// Moves every particle through the transition with independent
/// `N(0, q_prop)` noise. Weights are untouched.
pub fn propagate<M: StateSpaceModel + ?Sized>(
    ensemble: &mut ParticleEnsemble,
    model: &M,
    q_prop: f64,
    k: usize,
    stream: &mut RandomStream,
) -> Result<()> {
    if !(q_prop >= 0.0) {
        return Err(Error::invalid(format!("q_prop must be >= 0, got {q_prop}")));
    }
    let sd = q_prop.sqrt();
    for x in &mut ensemble.states {
        let w = sd * stream.standard_normal();
        *x = model.transition(*x, k, w);
    }
    Ok(())
}

/// Gaussian density of `y` given mean `mean` and variance `var`.
#[inline]
fn gaussian_density(y: f64, mean: f64, var: f64) -> f64 {
    let d = y - mean;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Multiplies each weight by `N(y; g(x_i, 0), r)`. The result is left
/// unnormalized.
pub fn weight_update<M: StateSpaceModel + ?Sized>(
    ensemble: &mut ParticleEnsemble,
    y: f64,
    model: &M,
) {
    let r = model.params().r;
    for (w, &x) in ensemble.weights.iter_mut().zip(&ensemble.states) {
        *w *= gaussian_density(y, model.observe(x, 0.0), r);
    }
}

/// Rescales `weights` to sum to one. If the total is zero the weights are
/// reset to uniform and `Ok(true)` is returned so callers can count the
/// fallback.
pub fn normalize(weights: &mut [f64]) -> Result<bool> {
    if weights.is_empty() {
        return Err(Error::invalid("cannot normalize an empty weight vector"));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::invalid(format!("weights must be >= 0, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(false)
    } else if total == 0.0 {
        let u = 1.0 / weights.len() as f64;
        weights.fill(u);
        Ok(true)
    } else {
        Err(Error::invalid("weight total is not finite"))
    }
}

/// Effective sample size `1 / Σ w²` of normalized weights.
pub fn ess(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Weighted mean `Σ w_i x_i` of a normalized ensemble.
pub fn estimate_state(ensemble: &ParticleEnsemble) -> f64 {
    ensemble
        .states
        .iter()
        .zip(&ensemble.weights)
        .map(|(x, w)| x * w)
        .sum()
}

/// `Σ w_i g(x_i, 0)` of a normalized ensemble.
pub fn ensemble_predicted_observation<M: StateSpaceModel + ?Sized>(
    ensemble: &ParticleEnsemble,
    model: &M,
) -> f64 {
    ensemble
        .states
        .iter()
        .zip(&ensemble.weights)
        .map(|(x, w)| w * model.observe(*x, 0.0))
        .sum()
}

/// Adds independent `N(0, sigma_r)` jitter to every state.
pub fn separate_roughen(states: &mut [f64], sigma_r: f64, stream: &mut RandomStream) -> Result<()> {
    if !(sigma_r >= 0.0) {
        return Err(Error::invalid(format!(
            "sigma_r must be >= 0, got {sigma_r}"
        )));
    }
    if sigma_r == 0.0 {
        return Ok(());
    }
    let sd = sigma_r.sqrt();
    for x in states {
        *x += sd * stream.standard_normal();
    }
    Ok(())
}

/// Replaces the ensemble by the particles at `indices` with uniform weights.
fn apply_resample(ensemble: &mut ParticleEnsemble, indices: &[usize], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend(indices.iter().map(|&i| ensemble.states[i]));
    std::mem::swap(&mut ensemble.states, scratch);
    let u = 1.0 / ensemble.states.len() as f64;
    ensemble.weights.fill(u);
}

/// Runs the filter over `observations` (`y_1..y_T`) and returns one estimate
/// and one diagnostics record per step.
///
/// Stream consumption per run: `N` normals for the initial cloud, then per
/// step `N` propagation normals, the resampler's uniforms, and `N` jitter
/// normals when separate roughening with `sigma_r > 0` is on.
pub fn run_filter<M: StateSpaceModel + ?Sized>(
    model: &M,
    config: &FilterConfig,
    observations: &[f64],
    stream: &mut RandomStream,
) -> Result<FilterOutput> {
    config.validate()?;
    let params = model.params();
    params.validate()?;
    if !(params.r > 0.0) {
        return Err(Error::invalid(
            "filtering requires observation variance r > 0",
        ));
    }
    if observations.is_empty() {
        return Err(Error::invalid("observation sequence is empty"));
    }

    let n = config.n_particles;
    let q = config.propagation_variance(model);
    let mut ensemble = ParticleEnsemble::gaussian(n, params.x0, params.init_var, stream)?;
    let mut scratch = Vec::with_capacity(n);

    let t = observations.len();
    let mut estimates = Vec::with_capacity(t);
    let mut predicted = Vec::with_capacity(t);
    let mut diagnostics = Vec::with_capacity(t);
    let mut underflow_steps = 0;

    for (step, &y) in observations.iter().enumerate() {
        let k = step + 1;
        propagate(&mut ensemble, model, q, k, stream)?;
        weight_update(&mut ensemble, y, model);
        if normalize(&mut ensemble.weights)? {
            underflow_steps += 1;
        }
        let step_ess = ess(&ensemble.weights);
        estimates.push(estimate_state(&ensemble));
        predicted.push(ensemble_predicted_observation(&ensemble, model));

        let resample_now = config.resample_every_step || step_ess < config.ess_threshold * n as f64;
        let unique_ancestors = if resample_now {
            let indices = config.resampler.resample(&ensemble.weights, n, stream);
            let unique = unique_ancestor_count(&indices);
            apply_resample(&mut ensemble, &indices, &mut scratch);
            if config.roughening == Roughening::Separate {
                separate_roughen(&mut ensemble.states, config.sigma_r, stream)?;
            }
            unique
        } else {
            n
        };

        diagnostics.push(StepDiagnostics {
            ess: step_ess,
            unique_ancestors,
        });
    }

    Ok(FilterOutput {
        estimates,
        ensemble_predicted_observations: predicted,
        diagnostics,
        underflow_steps,
    })
}
