//! Scalar state-space models with additive Gaussian noise.
//!
//! A model is a pair of deterministic maps: the transition
//! `x_k = f(x_{k-1}, k, w_k)` and the observation `y_k = g(x_k, v_k)`. All
//! randomness enters through the noise arguments, so the filter and the
//! simulator own every random draw and the models stay immutable and
//! shareable across threads.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Noise variances and initial conditions shared by every model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Variance of the transition noise that generates the true states.
    pub q_true: f64,
    /// Variance of the observation noise.
    pub r: f64,
    /// True initial state.
    pub x0: f64,
    /// Spread of the initial particle cloud around `x0`.
    pub init_var: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            q_true: 1.0,
            r: 1.0,
            x0: 0.0,
            init_var: 2.0,
        }
    }
}

impl ModelParams {
    /// `r == 0` is accepted so noiseless observations can be simulated; the
    /// filter separately requires `r > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.q_true >= 0.0) || !self.q_true.is_finite() {
            return Err(Error::invalid(format!(
                "q_true must be >= 0, got {}",
                self.q_true
            )));
        }
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(Error::invalid(format!("r must be >= 0, got {}", self.r)));
        }
        if !(self.init_var >= 0.0) || !self.init_var.is_finite() {
            return Err(Error::invalid(format!(
                "init_var must be >= 0, got {}",
                self.init_var
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::invalid("x0 must be finite"));
        }
        Ok(())
    }
}

pub trait StateSpaceModel: Sync {
    /// State transition at time index `k >= 1` with additive noise draw `w`.
    fn transition(&self, x: f64, k: usize, w: f64) -> f64;

    /// Observation of state `x` with additive noise draw `v`.
    fn observe(&self, x: f64, v: f64) -> f64;

    fn params(&self) -> &ModelParams;
}

/// UNGM transition: `0.5x + 25x/(1+x²) + 8cos(1.2(k-1)) + w`.
#[inline]
pub fn ungm_transition(x: f64, k: usize, w: f64) -> f64 {
    let k = k as f64;
    0.5 * x + 25.0 * x / (1.0 + x * x) + 8.0 * (1.2 * (k - 1.0)).cos() + w
}

/// UNGM observation: `0.05x² + v`. Even in `x`, so the likelihood is bimodal.
#[inline]
pub fn ungm_observe(x: f64, v: f64) -> f64 {
    0.05 * x * x + v
}

/// The univariate nonlinear growth model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ungm {
    pub params: ModelParams,
}

impl Ungm {
    pub fn new(params: ModelParams) -> Self {
        Ungm { params }
    }
}

impl StateSpaceModel for Ungm {
    #[inline]
    fn transition(&self, x: f64, k: usize, w: f64) -> f64 {
        ungm_transition(x, k, w)
    }

    #[inline]
    fn observe(&self, x: f64, v: f64) -> f64 {
        ungm_observe(x, v)
    }

    fn params(&self) -> &ModelParams {
        &self.params
    }
}

/// `x_k = a·x_{k-1} + w`, `y_k = c·x_k + v`. Used as a reference model
/// because its exact posterior mean is available from the Kalman recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearGaussian {
    pub a: f64,
    pub c: f64,
    pub params: ModelParams,
}

impl Default for LinearGaussian {
    fn default() -> Self {
        LinearGaussian {
            a: 0.9,
            c: 1.0,
            params: ModelParams::default(),
        }
    }
}

impl LinearGaussian {
    pub fn new(a: f64, c: f64, params: ModelParams) -> Self {
        LinearGaussian { a, c, params }
    }
}

impl StateSpaceModel for LinearGaussian {
    #[inline]
    fn transition(&self, x: f64, _k: usize, w: f64) -> f64 {
        self.a * x + w
    }

    #[inline]
    fn observe(&self, x: f64, v: f64) -> f64 {
        self.c * x + v
    }

    fn params(&self) -> &ModelParams {
        &self.params
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ungm,
    LinearGaussian,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ungm => "ungm",
            ModelKind::LinearGaussian => "linear-gaussian",
        }
    }

    /// Builds the named model with its default structural constants.
    pub fn build(self, params: ModelParams) -> Model {
        match self {
            ModelKind::Ungm => Model::Ungm(Ungm::new(params)),
            ModelKind::LinearGaussian => Model::LinearGaussian(LinearGaussian {
                params,
                ..LinearGaussian::default()
            }),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ungm" => Ok(ModelKind::Ungm),
            "linear-gaussian" => Ok(ModelKind::LinearGaussian),
            other => Err(Error::invalid(format!(
                "unknown model '{other}' (expected 'ungm' or 'linear-gaussian')"
            ))),
        }
    }
}

/// A model selected by name at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Ungm(Ungm),
    LinearGaussian(LinearGaussian),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Ungm(_) => ModelKind::Ungm,
            Model::LinearGaussian(_) => ModelKind::LinearGaussian,
        }
    }

    pub fn params_mut(&mut self) -> &mut ModelParams {
        match self {
            Model::Ungm(m) => &mut m.params,
            Model::LinearGaussian(m) => &mut m.params,
        }
    }
}

impl StateSpaceModel for Model {
    #[inline]
    fn transition(&self, x: f64, k: usize, w: f64) -> f64 {
        match self {
            Model::Ungm(m) => m.transition(x, k, w),
            Model::LinearGaussian(m) => m.transition(x, k, w),
        }
    }

    #[inline]
    fn observe(&self, x: f64, v: f64) -> f64 {
        match self {
            Model::Ungm(m) => m.observe(x, v),
            Model::LinearGaussian(m) => m.observe(x, v),
        }
    }

    fn params(&self) -> &ModelParams {
        match self {
            Model::Ungm(m) => &m.params,
            Model::LinearGaussian(m) => &m.params,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn ungm_transition_values() {
        assert_eq!(ungm_transition(0.0, 1, 0.0), 8.0);
        assert_eq!(ungm_transition(1.0, 1, 0.0), 21.0);
        assert_eq!(ungm_transition(-1.0, 1, 0.0), -5.0);
        assert_abs_diff_eq!(ungm_transition(0.0, 2, 1.5), 4.398862, epsilon = 1e-6);
    }

    #[test]
    fn ungm_observe_values() {
        assert_abs_diff_eq!(ungm_observe(2.0, 0.0), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(ungm_observe(-2.0, 0.0), 0.2, epsilon = 1e-15);
        assert_eq!(ungm_observe(0.0, 0.3), 0.3);
    }

    #[test]
    fn linear_gaussian_values() {
        let m = LinearGaussian::default();
        assert_eq!(m.transition(1.0, 5, 0.0), 0.9);
        assert_eq!(m.observe(2.0, 0.5), 2.5);
        assert_eq!(m.transition(0.0, 1, -3.25), -3.25);
    }

    #[test]
    fn model_names_round_trip() {
        for kind in [ModelKind::Ungm, ModelKind::LinearGaussian] {
            assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("kalman".parse::<ModelKind>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams {
            q_true: -1.0,
            ..ModelParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = ModelParams {
            init_var: f64::NAN,
            ..ModelParams::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn ungm_odd_part_cancels_at_k1(x in -1e3f64..1e3) {
            let s = ungm_transition(-x, 1, 0.0) + ungm_transition(x, 1, 0.0);
            prop_assert!((s - 16.0).abs() < 1e-9);
        }

        #[test]
        fn ungm_observation_is_even(x in -1e3f64..1e3) {
            prop_assert_eq!(ungm_observe(x, 0.0), ungm_observe(-x, 0.0));
        }

        #[test]
        fn transition_noise_is_additive(
            x in -50f64..50.0, k in 1usize..2000, w1 in -10f64..10.0, w2 in -10f64..10.0
        ) {
            for model in [
                ModelKind::Ungm.build(ModelParams::default()),
                ModelKind::LinearGaussian.build(ModelParams::default()),
            ] {
                let d = model.transition(x, k, w1) - model.transition(x, k, w2);
                prop_assert!((d - (w1 - w2)).abs() < 1e-9);
            }
        }
    }
}
