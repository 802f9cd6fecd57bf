//! Accuracy measures for a filter run.
//!
//! RMSE compares estimates with the true states and is only available in
//! simulation. RMSD compares the observations with the observations
//! predicted from the estimates, `ŷ_k = g(x̂_k, 0)`, and needs no ground
//! truth. The predicted observation is taken at the point estimate, not
//! averaged over the particle cloud.

use crate::error::{Error, Result};
use crate::models::StateSpaceModel;

/// True states, observations and filter estimates for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub true_states: Vec<f64>,
    pub observations: Vec<f64>,
    pub estimates: Vec<f64>,
}

impl TrajectoryRecord {
    pub fn new(true_states: Vec<f64>, observations: Vec<f64>, estimates: Vec<f64>) -> Result<Self> {
        check_lengths(true_states.len(), observations.len())?;
        check_lengths(true_states.len(), estimates.len())?;
        Ok(TrajectoryRecord {
            true_states,
            observations,
            estimates,
        })
    }

    pub fn rmse(&self) -> f64 {
        root_mean_square(
            self.true_states
                .iter()
                .zip(&self.estimates)
                .map(|(x, e)| x - e),
        )
    }

    pub fn rmsd<M: StateSpaceModel + ?Sized>(&self, model: &M) -> f64 {
        rmsd_unchecked(&self.observations, &self.estimates, model)
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 || b == 0 {
        return Err(Error::invalid("metric inputs must be non-empty"));
    }
    if a != b {
        return Err(Error::invalid(format!("length mismatch: {a} vs {b}")));
    }
    Ok(())
}

fn root_mean_square(residuals: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = residuals.len() as f64;
    (residuals.map(|d| d * d).sum::<f64>() / n).sqrt()
}

fn rmsd_unchecked<M: StateSpaceModel + ?Sized>(
    observations: &[f64],
    estimates: &[f64],
    model: &M,
) -> f64 {
    root_mean_square(
        observations
            .iter()
            .zip(estimates)
            .map(|(y, x)| y - model.observe(*x, 0.0)),
    )
}

/// Root mean square error between true states and estimates.
pub fn rmse(true_states: &[f64], estimates: &[f64]) -> Result<f64> {
    check_lengths(true_states.len(), estimates.len())?;
    Ok(root_mean_square(
        true_states.iter().zip(estimates).map(|(x, e)| x - e),
    ))
}

/// Root mean square difference between observations and arbitrary
/// predicted observations, e.g. ensemble-averaged ones.
pub fn rms_discrepancy(observations: &[f64], predicted: &[f64]) -> Result<f64> {
    rmse(observations, predicted)
}

/// Root mean square discrepancy between observations and `g(x̂_k, 0)`.
pub fn rmsd<M: StateSpaceModel + ?Sized>(
    observations: &[f64],
    estimates: &[f64],
    model: &M,
) -> Result<f64> {
    check_lengths(observations.len(), estimates.len())?;
    Ok(rmsd_unchecked(observations, estimates, model))
}
