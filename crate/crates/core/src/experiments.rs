//! Trajectory simulation, Monte Carlo campaigns and parameter sweeps.
//!
//! A campaign runs `trials` independent trials per sweep row. Trial `j`
//! simulates a trajectory from its own derived seed, filters it, and scores
//! the estimates with RMSE and RMSD. Results are reduced in (row, trial)
//! order, so reports are bit-identical for any thread count.
//!
//! Seeding: the trajectory of trial `j` depends only on `(master, j)`, so
//! every row of a sweep sees the same set of trajectories (common random
//! numbers). The filter stream of trial `j` in row `r` is keyed by
//! `(r, j)`. Appending rows therefore never changes existing rows.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{run_filter, FilterConfig, Roughening};
use crate::metrics::{rmsd, rmse};
use crate::models::{Model, ModelKind, ModelParams, StateSpaceModel};
use crate::sampling::{derive_trial_seed, RandomStream};

/// Simulated ground truth and observations for `k = 1..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub true_states: Vec<f64>,
    pub observations: Vec<f64>,
}

/// Iterates `x_k = f(x_{k-1}, k, w_k)` from the model's `x0` with
/// `w_k ~ N(0, q_true)` and observes `y_k = g(x_k, v_k)` with
/// `v_k ~ N(0, r)`. Each step draws `w_k` then `v_k`.
pub fn simulate_trajectory<M: StateSpaceModel + ?Sized>(
    model: &M,
    q_true: f64,
    horizon: usize,
    stream: &mut RandomStream,
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    if !(q_true >= 0.0) || !q_true.is_finite() {
        return Err(Error::invalid(format!("q_true must be >= 0, got {q_true}")));
    }
    let params = model.params();
    params.validate()?;
    let mut true_states = Vec::with_capacity(horizon);
    let mut observations = Vec::with_capacity(horizon);
    let mut x = params.x0;
    for k in 1..=horizon {
        let w = stream.gaussian(0.0, q_true)?;
        x = model.transition(x, k, w);
        let v = stream.gaussian(0.0, params.r)?;
        true_states.push(x);
        observations.push(model.observe(x, v));
    }
    Ok(Trajectory {
        true_states,
        observations,
    })
}

/// Inclusive grid `start, start + step, …, stop`, indexed by integer steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl QGrid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        QGrid { start, stop, step }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::invalid("grid bounds must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid(format!(
                "grid step must be > 0, got {}",
                self.step
            )));
        }
        if self.start > self.stop {
            return Err(Error::invalid(format!(
                "grid start {} exceeds stop {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

impl Default for QGrid {
    fn default() -> Self {
        QGrid::new(0.5, 4.0, 0.1)
    }
}

impl fmt::Display for QGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for QGrid {
    type Err = Error;

    /// Parses `start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!(
                "grid '{s}' must have the form start:stop:step"
            )));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("grid '{s}': '{p}' is not a number")))
        };
        let grid = QGrid::new(num(parts[0])?, num(parts[1])?, num(parts[2])?);
        grid.validate()?;
        Ok(grid)
    }
}

/// Named trial-count and horizon profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 50 trials of 500 steps.
    #[default]
    Ci,
    /// 500 trials of 1000 steps.
    Paper,
}

impl Preset {
    pub fn trials(self) -> usize {
        match self {
            Preset::Ci => 50,
            Preset::Paper => 500,
        }
    }

    pub fn horizon(self) -> usize {
        match self {
            Preset::Ci => 500,
            Preset::Paper => 1000,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Preset::Ci),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::invalid(format!(
                "unknown preset '{other}' (expected 'ci' or 'paper')"
            ))),
        }
    }
}

/// Default particle counts for the particle-count sweep.
pub const DEFAULT_N_LIST: [usize; 7] = [20, 30, 40, 50, 60, 80, 100];
/// Default propagation variances for the particle-count sweep.
pub const DEFAULT_Q_LIST: [f64; 4] = [1.0, 1.1, 1.2, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub model: ModelKind,
    /// Model noise and initial conditions; `params.q_true` generates the data.
    pub params: ModelParams,
    pub horizon: usize,
    pub trials: usize,
    pub master_seed: u64,
    /// Filter settings; sweeps override the swept field per row.
    pub filter: FilterConfig,
    /// Reuse trial 0's trajectory for every trial.
    pub fixed_trajectory: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig::with_preset(Preset::Ci)
    }
}

impl CampaignConfig {
    pub fn with_preset(preset: Preset) -> Self {
        CampaignConfig {
            model: ModelKind::Ungm,
            params: ModelParams::default(),
            horizon: preset.horizon(),
            trials: preset.trials(),
            master_seed: 0,
            filter: FilterConfig::default(),
            fixed_trajectory: false,
        }
    }

    pub fn build_model(&self) -> Model {
        self.model.build(self.params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be >= 1"));
        }
        self.params.validate()?;
        self.filter.validate()
    }

    /// Seed of trial `trial`'s simulated trajectory.
    pub fn trajectory_seed(&self, trial: usize) -> u64 {
        let index = if self.fixed_trajectory {
            0
        } else {
            trial as u64
        };
        derive_trial_seed(self.master_seed, index)
    }

    /// Seed of the filter stream for trial `trial` of sweep row `row`.
    pub fn filter_seed(&self, row: usize, trial: usize) -> u64 {
        derive_trial_seed(self.master_seed, ((row as u64 + 1) << 32) | trial as u64)
    }
}

/// Scores of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rmse: f64,
    pub rmsd: f64,
    pub mean_ess: f64,
    pub mean_unique_frac: f64,
    pub underflow_steps: usize,
}

/// Across-trial means and standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSummary {
    pub mean_rmse: f64,
    pub se_rmse: f64,
    pub mean_rmsd: f64,
    pub se_rmsd: f64,
    pub mean_ess: f64,
    pub mean_unique_frac: f64,
    pub trials: usize,
    pub underflow_steps: usize,
}

fn mean_and_se(xs: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl TrialSummary {
    /// Reduces outcomes in slice order. Panics on an empty slice.
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        assert!(!outcomes.is_empty(), "cannot summarize zero trials");
        let (mean_rmse, se_rmse) = mean_and_se(outcomes.iter().map(|o| o.rmse));
        let (mean_rmsd, se_rmsd) = mean_and_se(outcomes.iter().map(|o| o.rmsd));
        let (mean_ess, _) = mean_and_se(outcomes.iter().map(|o| o.mean_ess));
        let (mean_unique_frac, _) = mean_and_se(outcomes.iter().map(|o| o.mean_unique_frac));
        TrialSummary {
            mean_rmse,
            se_rmse,
            mean_rmsd,
            se_rmsd,
            mean_ess,
            mean_unique_frac,
            trials: outcomes.len(),
            underflow_steps: outcomes.iter().map(|o| o.underflow_steps).sum(),
        }
    }
}

/// Runs trial `trial` of sweep row `row` with filter settings `filter`.
pub fn run_trial(
    campaign: &CampaignConfig,
    filter: &FilterConfig,
    row: usize,
    trial: usize,
) -> Result<TrialOutcome> {
    let model = campaign.build_model();
    let q_true = campaign.params.q_true;
    let mut traj_stream = RandomStream::new(campaign.trajectory_seed(trial));
    let traj = simulate_trajectory(&model, q_true, campaign.horizon, &mut traj_stream)?;
    let mut filter_stream = RandomStream::new(campaign.filter_seed(row, trial));
    let out = run_filter(&model, filter, &traj.observations, &mut filter_stream)?;
    Ok(TrialOutcome {
        rmse: rmse(&traj.true_states, &out.estimates)?,
        rmsd: rmsd(&traj.observations, &out.estimates, &model)?,
        mean_ess: out.mean_ess(),
        mean_unique_frac: out.mean_unique_fraction(filter.n_particles),
        underflow_steps: out.underflow_steps,
    })
}

/// Runs the trials in `trials` for one row in parallel, returned in index
/// order.
pub fn run_trial_range(
    campaign: &CampaignConfig,
    filter: &FilterConfig,
    row: usize,
    trials: Range<usize>,
) -> Result<Vec<TrialOutcome>> {
    trials
        .into_par_iter()
        .map(|j| {
            run_trial(campaign, filter, row, j).map_err(|e| Error::Trial {
                index: j,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs `campaign.trials` trials with `campaign.filter` and aggregates them.
pub fn run_trials(campaign: &CampaignConfig) -> Result<TrialSummary> {
    campaign.validate()?;
    let outcomes = run_trial_range(campaign, &campaign.filter, 0, 0..campaign.trials)?;
    Ok(TrialSummary::from_outcomes(&outcomes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    Particles,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n_particles: usize,
    pub q_prop: f64,
    pub mean_rmse: f64,
    pub se_rmse: f64,
    pub mean_rmsd: f64,
    pub se_rmsd: f64,
    pub mean_ess: f64,
    pub mean_unique_frac: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ReportRow {
    fn from_summary(filter: &FilterConfig, summary: &TrialSummary, seed: u64) -> Self {
        ReportRow {
            n_particles: filter.n_particles,
            q_prop: filter.q_prop,
            mean_rmse: summary.mean_rmse,
            se_rmse: summary.se_rmse,
            mean_rmsd: summary.mean_rmsd,
            se_rmsd: summary.se_rmsd,
            mean_ess: summary.mean_ess,
            mean_unique_frac: summary.mean_unique_frac,
            trials: summary.trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: SweepKind,
    pub rows: Vec<ReportRow>,
    /// Underflow fallbacks across all rows and trials.
    pub underflow_steps: usize,
}

impl ExperimentReport {
    pub fn row_for_q(&self, q: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| (r.q_prop - q).abs() < 1e-9)
    }

    pub fn row_for(&self, n_particles: usize, q: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n_particles == n_particles && (r.q_prop - q).abs() < 1e-9)
    }
}

fn run_rows(
    campaign: &CampaignConfig,
    kind: SweepKind,
    filters: &[FilterConfig],
) -> Result<ExperimentReport> {
    campaign.validate()?;
    if campaign.filter.roughening == Roughening::None {
        return Err(Error::invalid(
            "sweeps vary q_prop, which roughening 'none' ignores; use 'direct' or 'separate'",
        ));
    }
    for f in filters {
        f.validate()?;
    }
    let trials = campaign.trials;
    let tasks: Vec<(usize, usize)> = (0..filters.len())
        .flat_map(|row| (0..trials).map(move |j| (row, j)))
        .collect();
    let outcomes: Vec<TrialOutcome> = tasks
        .into_par_iter()
        .map(|(row, j)| {
            run_trial(campaign, &filters[row], row, j).map_err(|e| Error::Trial {
                index: j,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut underflow_steps = 0;
    let rows = filters
        .iter()
        .zip(outcomes.chunks(trials))
        .map(|(f, chunk)| {
            let summary = TrialSummary::from_outcomes(chunk);
            underflow_steps += summary.underflow_steps;
            ReportRow::from_summary(f, &summary, campaign.master_seed)
        })
        .collect();
    Ok(ExperimentReport {
        kind,
        rows,
        underflow_steps,
    })
}

/// One row per `(N, q_prop)` pair, `N` outermost.
pub fn sweep_particles(
    campaign: &CampaignConfig,
    n_list: &[usize],
    q_list: &[f64],
) -> Result<ExperimentReport> {
    if n_list.is_empty() || q_list.is_empty() {
        return Err(Error::invalid(
            "particle and q_prop lists must be non-empty",
        ));
    }
    let filters: Vec<FilterConfig> = n_list
        .iter()
        .flat_map(|&n| {
            q_list.iter().map(move |&q| FilterConfig {
                n_particles: n,
                q_prop: q,
                ..campaign.filter
            })
        })
        .collect();
    run_rows(campaign, SweepKind::Particles, &filters)
}

/// One row per grid value of `q_prop`, particle count from `campaign.filter`.
pub fn sweep_q(campaign: &CampaignConfig, grid: &QGrid) -> Result<ExperimentReport> {
    grid.validate()?;
    let filters: Vec<FilterConfig> = grid
        .values()
        .into_iter()
        .map(|q| FilterConfig {
            q_prop: q,
            ..campaign.filter
        })
        .collect();
    run_rows(campaign, SweepKind::Q, &filters)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QEstimate {
    /// Grid value minimizing mean RMSD.
    pub q_hat: f64,
    /// Spearman rank correlation between `q_prop` and mean RMSD.
    pub rmsd_trend: f64,
    pub report: ExperimentReport,
}

/// Grid value with the smallest key, ties resolved toward the smaller `q_prop`.
pub fn argmin_q_by(report: &ExperimentReport, key: impl Fn(&ReportRow) -> f64) -> Option<f64> {
    report
        .rows
        .iter()
        .min_by(|a, b| {
            key(a)
                .total_cmp(&key(b))
                .then(a.q_prop.total_cmp(&b.q_prop))
        })
        .map(|r| r.q_prop)
}

pub fn argmin_rmsd(report: &ExperimentReport) -> Option<f64> {
    argmin_q_by(report, |r| r.mean_rmsd)
}

pub fn argmin_rmse(report: &ExperimentReport) -> Option<f64> {
    argmin_q_by(report, |r| r.mean_rmse)
}

/// Sweeps the grid and picks the `q_prop` with the lowest mean RMSD.
pub fn estimate_q(campaign: &CampaignConfig, grid: &QGrid) -> Result<QEstimate> {
    let report = sweep_q(campaign, grid)?;
    let q_hat = argmin_rmsd(&report).expect("grid has at least one value");
    let qs: Vec<f64> = report.rows.iter().map(|r| r.q_prop).collect();
    let ds: Vec<f64> = report.rows.iter().map(|r| r.mean_rmsd).collect();
    Ok(QEstimate {
        q_hat,
        rmsd_trend: spearman(&qs, &ds),
        report,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation. `NaN` when either input has no rank spread or
/// fewer than two points.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman inputs must have equal length");
    if xs.len() < 2 {
        return f64::NAN;
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}
