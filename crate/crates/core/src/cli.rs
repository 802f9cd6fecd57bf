//! The `sirpf` command line.
//!
//! Every subcommand resolves its configuration as built-in defaults <
//! preset < `--config` JSON file < flags, writes one CSV, and writes a JSON
//! manifest next to it (`<out stem>.manifest.json`) holding the resolved
//! configuration. A manifest is itself a valid `--config` file, so
//! `sirpf <subcommand> --config run.manifest.json` replays a run.
//!
//! Exit codes: 0 on success, 1 for invalid configuration or I/O failure,
//! 2 for usage errors (unknown subcommand or flag).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{self, CampaignConfig, Preset, QGrid, DEFAULT_N_LIST, DEFAULT_Q_LIST};
use crate::filter::{run_filter, FilterConfig, Resampler, Roughening};
use crate::metrics;
use crate::models::{ModelKind, ModelParams};
use crate::report;
use crate::sampling::RandomStream;

#[derive(Debug, Parser)]
#[command(
    name = "sirpf",
    version,
    about = "SIR particle filter experiment harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one trajectory and write `k,x_true,y`.
    Simulate(Flags),
    /// Run one filter over a trajectory CSV.
    Filter(Flags),
    /// Sweep particle counts against propagation variances.
    SweepParticles(Flags),
    /// Sweep the propagation variance over a grid.
    SweepQ(Flags),
    /// Pick the grid value of the propagation variance with the lowest RMSD.
    EstimateQ(Flags),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Filter(_) => "filter",
            Command::SweepParticles(_) => "sweep-particles",
            Command::SweepQ(_) => "sweep-q",
            Command::EstimateQ(_) => "estimate-q",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::Simulate(f)
            | Command::Filter(f)
            | Command::SweepParticles(f)
            | Command::SweepQ(f)
            | Command::EstimateQ(f) => f,
        }
    }
}

#[derive(Debug, Default, Clone, clap::Args)]
#[command(allow_negative_numbers = true)]
struct Flags {
    /// Model name: ungm | linear-gaussian.
    #[arg(long)]
    model: Option<String>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Number of time steps T.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    n_particles: Option<usize>,
    /// Variance of the transition noise generating the data.
    #[arg(long)]
    q_true: Option<f64>,
    /// Observation-noise variance.
    #[arg(long)]
    r: Option<f64>,
    /// True initial state.
    #[arg(long)]
    x0: Option<f64>,
    /// Variance of the initial particle cloud.
    #[arg(long)]
    init_var: Option<f64>,
    /// Propagation variance used by the filter.
    #[arg(long)]
    q_prop: Option<f64>,
    /// Propagation-variance grid as start:stop:step.
    #[arg(long)]
    q_grid: Option<String>,
    /// Comma-separated particle counts.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Comma-separated propagation variances for sweep-particles.
    #[arg(long, value_delimiter = ',')]
    q_list: Option<Vec<f64>>,
    /// multinomial | systematic.
    #[arg(long)]
    resampler: Option<String>,
    /// none | direct | separate.
    #[arg(long)]
    roughening: Option<String>,
    /// Jitter variance for separate roughening.
    #[arg(long)]
    sigma_r: Option<f64>,
    /// Reuse one trajectory for every trial.
    #[arg(long)]
    fixed_trajectory: bool,
    /// ci (50 trials, T=500) | paper (500 trials, T=1000).
    #[arg(long)]
    preset: Option<String>,
    /// Trajectory CSV for the filter subcommand.
    #[arg(long = "in", alias = "input")]
    input: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file or manifest.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved run configuration, echoed into every manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Preset,
    pub model: ModelKind,
    pub seed: u64,
    pub trials: usize,
    pub horizon: usize,
    pub n_particles: usize,
    pub q_true: f64,
    pub r: f64,
    pub x0: f64,
    pub init_var: f64,
    pub q_prop: f64,
    pub q_grid: QGrid,
    pub n_list: Vec<usize>,
    pub q_list: Vec<f64>,
    pub resampler: Resampler,
    pub roughening: Roughening,
    pub sigma_r: f64,
    pub fixed_trajectory: bool,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
}

/// Optional overrides read from a `--config` file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<Preset>,
    model: Option<ModelKind>,
    seed: Option<u64>,
    trials: Option<usize>,
    horizon: Option<usize>,
    n_particles: Option<usize>,
    q_true: Option<f64>,
    r: Option<f64>,
    x0: Option<f64>,
    init_var: Option<f64>,
    q_prop: Option<f64>,
    q_grid: Option<QGrid>,
    n_list: Option<Vec<usize>>,
    q_list: Option<Vec<f64>>,
    resampler: Option<Resampler>,
    roughening: Option<Roughening>,
    sigma_r: Option<f64>,
    fixed_trajectory: Option<bool>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    // A manifest nests the resolved config under "config".
    let value = match value {
        serde_json::Value::Object(mut m) if m.contains_key("tool") && m.contains_key("config") => {
            m.remove("config").expect("checked")
        }
        v => v,
    };
    serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_opt<T: std::str::FromStr<Err = Error>>(s: &Option<String>) -> Result<Option<T>> {
    s.as_deref().map(str::parse).transpose()
}

fn resolve(flags: &Flags) -> Result<RunConfig> {
    let file = match &flags.config {
        Some(p) => load_config_file(p)?,
        None => ConfigFile::default(),
    };
    let preset = parse_opt::<Preset>(&flags.preset)?
        .or(file.preset)
        .unwrap_or_default();
    let defaults = ModelParams::default();
    let filter = FilterConfig::default();
    let q_grid = match &flags.q_grid {
        Some(s) => s.parse()?,
        None => file.q_grid.unwrap_or_default(),
    };

    let cfg = RunConfig {
        preset,
        model: parse_opt(&flags.model)?
            .or(file.model)
            .unwrap_or(ModelKind::Ungm),
        seed: flags
            .seed
            .or(file.seed)
            .ok_or_else(|| Error::invalid("missing required --seed"))?,
        trials: flags.trials.or(file.trials).unwrap_or(preset.trials()),
        horizon: flags.horizon.or(file.horizon).unwrap_or(preset.horizon()),
        n_particles: flags
            .n_particles
            .or(file.n_particles)
            .unwrap_or(filter.n_particles),
        q_true: flags.q_true.or(file.q_true).unwrap_or(defaults.q_true),
        r: flags.r.or(file.r).unwrap_or(defaults.r),
        x0: flags.x0.or(file.x0).unwrap_or(defaults.x0),
        init_var: flags
            .init_var
            .or(file.init_var)
            .unwrap_or(defaults.init_var),
        q_prop: flags.q_prop.or(file.q_prop).unwrap_or(filter.q_prop),
        q_grid,
        n_list: flags
            .n_list
            .clone()
            .or(file.n_list)
            .unwrap_or_else(|| DEFAULT_N_LIST.to_vec()),
        q_list: flags
            .q_list
            .clone()
            .or(file.q_list)
            .unwrap_or_else(|| DEFAULT_Q_LIST.to_vec()),
        resampler: parse_opt(&flags.resampler)?
            .or(file.resampler)
            .unwrap_or(filter.resampler),
        roughening: parse_opt(&flags.roughening)?
            .or(file.roughening)
            .unwrap_or(filter.roughening),
        sigma_r: flags.sigma_r.or(file.sigma_r).unwrap_or(filter.sigma_r),
        fixed_trajectory: flags.fixed_trajectory || file.fixed_trajectory.unwrap_or(false),
        input: flags.input.clone().or(file.input),
        out: flags
            .out
            .clone()
            .or(file.out)
            .ok_or_else(|| Error::invalid("missing required --out"))?,
    };
    cfg.q_grid.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            q_true: self.q_true,
            r: self.r,
            x0: self.x0,
            init_var: self.init_var,
        }
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            n_particles: self.n_particles,
            q_prop: self.q_prop,
            resampler: self.resampler,
            roughening: self.roughening,
            sigma_r: self.sigma_r,
            ..FilterConfig::default()
        }
    }

    pub fn campaign(&self) -> CampaignConfig {
        CampaignConfig {
            model: self.model,
            params: self.model_params(),
            horizon: self.horizon,
            trials: self.trials,
            master_seed: self.seed,
            filter: self.filter_config(),
            fixed_trajectory: self.fixed_trajectory,
        }
    }
}

/// Provenance written next to every output CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: RunConfig,
    pub master_seed: u64,
    /// `SOURCE_DATE_EPOCH` when set, otherwise null, so reruns stay
    /// byte-identical.
    pub timestamp: Option<String>,
    pub outputs: Vec<PathBuf>,
    /// Subcommand-specific scalar results.
    pub result: serde_json::Map<String, serde_json::Value>,
}

/// `runs/sweep.csv` → `runs/sweep.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn json_f64(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn execute(command: &Command) -> Result<()> {
    let cfg = resolve(command.flags())?;
    let campaign = cfg.campaign();
    let mut result = serde_json::Map::new();

    match command {
        Command::Simulate(_) => {
            campaign.params.validate()?;
            let model = campaign.build_model();
            let mut stream = RandomStream::new(campaign.trajectory_seed(0));
            let traj =
                experiments::simulate_trajectory(&model, cfg.q_true, cfg.horizon, &mut stream)?;
            report::write_trajectory_csv(&traj, &cfg.out)?;
            println!("wrote {} steps to {}", cfg.horizon, cfg.out.display());
        }
        Command::Filter(_) => {
            let input = cfg
                .input
                .as_deref()
                .ok_or_else(|| Error::invalid("missing required --in"))?;
            let data = report::read_trajectory_csv(input)?;
            let model = campaign.build_model();
            let mut stream = RandomStream::new(campaign.filter_seed(0, 0));
            let out = run_filter(&model, &campaign.filter, &data.observations, &mut stream)?;
            report::write_filter_csv(&data, &out, &cfg.out)?;
            let rmsd = metrics::rmsd(&data.observations, &out.estimates, &model)?;
            result.insert("rmsd".into(), json_f64(rmsd));
            println!("rmsd {}", report::format_f64(rmsd));
            if let Some(xs) = &data.true_states {
                let rmse = metrics::rmse(xs, &out.estimates)?;
                result.insert("rmse".into(), json_f64(rmse));
                println!("rmse {}", report::format_f64(rmse));
            }
            result.insert("underflow_steps".into(), out.underflow_steps.into());
        }
        Command::SweepParticles(_) => {
            let rep = experiments::sweep_particles(&campaign, &cfg.n_list, &cfg.q_list)?;
            report::write_report_csv(&rep, &cfg.out)?;
            result.insert("underflow_steps".into(), rep.underflow_steps.into());
            println!("wrote {} rows to {}", rep.rows.len(), cfg.out.display());
        }
        Command::SweepQ(_) => {
            let rep = experiments::sweep_q(&campaign, &cfg.q_grid)?;
            report::write_report_csv(&rep, &cfg.out)?;
            result.insert("underflow_steps".into(), rep.underflow_steps.into());
            if let Some(q) = experiments::argmin_rmse(&rep) {
                result.insert("argmin_rmse".into(), json_f64(q));
            }
            println!("wrote {} rows to {}", rep.rows.len(), cfg.out.display());
        }
        Command::EstimateQ(_) => {
            let est = experiments::estimate_q(&campaign, &cfg.q_grid)?;
            report::write_report_csv(&est.report, &cfg.out)?;
            result.insert("q_hat".into(), json_f64(est.q_hat));
            result.insert("rmsd_trend_spearman".into(), json_f64(est.rmsd_trend));
            if let Some(q) = experiments::argmin_rmse(&est.report) {
                result.insert("argmin_rmse".into(), json_f64(q));
            }
            result.insert("underflow_steps".into(), est.report.underflow_steps.into());
            println!("q_hat {}", report::format_f64(est.q_hat));
            println!("rmsd_trend_spearman {}", report::format_f64(est.rmsd_trend));
        }
    }

    let manifest = RunManifest {
        tool: "sirpf".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: command.name().into(),
        master_seed: cfg.seed,
        timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
        outputs: vec![cfg.out.clone()],
        result,
        config: cfg.clone(),
    };
    write_manifest(&manifest, &manifest_path(&cfg.out))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
