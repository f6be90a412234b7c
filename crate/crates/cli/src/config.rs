//! JSON run configuration. Every section and field is optional; omitted
//! values fall back to the default simulation setup, and command-line
//! flags override the file.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use zakradar::dd::{make_config, SystemConfig};
use zakradar::experiments::{ExperimentConfig, SceneKind, SweepConfig};
use zakradar::filters::{FilterKind, FilterSpec};
use zakradar::receiver::ReceiverMode;
use zakradar::scene::FadeModel;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FileConfig {
    pub system: SystemSection,
    pub filter: FilterSection,
    pub experiment: ExperimentSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub b: Option<f64>,
    pub t: Option<f64>,
    pub tau_p: Option<f64>,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub f_c: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub kind: Option<FilterKind>,
    pub alpha_tau: Option<f64>,
    pub alpha_nu: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub scene: Option<SceneKind>,
    pub n_trials: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub mode: Option<ReceiverMode>,
    pub n_targets: Option<usize>,
    pub fade: Option<FadeModel>,
    pub n_thresholds: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub tau1: Option<f64>,
    pub sep_start_bins: Option<f64>,
    pub sep_step_bins: Option<f64>,
    pub n_separations: Option<usize>,
    pub target1_snr_db: Option<f64>,
    pub trials: Option<usize>,
    pub mode: Option<ReceiverMode>,
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let s = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&s).with_context(|| format!("invalid config {}", p.display()))
        }
    }
}

/// Validated configuration after merging file and flags.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub system: SystemConfig,
    pub filter: FilterSpec,
    pub experiment: ExperimentConfig,
    pub sweep: SweepConfig,
}

pub fn resolve(file: &FileConfig, rmse_defaults: bool) -> Result<Resolved> {
    let d = SystemConfig::default();
    let s = &file.system;
    let system = make_config(
        s.b.unwrap_or(d.b),
        s.t.unwrap_or(d.t),
        s.tau_p.unwrap_or(d.tau_p),
        s.p.unwrap_or(d.p),
        s.q.unwrap_or(d.q),
        s.f_c.unwrap_or(d.f_c),
    )
    .context("system section")?;

    let kind = file.filter.kind.unwrap_or(FilterKind::Sinc);
    let mut filter = FilterSpec::for_kind(kind);
    match kind {
        FilterKind::Sinc => {
            if file.filter.alpha_tau.is_some() || file.filter.alpha_nu.is_some() {
                anyhow::bail!("filter: the sinc filter takes no alpha parameters");
            }
        }
        FilterKind::Gaussian => {
            filter.alpha_tau = file.filter.alpha_tau.unwrap_or(filter.alpha_tau);
            filter.alpha_nu = file.filter.alpha_nu.unwrap_or(filter.alpha_nu);
        }
        FilterKind::GaussianSinc => {
            if file.filter.alpha_tau.is_some() || file.filter.alpha_nu.is_some() {
                filter = FilterSpec::gaussian_sinc_with(
                    file.filter.alpha_tau.unwrap_or(filter.alpha_tau),
                    file.filter.alpha_nu.unwrap_or(filter.alpha_nu),
                );
            }
        }
    }
    filter.validate().context("filter section")?;

    let e = &file.experiment;
    let base = if rmse_defaults { ExperimentConfig::rmse_defaults() } else { ExperimentConfig::default() };
    let experiment = ExperimentConfig {
        scene: e.scene.unwrap_or(base.scene),
        n_trials: e.n_trials.unwrap_or(base.n_trials),
        snr_db: e.snr_db.clone().unwrap_or(base.snr_db),
        seed: 0,
        filter: kind,
        mode: e.mode.unwrap_or(base.mode),
        n_targets: e.n_targets.unwrap_or(base.n_targets),
        fade: e.fade.unwrap_or(base.fade),
        n_thresholds: e.n_thresholds.unwrap_or(base.n_thresholds),
    };
    experiment.validate().context("experiment section")?;

    let w = &file.sweep;
    let sd = SweepConfig::default();
    let sweep = SweepConfig {
        tau1: w.tau1.unwrap_or(sd.tau1),
        sep_start_bins: w.sep_start_bins.unwrap_or(sd.sep_start_bins),
        sep_step_bins: w.sep_step_bins.unwrap_or(sd.sep_step_bins),
        n_separations: w.n_separations.unwrap_or(sd.n_separations),
        target1_snr_db: w.target1_snr_db.unwrap_or(sd.target1_snr_db),
        trials: w.trials.unwrap_or(sd.trials),
        seed: 0,
        mode: w.mode.unwrap_or(sd.mode),
    };
    Ok(Resolved { system, filter, experiment, sweep })
}
