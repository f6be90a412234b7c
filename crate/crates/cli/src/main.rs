//! `zakradar` command-line tool.

mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use zakradar::ambiguity::{
    amb_grid, oracle_grid, oracle_waveform, ambiguity_metrics, validate_closed_vs_oracle, ClosedForm, DDWindow,
    MetricsResolution,
};
use zakradar::experiments::{
    bench_run, crossover, rmse_run_modes, roc_run, trial_rng, two_target_sweep, SceneKind,
};
use zakradar::filters::{synthesize_waveform_with, FilterKind, FilterSpec, SynthOptions, Waveform};
use zakradar::io;
use zakradar::receiver::{cross_ambiguity_discrete, echo_on_lattice, run_receiver, AxxTable, ReceiverMode};
use zakradar::scene::{draw_noise_field, draw_scene, n0_from_snr, synth_cross_amb};

use config::{FileConfig, Resolved};
use manifest::RunManifest;

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (falls back to ZAKRADAR_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Pulse-shaping filter: sinc, gaussian (gauss) or gs.
    #[arg(long, global = true)]
    filter: Option<FilterKind>,
    /// Bandwidth B in Hz.
    #[arg(long, global = true)]
    bandwidth: Option<f64>,
    /// Frame duration T in s.
    #[arg(long, global = true)]
    duration: Option<f64>,
    /// Delay period in s.
    #[arg(long, global = true)]
    tau_p: Option<f64>,
    /// Carrier frequency in Hz.
    #[arg(long, global = true)]
    fc: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Self-ambiguity grid around the origin.
    Ambiguity {
        /// Half-width in delay bins 1/B.
        #[arg(long, default_value_t = 8.0)]
        tau_bins: f64,
        /// Half-width in Doppler bins 1/T.
        #[arg(long, default_value_t = 8.0)]
        nu_bins: f64,
        /// Samples per bin on both axes.
        #[arg(long, default_value_t = 4)]
        per_bin: usize,
        /// Evaluate with the time-domain oracle instead of the closed form.
        #[arg(long)]
        oracle: bool,
    },
    /// Main-lobe width, PSLR and ISLR.
    Metrics {
        #[arg(long, default_value_t = 1000)]
        cut_per_bin: usize,
        #[arg(long, default_value_t = 2)]
        grid_per_bin: usize,
    },
    /// Closed form against the oracle at random points.
    Validate {
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Sampled probing waveform.
    Waveform {
        /// Sample rate in Hz (default 4B).
        #[arg(long)]
        rate: Option<f64>,
        /// Sinc tail beyond the pulse train, s.
        #[arg(long, default_value_t = 0.05)]
        sinc_tail: f64,
    },
    /// Random scene as JSON.
    Scene {
        #[arg(long)]
        scene: Option<SceneKind>,
        #[arg(long, default_value_t = 4)]
        targets: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Run the receiver on a scene.
    Detect {
        /// Scene JSON; drawn at random from --scene when absent.
        #[arg(long)]
        scene_file: Option<PathBuf>,
        #[arg(long)]
        scene: Option<SceneKind>,
        #[arg(long)]
        mode: Option<ReceiverMode>,
        #[arg(long)]
        n_targets: Option<usize>,
        /// Adds correlated noise at this SNR (dB).
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        /// Required when the scene or the noise is random.
        #[arg(long)]
        seed: Option<u64>,
        /// Build the cross-ambiguity from sampled echo and probe (noiseless).
        #[arg(long)]
        time_domain: bool,
    },
    /// ROC curve.
    Roc {
        #[arg(long)]
        scene: Option<SceneKind>,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
    /// RMSE of range and velocity vs SNR.
    Rmse {
        #[arg(long)]
        scene: Option<SceneKind>,
        /// basic, iti or both.
        #[arg(long, default_value = "both")]
        mode: String,
        /// Comma-separated SNR list in dB.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        snr_db: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
    /// Two-target separation sweep.
    Sweep {
        /// Comma-separated filters (default: all).
        #[arg(long, value_delimiter = ',')]
        filters: Option<Vec<FilterKind>>,
        #[arg(long)]
        separations: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: u64,
    },
    /// Closed form vs oracle timing.
    Bench {
        #[arg(long, value_delimiter = ',')]
        filters: Option<Vec<FilterKind>>,
        #[arg(long, default_value_t = 16)]
        grid_size: usize,
    },
}

#[derive(Parser)]
#[command(name = "zakradar", version, about = "Zak-OTFS radar sensing toolkit")]
struct Top {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

fn set_threads(n: Option<usize>) -> Result<()> {
    let n = match n {
        Some(n) => Some(n),
        None => match std::env::var("ZAKRADAR_THREADS") {
            Ok(v) => Some(v.trim().parse().context("ZAKRADAR_THREADS must be a positive integer")?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn merged(common: &Common, rmse_defaults: bool) -> Result<(FileConfig, Resolved)> {
    let mut file = config::load(common.config.as_deref())?;
    let s = &mut file.system;
    s.b = common.bandwidth.or(s.b);
    s.t = common.duration.or(s.t);
    s.tau_p = common.tau_p.or(s.tau_p);
    s.f_c = common.fc.or(s.f_c);
    if let Some(k) = common.filter {
        if file.filter.kind != Some(k) {
            file.filter = config::FilterSection { kind: Some(k), ..Default::default() };
        }
    }
    let r = config::resolve(&file, rmse_defaults)?;
    Ok((file, r))
}

fn filter_list(v: &Option<Vec<FilterKind>>) -> Vec<FilterSpec> {
    v.clone().unwrap_or_else(|| FilterKind::ALL.to_vec()).into_iter().map(FilterSpec::for_kind).collect()
}

struct Run {
    name: &'static str,
    out: PathBuf,
    start: Instant,
    seed: Option<u64>,
    inputs: Vec<Vec<u8>>,
}

impl Run {
    fn finish(self, config: serde_json::Value) -> Result<()> {
        let m = RunManifest {
            command: self.name.into(),
            input_hash: manifest::input_hash(self.name, &config, self.seed, &self.inputs),
            config,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").into(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        m.write(&self.out)?;
        eprintln!("wrote {}", self.out.display());
        Ok(())
    }
}

fn out_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn main() -> Result<()> {
    let top = Top::parse();
    let common = top.common;
    set_threads(common.threads)?;
    let is_rmse = matches!(top.command, Command::Rmse { .. });
    let (_, mut rc) = merged(&common, is_rmse)?;
    let out = common.out.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();
    let cfg = rc.system;
    let spec = rc.filter;
    let mut run = Run { name: "", out: out.clone(), start, seed: None, inputs: vec![] };
    let mut extra = serde_json::Map::new();

    match &top.command {
        Command::Ambiguity { tau_bins, nu_bins, per_bin, oracle } => {
            run.name = "ambiguity";
            if *per_bin < 1 {
                bail!("--per-bin must be at least 1");
            }
            let win = DDWindow { tau_min: -tau_bins / cfg.b, tau_max: tau_bins / cfg.b, nu_min: -nu_bins / cfg.t, nu_max: nu_bins / cfg.t };
            let dtau = 1.0 / (*per_bin as f64 * cfg.b);
            let dnu = 1.0 / (*per_bin as f64 * cfg.t);
            let g = if *oracle {
                let x = oracle_waveform(&cfg, &spec)?;
                oracle_grid(&x, &win, dtau, dnu)?
            } else {
                amb_grid(&ClosedForm::new(&spec, &cfg)?, &win, dtau, dnu)?
            };
            io::write_grid_csv(&out_file(&out, "ambiguity.csv"), &g)?;
            io::write_grid_db_csv(&out_file(&out, "ambiguity_db.csv"), &g)?;
            extra.insert("tau_bins".into(), (*tau_bins).into());
            extra.insert("nu_bins".into(), (*nu_bins).into());
            extra.insert("per_bin".into(), (*per_bin).into());
            extra.insert("oracle".into(), (*oracle).into());
        }
        Command::Metrics { cut_per_bin, grid_per_bin } => {
            run.name = "metrics";
            let m = ambiguity_metrics(&cfg, &spec, MetricsResolution { cut_per_bin: *cut_per_bin, grid_per_bin: *grid_per_bin })?;
            io::write_json(&out_file(&out, "metrics.json"), &m)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
            extra.insert("cut_per_bin".into(), (*cut_per_bin).into());
            extra.insert("grid_per_bin".into(), (*grid_per_bin).into());
        }
        Command::Validate { points, tol, seed } => {
            run.name = "validate";
            run.seed = Some(*seed);
            let r = validate_closed_vs_oracle(&cfg, &spec, *points, *tol, *seed)?;
            io::write_json(&out_file(&out, "validation.json"), &r)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            extra.insert("points".into(), (*points).into());
            extra.insert("tol".into(), (*tol).into());
            if !r.pass {
                run.finish(config_json(&rc, extra)?)?;
                bail!("closed form deviates from the oracle by {:e} (tol {:e})", r.max_abs_dev, r.tol);
            }
        }
        Command::Waveform { rate, sinc_tail } => {
            run.name = "waveform";
            let opts = SynthOptions { rate: rate.unwrap_or(4.0 * cfg.b), sinc_tail_s: *sinc_tail, normalize: true };
            let x = synthesize_waveform_with(&spec, &cfg, &opts)?;
            io::write_time_csv(&out_file(&out, "waveform.csv"), &x)?;
            extra.insert("synthesis".into(), serde_json::to_value(opts)?);
        }
        Command::Scene { scene, targets, seed } => {
            run.name = "scene";
            run.seed = Some(*seed);
            let kind = scene.unwrap_or(rc.experiment.scene);
            rc.experiment.scene = kind;
            let w = kind.scene_window();
            let mut rng = trial_rng(*seed, 0);
            let tg = draw_scene(&w, *targets, w.tau_min, rc.experiment.fade, &mut rng)?;
            io::write_scene_json(&out_file(&out, "scene.json"), &tg)?;
            extra.insert("targets".into(), (*targets).into());
        }
        Command::Detect { scene_file, scene, mode, n_targets, snr_db, seed, time_domain } => {
            run.name = "detect";
            run.seed = *seed;
            let kind = scene.unwrap_or(rc.experiment.scene);
            rc.experiment.scene = kind;
            let mode = mode.unwrap_or(rc.experiment.mode);
            rc.experiment.mode = mode;
            let need_seed = || seed.context("--seed is required for a random scene or noise");
            let mut rng = trial_rng(*seed.as_ref().unwrap_or(&0), 0);
            let targets = match scene_file {
                Some(p) => {
                    let bytes = std::fs::read(p).with_context(|| format!("reading {}", p.display()))?;
                    let t = io::scene_from_json(std::str::from_utf8(&bytes)?)?;
                    run.inputs.push(bytes);
                    t
                }
                None => {
                    need_seed()?;
                    let w = kind.scene_window();
                    draw_scene(&w, rc.experiment.n_targets, w.tau_min, rc.experiment.fade, &mut rng)?
                }
            };
            if targets.is_empty() {
                bail!("scene has no targets");
            }
            let n_t = n_targets.unwrap_or(targets.len());
            let win = kind.detection_window(&cfg)?;
            let amb = ClosedForm::new(&spec, &cfg)?;
            let mut ayx = if *time_domain {
                if snr_db.is_some() {
                    bail!("--time-domain is noiseless; drop --snr-db");
                }
                let rate = cfg.p as f64 * cfg.b;
                let x = synthesize_waveform_with(&spec, &cfg, &SynthOptions { rate, ..SynthOptions::new(&cfg) })?;
                let snapped: Vec<_> = targets
                    .iter()
                    .map(|t| zakradar::scene::Target { tau: (t.tau * rate).round() / rate, ..*t })
                    .collect();
                let y = echo_on_lattice(&x, &snapped)?;
                cross_ambiguity_discrete(&y, &x, &win, &cfg)?
            } else {
                synth_cross_amb(&targets, &amb, &win.geometry(&cfg))?
            };
            if let Some(s) = snr_db {
                need_seed()?;
                let n0 = n0_from_snr(*s, kind.scene_window().tau_min, &cfg).n0;
                let wf = Waveform::new(&spec, &cfg)?;
                let noise = draw_noise_field(&wf, cfg.p as f64 * cfg.b, n0, &win.geometry(&cfg), &mut rng)?;
                for (v, n) in ayx.values.iter_mut().zip(&noise.values) {
                    *v += n;
                }
                extra.insert("snr_db".into(), (*s).into());
            }
            let axx = AxxTable::for_window(&amb, &win, &cfg)?;
            let est = run_receiver(&ayx, &axx, n_t, mode, &cfg)?;
            io::write_estimates_csv(&out_file(&out, "estimates.csv"), &est)?;
            io::write_grid_csv(&out_file(&out, "ayx.csv"), &ayx)?;
            extra.insert("n_targets".into(), n_t.into());
            extra.insert("time_domain".into(), (*time_domain).into());
        }
        Command::Roc { scene, snr_db, trials, seed } => {
            run.name = "roc";
            run.seed = Some(*seed);
            let e = &mut rc.experiment;
            e.scene = scene.unwrap_or(e.scene);
            if let Some(s) = snr_db {
                e.snr_db = vec![*s];
            }
            e.n_trials = trials.unwrap_or(e.n_trials);
            e.seed = *seed;
            let c = roc_run(e, &cfg, &spec)?;
            io::write_roc_csv(&out_file(&out, "roc.csv"), &c)?;
            io::write_json(&out_file(&out, "roc_points.json"), &c.operating_points)?;
            for p in &c.operating_points {
                println!("pf {:.0e}: pd {:.4}", p.pf_target, p.pd);
            }
            extra.insert("noise_draw".into(), "joint across the target points of a trial".into());
        }
        Command::Rmse { scene, mode, snr_db, trials, seed } => {
            run.name = "rmse";
            run.seed = Some(*seed);
            let modes = match mode.as_str() {
                "both" => vec![ReceiverMode::Basic, ReceiverMode::Iti],
                m => vec![m.parse::<ReceiverMode>()?],
            };
            let e = &mut rc.experiment;
            e.scene = scene.unwrap_or(e.scene);
            if let Some(s) = snr_db {
                e.snr_db = s.clone();
            }
            e.n_trials = trials.unwrap_or(e.n_trials);
            e.seed = *seed;
            let curves = rmse_run_modes(e, &cfg, &spec, &modes)?;
            for c in &curves {
                io::write_rmse_csv(&out_file(&out, &format!("rmse_{}.csv", c.mode)), c)?;
                println!("{}: range {:?} m, velocity {:?} m/s", c.mode, c.rmse_range_m, c.rmse_velocity_mps);
            }
            io::write_json(&out_file(&out, "rmse_summary.json"), &curves)?;
            extra.insert("modes".into(), mode.clone().into());
            extra.insert("miss_penalty".into(), "window diagonal in range and velocity".into());
        }
        Command::Sweep { filters, separations, trials, seed } => {
            run.name = "sweep";
            run.seed = Some(*seed);
            let sw = &mut rc.sweep;
            sw.n_separations = separations.unwrap_or(sw.n_separations);
            sw.trials = trials.unwrap_or(sw.trials);
            sw.seed = *seed;
            let specs = filter_list(filters);
            let tables = two_target_sweep(sw, &cfg, &specs)?;
            for t in &tables {
                io::write_sweep_csv(&out_file(&out, &format!("sweep_{}.csv", t.filter.name())), t)?;
            }
            let gauss = tables.iter().find(|t| t.filter == FilterKind::Gaussian);
            let mut cross = serde_json::Map::new();
            if let Some(g) = gauss {
                for t in tables.iter().filter(|t| t.filter != FilterKind::Gaussian) {
                    let c = crossover(g, t);
                    println!("gaussian below {} from {:?} bins", t.filter, c);
                    cross.insert(t.filter.name().into(), serde_json::to_value(c)?);
                }
            }
            io::write_json(&out_file(&out, "sweep_crossover.json"), &cross)?;
            extra.insert("filters".into(), serde_json::to_value(specs.iter().map(|s| s.kind).collect::<Vec<_>>())?);
        }
        Command::Bench { filters, grid_size } => {
            run.name = "bench";
            let specs = filter_list(filters);
            let r = bench_run(&cfg, &specs, *grid_size)?;
            io::write_json(&out_file(&out, "bench.json"), &r)?;
            for e in &r {
                println!(
                    "{}: closed {:.3e} s, oracle {:.3e} s, speedup {:.1}x, max dev {:.1e}",
                    e.filter, e.closed_secs, e.oracle_secs, e.speedup, e.max_abs_dev
                );
            }
            extra.insert("grid_size".into(), (*grid_size).into());
        }
    }
    let cfg_json = config_json(&rc, extra)?;
    run.finish(cfg_json)
}

fn config_json(rc: &Resolved, extra: serde_json::Map<String, serde_json::Value>) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(rc)?;
    if let serde_json::Value::Object(m) = &mut v {
        m.insert("command_args".into(), serde_json::Value::Object(extra));
    }
    Ok(v)
}
