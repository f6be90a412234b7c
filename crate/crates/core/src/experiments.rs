//! Monte Carlo harnesses: ROC, RMSE vs SNR, the two-target separation
//! sweep and the closed-form vs oracle benchmark.
//!
//! Every trial owns a ChaCha20 stream derived from the master seed and the
//! trial index, and results are reduced in trial order, so curves do not
//! depend on the number of worker threads.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{amb_oracle, nan_max, oracle_waveform, Ambiguity, ClosedForm, DDWindow};
use crate::dd::{SystemConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, FilterSpec, Waveform};
use crate::receiver::{run_receiver, AxxTable, DetectionWindow, PeakEstimate, ReceiverMode};
use crate::scene::{
    draw_noise_field, draw_noise_points, draw_scene, n0_from_snr, synth_cross_amb, DDPoint, FadeModel, Target,
};

/// Per-trial RNG: master seed, independent stream per trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Dense,
    Sparse,
    TwoTarget,
}

impl std::str::FromStr for SceneKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dense" => Ok(SceneKind::Dense),
            "sparse" => Ok(SceneKind::Sparse),
            "two_target" => Ok(SceneKind::TwoTarget),
            other => Err(Error::Config(format!("unknown scene `{other}` (dense, sparse, two_target)"))),
        }
    }
}

impl SceneKind {
    pub fn name(self) -> &'static str {
        match self {
            SceneKind::Dense => "dense",
            SceneKind::Sparse => "sparse",
            SceneKind::TwoTarget => "two_target",
        }
    }
    /// Region the targets are drawn from.
    pub fn scene_window(self) -> DDWindow {
        match self {
            SceneKind::Dense => DDWindow::dense(),
            SceneKind::Sparse => DDWindow::sparse(),
            SceneKind::TwoTarget => DDWindow { tau_min: 0.0, tau_max: 5e-6, nu_min: -1000.0, nu_max: 1000.0 },
        }
    }
    pub fn detection_window(self, cfg: &SystemConfig) -> Result<DetectionWindow> {
        match self {
            SceneKind::Dense => DetectionWindow::dense(cfg),
            SceneKind::Sparse => DetectionWindow::sparse(cfg),
            SceneKind::TwoTarget => DetectionWindow::two_target(cfg),
        }
    }
    fn require_random(self) -> Result<()> {
        if self == SceneKind::TwoTarget {
            return Err(Error::Config("random-scene experiments need the dense or sparse scene".into()));
        }
        Ok(())
    }
}

/// Monte Carlo settings shared by the ROC and RMSE harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scene: SceneKind,
    pub n_trials: usize,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub filter: FilterKind,
    pub mode: ReceiverMode,
    pub n_targets: usize,
    pub fade: FadeModel,
    /// Number of log-spaced ROC thresholds between the pooled extremes.
    pub n_thresholds: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene: SceneKind::Dense,
            n_trials: 50_000,
            snr_db: vec![-9.0],
            seed: 0,
            filter: FilterKind::Sinc,
            mode: ReceiverMode::Basic,
            n_targets: 4,
            fade: FadeModel::Absolute,
            n_thresholds: 1000,
        }
    }
}

impl ExperimentConfig {
    /// Defaults for the RMSE harness: 500 scenes, SNR −10..30 dB.
    pub fn rmse_defaults() -> Self {
        Self { n_trials: 500, snr_db: vec![-10.0, 0.0, 10.0, 20.0, 30.0], ..Self::default() }
    }
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::Config("n_trials must be at least 1".into()));
        }
        if self.n_targets < 1 {
            return Err(Error::Config("n_targets must be at least 1".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db must be a nonempty list of finite values".into()));
        }
        Ok(())
    }
}

// -------------------------------------------------------------------- ROC

/// One operating point read off the pooled samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pf_target: f64,
    pub gamma: f64,
    pub pf: f64,
    pub pd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub pf: Vec<f64>,
    pub pd: Vec<f64>,
    pub snr_db: f64,
    pub filter: FilterKind,
    pub scene: SceneKind,
    pub n_trials: usize,
    /// P_D at P_F ∈ {1e-3, 1e-2, 1e-1}, thresholds taken from the H₀ quantiles.
    pub operating_points: Vec<RocPoint>,
}

impl RocCurve {
    /// P_D at the stored operating point closest to `pf`.
    pub fn pd_at(&self, pf: f64) -> Option<f64> {
        self.operating_points.iter().find(|p| (p.pf_target - pf).abs() <= 1e-12 * pf).map(|p| p.pd)
    }
}

pub const ROC_PF_POINTS: [f64; 3] = [1e-3, 1e-2, 1e-1];

/// H₀ and H₁ statistics at each target point of one scene:
/// H₁ = |Σⱼ hⱼA(τᵢ−τⱼ, νᵢ−νⱼ)e^{j2πνⱼ(τᵢ−τⱼ)} + nᵢ|², H₀ the same without j = i.
pub fn roc_statistics(targets: &[Target], noise: &[C64], amb: &dyn Ambiguity) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(targets.len());
    for (i, ti) in targets.iter().enumerate() {
        let mut others = noise[i];
        let mut own = C64::new(0.0, 0.0);
        for (j, tj) in targets.iter().enumerate() {
            let dt = ti.tau - tj.tau;
            let s = tj.h * amb.amb(dt, ti.nu - tj.nu)? * C64::from_polar(1.0, 2.0 * PI * tj.nu * dt);
            if j == i {
                own += s;
            } else {
                others += s;
            }
        }
        out.push((others.norm_sqr(), (others + own).norm_sqr()));
    }
    Ok(out)
}

fn count_at_least(sorted: &[f64], g: f64) -> usize {
    sorted.len() - sorted.partition_point(|&v| v < g)
}

fn next_up(x: f64) -> f64 {
    x.next_up()
}

/// Curve from pooled samples: P(H ≥ γ) for γ = 0, log-spaced thresholds
/// across the pooled range, and one threshold just above the maximum.
pub fn roc_from_samples(h0: &mut [f64], h1: &mut [f64], n_thresholds: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<RocPoint>) {
    h0.sort_by(f64::total_cmp);
    h1.sort_by(f64::total_cmp);
    let all_max = h0.last().copied().unwrap_or(0.0).max(h1.last().copied().unwrap_or(0.0));
    let pos_min = h0.iter().chain(h1.iter()).copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let mut g = vec![0.0];
    if pos_min.is_finite() && all_max > pos_min && n_thresholds >= 2 {
        let (a, b) = (pos_min.ln(), all_max.ln());
        for i in 0..n_thresholds {
            // exp(ln x) can land an ulp off the pooled range
            g.push((a + (b - a) * i as f64 / (n_thresholds - 1) as f64).exp().clamp(pos_min, all_max));
        }
    } else if all_max > 0.0 {
        g.push(all_max);
    }
    g.push(next_up(all_max));
    let frac = |s: &[f64], t: f64| if s.is_empty() { 0.0 } else { count_at_least(s, t) as f64 / s.len() as f64 };
    let pf: Vec<f64> = g.iter().map(|&t| frac(h0, t)).collect();
    let pd: Vec<f64> = g.iter().map(|&t| frac(h1, t)).collect();
    let n0 = h0.len();
    let ops = ROC_PF_POINTS
        .iter()
        .map(|&p| {
            // smallest γ with at most ⌊p·n⌋ H₀ samples at or above it
            let allowed = (p * n0 as f64).floor() as usize;
            let gamma = if allowed >= n0 { 0.0 } else { next_up(h0[n0 - allowed - 1]) };
            RocPoint { pf_target: p, gamma, pf: frac(h0, gamma), pd: frac(h1, gamma) }
        })
        .collect();
    (g, pf, pd, ops)
}

/// ROC at `exp.snr_db[0]`: per trial a random scene and one joint noise
/// draw at the target points.
pub fn roc_run(exp: &ExperimentConfig, cfg: &SystemConfig, spec: &FilterSpec) -> Result<RocCurve> {
    exp.validate()?;
    exp.scene.require_random()?;
    let amb = ClosedForm::new(spec, cfg)?;
    let win = exp.scene.scene_window();
    let snr = exp.snr_db[0];
    let n0 = n0_from_snr(snr, win.tau_min, cfg).n0;
    let per_trial: Vec<Vec<(f64, f64)>> = (0..exp.n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(exp.seed, t);
            let targets = draw_scene(&win, exp.n_targets, win.tau_min, exp.fade, &mut rng)?;
            let pts: Vec<DDPoint> = targets.iter().map(|t| DDPoint { tau: t.tau, nu: t.nu }).collect();
            let noise = draw_noise_points(&pts, n0, &amb, &mut rng)?;
            roc_statistics(&targets, &noise, &amb)
        })
        .collect::<Result<_>>()?;
    let mut h0: Vec<f64> = per_trial.iter().flatten().map(|p| p.0).collect();
    let mut h1: Vec<f64> = per_trial.iter().flatten().map(|p| p.1).collect();
    let (thresholds, pf, pd, operating_points) = roc_from_samples(&mut h0, &mut h1, exp.n_thresholds);
    Ok(RocCurve {
        thresholds,
        pf,
        pd,
        snr_db: snr,
        filter: spec.kind,
        scene: exp.scene,
        n_trials: exp.n_trials,
        operating_points,
    })
}

// ------------------------------------------------------------------- RMSE

/// |r̂ − r| and |v̂ − v| for each truth target after greedy nearest-neighbour
/// matching: estimates in order of decreasing strength each take the
/// closest unmatched truth in (ΔτB, ΔνT) distance. Truths left unmatched
/// get the window-diagonal error.
pub fn match_errors(
    truth: &[Target],
    est: &[Option<PeakEstimate>],
    win: &DetectionWindow,
    cfg: &SystemConfig,
) -> Vec<(f64, f64)> {
    let miss = win.diagonal_errors(cfg);
    let mut order: Vec<&PeakEstimate> = est.iter().flatten().collect();
    order.sort_by(|a, b| {
        b.strength().total_cmp(&a.strength()).then(a.k_hat.cmp(&b.k_hat)).then(a.l_hat.cmp(&b.l_hat))
    });
    let mut out = vec![miss; truth.len()];
    let mut taken = vec![false; truth.len()];
    for e in order {
        let best = truth
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .map(|(i, t)| {
                let d = ((e.tau_hat - t.tau) * cfg.b).hypot((e.nu_hat - t.nu) * cfg.t);
                (i, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        if let Some((i, _)) = best {
            taken[i] = true;
            let t = &truth[i];
            out[i] = (
                (e.range_m - SPEED_OF_LIGHT * t.tau / 2.0).abs(),
                (e.velocity_mps - SPEED_OF_LIGHT * t.nu / (2.0 * cfg.f_c)).abs(),
            );
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseCurve {
    pub snr_db: Vec<f64>,
    pub rmse_range_m: Vec<f64>,
    pub rmse_velocity_mps: Vec<f64>,
    /// Standard errors of the RMSE estimates (delta method over scenes).
    pub se_range_m: Vec<f64>,
    pub se_velocity_mps: Vec<f64>,
    /// Fraction of truth targets left unmatched (charged the diagonal error).
    pub miss_rate: Vec<f64>,
    pub filter: FilterKind,
    pub scene: SceneKind,
    pub mode: ReceiverMode,
    pub n_trials: usize,
}

/// Per-scene mean squared errors (range, velocity) and miss count.
type SceneScore = (f64, f64, usize);

fn score(errs: &[(f64, f64)], miss: (f64, f64)) -> SceneScore {
    let n = errs.len() as f64;
    (
        errs.iter().map(|e| e.0 * e.0).sum::<f64>() / n,
        errs.iter().map(|e| e.1 * e.1).sum::<f64>() / n,
        errs.iter().filter(|e| **e == miss).count(),
    )
}

fn rmse_and_se(ms: &[f64]) -> (f64, f64) {
    let n = ms.len() as f64;
    let mean = ms.iter().sum::<f64>() / n;
    let var = if ms.len() > 1 { ms.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let rmse = mean.sqrt();
    let se = if rmse > 0.0 { (var / n).sqrt() / (2.0 * rmse) } else { 0.0 };
    (rmse, se)
}

/// RMSE vs SNR for each receiver mode in `modes`. Scenes and unit-density
/// noise fields are shared across SNR points and modes.
pub fn rmse_run_modes(
    exp: &ExperimentConfig,
    cfg: &SystemConfig,
    spec: &FilterSpec,
    modes: &[ReceiverMode],
) -> Result<Vec<RmseCurve>> {
    exp.validate()?;
    exp.scene.require_random()?;
    let amb = ClosedForm::new(spec, cfg)?;
    let wf = Waveform::new(spec, cfg)?;
    let scene = exp.scene.scene_window();
    let win = exp.scene.detection_window(cfg)?;
    let geom = win.geometry(cfg);
    let axx = AxxTable::for_window(&amb, &win, cfg)?;
    let rate = cfg.p as f64 * cfg.b;
    let miss = win.diagonal_errors(cfg);
    let n0s: Vec<f64> = exp.snr_db.iter().map(|&s| n0_from_snr(s, scene.tau_min, cfg).n0).collect();
    // scores[trial][mode][snr]
    let scores: Vec<Vec<Vec<SceneScore>>> = (0..exp.n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(exp.seed, t);
            let targets = draw_scene(&scene, exp.n_targets, scene.tau_min, exp.fade, &mut rng)?;
            let clean = synth_cross_amb(&targets, &amb, &geom)?;
            let unit = draw_noise_field(&wf, rate, 1.0, &geom, &mut rng)?;
            let mut per_mode = vec![Vec::with_capacity(n0s.len()); modes.len()];
            for &n0 in &n0s {
                let mut g = clean.clone();
                let s = n0.sqrt();
                for (v, n) in g.values.iter_mut().zip(&unit.values) {
                    *v += n * s;
                }
                for (mi, &mode) in modes.iter().enumerate() {
                    let est = run_receiver(&g, &axx, exp.n_targets, mode, cfg)?;
                    per_mode[mi].push(score(&match_errors(&targets, &est, &win, cfg), miss));
                }
            }
            Ok(per_mode)
        })
        .collect::<Result<_>>()?;
    Ok(modes
        .iter()
        .enumerate()
        .map(|(mi, &mode)| {
            let mut c = RmseCurve {
                snr_db: exp.snr_db.clone(),
                rmse_range_m: vec![],
                rmse_velocity_mps: vec![],
                se_range_m: vec![],
                se_velocity_mps: vec![],
                miss_rate: vec![],
                filter: spec.kind,
                scene: exp.scene,
                mode,
                n_trials: exp.n_trials,
            };
            for si in 0..n0s.len() {
                let r: Vec<f64> = scores.iter().map(|s| s[mi][si].0).collect();
                let v: Vec<f64> = scores.iter().map(|s| s[mi][si].1).collect();
                let m: usize = scores.iter().map(|s| s[mi][si].2).sum();
                let (rr, rs) = rmse_and_se(&r);
                let (vr, vs) = rmse_and_se(&v);
                c.rmse_range_m.push(rr);
                c.se_range_m.push(rs);
                c.rmse_velocity_mps.push(vr);
                c.se_velocity_mps.push(vs);
                c.miss_rate.push(m as f64 / (exp.n_trials * exp.n_targets) as f64);
            }
            c
        })
        .collect())
}

/// RMSE vs SNR for `exp.mode`.
pub fn rmse_run(exp: &ExperimentConfig, cfg: &SystemConfig, spec: &FilterSpec) -> Result<RmseCurve> {
    Ok(rmse_run_modes(exp, cfg, spec, &[exp.mode])?.remove(0))
}

// ----------------------------------------------------------- sweep

/// Settings of the two-target separation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Delay of the first target, s.
    pub tau1: f64,
    /// Separations in 1/B bins: start, step, count.
    pub sep_start_bins: f64,
    pub sep_step_bins: f64,
    pub n_separations: usize,
    /// Point SNR of target 1, |h₁|²/N0 in dB.
    pub target1_snr_db: f64,
    /// Noise realizations averaged per separation.
    pub trials: usize,
    pub seed: u64,
    pub mode: ReceiverMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            tau1: 0.25e-6,
            sep_start_bins: 0.25,
            sep_step_bins: 0.25,
            n_separations: 64,
            target1_snr_db: 60.0,
            trials: 4,
            seed: 0,
            mode: ReceiverMode::Basic,
        }
    }
}

impl SweepConfig {
    pub fn separations(&self) -> Vec<f64> {
        (0..self.n_separations).map(|i| self.sep_start_bins + i as f64 * self.sep_step_bins).collect()
    }
}

/// Range error of each target vs separation for one filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub filter: FilterKind,
    pub sep_bins: Vec<f64>,
    /// RMS over the noise realizations, m.
    pub err1_m: Vec<f64>,
    pub err2_m: Vec<f64>,
}

impl SweepTable {
    /// Per-target error averaged over the two targets.
    pub fn mean_error(&self, i: usize) -> f64 {
        0.5 * (self.err1_m[i] + self.err2_m[i])
    }
}

/// Two targets at zero Doppler, τ₂ = τ₁ + sep/B, with deterministic fades
/// h = (10⁻⁷/τ)² (the square root of the fade-variance model).
pub fn sweep_targets(sw: &SweepConfig, sep_bins: f64, cfg: &SystemConfig) -> [Target; 2] {
    let tau2 = sw.tau1 + sep_bins / cfg.b;
    let h = |t: f64| C64::new((1e-7 / t).powi(2), 0.0);
    [Target { tau: sw.tau1, nu: 0.0, h: h(sw.tau1) }, Target { tau: tau2, nu: 0.0, h: h(tau2) }]
}

pub fn two_target_sweep(sw: &SweepConfig, cfg: &SystemConfig, specs: &[FilterSpec]) -> Result<Vec<SweepTable>> {
    if sw.n_separations < 1 || sw.trials < 1 {
        return Err(Error::Config("sweep needs at least one separation and one trial".into()));
    }
    let win = DetectionWindow::two_target(cfg)?;
    let geom = win.geometry(cfg);
    let rate = cfg.p as f64 * cfg.b;
    let seps = sw.separations();
    specs
        .iter()
        .enumerate()
        .map(|(fi, spec)| {
            let amb = ClosedForm::new(spec, cfg)?;
            let wf = Waveform::new(spec, cfg)?;
            let axx = AxxTable::for_window(&amb, &win, cfg)?;
            let rows: Vec<(f64, f64)> = seps
                .par_iter()
                .enumerate()
                .map(|(si, &sep)| {
                    let tg = sweep_targets(sw, sep, cfg);
                    let clean = synth_cross_amb(&tg, &amb, &geom)?;
                    let n0 = tg[0].h.norm_sqr() / 10f64.powf(sw.target1_snr_db / 10.0);
                    let mut acc = (0.0, 0.0);
                    for t in 0..sw.trials {
                        let stream = ((fi * seps.len() + si) * sw.trials + t) as u64;
                        let mut rng = trial_rng(sw.seed, stream);
                        let noise = draw_noise_field(&wf, rate, n0, &geom, &mut rng)?;
                        let mut g = clean.clone();
                        for (v, n) in g.values.iter_mut().zip(&noise.values) {
                            *v += n;
                        }
                        let est = run_receiver(&g, &axx, 2, sw.mode, cfg)?;
                        let e = match_errors(&tg, &est, &win, cfg);
                        acc.0 += e[0].0 * e[0].0;
                        acc.1 += e[1].0 * e[1].0;
                    }
                    let n = sw.trials as f64;
                    Ok(((acc.0 / n).sqrt(), (acc.1 / n).sqrt()))
                })
                .collect::<Result<_>>()?;
            Ok(SweepTable {
                filter: spec.kind,
                sep_bins: seps.clone(),
                err1_m: rows.iter().map(|r| r.0).collect(),
                err2_m: rows.iter().map(|r| r.1).collect(),
            })
        })
        .collect()
}

/// Smallest separation from which `a`'s mean error stays below `b`'s.
pub fn crossover(a: &SweepTable, b: &SweepTable) -> Option<f64> {
    let n = a.sep_bins.len().min(b.sep_bins.len());
    (0..n)
        .find(|&i| (i..n).all(|j| a.mean_error(j) < b.mean_error(j)))
        .map(|i| a.sep_bins[i])
}

// ---------------------------------------------------------------- bench

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchEntry {
    pub filter: FilterKind,
    pub n_points: usize,
    pub closed_secs: f64,
    pub oracle_secs: f64,
    /// Waveform synthesis for the oracle, not included in `oracle_secs`.
    pub synth_secs: f64,
    pub speedup: f64,
    pub max_abs_dev: f64,
}

/// Fills a grid_size × grid_size grid over the white-box window with the
/// closed form and with the oracle (delays snapped to the oracle's sample
/// lattice) and times both.
pub fn bench_run(cfg: &SystemConfig, specs: &[FilterSpec], grid_size: usize) -> Result<Vec<BenchEntry>> {
    if grid_size < 1 {
        return Err(Error::InvalidArgument("grid_size must be at least 1".into()));
    }
    specs
        .iter()
        .map(|spec| {
            let t = Instant::now();
            let x = oracle_waveform(cfg, spec)?;
            let synth_secs = t.elapsed().as_secs_f64();
            let half_d = (cfg.tau_p / 2.0 * x.rate).floor();
            let lin = |i: usize, lo: f64, hi: f64| {
                if grid_size == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (grid_size - 1) as f64
                }
            };
            let pts: Vec<(f64, f64)> = (0..grid_size * grid_size)
                .map(|p| {
                    let d = lin(p % grid_size, -half_d, half_d).round();
                    (d / x.rate, lin(p / grid_size, -cfg.nu_p / 2.0, cfg.nu_p / 2.0))
                })
                .collect();
            let cf = ClosedForm::new(spec, cfg)?;
            let t = Instant::now();
            let closed: Vec<C64> = pts.iter().map(|&(a, b)| cf.eval(a, b)).collect::<Result<_>>()?;
            let closed_secs = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let oracle: Vec<C64> = pts.iter().map(|&(a, b)| amb_oracle(&x, a, b)).collect::<Result<_>>()?;
            let oracle_secs = t.elapsed().as_secs_f64();
            let max_abs_dev = closed.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, nan_max);
            Ok(BenchEntry {
                filter: spec.kind,
                n_points: pts.len(),
                closed_secs,
                oracle_secs,
                synth_secs,
                speedup: oracle_secs / closed_secs.max(1e-12),
                max_abs_dev,
            })
        })
        .collect()
}
