//! Peak-detection receiver on the discrete cross-ambiguity, with optional
//! inter-target interference (ITI) cancellation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{Ambiguity, DDWindow};
use crate::dd::{DDGrid, SystemConfig, TimeSamples, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::scene::GridGeometry;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Discrete peak-detection window 𝒮.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionWindow {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub k_lo: i64,
    pub k_hi: i64,
    pub l_lo: i64,
    pub l_hi: i64,
}

/// Window from its continuous corners, with k_lo = P⌊Bτ'min⌋,
/// k_hi = P⌈Bτ'max⌉ and likewise in Doppler with Q and T.
pub fn detection_window(bounds: &DDWindow, cfg: &SystemConfig) -> Result<DetectionWindow> {
    let (tl, th, nl, nh) = (bounds.tau_min, bounds.tau_max, bounds.nu_min, bounds.nu_max);
    if !(tl < th && nl < nh) {
        return Err(Error::Geometry(format!("empty detection window {bounds:?}")));
    }
    if th - tl >= cfg.tau_p || nh - nl >= cfg.nu_p {
        return Err(Error::Geometry(format!(
            "detection window spread ({:e} s, {} Hz) must stay below one period ({:e} s, {} Hz)",
            th - tl,
            nh - nl,
            cfg.tau_p,
            cfg.nu_p
        )));
    }
    // round before floor/ceil so that 200 µs·4 MHz lands on 800 exactly
    let snap = |v: f64| if (v - v.round()).abs() < 1e-9 { v.round() } else { v };
    let (p, q) = (cfg.p as i64, cfg.q as i64);
    Ok(DetectionWindow {
        tau_lo: tl,
        tau_hi: th,
        nu_lo: nl,
        nu_hi: nh,
        k_lo: p * snap(cfg.b * tl).floor() as i64,
        k_hi: p * snap(cfg.b * th).ceil() as i64,
        l_lo: q * snap(cfg.t * nl).floor() as i64,
        l_hi: q * snap(cfg.t * nh).ceil() as i64,
    })
}

/// Scene bounds widened by the same margins on every side.
pub fn detection_window_with_margins(
    scene: &DDWindow,
    margin_tau: f64,
    margin_nu: f64,
    cfg: &SystemConfig,
) -> Result<DetectionWindow> {
    detection_window(
        &DDWindow {
            tau_min: scene.tau_min - margin_tau,
            tau_max: scene.tau_max + margin_tau,
            nu_min: scene.nu_min - margin_nu,
            nu_max: scene.nu_max + margin_nu,
        },
        cfg,
    )
}

impl DetectionWindow {
    /// [200, 203] µs × [−600, 600] Hz.
    pub fn dense(cfg: &SystemConfig) -> Result<Self> {
        detection_window(&DDWindow { tau_min: 200e-6, tau_max: 203e-6, nu_min: -600.0, nu_max: 600.0 }, cfg)
    }
    /// [200, 207] µs × [−1400, 1400] Hz.
    pub fn sparse(cfg: &SystemConfig) -> Result<Self> {
        detection_window(&DDWindow { tau_min: 200e-6, tau_max: 207e-6, nu_min: -1400.0, nu_max: 1400.0 }, cfg)
    }
    /// [0, 5] µs × [−1000, 1000] Hz.
    pub fn two_target(cfg: &SystemConfig) -> Result<Self> {
        detection_window(&DDWindow { tau_min: 0.0, tau_max: 5e-6, nu_min: -1000.0, nu_max: 1000.0 }, cfg)
    }
    pub fn k_span(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }
    pub fn l_span(&self) -> usize {
        (self.l_hi - self.l_lo + 1) as usize
    }
    /// Receiver grid: τ = k/(PB), ν = l/(QT) over the window.
    pub fn geometry(&self, cfg: &SystemConfig) -> GridGeometry {
        GridGeometry {
            tau0: self.k_lo as f64 * cfg.dtau(),
            nu0: self.l_lo as f64 * cfg.dnu(),
            dtau: cfg.dtau(),
            dnu: cfg.dnu(),
            n_tau: self.k_span(),
            n_nu: self.l_span(),
        }
    }
    /// Window diagonal expressed as range and velocity extents.
    pub fn diagonal_errors(&self, cfg: &SystemConfig) -> (f64, f64) {
        (
            SPEED_OF_LIGHT * (self.tau_hi - self.tau_lo) / 2.0,
            SPEED_OF_LIGHT * (self.nu_hi - self.nu_lo) / (2.0 * cfg.f_c),
        )
    }
}

/// A detected peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    pub k_hat: i64,
    pub l_hat: i64,
    pub tau_hat: f64,
    pub nu_hat: f64,
    /// Cross-ambiguity value at the peak.
    pub value: C64,
    pub h_hat: Option<C64>,
    pub range_m: f64,
    pub velocity_mps: f64,
}

impl PeakEstimate {
    fn at(k: i64, l: i64, value: C64, cfg: &SystemConfig) -> Self {
        let tau_hat = k as f64 * cfg.dtau();
        let nu_hat = l as f64 * cfg.dnu();
        let (range_m, velocity_mps) = to_range_velocity(tau_hat, nu_hat, cfg);
        Self { k_hat: k, l_hat: l, tau_hat, nu_hat, value, h_hat: None, range_m, velocity_mps }
    }
    /// Magnitude used to rank estimates: |ĥ| when known, else |peak|.
    pub fn strength(&self) -> f64 {
        self.h_hat.unwrap_or(self.value).norm()
    }
}

/// r = cτ/2, v = cν/(2fc).
pub fn to_range_velocity(tau: f64, nu: f64, cfg: &SystemConfig) -> (f64, f64) {
    (SPEED_OF_LIGHT * tau / 2.0, SPEED_OF_LIGHT * nu / (2.0 * cfg.f_c))
}

fn grid_k(g: &DDGrid, i: usize) -> i64 {
    (g.tau(i) / g.dtau).round() as i64
}
fn grid_l(g: &DDGrid, j: usize) -> i64 {
    (g.nu(j) / g.dnu).round() as i64
}

/// Self-ambiguity on the receiver lattice, A[Δk, Δl] = A(Δk/(PB), Δl/(QT))
/// for |Δk| ≤ dk_max, |Δl| ≤ dl_max.
#[derive(Debug, Clone)]
pub struct AxxTable {
    pub dk_max: i64,
    pub dl_max: i64,
    values: Vec<C64>,
}

impl AxxTable {
    pub fn new(amb: &dyn Ambiguity, dk_max: i64, dl_max: i64, cfg: &SystemConfig) -> Result<Self> {
        let nk = (2 * dk_max + 1) as usize;
        let rows: Vec<Result<Vec<C64>>> = (-dl_max..=dl_max)
            .into_par_iter()
            .map(|dl| (-dk_max..=dk_max).map(|dk| amb.amb(dk as f64 * cfg.dtau(), dl as f64 * cfg.dnu())).collect())
            .collect();
        let mut values = Vec::with_capacity(nk * (2 * dl_max + 1) as usize);
        for r in rows {
            values.extend(r?);
        }
        Ok(Self { dk_max, dl_max, values })
    }
    /// Table large enough for any pair of cells inside `win`.
    pub fn for_window(amb: &dyn Ambiguity, win: &DetectionWindow, cfg: &SystemConfig) -> Result<Self> {
        Self::new(amb, win.k_span() as i64 - 1, win.l_span() as i64 - 1, cfg)
    }
    #[inline]
    pub fn get(&self, dk: i64, dl: i64) -> C64 {
        if dk.abs() > self.dk_max || dl.abs() > self.dl_max {
            return ZERO;
        }
        let nk = 2 * self.dk_max + 1;
        self.values[((dl + self.dl_max) * nk + dk + self.dk_max) as usize]
    }
}

/// Global argmax of |grid|; ties go to the smallest k, then the smallest l.
pub fn detect_peak(grid: &DDGrid, cfg: &SystemConfig) -> Result<PeakEstimate> {
    if grid.values.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for i in 0..grid.n_tau {
        for j in 0..grid.n_nu {
            let v = grid.at(i, j).norm();
            if v > best.0 {
                best = (v, i, j);
            }
        }
    }
    let (_, i, j) = best;
    Ok(PeakEstimate::at(grid_k(grid, i), grid_l(grid, j), grid.at(i, j), cfg))
}

#[inline]
fn twist(l_hat: i64, dk: i64, cfg: &SystemConfig) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (l_hat * dk) as f64 / cfg.pqmn())
}

/// ĥ = Σ A_yx[k',l'] A*_xx[k'−k̂, l'−l̂] e^{-j2πl̂(k'−k̂)/(PQMN)} / Σ |A_xx[k'−k̂, l'−l̂]|²
/// over the whole grid.
pub fn estimate_fade(ayx: &DDGrid, axx: &AxxTable, peak: &PeakEstimate, cfg: &SystemConfig) -> Result<C64> {
    let mut num = ZERO;
    let mut vol = 0.0;
    for j in 0..ayx.n_nu {
        let dl = grid_l(ayx, j) - peak.l_hat;
        for i in 0..ayx.n_tau {
            let dk = grid_k(ayx, i) - peak.k_hat;
            let a = axx.get(dk, dl);
            num += ayx.at(i, j) * (a * twist(peak.l_hat, dk, cfg)).conj();
            vol += a.norm_sqr();
        }
    }
    if vol == 0.0 {
        return Err(Error::Numerical("zero self-ambiguity volume over the window".into()));
    }
    Ok(num / vol)
}

/// A_yx[k,l] − ĥ A_xx[k−k̂, l−l̂] e^{j2πl̂(k−k̂)/(PQMN)}.
pub fn cancel_target(ayx: &DDGrid, axx: &AxxTable, peak: &PeakEstimate, h_hat: C64, cfg: &SystemConfig) -> DDGrid {
    let mut out = ayx.clone();
    if h_hat == ZERO {
        return out;
    }
    for j in 0..out.n_nu {
        let dl = grid_l(ayx, j) - peak.l_hat;
        for i in 0..out.n_tau {
            let dk = grid_k(ayx, i) - peak.k_hat;
            *out.at_mut(i, j) -= h_hat * axx.get(dk, dl) * twist(peak.l_hat, dk, cfg);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverMode {
    Basic,
    Iti,
}

impl std::str::FromStr for ReceiverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(ReceiverMode::Basic),
            "iti" => Ok(ReceiverMode::Iti),
            other => Err(Error::Config(format!("unknown receiver mode `{other}` (basic, iti)"))),
        }
    }
}

impl std::fmt::Display for ReceiverMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReceiverMode::Basic => "basic",
            ReceiverMode::Iti => "iti",
        })
    }
}

/// Cells strictly larger than every existing 8-neighbour, strongest first
/// (ties to the smallest k, then l).
pub fn local_maxima(grid: &DDGrid) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..grid.n_nu {
        for i in 0..grid.n_tau {
            let v = grid.at(i, j).norm();
            let mut is_max = true;
            'n: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= grid.n_tau as i64 || jj >= grid.n_nu as i64 {
                        continue;
                    }
                    if grid.at(ii as usize, jj as usize).norm() >= v {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                out.push((i, j));
            }
        }
    }
    out.sort_by(|a, b| {
        let (va, vb) = (grid.at(a.0, a.1).norm(), grid.at(b.0, b.1).norm());
        vb.total_cmp(&va).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1))
    });
    out
}

/// Basic mode: the `n_targets` strongest local maxima. ITI mode: detect the
/// global peak, estimate its fade, cancel it, repeat. Missing detections
/// are `None`.
pub fn run_receiver(
    ayx: &DDGrid,
    axx: &AxxTable,
    n_targets: usize,
    mode: ReceiverMode,
    cfg: &SystemConfig,
) -> Result<Vec<Option<PeakEstimate>>> {
    if n_targets < 1 {
        return Err(Error::InvalidArgument("n_targets must be at least 1".into()));
    }
    match mode {
        ReceiverMode::Basic => {
            let mut v: Vec<Option<PeakEstimate>> = local_maxima(ayx)
                .into_iter()
                .take(n_targets)
                .map(|(i, j)| Some(PeakEstimate::at(grid_k(ayx, i), grid_l(ayx, j), ayx.at(i, j), cfg)))
                .collect();
            v.resize(n_targets, None);
            Ok(v)
        }
        ReceiverMode::Iti => {
            let mut residual = ayx.clone();
            let mut v = Vec::with_capacity(n_targets);
            for _ in 0..n_targets {
                let mut p = detect_peak(&residual, cfg)?;
                let h = estimate_fade(&residual, axx, &p, cfg)?;
                p.h_hat = Some(h);
                residual = cancel_target(&residual, axx, &p, h, cfg);
                v.push(Some(p));
            }
            Ok(v)
        }
    }
}

/// Discrete cross-ambiguity A_yx[k, l] on the window from time samples of
/// the echo and the probe (same rate, same sample lattice origin t = 0).
///
/// Both signals are laid out over 𝒟0 with K = QN delay periods, which is the
/// support of their discrete Zak transforms; the DD-domain integral
/// (1/(R·QT)) Σ_{a,l} Y[a,l] X*[a−d, l−l0] e^{-j2πl0(a−d)/(PQMN)} is then
/// evaluated for each delay d by one FFT over the combined index a + kL,
/// which realizes the Doppler correlation along l for every l0 at once.
pub fn cross_ambiguity_discrete(
    y: &TimeSamples,
    x: &TimeSamples,
    win: &DetectionWindow,
    cfg: &SystemConfig,
) -> Result<DDGrid> {
    if (y.rate - x.rate).abs() > 1e-9 * x.rate {
        return Err(Error::InvalidArgument(format!("rate mismatch {} vs {}", y.rate, x.rate)));
    }
    let rate = x.rate;
    let lat = |v: f64, what: &str| -> Result<i64> {
        let r = v.round();
        if (v - r).abs() > 1e-6 {
            return Err(Error::Geometry(format!("{what} = {v} is not an integer")));
        }
        Ok(r as i64)
    };
    let l = lat(rate * cfg.tau_p, "rate*tau_p")?;
    let dstep = lat(rate * cfg.dtau(), "rate/(PB)")?;
    let k = (cfg.q * cfg.n) as i64;
    let s = (l * k) as usize;
    let fold = |ts: &TimeSamples| -> Result<Vec<C64>> {
        let i0 = lat(ts.t0 * rate, "t0*rate")?;
        let mut buf = vec![ZERO; s];
        for (n, v) in ts.values.iter().enumerate() {
            buf[(i0 + n as i64).rem_euclid(s as i64) as usize] += v;
        }
        Ok(buf)
    };
    let yb = fold(y)?;
    let xb = fold(x)?;
    let fft = FftPlanner::new().plan_fft_forward(s);
    let geom = win.geometry(cfg);
    // Doppler index l0 = Q·T·ν on a grid of step 1/(QT) equals the FFT bin
    let cols: Vec<Vec<C64>> = (win.k_lo..=win.k_hi)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&kk| {
            let d = kk * dstep;
            let mut z: Vec<C64> = (0..s as i64)
                .map(|i| yb[i as usize] * xb[(i - d).rem_euclid(s as i64) as usize].conj())
                .collect();
            fft.process(&mut z);
            (win.l_lo..=win.l_hi)
                .map(|l0| {
                    let bin = l0.rem_euclid(s as i64) as usize;
                    z[bin] * C64::from_polar(1.0 / rate, 2.0 * PI * (l0 * d) as f64 / s as f64)
                })
                .collect()
        })
        .collect();
    let mut g = geom.zeros()?;
    for (i, col) in cols.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            *g.at_mut(i, j) = *v;
        }
    }
    Ok(g)
}

/// Echo y(t) = Σ hᵢ x(t − τᵢ) e^{j2πνᵢ(t−τᵢ)} for targets on the 1/rate
/// delay lattice, sampled on the lattice of `x`.
pub fn echo_on_lattice(x: &TimeSamples, targets: &[crate::scene::Target]) -> Result<TimeSamples> {
    let mut out = vec![ZERO; x.values.len()];
    let mut lo = 0i64;
    let mut hi = 0i64;
    for t in targets {
        let dr = t.tau * x.rate;
        let d = dr.round() as i64;
        if (dr - d as f64).abs() > 1e-6 {
            return Err(Error::Geometry("echo delays must sit on the sample lattice".into()));
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    // widen the buffer so every delayed copy fits
    let n = x.values.len() as i64 + hi - lo;
    out.resize(n as usize, ZERO);
    let t0 = x.t0 + lo as f64 / x.rate;
    for t in targets {
        let d = (t.tau * x.rate).round() as i64;
        for (i, v) in x.values.iter().enumerate() {
            let idx = (i as i64 + d - lo) as usize;
            let ti = t0 + idx as f64 / x.rate;
            out[idx] += t.h * v * C64::from_polar(1.0, 2.0 * PI * t.nu * (ti - t.tau));
        }
    }
    Ok(TimeSamples { rate: x.rate, t0, values: out })
}
