//! Self-ambiguity of the Zak-OTFS probing waveform:
//! A(τ,ν) = ∫ x(t) x*(t−τ) e^{-j2πν(t−τ)} dt.
//!
//! Closed forms for the three filters, a brute-force Riemann-sum oracle on
//! the sampled waveform, grid fills and main-lobe/sidelobe metrics.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dd::{DDGrid, SystemConfig, TimeSamples};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, FilterSpec};
use crate::numerics::{f_osc_scaled, g1, g1_scaled, g2};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Anything that evaluates A(τ, ν).
pub trait Ambiguity: Sync {
    fn amb(&self, tau: f64, nu: f64) -> Result<C64>;
}

impl<F: Fn(f64, f64) -> Result<C64> + Sync> Ambiguity for F {
    fn amb(&self, tau: f64, nu: f64) -> Result<C64> {
        self(tau, nu)
    }
}

// ---------------------------------------------------------------- sinc

/// Sinc-filter ambiguity, a finite sum over the pulse-index difference d:
/// (1−|ν|/B)/N · e^{jπν(τ−cτp)} · Σ_d D_{N−|d|}(ντp) sinc((B−|ν|)(τ+dτp)),
/// with D_L the Dirichlet kernel and c = −1 (N even) or 0 (N odd).
pub fn amb_sinc_closed(cfg: &SystemConfig, tau: f64, nu: f64) -> C64 {
    let b = cfg.b;
    if !(nu.abs() < b) {
        return ZERO;
    }
    let n = cfg.n;
    let tp = cfg.tau_p;
    let bb = b - nu.abs();
    let c = if n % 2 == 0 { -1.0 } else { 0.0 };

    // Dirichlet kernel D_L(x) for L = 1..=N via x = k + δ
    let x = nu * tp;
    let k = x.round();
    let delta = x - k;
    let k_odd = (k as i64).rem_euclid(2) == 1;
    let sd = (PI * delta).sin();
    let near_int = sd.abs() < 1e-13;

    // sinc((B−|ν|)(τ ± dτp)) numerators via rotations
    let theta0 = PI * bb * tau;
    let phi = PI * bb * tp;
    let base = C64::from_polar(1.0, theta0);
    let rot_phi = C64::from_polar(1.0, phi);

    let sinc_at = |num: f64, arg: f64| -> f64 {
        if arg.abs() < 1e-9 {
            let u = PI * arg;
            1.0 - u * u / 6.0
        } else {
            num / (PI * arg)
        }
    };

    let mut acc = 0.0;
    // e^{jdφ} and e^{jπLδ}
    let mut ed = C64::new(1.0, 0.0);
    // d runs 0..N−1 with L = N − d, so el must start at e^{jπNδ}
    let mut el_n = C64::from_polar(1.0, PI * delta * n as f64);
    let inv_rot_delta = C64::from_polar(1.0, -PI * delta);
    for d in 0..n {
        if d % 16 == 0 {
            ed = C64::from_polar(1.0, phi * d as f64);
            el_n = C64::from_polar(1.0, PI * delta * (n - d) as f64);
        }
        let l = n - d;
        let sign = if k_odd && (l - 1) % 2 == 1 { -1.0 } else { 1.0 };
        let dl = if near_int { sign * l as f64 } else { sign * el_n.im / sd };
        let plus = base * ed;
        let minus = base * ed.conj();
        let dtp = d as f64 * tp;
        let s_plus = sinc_at(plus.im, bb * (tau + dtp));
        let pair = if d == 0 { s_plus } else { s_plus + sinc_at(minus.im, bb * (tau - dtp)) };
        acc += dl * pair;
        ed *= rot_phi;
        el_n *= inv_rot_delta;
    }
    let pre = (1.0 - nu.abs() / b) / n as f64;
    C64::from_polar(pre, PI * nu * (tau - c * tp)) * acc
}

// ------------------------------------------------------------ Gaussian

/// Lattice terms whose bound e^{-a t0²/2} is below this are skipped.
const TERM_FLOOR_EXP: f64 = 41.5; // e^{-41.5} ≈ 1e-18

fn lattice_range(x: f64, period: f64, radius: f64) -> std::ops::RangeInclusive<i64> {
    let lo = ((x - radius) / period).ceil() as i64;
    let hi = ((x + radius) / period).floor() as i64;
    lo..=hi
}

/// Gaussian-filter ambiguity, Σ_{n,m} I1·I2 in completed-square form with
/// t0 = τ − nτp, f0 = ν − mνp, a = ατB², b = ανT²:
/// I1 = e^{-a t0²/2 + jπν t0 − π²ν²/(2a)},
/// I2 = e^{-b f0²/2 + jπ nτp f0 − π²(nτp)²/(2b)}.
pub fn amb_gauss_closed(cfg: &SystemConfig, spec: &FilterSpec, tau: f64, nu: f64) -> Result<C64> {
    if spec.kind != FilterKind::Gaussian {
        return Err(Error::InvalidArgument(format!("Gaussian closed form called with {} filter", spec.kind)));
    }
    let a = spec.alpha_tau * cfg.b * cfg.b;
    let b = spec.alpha_nu * cfg.t * cfg.t;
    let rt = (2.0 * TERM_FLOOR_EXP / a).sqrt();
    let rf = (2.0 * TERM_FLOOR_EXP / b).sqrt();
    let mut acc = ZERO;
    for n in lattice_range(tau, cfg.tau_p, rt) {
        let t0 = tau - n as f64 * cfg.tau_p;
        let ntp = n as f64 * cfg.tau_p;
        for m in lattice_range(nu, cfg.nu_p, rf) {
            let f0 = nu - m as f64 * cfg.nu_p;
            let re = -a * t0 * t0 / 2.0 - PI * PI * nu * nu / (2.0 * a) - b * f0 * f0 / 2.0
                - PI * PI * ntp * ntp / (2.0 * b);
            let im = PI * nu * t0 + PI * ntp * f0;
            acc += C64::from_polar(re.exp(), im);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------- Gaussian-sinc

/// Filter-specific intermediates at one lattice term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormContext {
    pub t0: f64,
    pub f0: f64,
    pub k1: C64,
    pub k2: C64,
    pub p1: C64,
    pub n_trunc: usize,
}

/// Intermediates of the GS closed form for the (n, m) lattice term.
pub fn gs_context(cfg: &SystemConfig, spec: &FilterSpec, tau: f64, nu: f64, n: i64, m: i64) -> ClosedFormContext {
    let b = cfg.b;
    let al = spec.alpha_tau;
    let t0 = tau - n as f64 * cfg.tau_p;
    let f0 = nu - m as f64 * cfg.nu_p;
    let k1 = C64::new(nu, al * b * b * t0 / PI);
    let k2 = C64::new(nu, -al * b * b * t0 / PI);
    let p1 = if t0 == 0.0 {
        ZERO
    } else {
        spec.omega_tau.powi(2) / C64::new(0.0, 2.0 * PI * t0 * b) * (PI / (2.0 * al * b * b)).sqrt()
            * (-al * b * b * t0 * t0 / 2.0).exp()
    };
    let rt = (2.0 * TERM_FLOOR_EXP / (al * b * b)).sqrt();
    let n_trunc = lattice_range(tau, cfg.tau_p, rt).count().max(1);
    ClosedFormContext { t0, f0, k1, k2, p1, n_trunc }
}

fn ci(x: f64) -> C64 {
    C64::new(0.0, x)
}
fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Delay factor of the GS closed form (I₁,₁ for t0 ≠ 0, I₁,₂ for t0 = 0).
fn gs_delay_factor(b: f64, al: f64, om: f64, t0: f64, nu: f64) -> Result<C64> {
    let a1 = cr(PI * PI / (2.0 * al * b * b));
    let root = (PI / (2.0 * al * b * b)).sqrt();
    if t0.abs() < 1e-9 / b {
        let v = g2(a1, cr(nu), cr(-b + nu))? - g2(a1, cr(b + nu), cr(nu))?
            + g1(a1, cr(b + nu), cr(nu))? * (b + nu)
            + g1(a1, cr(nu), cr(-b + nu))? * (b - nu);
        return Ok(v * (om * om / b * root));
    }
    let pre = om * om / C64::new(0.0, 2.0 * PI * t0 * b) * root;
    let k1 = C64::new(nu, al * b * b * t0 / PI);
    let k2 = C64::new(nu, -al * b * b * t0 / PI);
    // exponent shared by every bracket term
    let common = cr(-al * b * b * t0 * t0 / 2.0 - PI * PI * nu * nu / (2.0 * al * b * b)) + ci(PI * nu * t0);
    let e_plus = ci(PI * b * t0);
    let t1 = g1_scaled(common + e_plus + a1 * k1 * k1, a1, k1 + b, k1)?;
    let t2 = g1_scaled(common - e_plus + a1 * k2 * k2, a1, k2 + b, k2)?;
    let t3 = g1_scaled(common + e_plus + a1 * k2 * k2, a1, k2, k2 - b)?;
    let t4 = g1_scaled(common - e_plus + a1 * k1 * k1, a1, k1, k1 - b)?;
    Ok(pre * (t1 - t2 + t3 - t4))
}

/// Doppler factor of the GS closed form (I₂,₁ for f0 ≠ 0, I₂,₂ for f0 = 0).
fn gs_doppler_factor(t: f64, al: f64, om: f64, f0: f64, ntp: f64) -> Result<C64> {
    let a2 = cr(PI * PI / (2.0 * al * t * t));
    let root = (PI / (2.0 * al * t * t)).sqrt();
    if f0.abs() < 1e-9 / t {
        let v = g2(a2, cr(ntp), cr(-t + ntp))? - g2(a2, cr(t + ntp), cr(ntp))?
            + g1(a2, cr(t + ntp), cr(ntp))? * (t + ntp)
            + g1(a2, cr(ntp), cr(-t + ntp))? * (t - ntp);
        return Ok(v * (om * om / t * root));
    }
    let pre = om * om / C64::new(0.0, 2.0 * PI * f0 * t) * root;
    let g = cr(-al * t * t * f0 * f0 / 2.0);
    let z = cr(PI * f0);
    let t1 = f_osc_scaled(g + ci(2.0 * PI * f0 * (t / 2.0 + ntp)), cr(t + ntp), cr(ntp), z, a2)?;
    let t2 = f_osc_scaled(g + ci(-PI * f0 * t), cr(t + ntp), cr(ntp), -z, a2)?;
    let t3 = f_osc_scaled(g + ci(2.0 * PI * f0 * (-t / 2.0 + ntp)), cr(ntp), cr(-t + ntp), z, a2)?;
    let t4 = f_osc_scaled(g + ci(PI * f0 * t), cr(ntp), cr(-t + ntp), -z, a2)?;
    Ok(pre * (t1 - t2 - t3 + t4))
}

/// Gaussian-sinc ambiguity, Σ_{n,m} (I₁,₁ or I₁,₂)(I₂,₁ or I₂,₂) with the
/// branch chosen by |t0| < 10⁻⁹/B and |f0| < 10⁻⁹/T.
pub fn amb_gs_closed(cfg: &SystemConfig, spec: &FilterSpec, tau: f64, nu: f64) -> Result<C64> {
    if spec.kind != FilterKind::GaussianSinc {
        return Err(Error::InvalidArgument(format!("GS closed form called with {} filter", spec.kind)));
    }
    let b = cfg.b;
    let t = cfg.t;
    let (at, an) = (spec.alpha_tau, spec.alpha_nu);
    let rt = (2.0 * TERM_FLOOR_EXP / (at * b * b)).sqrt();
    let rf = (2.0 * TERM_FLOOR_EXP / (an * t * t)).sqrt();
    let mut acc = ZERO;
    for n in lattice_range(tau, cfg.tau_p, rt) {
        let t0 = tau - n as f64 * cfg.tau_p;
        let ntp = n as f64 * cfg.tau_p;
        let d = gs_delay_factor(b, at, spec.omega_tau, t0, nu)
            .map_err(|e| Error::Numerical(format!("GS delay factor at t0={t0:e}, nu={nu}: {e}")))?;
        for m in lattice_range(nu, cfg.nu_p, rf) {
            let f0 = nu - m as f64 * cfg.nu_p;
            let dop = gs_doppler_factor(t, an, spec.omega_nu, f0, ntp)
                .map_err(|e| Error::Numerical(format!("GS Doppler factor at f0={f0}, n={n}: {e}")))?;
            acc += d * dop;
        }
    }
    Ok(acc)
}

/// Closed-form evaluator bound to a filter and configuration.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm {
    pub spec: FilterSpec,
    pub cfg: SystemConfig,
}

impl ClosedForm {
    pub fn new(spec: &FilterSpec, cfg: &SystemConfig) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec: *spec, cfg: *cfg })
    }
    pub fn eval(&self, tau: f64, nu: f64) -> Result<C64> {
        match self.spec.kind {
            FilterKind::Sinc => Ok(amb_sinc_closed(&self.cfg, tau, nu)),
            FilterKind::Gaussian => amb_gauss_closed(&self.cfg, &self.spec, tau, nu),
            FilterKind::GaussianSinc => amb_gs_closed(&self.cfg, &self.spec, tau, nu),
        }
    }
}

impl Ambiguity for ClosedForm {
    fn amb(&self, tau: f64, nu: f64) -> Result<C64> {
        self.eval(tau, nu)
    }
}

// ---------------------------------------------------------------- oracle

fn lattice_shift(x: &TimeSamples, tau: f64) -> Result<i64> {
    let d = tau * x.rate;
    let r = d.round();
    if (d - r).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "tau = {tau:e} s is not on the 1/rate sample lattice"
        )));
    }
    if r.abs() as usize >= x.values.len() {
        return Err(Error::InvalidArgument(format!("tau = {tau:e} s is outside the sampled support")));
    }
    Ok(r as i64)
}

fn check_doppler(x: &TimeSamples, nu: f64, bw: f64) -> Result<()> {
    if bw > 0.0 && nu.abs() >= x.rate - bw {
        return Err(Error::InvalidArgument(format!(
            "|nu| = {} Hz aliases at rate {} Hz for a {bw} Hz waveform",
            nu.abs(),
            x.rate
        )));
    }
    Ok(())
}

const CHUNK: usize = 1 << 14;

/// Riemann-sum oracle Σ x[i] x*[i−d] e^{-j2πν(t_i−τ)}/rate for τ = d/rate.
pub fn amb_oracle(x: &TimeSamples, tau: f64, nu: f64) -> Result<C64> {
    let d = lattice_shift(x, tau)?;
    let len = x.values.len() as i64;
    let (lo, hi) = if d >= 0 { (d, len) } else { (0, len + d) };
    let tau_exact = d as f64 / x.rate;
    let parts: Vec<C64> = (lo..hi)
        .step_by(CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + CHUNK as i64).min(hi);
            let t_start = x.t0 + start as f64 / x.rate - tau_exact;
            let mut ph = C64::from_polar(1.0, -2.0 * PI * nu * t_start);
            let rot = C64::from_polar(1.0, -2.0 * PI * nu / x.rate);
            let mut acc = ZERO;
            for (off, i) in (start..end).enumerate() {
                if off % 1024 == 0 && off > 0 {
                    ph = C64::from_polar(1.0, -2.0 * PI * nu * (t_start + off as f64 / x.rate));
                }
                acc += x.values[i as usize] * x.values[(i - d) as usize].conj() * ph;
                ph *= rot;
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(ZERO, |a, b| a + b) / x.rate)
}

/// The oracle as an [`Ambiguity`] evaluator; refuses Doppler shifts that
/// alias for a waveform of bandwidth `bandwidth`.
pub struct Oracle<'a> {
    pub x: &'a TimeSamples,
    pub bandwidth: f64,
}

impl Ambiguity for Oracle<'_> {
    fn amb(&self, tau: f64, nu: f64) -> Result<C64> {
        check_doppler(self.x, nu, self.bandwidth)?;
        amb_oracle(self.x, tau, nu)
    }
}

// ------------------------------------------------------------------ grids

/// Rectangular DD region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DDWindow {
    pub tau_min: f64,
    pub tau_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

impl DDWindow {
    /// [−τp/2, τp/2] × [−νp/2, νp/2].
    pub fn white_box(cfg: &SystemConfig) -> Self {
        Self { tau_min: -cfg.tau_p / 2.0, tau_max: cfg.tau_p / 2.0, nu_min: -cfg.nu_p / 2.0, nu_max: cfg.nu_p / 2.0 }
    }
}

fn count(lo: f64, hi: f64, step: f64) -> usize {
    ((hi - lo) / step + 1e-9).floor() as usize + 1
}

/// Samples of `eval` on the window at the given steps, rows in parallel.
pub fn amb_grid(eval: &dyn Ambiguity, window: &DDWindow, dtau: f64, dnu: f64) -> Result<DDGrid> {
    if !(dtau > 0.0 && dnu > 0.0) || !(window.tau_max >= window.tau_min && window.nu_max >= window.nu_min) {
        return Err(Error::Geometry(format!("bad grid request {window:?} at ({dtau}, {dnu})")));
    }
    let nt = count(window.tau_min, window.tau_max, dtau);
    let nn = count(window.nu_min, window.nu_max, dnu);
    let rows: Vec<Result<Vec<C64>>> = (0..nn)
        .into_par_iter()
        .map(|j| {
            let nu = window.nu_min + j as f64 * dnu;
            (0..nt).map(|i| eval.amb(window.tau_min + i as f64 * dtau, nu)).collect()
        })
        .collect();
    let mut values = Vec::with_capacity(nt * nn);
    for r in rows {
        values.extend(r?);
    }
    DDGrid::new(window.tau_min, window.nu_min, dtau, dnu, nt, nn, values)
}

/// Oracle grid by folding: for each delay the product x[i]x*[i−d] is folded
/// modulo rate/dν samples and one FFT yields every Doppler row. Delays must
/// sit on the sample lattice and rate/dν must be an integer.
pub fn oracle_grid(x: &TimeSamples, window: &DDWindow, dtau: f64, dnu: f64) -> Result<DDGrid> {
    let period = x.rate / dnu;
    let pl = period.round();
    if (period - pl).abs() > 1e-6 * pl {
        return Err(Error::Geometry(format!("rate/dnu = {period} is not an integer")));
    }
    let pl = pl as usize;
    let nt = count(window.tau_min, window.tau_max, dtau);
    let nn = count(window.nu_min, window.nu_max, dnu);
    if nn > pl {
        return Err(Error::Geometry(format!("{nn} Doppler rows exceed the fold length {pl}")));
    }
    let shifts: Vec<i64> = (0..nt)
        .map(|i| lattice_shift(x, window.tau_min + i as f64 * dtau))
        .collect::<Result<_>>()?;
    let fft = FftPlanner::new().plan_fft_forward(pl);
    let nu0 = window.nu_min;
    let len = x.values.len() as i64;
    let cols: Vec<Vec<C64>> = shifts
        .par_iter()
        .map(|&d| {
            let tau = d as f64 / x.rate;
            let mut fold = vec![ZERO; pl];
            let (lo, hi) = if d >= 0 { (d, len) } else { (0, len + d) };
            let rot = C64::from_polar(1.0, -2.0 * PI * nu0 / x.rate);
            let mut ph = ZERO;
            for (off, i) in (lo..hi).enumerate() {
                if off % 1024 == 0 {
                    let ti = x.t0 + i as f64 / x.rate - tau;
                    ph = C64::from_polar(1.0, -2.0 * PI * nu0 * ti);
                }
                fold[i as usize % pl] += x.values[i as usize] * x.values[(i - d) as usize].conj() * ph;
                ph *= rot;
            }
            fft.process(&mut fold);
            // e^{-j2π l dν (t_i − τ)} = e^{-j2π l dν (t0 − τ)} e^{-j2π l i / pl}
            (0..nn)
                .map(|l| {
                    let ph0 = -2.0 * PI * l as f64 * dnu * (x.t0 - tau);
                    fold[l] * C64::from_polar(1.0 / x.rate, ph0)
                })
                .collect()
        })
        .collect();
    let mut values = vec![ZERO; nt * nn];
    for (i, col) in cols.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            values[j * nt + i] = *v;
        }
    }
    DDGrid::new(window.tau_min, window.nu_min, dtau, dnu, nt, nn, values)
}

/// max that lets NaN through instead of discarding it.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if b.is_nan() || b > a {
        b
    } else {
        a
    }
}

// ---------------------------------------------------------------- metrics

/// Main-lobe width and sidelobe ratios.
///
/// `mlw_bins` follows the 20·log10|A| reading at −25 dB; `mlw_bins_10log`
/// the 10·log10|A| reading. PSLR/ISLR are 10·log10 of magnitude ratios on
/// the zero-Doppler cut (`*_cut`) and over the 2D window (`*_2d`); `None`
/// when no sidelobe rises above −60 dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityMetrics {
    pub mlw_bins: f64,
    pub mlw_bins_10log: f64,
    pub pslr_db: Option<f64>,
    pub islr_db: Option<f64>,
    pub pslr_2d_db: Option<f64>,
    pub islr_2d_db: Option<f64>,
}

/// Level below which a sidelobe counts as absent (10·log10 reading).
pub const SIDELOBE_FLOOR_DB: f64 = -60.0;

fn crossing_width(mag: &[f64], step: f64, centre: usize, db_scale: f64, level: f64) -> Result<f64> {
    let peak = mag[centre];
    let db = |v: f64| (db_scale * (v / peak).log10()).max(-1000.0);
    let find = |dir: i64| -> Result<f64> {
        let mut i = centre as i64;
        loop {
            let next = i + dir;
            if next < 0 || next as usize >= mag.len() {
                return Err(Error::Numerical(format!("no {level} dB crossing inside the cut")));
            }
            let (v0, v1) = (db(mag[i as usize]), db(mag[next as usize]));
            if v1 <= level {
                let frac = if v1 == v0 { 0.0 } else { (level - v0) / (v1 - v0) };
                return Ok((i as f64 + dir as f64 * frac) * step);
            }
            i = next;
        }
    };
    let r = find(1)?;
    let l = find(-1)?;
    Ok(r - l)
}

/// Index range [lo, hi] of the main lobe: walk outwards from the peak while
/// the magnitude strictly decreases.
fn main_lobe(mag: &[f64], centre: usize) -> (usize, usize) {
    let mut hi = centre;
    while hi + 1 < mag.len() && mag[hi + 1] < mag[hi] {
        hi += 1;
    }
    let mut lo = centre;
    while lo > 0 && mag[lo - 1] < mag[lo] {
        lo -= 1;
    }
    (lo, hi)
}

fn ratio_db(v: f64) -> Option<f64> {
    let db = 10.0 * v.log10();
    (db > SIDELOBE_FLOOR_DB).then_some(db)
}

fn origin_index(start: f64, step: f64, n: usize) -> Result<usize> {
    let i = (-start / step).round();
    if i < 0.0 || i as usize >= n {
        return Err(Error::Geometry("grid does not contain the origin".into()));
    }
    Ok(i as usize)
}

/// Metrics from a zero-Doppler cut (one row, delay spacing fine enough to
/// resolve the first nulls) and the full white-box window grid.
pub fn lobe_metrics(cfg: &SystemConfig, cut: &DDGrid, full: &DDGrid) -> Result<AmbiguityMetrics> {
    if cut.n_nu != 1 {
        return Err(Error::Geometry(format!("zero-Doppler cut must have one row, got {}", cut.n_nu)));
    }
    let mag: Vec<f64> = cut.values.iter().map(|v| v.norm()).collect();
    let c = origin_index(cut.tau0, cut.dtau, cut.n_tau)?;
    let bin = cut.dtau * cfg.b;
    let mlw20 = crossing_width(&mag, bin, c, 20.0, -25.0)?;
    let mlw10 = crossing_width(&mag, bin, c, 10.0, -25.0)?;

    let (lo, hi) = main_lobe(&mag, c);
    let peak = mag[c];
    let main: f64 = mag[lo..=hi].iter().sum();
    let side: Vec<f64> = mag[..lo].iter().chain(mag[hi + 1..].iter()).copied().collect();
    let side_max = side.iter().copied().fold(0.0, f64::max);
    let side_sum: f64 = side.iter().sum();
    let pslr = ratio_db(side_max / peak);
    let islr = pslr.and(Some(10.0 * (side_sum / main).log10()));

    // 2D: rectangle bounded by the first minima of the two zero cuts
    let i0 = origin_index(full.tau0, full.dtau, full.n_tau)?;
    let j0 = origin_index(full.nu0, full.dnu, full.n_nu)?;
    let row: Vec<f64> = (0..full.n_tau).map(|i| full.at(i, j0).norm()).collect();
    let col: Vec<f64> = (0..full.n_nu).map(|j| full.at(i0, j).norm()).collect();
    let (ilo, ihi) = main_lobe(&row, i0);
    let (jlo, jhi) = main_lobe(&col, j0);
    let peak2 = full.at(i0, j0).norm();
    let (mut in_sum, mut out_sum, mut out_max) = (0.0, 0.0, 0.0f64);
    for j in 0..full.n_nu {
        for i in 0..full.n_tau {
            let v = full.at(i, j).norm();
            if (ilo..=ihi).contains(&i) && (jlo..=jhi).contains(&j) {
                in_sum += v;
            } else {
                out_sum += v;
                out_max = out_max.max(v);
            }
        }
    }
    let pslr2 = ratio_db(out_max / peak2);
    let islr2 = pslr2.and(Some(10.0 * (out_sum / in_sum).log10()));
    Ok(AmbiguityMetrics {
        mlw_bins: mlw20,
        mlw_bins_10log: mlw10,
        pslr_db: pslr,
        islr_db: islr,
        pslr_2d_db: pslr2,
        islr_2d_db: islr2,
    })
}

/// Resolution settings for [`ambiguity_metrics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsResolution {
    /// Zero-Doppler cut samples per delay bin 1/B.
    pub cut_per_bin: usize,
    /// White-box grid samples per delay bin and per Doppler bin 1/T.
    pub grid_per_bin: usize,
}

impl Default for MetricsResolution {
    fn default() -> Self {
        Self { cut_per_bin: 1000, grid_per_bin: 2 }
    }
}

/// Closed-form metrics over the white-box window.
pub fn ambiguity_metrics(cfg: &SystemConfig, spec: &FilterSpec, res: MetricsResolution) -> Result<AmbiguityMetrics> {
    let cf = ClosedForm::new(spec, cfg)?;
    let half_bins = (cfg.m / 2) as f64;
    let step = 1.0 / (res.cut_per_bin as f64 * cfg.b);
    let n_half = (half_bins * res.cut_per_bin as f64) as i64;
    let taus: Vec<f64> = (-n_half..=n_half).map(|i| i as f64 * step).collect();
    let vals: Vec<C64> = taus.par_iter().map(|&t| cf.eval(t, 0.0)).collect::<Result<_>>()?;
    let cut = DDGrid::new(taus[0], 0.0, step, 1.0, taus.len(), 1, vals)?;
    let g = res.grid_per_bin as f64;
    let half_t = (cfg.m as f64 * g / 2.0).floor() / (g * cfg.b);
    let half_n = (cfg.n as f64 * g / 2.0).floor() / (g * cfg.t);
    let win = DDWindow { tau_min: -half_t, tau_max: half_t, nu_min: -half_n, nu_max: half_n };
    let full = amb_grid(&cf, &win, 1.0 / (g * cfg.b), 1.0 / (g * cfg.t))?;
    lobe_metrics(cfg, &cut, &full)
}

// ------------------------------------------------------------- validation

/// Closed form vs oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub filter: FilterKind,
    pub n_points: usize,
    pub max_abs_dev: f64,
    pub tol: f64,
    pub pass: bool,
    pub closed_secs: f64,
    pub oracle_secs: f64,
    pub synth_secs: f64,
}

/// Waveform sampling used by the oracle: rate 2B with ±1 s of sinc tail
/// (truncation error ≈ N/(π²B·1 s) ≈ 5e-6), rate 4B otherwise.
pub fn oracle_waveform(cfg: &SystemConfig, spec: &FilterSpec) -> Result<TimeSamples> {
    use crate::filters::{synthesize_waveform_with, SynthOptions};
    let opts = match spec.kind {
        FilterKind::Sinc => SynthOptions { rate: 2.0 * cfg.b, sinc_tail_s: 1.0, normalize: true },
        _ => SynthOptions { rate: 4.0 * cfg.b, sinc_tail_s: 0.0, normalize: true },
    };
    synthesize_waveform_with(spec, cfg, &opts)
}

/// Random points for validation: half anywhere in the white-box window,
/// half within eight bins of the origin, delays on the oracle's lattice.
pub fn validation_points(cfg: &SystemConfig, rate: f64, n_points: usize, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let half_d = (cfg.tau_p / 2.0 * rate).floor() as i64;
    (0..n_points)
        .map(|i| {
            if i % 2 == 0 {
                let d = rng.gen_range(-half_d..=half_d);
                (d as f64 / rate, rng.gen_range(-cfg.nu_p / 2.0..cfg.nu_p / 2.0))
            } else {
                let span = (8.0 * rate / cfg.b) as i64;
                let d = rng.gen_range(-span..=span);
                (d as f64 / rate, rng.gen_range(-8.0 / cfg.t..8.0 / cfg.t))
            }
        })
        .collect()
}

/// Max |closed − oracle| over random points, with timings.
pub fn validate_closed_vs_oracle(
    cfg: &SystemConfig,
    spec: &FilterSpec,
    n_points: usize,
    tol: f64,
    seed: u64,
) -> Result<ValidationReport> {
    if n_points < 1 {
        return Err(Error::InvalidArgument("n_points must be at least 1".into()));
    }
    let t = std::time::Instant::now();
    let x = oracle_waveform(cfg, spec)?;
    let synth_secs = t.elapsed().as_secs_f64();
    let pts = validation_points(cfg, x.rate, n_points, seed);
    let cf = ClosedForm::new(spec, cfg)?;
    let t = std::time::Instant::now();
    let closed: Vec<C64> = pts.iter().map(|&(a, b)| cf.eval(a, b)).collect::<Result<_>>()?;
    let closed_secs = t.elapsed().as_secs_f64();
    let t = std::time::Instant::now();
    let oracle: Vec<C64> = pts.iter().map(|&(a, b)| amb_oracle(&x, a, b)).collect::<Result<_>>()?;
    let oracle_secs = t.elapsed().as_secs_f64();
    let max_abs_dev = closed.iter().zip(&oracle).map(|(a, b)| (a - b).norm()).fold(0.0, nan_max);
    Ok(ValidationReport {
        filter: spec.kind,
        n_points,
        max_abs_dev,
        tol,
        pass: max_abs_dev <= tol,
        closed_secs,
        oracle_secs,
        synth_secs,
    })
}
