//! Radar scenes: targets and fades, the noiseless cross-ambiguity and
//! noise in the cross-ambiguity domain with covariance
//! E[A_n(p1) A_n*(p2)] = N0 e^{-j2πν2(τ2−τ1)} A(τ1−τ2, ν1−ν2).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{Ambiguity, ClosedForm, DDWindow};
use crate::dd::{DDGrid, SystemConfig, TimeSamples};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, Waveform};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Point scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub tau: f64,
    pub nu: f64,
    pub h: C64,
}

/// DD rectangle the targets are drawn from.
pub type SceneWindow = DDWindow;

impl DDWindow {
    pub fn new(tau_min: f64, tau_max: f64, nu_min: f64, nu_max: f64) -> Result<Self> {
        if !(tau_min < tau_max && nu_min < nu_max) {
            return Err(Error::Geometry(format!(
                "window [{tau_min}, {tau_max}] x [{nu_min}, {nu_max}] is empty"
            )));
        }
        Ok(Self { tau_min, tau_max, nu_min, nu_max })
    }
    /// Ω_d = [200, 201] µs × [−200, 200] Hz.
    pub fn dense() -> Self {
        Self { tau_min: 200e-6, tau_max: 201e-6, nu_min: -200.0, nu_max: 200.0 }
    }
    /// Ω_s = [200, 205] µs × [−1000, 1000] Hz.
    pub fn sparse() -> Self {
        Self { tau_min: 200e-6, tau_max: 205e-6, nu_min: -1000.0, nu_max: 1000.0 }
    }
    pub fn contains(&self, tau: f64, nu: f64) -> bool {
        (self.tau_min..=self.tau_max).contains(&tau) && (self.nu_min..=self.nu_max).contains(&nu)
    }
}

/// Noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub snr_db: f64,
    pub n0: f64,
}

/// Fade variance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FadeModel {
    /// E|h|² = (10⁻⁷/τ)⁴.
    #[default]
    Absolute,
    /// E|h|² = (10⁻⁷/τ_min)⁴ · min(1, (10⁻⁷/(τ − τ_min))⁴): the relative-SNR
    /// reading of the scene description, capped at the reference target.
    RelativeToMin,
}

impl FadeModel {
    pub fn variance(&self, tau: f64, tau_min: f64) -> f64 {
        let base = |t: f64| (1e-7 / t).powi(4);
        match self {
            FadeModel::Absolute => base(tau),
            FadeModel::RelativeToMin => {
                let dt = tau - tau_min;
                let rel = if dt <= 0.0 { 1.0 } else { base(dt).min(1.0) };
                base(tau_min) * rel
            }
        }
    }
}

/// Circular complex normal with E|z|² = var.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    C64::new(s * a, s * b)
}

/// `count` targets uniform in `window` with CN(0, σ²(τ)) fades, σ² per `fade`
/// referenced to `tau_min_ref`.
pub fn draw_scene<R: Rng + ?Sized>(
    window: &SceneWindow,
    count: usize,
    tau_min_ref: f64,
    fade: FadeModel,
    rng: &mut R,
) -> Result<Vec<Target>> {
    if count < 1 {
        return Err(Error::InvalidArgument("a scene needs at least one target".into()));
    }
    Ok((0..count)
        .map(|_| {
            let tau = rng.gen_range(window.tau_min..=window.tau_max);
            let nu = rng.gen_range(window.nu_min..=window.nu_max);
            let h = complex_normal(rng, fade.variance(tau, tau_min_ref));
            Target { tau, nu, h }
        })
        .collect())
}

/// N0 = (10⁻⁷/τ_min)⁴ Ep / (B T 10^{SNR/10}).
pub fn n0_from_snr(snr_db: f64, tau_min: f64, cfg: &SystemConfig) -> NoiseModel {
    let n0 = (1e-7 / tau_min).powi(4) * cfg.e_p / (cfg.b * cfg.t * 10f64.powf(snr_db / 10.0));
    NoiseModel { snr_db, n0 }
}

/// τp and νp strictly exceed the delay and Doppler spreads.
pub fn crystallization_check(targets: &[Target], cfg: &SystemConfig) -> bool {
    let spread = |f: &dyn Fn(&Target) -> f64| {
        let lo = targets.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = targets.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if targets.is_empty() {
            0.0
        } else {
            hi - lo
        }
    };
    cfg.tau_p > spread(&|t| t.tau) && cfg.nu_p > spread(&|t| t.nu)
}

/// Geometry of a uniform DD grid without values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub tau0: f64,
    pub nu0: f64,
    pub dtau: f64,
    pub dnu: f64,
    pub n_tau: usize,
    pub n_nu: usize,
}

impl GridGeometry {
    pub fn of(g: &DDGrid) -> Self {
        Self { tau0: g.tau0, nu0: g.nu0, dtau: g.dtau, dnu: g.dnu, n_tau: g.n_tau, n_nu: g.n_nu }
    }
    pub fn zeros(&self) -> Result<DDGrid> {
        DDGrid::zeros(self.tau0, self.nu0, self.dtau, self.dnu, self.n_tau, self.n_nu)
    }
    pub fn tau(&self, i: usize) -> f64 {
        self.tau0 + i as f64 * self.dtau
    }
    pub fn nu(&self, j: usize) -> f64 {
        self.nu0 + j as f64 * self.dnu
    }
}

/// Σᵢ hᵢ A(τ−τᵢ, ν−νᵢ) e^{j2πνᵢ(τ−τᵢ)} on the grid.
pub fn synth_cross_amb(targets: &[Target], amb: &dyn Ambiguity, geom: &GridGeometry) -> Result<DDGrid> {
    let rows: Vec<Result<Vec<C64>>> = (0..geom.n_nu)
        .into_par_iter()
        .map(|j| {
            let nu = geom.nu(j);
            let mut row = vec![ZERO; geom.n_tau];
            for t in targets {
                for (i, v) in row.iter_mut().enumerate() {
                    let dt = geom.tau(i) - t.tau;
                    let a = amb.amb(dt, nu - t.nu)?;
                    *v += t.h * a * C64::from_polar(1.0, 2.0 * PI * t.nu * dt);
                }
            }
            Ok(row)
        })
        .collect();
    let mut g = geom.zeros()?;
    for (j, r) in rows.into_iter().enumerate() {
        g.values[j * geom.n_tau..(j + 1) * geom.n_tau].copy_from_slice(&r?);
    }
    Ok(g)
}

/// A point of the delay-Doppler plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DDPoint {
    pub tau: f64,
    pub nu: f64,
}

/// E[A_n(p1) A_n*(p2)] = N0 e^{-j2πν2(τ2−τ1)} A(τ1−τ2, ν1−ν2).
pub fn noise_cov(p1: DDPoint, p2: DDPoint, n0: f64, amb: &dyn Ambiguity) -> Result<C64> {
    let a = amb.amb(p1.tau - p2.tau, p1.nu - p2.nu)?;
    Ok(C64::from_polar(n0, -2.0 * PI * p2.nu * (p2.tau - p1.tau)) * a)
}

/// One joint draw of A_n at the points via Cholesky factorization of the
/// covariance. Coincident points share one draw.
pub fn draw_noise_points<R: Rng + ?Sized>(
    points: &[DDPoint],
    n0: f64,
    amb: &dyn Ambiguity,
    rng: &mut R,
) -> Result<Vec<C64>> {
    let mut uniq: Vec<DDPoint> = Vec::new();
    let map: Vec<usize> = points
        .iter()
        .map(|p| match uniq.iter().position(|u| u == p) {
            Some(i) => i,
            None => {
                uniq.push(*p);
                uniq.len() - 1
            }
        })
        .collect();
    let chol = noise_factor(&uniq, n0, amb)?;
    let w = DVector::from_iterator(uniq.len(), (0..uniq.len()).map(|_| complex_normal(rng, 1.0)));
    let z = chol * w;
    Ok(map.iter().map(|&i| z[i]).collect())
}

/// Lower Cholesky factor of the noise covariance at the points.
pub fn noise_factor(points: &[DDPoint], n0: f64, amb: &dyn Ambiguity) -> Result<DMatrix<C64>> {
    let n = points.len();
    let mut c = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = noise_cov(points[i], points[j], n0, amb)?;
            c[(i, j)] = v;
            c[(j, i)] = v.conj();
        }
    }
    if let Some(ch) = c.clone().cholesky() {
        return Ok(ch.l());
    }
    for i in 0..n {
        c[(i, i)] += C64::new(1e-12 * n0, 0.0);
    }
    c.cholesky()
        .map(|ch| ch.l())
        .ok_or_else(|| Error::Numerical("noise covariance is not positive definite after regularization".into()))
}

/// Kernel radius used by the noise field, in units of 1/B.
pub fn noise_kernel_radius_bins(kind: FilterKind) -> f64 {
    match kind {
        // tail energy of a truncated sinc ≈ 2/(π² U) = 0.3 % at U = 64
        FilterKind::Sinc => 64.0,
        FilterKind::Gaussian => 6.0,
        FilterKind::GaussianSinc => 24.0,
    }
}

/// Time-domain AWGN of density N0 (per-sample variance N0·rate) pushed
/// through the cross-ambiguity with x, evaluated on a grid whose delays sit
/// on the 1/rate lattice and whose Doppler step divides νp.
///
/// Uses the pulse structure x(t) = Σ_k c_k w1(t − kτp): noise is drawn only
/// on the segments each pulse touches, and the Doppler phase across a
/// pulse, e^{-j2πνu/rate}, is expanded in a short Taylor series so that all
/// Doppler rows follow from one FFT over the pulse index.
pub fn draw_noise_field<R: Rng + ?Sized>(
    wf: &Waveform,
    rate: f64,
    n0: f64,
    geom: &GridGeometry,
    rng: &mut R,
) -> Result<DDGrid> {
    let cfg = &wf.cfg;
    let lat = |v: f64, what: &str| -> Result<i64> {
        let r = v.round();
        if (v - r).abs() > 1e-6 {
            return Err(Error::Geometry(format!("{what} = {v} is not an integer")));
        }
        Ok(r as i64)
    };
    let spp = lat(rate * cfg.tau_p, "rate*tau_p")?;
    let d0 = lat(geom.tau0 * rate, "tau0*rate")?;
    let dstep = lat(geom.dtau * rate, "dtau*rate")?;
    let k_fft = lat(1.0 / (geom.dnu * cfg.tau_p), "1/(dnu*tau_p)")? as usize;
    if dstep < 1 || k_fft < geom.n_nu {
        return Err(Error::Geometry(format!(
            "noise field needs dtau*rate >= 1 and n_nu <= 1/(dnu*tau_p) = {k_fft}"
        )));
    }
    let mut out = geom.zeros()?;
    if n0 == 0.0 {
        return Ok(out);
    }
    let radius = (noise_kernel_radius_bins(wf.spec.kind) / cfg.b * rate).ceil() as i64;
    let taps: Vec<f64> = (-radius..=radius).map(|u| crate::filters::eval_w1(&wf.spec, cfg, u as f64 / rate)).collect();
    let d_last = d0 + dstep * (geom.n_tau as i64 - 1);
    let seg_lo = d0 - radius;
    let seg_len = (d_last + radius - seg_lo + 1) as usize;
    let nu_max = (0..geom.n_nu).map(|j| geom.nu(j).abs()).fold(0.0, f64::max);
    // Taylor order so that (2πν r/rate)^Q/Q! < 1e-13
    let x = 2.0 * PI * nu_max * radius as f64 / rate;
    let mut n_q = 1usize;
    let mut term = 1.0;
    while term > 1e-13 && n_q < 40 {
        term *= x / n_q as f64;
        n_q += 1;
    }
    if seg_len as i64 > spp {
        return Err(Error::Geometry(format!(
            "grid delay span plus kernel ({seg_len} samples) exceeds one delay period ({spp})"
        )));
    }
    let sigma = (n0 * rate).sqrt();
    // moments m[q][d][k mod K] accumulated from each pulse's noise segment
    let nd = geom.n_tau;
    let mut mom = vec![vec![vec![ZERO; k_fft]; nd]; n_q];
    let nu0 = geom.nu0;
    let mut seg = vec![ZERO; seg_len];
    let mut upow = vec![vec![0.0; taps.len()]; n_q];
    for (ui, u) in (-radius..=radius).enumerate() {
        let mut p = 1.0;
        for row in upow.iter_mut() {
            row[ui] = taps[ui] * p;
            p *= u as f64;
        }
    }
    for &(k, c) in &wf.pulses {
        for s in seg.iter_mut() {
            *s = complex_normal(rng, 1.0) * sigma;
        }
        let slot = k.rem_euclid(k_fft as i64) as usize;
        // pre-twist for the grid's first Doppler row
        let twist = C64::from_polar(c, -2.0 * PI * nu0 * k as f64 * cfg.tau_p);
        for di in 0..nd {
            let base = (dstep * di as i64) as usize; // offset of u = −radius
            let window = &seg[base..base + taps.len()];
            for q in 0..n_q {
                let w = &upow[q];
                let mut acc = ZERO;
                for (s, wt) in window.iter().zip(w) {
                    acc += s * wt;
                }
                mom[q][di][slot] += acc * twist;
            }
        }
    }
    let fft = FftPlanner::new().plan_fft_forward(k_fft);
    for q in 0..n_q {
        let mut fact = 1.0;
        for i in 1..=q {
            fact *= i as f64;
        }
        for di in 0..nd {
            let buf = &mut mom[q][di];
            fft.process(buf);
            for j in 0..geom.n_nu {
                let nu = geom.nu(j);
                let coef = C64::new(0.0, -2.0 * PI * nu / rate).powu(q as u32) / fact;
                *out.at_mut(di, j) += buf[j] * coef / rate;
            }
        }
    }
    Ok(out)
}

/// Reference noise field: draws AWGN on every sample of `x` and evaluates
/// Σ n[i] x*[i−d] e^{-j2πν(t_i−τ)}/rate directly. Slow; for tests.
pub fn draw_noise_field_direct<R: Rng + ?Sized>(
    x: &TimeSamples,
    n0: f64,
    geom: &GridGeometry,
    rng: &mut R,
) -> Result<DDGrid> {
    let sigma = (n0 * x.rate).sqrt();
    let noise: Vec<C64> = (0..x.values.len()).map(|_| complex_normal(rng, 1.0) * sigma).collect();
    let n = TimeSamples { rate: x.rate, t0: x.t0, values: noise };
    cross_correlate_direct(&n, x, geom)
}

/// Σ y[i] x*[i−d] e^{-j2πν(t_i−τ)}/rate on the grid (y and x share t0 and rate).
pub fn cross_correlate_direct(y: &TimeSamples, x: &TimeSamples, geom: &GridGeometry) -> Result<DDGrid> {
    let mut out = geom.zeros()?;
    let len = x.values.len() as i64;
    for i in 0..geom.n_tau {
        let tau = geom.tau(i);
        let dr = tau * x.rate;
        let d = dr.round() as i64;
        if (dr - d as f64).abs() > 1e-6 {
            return Err(Error::Geometry("grid delays must sit on the sample lattice".into()));
        }
        for j in 0..geom.n_nu {
            let nu = geom.nu(j);
            let mut acc = ZERO;
            for s in d.max(0)..len.min(y.values.len() as i64 + d).min(len) {
                let si = s as usize;
                if si >= y.values.len() {
                    break;
                }
                let t = x.t0 + s as f64 / x.rate - tau;
                acc += y.values[si] * x.values[(s - d) as usize].conj() * C64::from_polar(1.0, -2.0 * PI * nu * t);
            }
            *out.at_mut(i, j) = acc / x.rate;
        }
    }
    Ok(out)
}

/// Closed-form evaluator for a filter, boxed for the scene functions.
pub fn closed_form(spec: &crate::filters::FilterSpec, cfg: &SystemConfig) -> Result<ClosedForm> {
    ClosedForm::new(spec, cfg)
}
