//! Delay-Doppler lattice configuration, sampled containers, the discrete
//! Zak transform pair and twisted convolution.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Waveform and lattice parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub b: f64,
    pub t: f64,
    pub tau_p: f64,
    pub nu_p: f64,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub f_c: f64,
    pub e_p: f64,
}

fn integral(x: f64, what: &str) -> Result<usize> {
    let r = x.round();
    if r < 1.0 || (x - r).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::Config(format!(
            "{what} = {x} must be a positive integer (the lattice needs integral M = B*tau_p and N = T/tau_p)"
        )));
    }
    Ok(r as usize)
}

/// Build a configuration, deriving νp = 1/τp, M = Bτp and N = T/τp.
pub fn make_config(b: f64, t: f64, tau_p: f64, p: usize, q: usize, f_c: f64) -> Result<SystemConfig> {
    for (v, name) in [(b, "B"), (t, "T"), (tau_p, "tau_p"), (f_c, "f_c")] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("{name} = {v} must be positive")));
        }
    }
    if p < 1 || q < 1 {
        return Err(Error::Config(format!("oversampling P = {p}, Q = {q} must be at least 1")));
    }
    let m = integral(b * tau_p, "M = B*tau_p")?;
    let n = integral(t / tau_p, "N = T/tau_p")?;
    Ok(SystemConfig { b, t, tau_p, nu_p: 1.0 / tau_p, m, n, p, q, f_c, e_p: 1.0 })
}

impl Default for SystemConfig {
    /// B = 4 MHz, T = 20 ms, τp = 100 µs, P = Q = 4, fc = 1 GHz.
    fn default() -> Self {
        make_config(4e6, 0.02, 1e-4, 4, 4, 1e9).expect("defaults are consistent")
    }
}

impl SystemConfig {
    /// Receiver delay step 1/(PB).
    pub fn dtau(&self) -> f64 {
        1.0 / (self.p as f64 * self.b)
    }
    /// Receiver Doppler step 1/(QT).
    pub fn dnu(&self) -> f64 {
        1.0 / (self.q as f64 * self.t)
    }
    /// PQMN, the denominator of the discrete twisting phase.
    pub fn pqmn(&self) -> f64 {
        (self.p * self.q * self.m * self.n) as f64
    }
    pub fn validate(&self) -> Result<()> {
        let c = make_config(self.b, self.t, self.tau_p, self.p, self.q, self.f_c)?;
        if (self.tau_p * self.nu_p - 1.0).abs() > 1e-12 || c.m != self.m || c.n != self.n {
            return Err(Error::Config("inconsistent derived lattice parameters".into()));
        }
        Ok(())
    }
}

/// Uniform samples of a complex function on a DD rectangle, delay fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DDGrid {
    pub tau0: f64,
    pub nu0: f64,
    pub dtau: f64,
    pub dnu: f64,
    pub n_tau: usize,
    pub n_nu: usize,
    pub values: Vec<C64>,
}

impl DDGrid {
    pub fn new(tau0: f64, nu0: f64, dtau: f64, dnu: f64, n_tau: usize, n_nu: usize, values: Vec<C64>) -> Result<Self> {
        if !(dtau > 0.0 && dnu > 0.0) {
            return Err(Error::Geometry(format!("grid steps ({dtau}, {dnu}) must be positive")));
        }
        if n_tau * n_nu != values.len() {
            return Err(Error::Geometry(format!(
                "{n_tau} x {n_nu} grid with {} values",
                values.len()
            )));
        }
        Ok(Self { tau0, nu0, dtau, dnu, n_tau, n_nu, values })
    }

    pub fn zeros(tau0: f64, nu0: f64, dtau: f64, dnu: f64, n_tau: usize, n_nu: usize) -> Result<Self> {
        Self::new(tau0, nu0, dtau, dnu, n_tau, n_nu, vec![C64::new(0.0, 0.0); n_tau * n_nu])
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[j * self.n_tau + i]
    }
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.values[j * self.n_tau + i]
    }
    pub fn tau(&self, i: usize) -> f64 {
        self.tau0 + i as f64 * self.dtau
    }
    pub fn nu(&self, j: usize) -> f64 {
        self.nu0 + j as f64 * self.dnu
    }

    pub fn same_geometry(&self, o: &Self) -> bool {
        self.n_tau == o.n_tau
            && self.n_nu == o.n_nu
            && close(self.dtau, o.dtau)
            && close(self.dnu, o.dnu)
            && close_abs(self.tau0, o.tau0, self.dtau)
            && close_abs(self.nu0, o.nu0, self.dnu)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}
fn close_abs(a: f64, b: f64, step: f64) -> bool {
    (a - b).abs() <= 1e-6 * step
}

/// Uniformly sampled time signal starting at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSamples {
    pub rate: f64,
    pub t0: f64,
    pub values: Vec<C64>,
}

impl TimeSamples {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.rate
    }
    /// Σ|x|²/rate.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.rate
    }
}

fn samples_per_period(rate: f64, cfg: &SystemConfig) -> Result<usize> {
    integral(rate * cfg.tau_p, "rate*tau_p").map_err(|e| Error::Geometry(e.to_string()))
}

/// Discrete Zak transform: g[a, l] = √τp Σ_k x[a + kL] e^{-j2πlk/K} with
/// L samples per delay period and K periods. The grid spans one delay
/// period at step 1/rate and K Doppler bins at step νp/K.
pub fn zak(x: &TimeSamples, cfg: &SystemConfig) -> Result<DDGrid> {
    let l = samples_per_period(x.rate, cfg)?;
    if x.values.is_empty() || x.values.len() % l != 0 {
        return Err(Error::Geometry(format!(
            "{} samples is not a whole number of {l}-sample periods",
            x.values.len()
        )));
    }
    let k = x.values.len() / l;
    let fft = FftPlanner::new().plan_fft_forward(k);
    let scale = cfg.tau_p.sqrt();
    let mut values = vec![C64::new(0.0, 0.0); l * k];
    let mut buf = vec![C64::new(0.0, 0.0); k];
    for a in 0..l {
        for (kk, b) in buf.iter_mut().enumerate() {
            *b = x.values[a + kk * l];
        }
        fft.process(&mut buf);
        for (li, b) in buf.iter().enumerate() {
            values[li * l + a] = b * scale;
        }
    }
    DDGrid::new(x.t0, 0.0, 1.0 / x.rate, cfg.nu_p / k as f64, l, k, values)
}

/// Inverse of [`zak`].
pub fn izak(g: &DDGrid, cfg: &SystemConfig) -> Result<TimeSamples> {
    let rate = 1.0 / g.dtau;
    let l = samples_per_period(rate, cfg)?;
    if g.n_tau != l || !close(g.dnu * g.n_nu as f64, cfg.nu_p) {
        return Err(Error::Geometry(format!(
            "grid {}x{} with steps ({}, {}) does not cover one fundamental period",
            g.n_tau, g.n_nu, g.dtau, g.dnu
        )));
    }
    let k = g.n_nu;
    let ifft = FftPlanner::new().plan_fft_inverse(k);
    let scale = 1.0 / (k as f64 * cfg.tau_p.sqrt());
    let mut values = vec![C64::new(0.0, 0.0); l * k];
    let mut buf = vec![C64::new(0.0, 0.0); k];
    for a in 0..l {
        for (li, b) in buf.iter_mut().enumerate() {
            *b = g.at(a, li);
        }
        ifft.process(&mut buf);
        for (kk, b) in buf.iter().enumerate() {
            values[a + kk * l] = b * scale;
        }
    }
    Ok(TimeSamples { rate, t0: g.tau0, values })
}

/// Value of a Zak grid at any integer delay index, using the
/// quasi-periodicity g[a + L, l] = e^{j2πl/K} g[a, l].
pub fn zak_quasi(g: &DDGrid, a: i64, l: usize) -> C64 {
    let len = g.n_tau as i64;
    let wraps = a.div_euclid(len);
    let base = g.at(a.rem_euclid(len) as usize, l);
    let ph = 2.0 * std::f64::consts::PI * (l as f64) * (wraps as f64) / g.n_nu as f64;
    base * C64::from_polar(1.0, ph)
}

/// Discrete twisted convolution with Riemann weights dτ·dν:
/// (a ∗σ b)(τ, ν) = Σ a(τ', ν') b(τ − τ', ν − ν') e^{j2πν'(τ − τ')} dτ dν.
/// Inputs must share grid steps; the output covers the full linear support.
pub fn twisted_conv(a: &DDGrid, b: &DDGrid) -> Result<DDGrid> {
    if !close(a.dtau, b.dtau) || !close(a.dnu, b.dnu) {
        return Err(Error::Geometry(format!(
            "twisted convolution needs equal steps, got ({}, {}) and ({}, {})",
            a.dtau, a.dnu, b.dtau, b.dnu
        )));
    }
    let nt = a.n_tau + b.n_tau - 1;
    let nn = a.n_nu + b.n_nu - 1;
    let mut out = DDGrid::zeros(a.tau0 + b.tau0, a.nu0 + b.nu0, a.dtau, a.dnu, nt, nn)?;
    let w = a.dtau * a.dnu;
    for ja in 0..a.n_nu {
        let nu_a = a.nu(ja);
        for ia in 0..a.n_tau {
            let va = a.at(ia, ja);
            if va == C64::new(0.0, 0.0) {
                continue;
            }
            for jb in 0..b.n_nu {
                for ib in 0..b.n_tau {
                    let ph = 2.0 * std::f64::consts::PI * nu_a * b.tau(ib);
                    *out.at_mut(ia + ib, ja + jb) += va * b.at(ib, jb) * C64::from_polar(w, ph);
                }
            }
        }
    }
    Ok(out)
}
