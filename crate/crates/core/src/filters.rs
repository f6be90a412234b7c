//! Pulse-shaping filters and the time-domain probing waveform
//! x(t) = w1(t) ⋆ (W2(t)·p(t)) for a point pulsone p at the origin.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{SystemConfig, TimeSamples};
use crate::error::{Error, Result};
use crate::numerics::{erf, integrate_1d, sinc, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Sinc,
    #[serde(alias = "gauss")]
    Gaussian,
    #[serde(rename = "gs", alias = "gaussiansinc")]
    GaussianSinc,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Sinc, FilterKind::Gaussian, FilterKind::GaussianSinc];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Sinc => "sinc",
            FilterKind::Gaussian => "gauss",
            FilterKind::GaussianSinc => "gs",
        }
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sinc" => Ok(FilterKind::Sinc),
            "gauss" | "gaussian" => Ok(FilterKind::Gaussian),
            "gs" | "gaussiansinc" | "gaussian-sinc" => Ok(FilterKind::GaussianSinc),
            other => Err(Error::Config(format!("unknown filter `{other}` (sinc, gauss, gs)"))),
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Filter kind plus shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub alpha_tau: f64,
    pub alpha_nu: f64,
    pub omega_tau: f64,
    pub omega_nu: f64,
}

/// Default Gaussian shape parameter.
pub const GAUSS_ALPHA: f64 = 1.584;
/// Default Gaussian-sinc roll-off.
pub const GS_ALPHA: f64 = 0.044;

/// Ω making Ω²∫sinc²(u)e^{-2αu²}du = 1, i.e. a unit-energy GS pulse.
pub fn gs_omega(alpha: f64) -> f64 {
    static DEFAULT: OnceLock<f64> = OnceLock::new();
    let compute = |alpha: f64| {
        // integrand negligible beyond e^{-2αu²} < 1e-20
        let hi = (23.0 / alpha).sqrt() + 2.0;
        let v = integrate_1d(
            |u| C64::new(sinc(u).powi(2) * (-2.0 * alpha * u * u).exp(), 0.0),
            0.0,
            hi,
            QuadratureSpec::new(1e-14, 1e-16, 20_000).expect("valid"),
        )
        .expect("smooth integrand converges");
        (2.0 * v.re).powf(-0.5)
    };
    if alpha == GS_ALPHA {
        *DEFAULT.get_or_init(|| compute(GS_ALPHA))
    } else {
        compute(alpha)
    }
}

impl FilterSpec {
    pub fn sinc() -> Self {
        Self { kind: FilterKind::Sinc, alpha_tau: 0.0, alpha_nu: 0.0, omega_tau: 1.0, omega_nu: 1.0 }
    }
    pub fn gaussian() -> Self {
        Self { kind: FilterKind::Gaussian, alpha_tau: GAUSS_ALPHA, alpha_nu: GAUSS_ALPHA, omega_tau: 1.0, omega_nu: 1.0 }
    }
    /// Ω is computed from exact unit energy (1.02775…), usually quoted as 1.0278.
    pub fn gaussian_sinc() -> Self {
        let om = gs_omega(GS_ALPHA);
        Self { kind: FilterKind::GaussianSinc, alpha_tau: GS_ALPHA, alpha_nu: GS_ALPHA, omega_tau: om, omega_nu: om }
    }
    pub fn for_kind(kind: FilterKind) -> Self {
        match kind {
            FilterKind::Sinc => Self::sinc(),
            FilterKind::Gaussian => Self::gaussian(),
            FilterKind::GaussianSinc => Self::gaussian_sinc(),
        }
    }
    /// GS spec with the given roll-offs and matching unit-energy Ω.
    pub fn gaussian_sinc_with(alpha_tau: f64, alpha_nu: f64) -> Self {
        Self {
            kind: FilterKind::GaussianSinc,
            alpha_tau,
            alpha_nu,
            omega_tau: gs_omega(alpha_tau),
            omega_nu: gs_omega(alpha_nu),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let used = match self.kind {
            FilterKind::Sinc => vec![self.omega_tau, self.omega_nu],
            _ => vec![self.alpha_tau, self.alpha_nu, self.omega_tau, self.omega_nu],
        };
        if used.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!("filter parameters must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Delay filter w1(τ).
pub fn eval_w1(spec: &FilterSpec, cfg: &SystemConfig, tau: f64) -> f64 {
    let b = cfg.b;
    match spec.kind {
        FilterKind::Sinc => b.sqrt() * sinc(b * tau),
        FilterKind::Gaussian => {
            let a = spec.alpha_tau * b * b;
            (2.0 * a / PI).powf(0.25) * (-a * tau * tau).exp()
        }
        FilterKind::GaussianSinc => {
            spec.omega_tau * b.sqrt() * sinc(b * tau) * (-spec.alpha_tau * b * b * tau * tau).exp()
        }
    }
}

/// Doppler filter w2(ν).
pub fn eval_w2(spec: &FilterSpec, cfg: &SystemConfig, nu: f64) -> f64 {
    let t = cfg.t;
    match spec.kind {
        FilterKind::Sinc => t.sqrt() * sinc(t * nu),
        FilterKind::Gaussian => {
            let a = spec.alpha_nu * t * t;
            (2.0 * a / PI).powf(0.25) * (-a * nu * nu).exp()
        }
        FilterKind::GaussianSinc => {
            spec.omega_nu * t.sqrt() * sinc(t * nu) * (-spec.alpha_nu * t * t * nu * nu).exp()
        }
    }
}

/// w_tx(τ, ν) = w1(τ)·w2(ν).
pub fn eval_wtx(spec: &FilterSpec, cfg: &SystemConfig, tau: f64, nu: f64) -> f64 {
    eval_w1(spec, cfg, tau) * eval_w2(spec, cfg, nu)
}

/// W2(t) = ∫ w2(ν) e^{j2πνt} dν in closed form.
pub fn eval_w2_time(spec: &FilterSpec, cfg: &SystemConfig, t: f64) -> C64 {
    let tt = cfg.t;
    let v = match spec.kind {
        FilterKind::Sinc => {
            let h = 0.5 * tt;
            if t.abs() < h {
                1.0 / tt.sqrt()
            } else if t.abs() == h {
                0.5 / tt.sqrt()
            } else {
                0.0
            }
        }
        FilterKind::Gaussian => {
            let a = spec.alpha_nu * tt * tt;
            (2.0 * a / PI).powf(0.25) * (PI / a).sqrt() * (-PI * PI * t * t / a).exp()
        }
        FilterKind::GaussianSinc => {
            // rect(t/T)/√T smoothed by the transform of e^{-αT²ν²}
            let s = PI / (spec.alpha_nu.sqrt() * tt);
            spec.omega_nu / tt.sqrt() * 0.5 * (erf(s * (t + 0.5 * tt)) - erf(s * (t - 0.5 * tt)))
        }
    };
    C64::new(v, 0.0)
}

/// Pulse-train representation of x(t) = Σ_k c_k w1(t − kτp).
#[derive(Debug, Clone)]
pub struct Waveform {
    pub spec: FilterSpec,
    pub cfg: SystemConfig,
    /// (k, c_k) with c_k = √τp·W2(kτp), already scaled by `norm`.
    pub pulses: Vec<(i64, f64)>,
    /// Support radius of each w1 kernel (infinite for sinc).
    pub kernel_radius: f64,
    /// Samples-free sinc evaluation: multipole moments of Σ c_k/(t − kτp).
    moments: Vec<f64>,
}

/// Relative threshold below which pulses and kernel tails are dropped.
const PULSE_FLOOR: f64 = 1e-17;

fn kernel_radius(spec: &FilterSpec, cfg: &SystemConfig) -> f64 {
    let b = cfg.b;
    match spec.kind {
        FilterKind::Sinc => f64::INFINITY,
        // e^{-αB²t²} < 1e-17
        FilterKind::Gaussian => (39.2 / spec.alpha_tau).sqrt() / b,
        FilterKind::GaussianSinc => {
            // e^{-αB²t²}/(πBt) < 1e-16
            let mut u = 1.0_f64;
            while (-spec.alpha_tau * u * u).exp() / (PI * u) > 1e-16 {
                u += 0.25;
            }
            u / b
        }
    }
}

impl Waveform {
    pub fn new(spec: &FilterSpec, cfg: &SystemConfig) -> Result<Self> {
        spec.validate()?;
        let pulses: Vec<(i64, f64)> = match spec.kind {
            FilterKind::Sinc => {
                // exactly N pulses inside [−T/2, T/2)
                let n = cfg.n as i64;
                let lo = if n % 2 == 0 { -n / 2 } else { -(n - 1) / 2 };
                let c = 1.0 / (cfg.n as f64).sqrt();
                (lo..lo + n).map(|k| (k, c)).collect()
            }
            _ => {
                let c0 = eval_w2_time(spec, cfg, 0.0).re;
                let mut v = vec![(0i64, cfg.tau_p.sqrt() * c0)];
                let mut k = 1i64;
                loop {
                    let w = eval_w2_time(spec, cfg, k as f64 * cfg.tau_p).re;
                    if w.abs() < PULSE_FLOOR * c0 {
                        break;
                    }
                    let c = cfg.tau_p.sqrt() * w;
                    v.push((k, c));
                    v.push((-k, c));
                    k += 1;
                }
                v.sort_by_key(|p| p.0);
                v
            }
        };
        let mut wf = Self { spec: *spec, cfg: *cfg, pulses, kernel_radius: kernel_radius(spec, cfg), moments: vec![] };
        if spec.kind == FilterKind::Sinc {
            wf.build_moments();
        }
        Ok(wf)
    }

    fn build_moments(&mut self) {
        // μ_p = Σ_k c_k (kτp)^p, for the far-field expansion Σ_p μ_p / t^{p+1}
        let mut m = Vec::with_capacity(80);
        for p in 0..80 {
            m.push(self.pulses.iter().map(|&(k, c)| c * (k as f64 * self.cfg.tau_p).powi(p)).sum());
        }
        self.moments = m;
    }

    /// Half-width of the interval holding all pulse centres.
    pub fn pulse_extent(&self) -> f64 {
        self.pulses.iter().map(|p| p.0.unsigned_abs()).max().unwrap_or(0) as f64 * self.cfg.tau_p
    }

    /// x(t) evaluated analytically.
    pub fn eval(&self, t: f64) -> f64 {
        let tp = self.cfg.tau_p;
        match self.spec.kind {
            FilterKind::Sinc => {
                let u = self.cfg.b * t;
                let r = u.round();
                // snap rounding noise onto the Nyquist lattice
                let u = if (u - r).abs() <= 1e-12 * r.abs().max(1.0) { r } else { u };
                self.eval_sinc(t, u)
            }
            _ => {
                let r = self.kernel_radius;
                let klo = ((t - r) / tp).ceil() as i64;
                let khi = ((t + r) / tp).floor() as i64;
                let first = self.pulses[0].0;
                let mut acc = 0.0;
                for k in klo..=khi {
                    let idx = k - first;
                    if idx < 0 || idx as usize >= self.pulses.len() {
                        continue;
                    }
                    let (_, c) = self.pulses[idx as usize];
                    acc += c * eval_w1(&self.spec, &self.cfg, t - k as f64 * tp);
                }
                acc
            }
        }
    }

    /// x at sample i of a `rate` lattice, with Bt formed exactly.
    pub fn eval_sample(&self, i: i64, rate: f64) -> f64 {
        let t = i as f64 / rate;
        match self.spec.kind {
            FilterKind::Sinc => self.eval_sinc(t, i as f64 * (self.cfg.b / rate)),
            _ => self.eval(t),
        }
    }

    fn eval_sinc(&self, t: f64, u: f64) -> f64 {
        // √B Σ c_k sinc(B(t − kτp)) = sin(πBt)/(π√B) Σ c_k (−1)^{Mk}/(t − kτp)
        let b = self.cfg.b;
        let tp = self.cfg.tau_p;
        if (u - u.round()).abs() < 1e-9 {
            // on the Nyquist lattice only the coincident pulse survives
            let k = (t / tp).round() as i64;
            if (k as f64 * tp * b - u).abs() < 0.5 {
                if let Ok(i) = self.pulses.binary_search_by_key(&k, |p| p.0) {
                    return self.pulses[i].1 * b.sqrt();
                }
            }
            return 0.0;
        }
        let s = (PI * (u - 2.0 * (0.5 * u).round())).sin();
        let odd_m = self.cfg.m % 2 == 1;
        let ext = self.pulse_extent();
        let sum = if !odd_m && t.abs() > 3.0 * ext {
            let r = ext / t.abs();
            let mut acc = 0.0;
            let mut tp_pow = 1.0 / t;
            for (p, mu) in self.moments.iter().enumerate() {
                let term = mu * tp_pow;
                acc += term;
                tp_pow /= t;
                if p > 4 && r.powi(p as i32) < 1e-18 {
                    break;
                }
            }
            acc
        } else {
            self.pulses
                .iter()
                .map(|&(k, c)| {
                    let sgn = if odd_m && k.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                    sgn * c / (t - k as f64 * tp)
                })
                .sum()
        };
        s / (PI * b.sqrt()) * sum
    }
}

/// Options for [`synthesize_waveform_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub rate: f64,
    /// Extra support on each side of the pulse train for the sinc filter, in s.
    pub sinc_tail_s: f64,
    /// Rescale to unit sampled energy.
    pub normalize: bool,
}

impl SynthOptions {
    pub fn new(cfg: &SystemConfig) -> Self {
        Self { rate: 4.0 * cfg.b, sinc_tail_s: 0.05, normalize: true }
    }
}

/// Sampled x(t) at `rate` with default options.
pub fn synthesize_waveform(spec: &FilterSpec, cfg: &SystemConfig, rate: f64) -> Result<TimeSamples> {
    synthesize_waveform_with(spec, cfg, &SynthOptions { rate, ..SynthOptions::new(cfg) })
}

/// Sampled x(t). Samples sit on the lattice t = i/rate, so every pulse
/// centre kτp is a sample instant.
pub fn synthesize_waveform_with(spec: &FilterSpec, cfg: &SystemConfig, opts: &SynthOptions) -> Result<TimeSamples> {
    let rate = opts.rate;
    if !(rate >= cfg.b) {
        return Err(Error::InvalidArgument(format!("rate {rate} Hz is below the bandwidth {} Hz", cfg.b)));
    }
    let spp = rate * cfg.tau_p;
    if (spp - spp.round()).abs() > 1e-9 * spp {
        return Err(Error::InvalidArgument(format!("rate*tau_p = {spp} is not an integer")));
    }
    let wf = Waveform::new(spec, cfg)?;
    let extent = match spec.kind {
        FilterKind::Sinc => wf.pulse_extent() + cfg.tau_p + opts.sinc_tail_s.max(0.0),
        _ => wf.pulse_extent() + wf.kernel_radius,
    };
    let half = (extent * rate).ceil() as i64;
    let count = (2 * half + 1) as usize;
    let mut values: Vec<C64> = (0..count)
        .into_par_iter()
        .map(|i| C64::new(wf.eval_sample(i as i64 - half, rate), 0.0))
        .collect();
    let mut ts = TimeSamples { rate, t0: -(half as f64) / rate, values: vec![] };
    if opts.normalize {
        let e: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / rate;
        let s = 1.0 / e.sqrt();
        values.iter_mut().for_each(|v| *v *= s);
    }
    ts.values = values;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_matches_rounded_value() {
        let om = gs_omega(GS_ALPHA);
        assert!((om - 1.0278).abs() < 1e-4, "{om}");
        assert!((om - 1.027_750_938_836_36).abs() < 1e-10, "{om}");
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("gs".parse::<FilterKind>().unwrap(), FilterKind::GaussianSinc);
        assert_eq!("Gaussian".parse::<FilterKind>().unwrap(), FilterKind::Gaussian);
        assert!("rrc".parse::<FilterKind>().is_err());
    }
}
