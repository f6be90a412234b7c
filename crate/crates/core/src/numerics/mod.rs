//! Special functions and quadrature used by the closed-form ambiguity
//! expressions and by the brute-force oracle.

mod faddeeva;
mod gaussint;
mod quad;

pub use faddeeva::{erf_cplx, exp_checked, exp_erf_diff, faddeeva, MAX_EXP};
pub use gaussint::{f_osc, f_osc_scaled, g1, g1_scaled, g2, g2_scaled};
pub use quad::{integrate_1d, QuadratureSpec};

/// Real error function through the complex routine.
pub fn erf(x: f64) -> f64 {
    erf_cplx(num_complex::Complex64::new(x, 0.0)).map(|v| v.re).unwrap_or(x.signum())
}

/// sin(πx)/(πx) with sinc(0) = 1.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}
