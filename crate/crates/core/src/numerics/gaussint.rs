//! Definite Gaussian integrals along straight segments in the complex plane.
//!
//! * g1(a,t,s) = ∫ₛᵗ e^{-ax²} dx
//! * g2(a,t,s) = ∫ₛᵗ x e^{-ax²} dx
//! * f(t,s,z,a) = ∫ₛᵗ e^{-ax²} e^{-jzx} dx
//!
//! Each has a `*_scaled` twin that multiplies by e^{c} inside the exponent
//! bookkeeping, which is how the ambiguity closed forms avoid overflow.

use num_complex::Complex64 as C64;

use super::faddeeva::{exp_checked, exp_erf_diff};
use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// e^{c}·g1(a,t,s).
pub fn g1_scaled(c: C64, a: C64, t: C64, s: C64) -> Result<C64> {
    if !(finite(a) && finite(t) && finite(s)) {
        return Err(Error::InvalidArgument(format!("g1({a}, {t}, {s})")));
    }
    if t == s {
        return Ok(C64::new(0.0, 0.0));
    }
    if a == C64::new(0.0, 0.0) {
        // no branch for √a; the integrand is 1
        return Ok(exp_checked(c)? * (t - s));
    }
    let sa = a.sqrt();
    Ok(exp_erf_diff(c, sa * t, sa * s)? * (SQRT_PI / (2.0 * sa)))
}

/// g1(a,t,s) = (√π/(2√a))·(erf(√a t) − erf(√a s)), principal √a.
pub fn g1(a: C64, t: C64, s: C64) -> Result<C64> {
    g1_scaled(C64::new(0.0, 0.0), a, t, s)
}

/// (e^x − 1) with full relative accuracy for small |x|.
fn expm1(x: C64) -> C64 {
    if x.norm() < 0.1 {
        let mut term = x;
        let mut sum = x;
        for n in 2..30 {
            term *= x / n as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        x.exp() - 1.0
    }
}

/// e^{c}·g2(a,t,s).
pub fn g2_scaled(c: C64, a: C64, t: C64, s: C64) -> Result<C64> {
    if a == C64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("g2 with a = 0 divides by zero".into()));
    }
    if !(finite(a) && finite(t) && finite(s)) {
        return Err(Error::InvalidArgument(format!("g2({a}, {t}, {s})")));
    }
    if t == s {
        return Ok(C64::new(0.0, 0.0));
    }
    // e^{-as²} − e^{-at²} = −e^{-as²}·expm1(−a(t²−s²))
    let d = -a * (t - s) * (t + s);
    let head = exp_checked(c - a * s * s)?;
    Ok(-head * expm1(d) / (2.0 * a))
}

/// g2(a,t,s) = (e^{-as²} − e^{-at²})/(2a).
pub fn g2(a: C64, t: C64, s: C64) -> Result<C64> {
    g2_scaled(C64::new(0.0, 0.0), a, t, s)
}

/// e^{c}·f(t,s,z,a).
pub fn f_osc_scaled(c: C64, t: C64, s: C64, z: C64, a: C64) -> Result<C64> {
    if a == C64::new(0.0, 0.0) {
        return Err(Error::InvalidArgument("f_osc with a = 0 has no Gaussian factor".into()));
    }
    if !(finite(a) && finite(t) && finite(s) && finite(z)) {
        return Err(Error::InvalidArgument(format!("f_osc({t}, {s}, {z}, {a})")));
    }
    if t == s {
        return Ok(C64::new(0.0, 0.0));
    }
    let sa = a.sqrt();
    let shift = C64::new(0.0, 1.0) * z / (2.0 * sa);
    let expo = c - z * z / (4.0 * a);
    exp_erf_diff(expo, sa * t + shift, sa * s + shift)
        .map(|v| v * (SQRT_PI / (2.0 * sa)))
        .map_err(|e| match e {
            Error::Overflow(m) => Error::Overflow(format!(
                "f_osc scaling e^(-z²/4a) with |z²/4a| = {:.4e}: {m}",
                (z * z / (4.0 * a)).norm()
            )),
            other => other,
        })
}

/// f(t,s,z,a) = (√π/2)·e^{-z²/4a}/√a·[erf(√a t + jz/(2√a)) − erf(√a s + jz/(2√a))].
pub fn f_osc(t: C64, s: C64, z: C64, a: C64) -> Result<C64> {
    f_osc_scaled(C64::new(0.0, 0.0), t, s, z, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate_1d, QuadratureSpec};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn g1_examples() {
        assert_eq!(g1(c(1.0), c(0.3), c(0.3)).unwrap(), c(0.0));
        let v = g1(c(1.0), c(1.0), c(0.0)).unwrap();
        assert!((v.re - 0.746_824_132_812_427_0).abs() < 1e-14 && v.im.abs() < 1e-16);
        let v = g1(c(1.0), c(8.0), c(-8.0)).unwrap();
        assert!((v.re - SQRT_PI).abs() < 1e-12);
        assert_eq!(g1(c(0.0), c(2.0), c(0.5)).unwrap(), c(1.5));
    }

    #[test]
    fn g2_examples() {
        assert_eq!(g2(c(1.0), c(0.7), c(0.7)).unwrap(), c(0.0));
        let v = g2(c(1.0), c(1.0), c(0.0)).unwrap();
        assert!((v.re - (1.0 - (-1.0f64).exp()) / 2.0).abs() < 1e-15);
        let q = integrate_1d(|x| c(x * (-x * x).exp()), 0.0, 1.0, QuadratureSpec::tight()).unwrap();
        assert!((v - q).norm() < 1e-12);
        assert!(g2(c(0.0), c(1.0), c(0.0)).is_err());
    }

    #[test]
    fn f_osc_examples() {
        let a = c(1.3);
        for (t, s) in [(0.4, -1.2), (2.0, 0.5)] {
            let f = f_osc(c(t), c(s), c(0.0), a).unwrap();
            let g = g1(a, c(t), c(s)).unwrap();
            assert!((f - g).norm() < 1e-12);
        }
        let f = f_osc(c(1.0), c(-1.0), c(std::f64::consts::PI), c(1.0)).unwrap();
        let q = integrate_1d(
            |x| C64::new(0.0, -std::f64::consts::PI * x).exp() * (-x * x).exp(),
            -1.0,
            1.0,
            QuadratureSpec::tight(),
        )
        .unwrap();
        assert!((f - q).norm() < 1e-12, "{f} vs {q}");
        assert_eq!(f_osc(c(0.2), c(0.2), c(3.0), c(1.0)).unwrap(), c(0.0));
    }

    #[test]
    fn scaled_forms_survive_large_exponents() {
        // e^{800}·g1 over a segment where the integrand is ~e^{-800}
        let a = c(2.0);
        let v = g1_scaled(c(800.0), a, c(21.0), c(20.0)).unwrap();
        let q = integrate_1d(
            |x| c((800.0 - 2.0 * x * x).exp()),
            20.0,
            21.0,
            QuadratureSpec::tight(),
        )
        .unwrap();
        assert!((v - q).norm() < 1e-10 * q.norm(), "{v} vs {q}");
        assert!(matches!(g1(a, c(30.0), c(0.0)), Ok(_)));
    }
}
