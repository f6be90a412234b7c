//! Faddeeva function w(z) = e^{-z²} erfc(-iz) and the complex error function.
//!
//! w is evaluated with the Poppe–Wijers scheme: a power series near the
//! origin, a Taylor expansion whose derivatives come from the Laplace
//! continued fraction in the intermediate ring, and the continued fraction
//! alone further out. Only the closed upper half plane is needed here.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Largest real part accepted by [`exp_checked`].
pub const MAX_EXP: f64 = 709.78;

/// e^z, failing instead of returning an infinity.
pub fn exp_checked(z: C64) -> Result<C64> {
    if z.re > MAX_EXP {
        return Err(Error::Overflow(format!(
            "exp argument has real part {:.6e} (> {MAX_EXP})",
            z.re
        )));
    }
    if z.re < -745.2 {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(z.exp())
}

/// w(z) for Im z >= 0.
pub fn faddeeva_uhp(z: C64) -> C64 {
    debug_assert!(z.im >= 0.0);
    let xabs = z.re.abs();
    let yabs = z.im;
    let x = xabs / 6.3;
    let y = yabs / 4.4;
    let qrho = x * x + y * y;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let (u, v);
    if qrho < 0.085264 {
        // power series about the origin
        let q = (1.0 - 0.85 * y) * qrho.sqrt();
        let n = (6.0 + 72.0 * q).round() as i64;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let xaux = (xsum * xquad - ysum * yquad) / i as f64;
            ysum = (xsum * yquad + ysum * xquad) / i as f64;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = -TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0;
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        let u2 = daux * yquad.cos();
        let v2 = -daux * yquad.sin();
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        let (h, kapn, nu);
        if qrho > 1.0 {
            h = 0.0;
            kapn = 0i64;
            let r = qrho.sqrt();
            nu = (3.0 + 1442.0 / (26.0 * r + 77.0)) as i64;
        } else {
            let r = (1.0 - y) * (1.0 - qrho).sqrt();
            h = 1.88 * r;
            kapn = (7.0 + 34.0 * r).round() as i64;
            nu = (16.0 + 26.0 * r).round() as i64;
        }
        let h2 = 2.0 * h;
        let taylor = h > 0.0;
        let mut qlambda = if taylor { h2.powi(kapn as i32) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if taylor && n <= kapn {
                let tx = qlambda + sx;
                let nsx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                sx = nsx;
                qlambda /= h2;
            }
        }
        let (mut uu, vv) = if taylor {
            (TWO_OVER_SQRT_PI * sx, TWO_OVER_SQRT_PI * sy)
        } else {
            (TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
        };
        if yabs == 0.0 {
            uu = (-xabs * xabs).exp();
        }
        u = uu;
        v = vv;
    }
    if z.re < 0.0 {
        C64::new(u, -v)
    } else {
        C64::new(u, v)
    }
}

/// w(z) anywhere in the plane; the lower half plane uses w(z) = 2e^{-z²} - w(-z).
pub fn faddeeva(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("faddeeva of non-finite {z}")));
    }
    if z.im >= 0.0 {
        Ok(faddeeva_uhp(z))
    } else {
        Ok(exp_checked(-z * z)? * 2.0 - faddeeva_uhp(-z))
    }
}

/// Maclaurin series of erf, used for |z| < 1 where it converges fast and
/// keeps full relative accuracy near the origin.
pub(crate) fn erf_series(z: C64) -> C64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for n in 1..60 {
        term *= -z2 / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * TWO_OVER_SQRT_PI
}

/// Reflected pieces of erf(z) = σ(1 - e^{-ζ²} w(iζ)) with ζ = σz, σ = ±1
/// chosen so that iζ lies in the upper half plane.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ErfSplit {
    pub sigma: f64,
    /// exponent -ζ²
    pub expo: C64,
    /// w(iζ)
    pub w: C64,
}

pub(crate) fn erf_split(z: C64) -> ErfSplit {
    let sigma = if z.re > 0.0 || (z.re == 0.0 && z.im >= 0.0) { 1.0 } else { -1.0 };
    let zeta = z * sigma;
    ErfSplit { sigma, expo: -zeta * zeta, w: faddeeva_uhp(C64::new(-zeta.im, zeta.re)) }
}

/// Complex error function, relative accuracy ~1e-13 for |z| <= 10.
pub fn erf_cplx(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("erf of non-finite {z}")));
    }
    // Work on the representative with Re z >= 0 (or Re z = 0, Im z >= 0)
    // so that oddness holds exactly.
    let flip = z.re < 0.0 || (z.re == 0.0 && z.im < 0.0);
    let zz = if flip { -z } else { z };
    let val = if zz.norm() < 1.0 {
        erf_series(zz)
    } else {
        let s = erf_split(zz);
        if s.expo.re > MAX_EXP {
            return Err(Error::Overflow(format!(
                "erf({z}) needs e^{:.4e}; use the scaled difference form",
                s.expo.re
            )));
        }
        C64::new(1.0, 0.0) - s.expo.exp() * s.w
    };
    Ok(if flip { -val } else { val })
}

/// e^{c}·(erf(z1) − erf(z2)) evaluated without forming e^{c} or erf(z)
/// separately, so that huge and tiny factors can meet in the exponent.
pub fn exp_erf_diff(c: C64, z1: C64, z2: C64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    let mut k = 0.0;
    for (z, sign) in [(z1, 1.0), (z2, -1.0)] {
        if z.norm() < 1.0 && c.re < MAX_EXP {
            acc += exp_checked(c)? * erf_series(z) * sign;
        } else {
            let s = erf_split(z);
            k += sign * s.sigma;
            acc -= exp_checked(c + s.expo)? * s.w * (sign * s.sigma);
        }
    }
    if k != 0.0 {
        acc += exp_checked(c)? * k;
    }
    Ok(acc)
}
