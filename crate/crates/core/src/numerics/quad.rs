//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances for [`integrate_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_subdivisions < 1 {
            return Err(Error::InvalidArgument(format!(
                "quadrature spec rel_tol={rel_tol}, abs_tol={abs_tol}, max_subdivisions={max_subdivisions}"
            )));
        }
        Ok(Self { rel_tol, abs_tol, max_subdivisions })
    }

    /// Near machine precision; used by the oracles.
    pub fn tight() -> Self {
        Self { rel_tol: 1e-13, abs_tol: 1e-15, max_subdivisions: 2000 }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 500 }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> C64>(f: &F, lo: f64, hi: f64) -> (C64, f64) {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(centre - dx) + f(centre + dx);
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

struct Piece {
    lo: f64,
    hi: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// ∫_lo^hi f(x) dx by globally adaptive bisection of the worst interval.
pub fn integrate_1d<F: Fn(f64) -> C64>(f: F, lo: f64, hi: f64, spec: QuadratureSpec) -> Result<C64> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("integration bounds [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(C64::new(0.0, 0.0));
    }
    let (val, err) = gk15(&f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { lo, hi, val, err });
    let mut total = val;
    let mut total_err = err;
    for _ in 0..spec.max_subdivisions {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.norm()) {
            if !(total.re.is_finite() && total.im.is_finite()) {
                return Err(Error::NonConvergence("integrand produced non-finite values".into()));
            }
            return Ok(total);
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (lv, le) = gk15(&f, worst.lo, mid);
        let (rv, re) = gk15(&f, mid, worst.hi);
        total += lv + rv - worst.val;
        total_err += le + re - worst.err;
        heap.push(Piece { lo: worst.lo, hi: mid, val: lv, err: le });
        heap.push(Piece { lo: mid, hi: worst.hi, val: rv, err: re });
    }
    // recompute the error sum once to shed accumulated rounding
    let fresh: f64 = heap.iter().map(|p| p.err).sum();
    if fresh <= spec.abs_tol.max(spec.rel_tol * total.norm()) {
        return Ok(total);
    }
    Err(Error::NonConvergence(format!(
        "estimated error {fresh:.3e} after {} subdivisions on [{lo}, {hi}]",
        spec.max_subdivisions
    )))
}
