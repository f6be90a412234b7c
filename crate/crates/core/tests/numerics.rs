use num_complex::Complex64 as C64;
use proptest::prelude::*;
use zakradar::numerics::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Maclaurin series erf(z) = 2/√π Σ (−1)^n z^{2n+1}/(n!(2n+1)), 60 terms.
fn erf_series(z: C64) -> C64 {
    let mut term = z;
    let mut acc = C64::new(0.0, 0.0);
    for n in 0..60 {
        acc += term / (2 * n + 1) as f64;
        term *= -z * z / (n + 1) as f64;
    }
    acc * (2.0 / std::f64::consts::PI.sqrt())
}

fn quad(f: impl Fn(f64) -> C64, lo: f64, hi: f64) -> C64 {
    integrate_1d(f, lo, hi, QuadratureSpec::tight()).unwrap()
}

#[test]
fn erf_examples() {
    assert_eq!(erf_cplx(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    let one = erf_cplx(c(1.0, 0.0)).unwrap();
    assert!((one - erf_series(c(1.0, 0.0))).norm() < 1e-14);
    assert!((one.re - 0.842_700_792_949_714_9).abs() < 1e-15);
    let i1 = erf_cplx(c(0.0, 1.0)).unwrap();
    assert!(i1.re.abs() < 1e-15);
    assert!((i1.im - 1.650_425_758_797_542_8).abs() < 1e-14, "{i1}");
}

#[test]
fn erf_relative_accuracy_in_disk() {
    // series converges fast for |z| ≤ 2; cancellation is still mild there
    for k in 0..200 {
        let r = 2.0 * ((k * 37 % 101) as f64 / 100.0);
        let th = k as f64 * 0.7;
        let z = C64::from_polar(r, th);
        let a = erf_cplx(z).unwrap();
        let b = erf_series(z);
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300) + 1e-15, "{z}: {a} vs {b}");
    }
}

#[test]
fn erf_overflow_is_an_error() {
    assert!(erf_cplx(c(0.0, 40.0)).is_err());
}

#[test]
fn g1_g2_examples() {
    let one = c(1.0, 0.0);
    assert_eq!(g1(one, c(0.3, 0.0), c(0.3, 0.0)).unwrap(), c(0.0, 0.0));
    let v = g1(one, one, c(0.0, 0.0)).unwrap();
    assert!((v.re - 0.746_824_132_812_427).abs() < 1e-12);
    let q = quad(|x| C64::new((-x * x).exp(), 0.0), 0.0, 1.0);
    assert!((v - q).norm() < 1e-12);
    let full = g1(one, c(8.0, 0.0), c(-8.0, 0.0)).unwrap();
    assert!((full.re - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    // a = 0 falls back to the interval length
    assert_eq!(g1(c(0.0, 0.0), c(2.0, 0.0), c(0.5, 0.0)).unwrap(), c(1.5, 0.0));

    assert_eq!(g2(one, c(0.7, 0.0), c(0.7, 0.0)).unwrap(), c(0.0, 0.0));
    let v2 = g2(one, one, c(0.0, 0.0)).unwrap();
    assert!((v2.re - (1.0 - (-1.0f64).exp()) / 2.0).abs() < 1e-15);
    let q2 = quad(|x| C64::new(x * (-x * x).exp(), 0.0), 0.0, 1.0);
    assert!((v2 - q2).norm() < 1e-12);
    assert!(g2(c(0.0, 0.0), one, c(0.0, 0.0)).is_err());
}

#[test]
fn f_osc_examples() {
    let one = c(1.0, 0.0);
    let pi = std::f64::consts::PI;
    let v = f_osc(one, c(-1.0, 0.0), c(pi, 0.0), one).unwrap();
    let q = quad(|x| C64::from_polar((-x * x).exp(), -pi * x), -1.0, 1.0);
    assert!((v - q).norm() < 1e-12, "{v} vs {q}");
    assert_eq!(f_osc(c(0.2, 0.0), c(0.2, 0.0), c(3.0, 0.0), one).unwrap().norm(), 0.0);
}

#[test]
fn integrate_examples() {
    let one = quad(|_| C64::new(1.0, 0.0), 0.0, 1.0);
    assert!((one.re - 1.0).abs() < 1e-14);
    let s = quad(|x| C64::new(x.sin(), 0.0), 0.0, std::f64::consts::PI);
    assert!((s.re - 2.0).abs() < 1e-12);
    let g = quad(|x| C64::new((-x * x).exp(), 0.0), 0.0, 1.0);
    let r = g1(C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
    assert!((g - r).norm() < 1e-12);
}

#[test]
fn erf_symmetries_on_random_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let r: f64 = 6.0 * rng.gen::<f64>().sqrt();
        let z = C64::from_polar(r, rng.gen_range(-3.2..3.2));
        let (Ok(a), Ok(b), Ok(cz)) = (erf_cplx(z), erf_cplx(-z), erf_cplx(z.conj())) else {
            panic!("erf failed at {z}");
        };
        assert!((a + b).norm() <= 1e-12 * a.norm().max(1.0), "{z}");
        assert!((cz - a.conj()).norm() <= 1e-12 * a.norm().max(1.0), "{z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gaussian_integrals_match_quadrature(
        a in 0.05f64..4.0,
        s in -3.0f64..3.0,
        len in 0.01f64..3.0,
        z in -6.0f64..6.0,
    ) {
        let t = s + len;
        let (ac, tc, sc, zc) = (C64::new(a, 0.0), C64::new(t, 0.0), C64::new(s, 0.0), C64::new(z, 0.0));
        let v1 = g1(ac, tc, sc).unwrap();
        let q1 = quad(|x| C64::new((-a * x * x).exp(), 0.0), s, t);
        prop_assert!((v1 - q1).norm() <= 1e-9 * q1.norm() + 1e-15);
        let v2 = g2(ac, tc, sc).unwrap();
        let q2 = quad(|x| C64::new(x * (-a * x * x).exp(), 0.0), s, t);
        prop_assert!((v2 - q2).norm() <= 1e-9 * q2.norm().max(q1.norm()) + 1e-15);
        let vf = f_osc(tc, sc, zc, ac).unwrap();
        let qf = quad(|x| C64::from_polar((-a * x * x).exp(), -z * x), s, t);
        prop_assert!((vf - qf).norm() <= 1e-9 * q1.norm() + 1e-15, "{} vs {}", vf, qf);
    }

    #[test]
    fn f_osc_reduces_to_g1(a in 0.05f64..4.0, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let (ac, tc, sc) = (C64::new(a, 0.0), C64::new(t, 0.0), C64::new(s, 0.0));
        let f = f_osc(tc, sc, C64::new(0.0, 0.0), ac).unwrap();
        let g = g1(ac, tc, sc).unwrap();
        prop_assert!((f - g).norm() <= 1e-12 * g.norm().max(1e-3));
    }
}
