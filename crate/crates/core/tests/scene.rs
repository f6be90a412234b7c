use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use zakradar::ambiguity::{ClosedForm, DDWindow};
use zakradar::dd::SystemConfig;
use zakradar::filters::{FilterSpec, Waveform};
use zakradar::scene::*;

fn cfg() -> SystemConfig {
    SystemConfig::default()
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[test]
fn scenes_fall_inside_their_windows() {
    let c = cfg();
    let mut r = rng(1);
    for w in [DDWindow::dense(), DDWindow::sparse()] {
        let t = draw_scene(&w, 4, w.tau_min, FadeModel::Absolute, &mut r).unwrap();
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|t| w.contains(t.tau, t.nu)));
        assert!(crystallization_check(&t, &c));
    }
    assert!(draw_scene(&DDWindow::dense(), 0, 200e-6, FadeModel::Absolute, &mut r).is_err());
    assert!(DDWindow::new(1.0, 1.0, 0.0, 1.0).is_err());
}

#[test]
fn fade_power_at_reference_delay() {
    let w = DDWindow { tau_min: 200e-6, tau_max: 200e-6, nu_min: 0.0, nu_max: 1.0 };
    let t = draw_scene(&w, 10_000, 200e-6, FadeModel::Absolute, &mut rng(2)).unwrap();
    let mean = t.iter().map(|t| t.h.norm_sqr()).sum::<f64>() / t.len() as f64;
    let want = 5e-4f64 * 5e-4 * 5e-4 * 5e-4;
    assert!((mean / want - 1.0).abs() < 0.03, "{mean}");
    // relative model: reference power at τ_min, scaled by (1e-7/(τ − τ_min))⁴ beyond
    assert_eq!(FadeModel::RelativeToMin.variance(200e-6, 200e-6), FadeModel::Absolute.variance(200e-6, 200e-6));
    let far = FadeModel::RelativeToMin.variance(201e-6, 200e-6);
    assert!((far / FadeModel::Absolute.variance(200e-6, 200e-6) - 1e-4).abs() < 1e-12);
}

#[test]
fn noise_density_from_snr() {
    let c = cfg();
    let n = n0_from_snr(-9.0, 200e-6, &c);
    // 6.25e-14 / (8e4 · 10^-0.9)
    assert!((n.n0 - 6.206e-18).abs() < 1e-21, "{}", n.n0);
    let up = n0_from_snr(1.0, 200e-6, &c);
    assert!((n.n0 / up.n0 - 10.0).abs() < 1e-9);
    let unit = zakradar::dd::make_config(1.0, 1.0, 1.0, 1, 1, 1.0).unwrap();
    assert!((n0_from_snr(0.0, 1e-7, &unit).n0 - 1.0).abs() < 1e-12);
}

#[test]
fn crystallization_examples() {
    let c = cfg();
    let t = |tau: f64, nu: f64| Target { tau, nu, h: C64::new(1.0, 0.0) };
    assert!(crystallization_check(&[t(200e-6, -1000.0), t(205e-6, 1000.0)], &c));
    assert!(!crystallization_check(&[t(200e-6, 0.0), t(350e-6, 0.0)], &c));
    assert!(!crystallization_check(&[t(200e-6, -6000.0), t(200e-6, 6000.0)], &c));
    assert!(crystallization_check(&[t(1e-3, 5e3)], &c));
}

fn geom(c: &SystemConfig, n_tau: usize, n_nu: usize) -> GridGeometry {
    GridGeometry { tau0: 200e-6, nu0: -(n_nu as f64 / 2.0).floor() * c.dnu(), dtau: c.dtau(), dnu: c.dnu(), n_tau, n_nu }
}

#[test]
fn synthesis_is_linear_and_peaks_at_targets() {
    let c = cfg();
    let cf = ClosedForm::new(&FilterSpec::gaussian_sinc(), &c).unwrap();
    let g = geom(&c, 24, 17);
    let a = Target { tau: g.tau(5), nu: g.nu(8), h: C64::new(1.0, 0.0) };
    let one = synth_cross_amb(&[a], &cf, &g).unwrap();
    assert!((one.at(5, 8) - 1.0).norm() < 1e-9);
    let b = Target { tau: g.tau0 + 13.3 * g.dtau, nu: 21.7, h: C64::new(-0.3, 0.8) };
    let two = synth_cross_amb(&[a, b], &cf, &g).unwrap();
    let other = synth_cross_amb(&[b], &cf, &g).unwrap();
    for ((s, x), y) in two.values.iter().zip(&one.values).zip(&other.values) {
        assert!((s - x - y).norm() < 1e-12);
    }
}

#[test]
fn synthesis_translates_with_the_scene() {
    let c = cfg();
    let cf = ClosedForm::new(&FilterSpec::gaussian(), &c).unwrap();
    let g = geom(&c, 16, 9);
    let targets = [
        Target { tau: 200.3e-6, nu: 11.0, h: C64::new(0.4, -0.2) },
        Target { tau: 200.6e-6, nu: -30.0, h: C64::new(0.1, 0.7) },
    ];
    let (sk, sl) = (3usize, 2usize);
    let (dt, dn) = (sk as f64 * g.dtau, sl as f64 * g.dnu);
    let moved: Vec<Target> = targets.iter().map(|t| Target { tau: t.tau + dt, nu: t.nu + dn, h: t.h }).collect();
    let base = synth_cross_amb(&targets, &cf, &g).unwrap();
    // each term picks up e^{j2πΔν(τ−τᵢ)}; check per target
    for (t, m) in targets.iter().zip(&moved) {
        let b1 = synth_cross_amb(&[*t], &cf, &g).unwrap();
        let s1 = synth_cross_amb(&[*m], &cf, &g).unwrap();
        for j in 0..g.n_nu - sl {
            for i in 0..g.n_tau - sk {
                let ph = C64::from_polar(1.0, 2.0 * PI * dn * (g.tau(i) - t.tau));
                assert!((s1.at(i + sk, j + sl) - b1.at(i, j) * ph).norm() < 1e-12);
            }
        }
    }
    // the sum follows exactly when only delay moves
    let moved_tau: Vec<Target> = targets.iter().map(|t| Target { tau: t.tau + dt, ..*t }).collect();
    let st = synth_cross_amb(&moved_tau, &cf, &g).unwrap();
    for j in 0..g.n_nu {
        for i in 0..g.n_tau - sk {
            assert!((st.at(i + sk, j) - base.at(i, j)).norm() < 1e-12);
        }
    }
}

#[test]
fn covariance_examples() {
    let c = cfg();
    let n0 = 2.5e-3;
    let sinc = ClosedForm::new(&FilterSpec::sinc(), &c).unwrap();
    let p = DDPoint { tau: 2e-4, nu: 40.0 };
    assert!((noise_cov(p, p, n0, &sinc).unwrap() - n0).norm() < 1e-12);
    let q = DDPoint { tau: 0.0, nu: 0.0 };
    let r = DDPoint { tau: c.tau_p, nu: 0.0 };
    let v = noise_cov(q, r, n0, &sinc).unwrap();
    assert!((v.norm() - n0 * (c.n as f64 - 1.0) / c.n as f64).abs() < 1e-12);
    let gs = ClosedForm::new(&FilterSpec::gaussian_sinc(), &c).unwrap();
    let mut rg = rng(3);
    for _ in 0..16 {
        let a = DDPoint { tau: rg.gen_range(0.0..3e-6), nu: rg.gen_range(-500.0..500.0) };
        let b = DDPoint { tau: rg.gen_range(0.0..3e-6), nu: rg.gen_range(-500.0..500.0) };
        let x = noise_cov(a, b, n0, &gs).unwrap();
        let y = noise_cov(b, a, n0, &gs).unwrap();
        assert!((x - y.conj()).norm() < 1e-12 * n0);
    }
}

/// Sample second moments E[zᵢ zⱼ*] from repeated draws.
fn sample_cov(draws: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let n = draws[0].len();
    let mut s = vec![vec![C64::new(0.0, 0.0); n]; n];
    for d in draws {
        for i in 0..n {
            for j in 0..n {
                s[i][j] += d[i] * d[j].conj();
            }
        }
    }
    let k = draws.len() as f64;
    s.iter().map(|r| r.iter().map(|v| v / k).collect()).collect()
}

#[test]
fn point_noise_statistics() {
    let c = cfg();
    let n0 = 1e-3;
    let cf = ClosedForm::new(&FilterSpec::gaussian_sinc(), &c).unwrap();
    let mut r = rng(4);
    let pts = [
        DDPoint { tau: 0.0, nu: 0.0 },
        DDPoint { tau: 0.25 / c.b, nu: 0.0 },
        DDPoint { tau: 0.0, nu: 0.3 / c.t },
        DDPoint { tau: 0.4 / c.b, nu: -0.2 / c.t },
    ];
    let draws: Vec<Vec<C64>> = (0..100_000).map(|_| draw_noise_points(&pts, n0, &cf, &mut r).unwrap()).collect();
    let s = sample_cov(&draws);
    for i in 0..4 {
        for j in 0..4 {
            let want = noise_cov(pts[i], pts[j], n0, &cf).unwrap();
            assert!((s[i][j] - want).norm() < 0.05 * want.norm(), "({i},{j}) {} vs {want}", s[i][j]);
        }
    }
    assert!((s[0][0].re / n0 - 1.0).abs() < 0.03);
    let same = draw_noise_points(&[pts[1], pts[1]], n0, &cf, &mut r).unwrap();
    assert_eq!(same[0], same[1]);
}

#[test]
fn field_noise_statistics() {
    let c = cfg();
    let rate = c.p as f64 * c.b;
    let g = GridGeometry { tau0: 200e-6, nu0: 0.0, dtau: c.dtau(), dnu: c.dnu(), n_tau: 2, n_nu: 2 };
    for spec in [FilterSpec::gaussian(), FilterSpec::gaussian_sinc()] {
        let wf = Waveform::new(&spec, &c).unwrap();
        let cf = ClosedForm::new(&spec, &c).unwrap();
        let mut r = rng(5);
        let draws: Vec<Vec<C64>> = (0..10_000).map(|_| draw_noise_field(&wf, rate, 1.0, &g, &mut r).unwrap().values).collect();
        let s = sample_cov(&draws);
        let pts: Vec<DDPoint> = (0..2).flat_map(|j| (0..2).map(move |i| (i, j))).map(|(i, j)| DDPoint { tau: g.tau(i), nu: g.nu(j) }).collect();
        for a in 0..4 {
            assert!((s[a][a].re - 1.0).abs() < 0.03, "{:?} var {}", spec.kind, s[a][a].re);
            for b in 0..4 {
                let want = noise_cov(pts[a], pts[b], 1.0, &cf).unwrap();
                assert!((s[a][b] - want).norm() < 0.05 * want.norm().max(0.2), "{:?} ({a},{b}) {} vs {want}", spec.kind, s[a][b]);
            }
        }
        let z = draw_noise_field(&wf, rate, 0.0, &g, &mut r).unwrap();
        assert!(z.values.iter().all(|v| v.norm() == 0.0));
    }
}

#[test]
fn field_path_matches_direct_correlation() {
    let c = cfg();
    let rate = c.p as f64 * c.b;
    let spec = FilterSpec::gaussian();
    let wf = Waveform::new(&spec, &c).unwrap();
    let x = zakradar::filters::synthesize_waveform(&spec, &c, rate).unwrap();
    let g = GridGeometry { tau0: 200e-6, nu0: -25.0, dtau: c.dtau(), dnu: c.dnu(), n_tau: 2, n_nu: 3 };
    let mut r = rng(6);
    let (mut v_field, mut v_direct) = (0.0, 0.0);
    let k = 300;
    for _ in 0..k {
        v_field += draw_noise_field(&wf, rate, 1.0, &g, &mut r).unwrap().at(1, 2).norm_sqr();
        v_direct += draw_noise_field_direct(&x, 1.0, &g, &mut r).unwrap().at(1, 2).norm_sqr();
    }
    // both are unit-variance; 300 draws leave ~6 % scatter each
    assert!((v_field / k as f64 - 1.0).abs() < 0.25);
    assert!((v_direct / k as f64 - 1.0).abs() < 0.25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn covariance_is_hermitian(t1 in 0.0f64..5e-6, t2 in 0.0f64..5e-6, v1 in -1e3f64..1e3, v2 in -1e3f64..1e3) {
        let c = cfg();
        let cf = ClosedForm::new(&FilterSpec::gaussian(), &c).unwrap();
        let a = DDPoint { tau: t1, nu: v1 };
        let b = DDPoint { tau: t2, nu: v2 };
        let x = noise_cov(a, b, 1.0, &cf).unwrap();
        let y = noise_cov(b, a, 1.0, &cf).unwrap();
        prop_assert!((x - y.conj()).norm() < 1e-12);
        prop_assert!(x.norm() <= 1.0 + 1e-9);
    }
}
