use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use zakradar::ambiguity::*;
use zakradar::dd::{make_config, SystemConfig};
use zakradar::filters::{synthesize_waveform_with, FilterSpec, SynthOptions};

fn cfg() -> SystemConfig {
    SystemConfig::default()
}

fn specs() -> [FilterSpec; 3] {
    [FilterSpec::sinc(), FilterSpec::gaussian(), FilterSpec::gaussian_sinc()]
}

#[test]
fn unit_peak_for_every_filter() {
    let c = cfg();
    for s in specs() {
        let a = ClosedForm::new(&s, &c).unwrap().eval(0.0, 0.0).unwrap();
        assert!((a - 1.0).norm() < 1e-9, "{:?}: {a}", s.kind);
        let x = oracle_waveform(&c, &s).unwrap();
        let o = amb_oracle(&x, 0.0, 0.0).unwrap();
        assert!((o - 1.0).norm() < 1e-6, "{:?} oracle: {o}", s.kind);
    }
}

#[test]
fn sinc_closed_form_examples() {
    let c = cfg();
    assert_eq!(amb_sinc_closed(&c, 1e-7, c.b), C64::new(0.0, 0.0));
    assert_eq!(amb_sinc_closed(&c, 0.0, -1.5 * c.b), C64::new(0.0, 0.0));
    let half = amb_sinc_closed(&c, 0.5 / c.b, 0.0);
    assert!((half.norm() - 2.0 / PI).abs() < 1e-3);
    // time-domain oracle on a sinc train with a 50 ms tail
    let opts = SynthOptions { rate: 2.0 * c.b, sinc_tail_s: 0.05, normalize: true };
    let x = synthesize_waveform_with(&FilterSpec::sinc(), &c, &opts).unwrap();
    let o = amb_oracle(&x, 0.5 / c.b, 0.0).unwrap();
    assert!((o.norm() - 2.0 / PI).abs() < 1e-3, "{o}");
    assert!((o - half).norm() < 1e-3);
}

#[test]
fn gaussian_first_bin() {
    let c = cfg();
    let g = FilterSpec::gaussian();
    let a = amb_gauss_closed(&c, &g, 1.0 / c.b, 0.0).unwrap();
    assert!((a.norm() - (-g.alpha_tau / 2.0).exp()).abs() < 1e-6);
    assert!((a.norm() - 0.4529).abs() < 1e-4);
    // and the alias peak at one delay period agrees with the oracle
    let x = oracle_waveform(&c, &g).unwrap();
    let o = amb_oracle(&x, c.tau_p, 0.0).unwrap();
    let cf = amb_gauss_closed(&c, &g, c.tau_p, 0.0).unwrap();
    assert!((o - cf).norm() < 1e-6);
    assert!(cf.norm() > 0.5);
}

#[test]
fn gs_branch_continuity() {
    let c = cfg();
    let s = FilterSpec::gaussian_sinc();
    for nu in [0.0, 37.0, -1234.5] {
        let a0 = amb_gs_closed(&c, &s, 0.0, nu).unwrap();
        let a1 = amb_gs_closed(&c, &s, 1e-6 / c.b, nu).unwrap();
        assert!((a0 - a1).norm() < 1e-5, "nu {nu}: {a0} vs {a1}");
        let b0 = amb_gs_closed(&c, &s, 0.3 / c.b, 0.0).unwrap();
        let b1 = amb_gs_closed(&c, &s, 0.3 / c.b, 1e-6 / c.t).unwrap();
        assert!((b0 - b1).norm() < 1e-5);
    }
}

#[test]
fn closed_forms_match_oracle() {
    let c = cfg();
    for (s, tol) in [(FilterSpec::gaussian(), 1e-6), (FilterSpec::gaussian_sinc(), 1e-5), (FilterSpec::sinc(), 1e-5)] {
        let r = validate_closed_vs_oracle(&c, &s, 64, tol, 7).unwrap();
        assert!(r.pass, "{:?}: {}", s.kind, r.max_abs_dev);
    }
    assert!(validate_closed_vs_oracle(&c, &FilterSpec::gaussian(), 0, 1e-6, 7).is_err());
}

#[test]
fn oracle_magnitude_symmetry() {
    let c = cfg();
    let x = oracle_waveform(&c, &FilterSpec::gaussian_sinc()).unwrap();
    for (tau, nu) in validation_points(&c, x.rate, 16, 3) {
        let a = amb_oracle(&x, tau, nu).unwrap().norm();
        let b = amb_oracle(&x, -tau, -nu).unwrap().norm();
        assert!((a - b).abs() < 1e-9);
    }
    assert!(amb_oracle(&x, 0.3 / x.rate, 0.0).is_err());
    assert!(amb_oracle(&x, 1.0, 0.0).is_err());
}

#[test]
fn small_grid_around_origin() {
    let c = cfg();
    for s in specs() {
        let cf = ClosedForm::new(&s, &c).unwrap();
        let w = DDWindow { tau_min: -1.0 / c.b, tau_max: 1.0 / c.b, nu_min: -1.0 / c.t, nu_max: 1.0 / c.t };
        let g = amb_grid(&cf, &w, 1.0 / c.b, 1.0 / c.t).unwrap();
        assert_eq!((g.n_tau, g.n_nu), (3, 3));
        assert!((g.at(1, 1) - 1.0).norm() < 1e-9);
        assert!((g.at(0, 0).norm() - g.at(2, 2).norm()).abs() < 1e-9);
        assert!((g.at(2, 0).norm() - g.at(0, 2).norm()).abs() < 1e-9);
    }
}

#[test]
fn oracle_grid_matches_pointwise_oracle() {
    let c = cfg();
    let x = oracle_waveform(&c, &FilterSpec::gaussian()).unwrap();
    let w = DDWindow { tau_min: -2.0 / c.b, tau_max: 2.0 / c.b, nu_min: -3.0 / c.t, nu_max: 3.0 / c.t };
    let g = oracle_grid(&x, &w, 1.0 / x.rate, 1.0 / c.t).unwrap();
    for j in [0, 2, 6] {
        for i in [0, 5, 16] {
            let o = amb_oracle(&x, g.tau(i), g.nu(j)).unwrap();
            assert!((g.at(i, j) - o).norm() < 1e-12);
        }
    }
}

#[test]
fn gaussian_has_no_sidelobes() {
    let c = cfg();
    let cf = ClosedForm::new(&FilterSpec::gaussian(), &c).unwrap();
    let g = amb_grid(&cf, &DDWindow::white_box(&c), 1.0 / c.b, 1.0 / c.t).unwrap();
    let (i0, j0) = ((g.n_tau - 1) / 2, (g.n_nu - 1) / 2);
    let mut side = 0.0f64;
    for j in 0..g.n_nu {
        for i in 0..g.n_tau {
            if (i as i64 - i0 as i64).abs() > 4 || (j as i64 - j0 as i64).abs() > 4 {
                side = side.max(g.at(i, j).norm());
            }
        }
    }
    assert!(side < 1e-4 * g.at(i0, j0).norm(), "{side}");
}

#[test]
fn sinc_alias_peak() {
    let c = cfg();
    let want = (c.n as f64 - 1.0) / c.n as f64;
    for tau in [c.tau_p, -c.tau_p] {
        assert!((amb_sinc_closed(&c, tau, 0.0).norm() - want).abs() < 1e-9);
    }
}

#[test]
fn peaks_sit_on_the_period_lattice() {
    let c = cfg();
    for s in specs() {
        let cf = ClosedForm::new(&s, &c).unwrap();
        for n in -1..=1 {
            for m in -1..=1 {
                let (t0, f0) = (n as f64 * c.tau_p, m as f64 * c.nu_p);
                let centre = cf.eval(t0, f0).unwrap().norm();
                for (dt, df) in [(0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5), (0.3, 0.3)] {
                    let v = cf.eval(t0 + dt / c.b, f0 + df / c.t).unwrap().norm();
                    assert!(v < centre, "{:?} cell ({n},{m}) offset ({dt},{df})", s.kind);
                }
            }
        }
    }
}

/// Independent reading of the cut metrics from a dense zero-Doppler
/// sample: −25 dB crossings of 10·log10|A| and the first sidelobe.
fn cut_oracle(s: &FilterSpec) -> (f64, f64) {
    let c = cfg();
    let cf = ClosedForm::new(s, &c).unwrap();
    let per = 400;
    let mag: Vec<f64> = (0..=per * 20).map(|i| cf.eval(i as f64 / (per as f64 * c.b), 0.0).unwrap().norm()).collect();
    let i = mag.iter().position(|&v| 10.0 * v.log10() <= -25.0).unwrap();
    let (a, b) = (10.0 * mag[i - 1].log10(), 10.0 * mag[i].log10());
    let half = (i as f64 - 1.0 + (-25.0 - a) / (b - a)) / per as f64;
    let first_min = (1..mag.len() - 1).find(|&k| mag[k] < mag[k - 1] && mag[k] <= mag[k + 1]).unwrap();
    let side = mag[first_min..].iter().copied().fold(0.0, f64::max);
    (2.0 * half, 10.0 * side.log10())
}

#[test]
fn metrics_against_reference_values() {
    let c = cfg();
    let res = MetricsResolution { cut_per_bin: 200, grid_per_bin: 2 };
    // (filter, MLW, PSLR, ISLR) reference values
    let rows = [(FilterSpec::sinc(), 1.99, Some(-6.65), Some(2.31)), (FilterSpec::gaussian_sinc(), 2.12, Some(-6.92), Some(-3.12)), (FilterSpec::gaussian(), 5.39, None, None)];
    for (s, mlw, pslr, islr) in rows {
        let m = ambiguity_metrics(&c, &s, res).unwrap();
        assert!(m.mlw_bins > 0.0 && m.mlw_bins < m.mlw_bins_10log);
        assert!((m.mlw_bins_10log - mlw).abs() < 0.02, "{:?} mlw {}", s.kind, m.mlw_bins_10log);
        let (o_mlw, o_pslr) = cut_oracle(&s);
        assert!((m.mlw_bins_10log - o_mlw).abs() < 0.01);
        match (pslr, islr) {
            (Some(p), Some(i)) => {
                let mp = m.pslr_db.unwrap();
                assert!((mp - p).abs() < 0.05, "{:?} pslr {mp}", s.kind);
                assert!((mp - o_pslr).abs() < 0.01);
                assert!((m.islr_db.unwrap() - i).abs() < 0.15, "{:?} islr {:?}", s.kind, m.islr_db);
            }
            _ => {
                assert!(m.pslr_db.is_none() && m.islr_db.is_none());
                assert!(m.pslr_2d_db.is_none());
            }
        }
    }
}

#[test]
fn moyal_volume_on_a_small_lattice() {
    // B = 100 kHz, T = 2 ms, τp = 100 µs: M = 10, N = 20
    let c = make_config(1e5, 2e-3, 1e-4, 4, 4, 1e9).unwrap();
    let cf = ClosedForm::new(&FilterSpec::gaussian(), &c).unwrap();
    let (dt, dn) = (1.0 / (4.0 * c.b), 1.0 / (4.0 * c.t));
    let w = DDWindow { tau_min: -(c.t + c.tau_p), tau_max: c.t + c.tau_p, nu_min: -2.0 * c.b, nu_max: 2.0 * c.b };
    let g = amb_grid(&cf, &w, dt, dn).unwrap();
    let vol: f64 = g.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dt * dn;
    assert!((vol - 1.0).abs() < 0.02, "{vol}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn closed_form_magnitude_symmetry(u in -200.0f64..200.0, v in -100.0f64..100.0, k in 0usize..3) {
        let c = cfg();
        let s = specs()[k];
        let cf = ClosedForm::new(&s, &c).unwrap();
        let (tau, nu) = (u / c.b, v / c.t);
        let a = cf.eval(tau, nu).unwrap().norm();
        let b = cf.eval(-tau, -nu).unwrap().norm();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a <= 1.0 + 1e-9);
    }
}
