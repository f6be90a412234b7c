//! Shared fixtures for the criterion benches.

use zakradar::dd::SystemConfig;

/// `n × n` points spread over the white-box window, delays on the
/// `1/rate` lattice so the time-domain oracle can evaluate them.
pub fn white_box_points(cfg: &SystemConfig, rate: f64, n: usize) -> Vec<(f64, f64)> {
    let half_d = (cfg.tau_p / 2.0 * rate).floor();
    let lin = |i: usize, lo: f64, hi: f64| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    (0..n * n)
        .map(|p| {
            let d = lin(p % n, -half_d, half_d).round();
            (d / rate, lin(p / n, -cfg.nu_p / 2.0, cfg.nu_p / 2.0))
        })
        .collect()
}
