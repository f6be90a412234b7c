//! CSV and JSON serialization of grids, curves, scenes and estimates.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! exactly and does not depend on locale.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dd::{DDGrid, TimeSamples};
use crate::error::{Error, Result};
use crate::experiments::{RmseCurve, RocCurve, SweepTable};
use crate::receiver::PeakEstimate;
use crate::scene::Target;

/// Round-trip decimal formatting.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Header plus rows of preformatted fields.
pub fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Io(format!("row has {} fields, header has {}", r.len(), header.len())));
        }
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn grid_rows(g: &DDGrid) -> impl Iterator<Item = (f64, f64, C64)> + '_ {
    (0..g.n_nu).flat_map(move |j| (0..g.n_tau).map(move |i| (g.tau(i), g.nu(j), g.at(i, j))))
}

/// `tau,nu,re,im`
pub fn write_grid_csv(path: &Path, g: &DDGrid) -> Result<()> {
    write_rows(
        path,
        &["tau", "nu", "re", "im"],
        grid_rows(g).map(|(t, n, v)| vec![fmt_f64(t), fmt_f64(n), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

/// `tau,nu,abs_db` with 20·log10|A| relative to the grid maximum.
pub fn write_grid_db_csv(path: &Path, g: &DDGrid) -> Result<()> {
    let peak = g.max_abs();
    write_rows(
        path,
        &["tau", "nu", "abs_db"],
        grid_rows(g).map(|(t, n, v)| vec![fmt_f64(t), fmt_f64(n), fmt_f64(20.0 * (v.norm() / peak).log10())]),
    )
}

/// `t,re,im`
pub fn write_time_csv(path: &Path, x: &TimeSamples) -> Result<()> {
    write_rows(
        path,
        &["t", "re", "im"],
        x.values.iter().enumerate().map(|(i, v)| vec![fmt_f64(x.time(i)), fmt_f64(v.re), fmt_f64(v.im)]),
    )
}

/// `gamma,pf,pd`
pub fn write_roc_csv(path: &Path, c: &RocCurve) -> Result<()> {
    write_rows(
        path,
        &["gamma", "pf", "pd"],
        (0..c.thresholds.len()).map(|i| vec![fmt_f64(c.thresholds[i]), fmt_f64(c.pf[i]), fmt_f64(c.pd[i])]),
    )
}

/// `snr_db,rmse_range_m,rmse_velocity_mps`
pub fn write_rmse_csv(path: &Path, c: &RmseCurve) -> Result<()> {
    write_rows(
        path,
        &["snr_db", "rmse_range_m", "rmse_velocity_mps"],
        (0..c.snr_db.len())
            .map(|i| vec![fmt_f64(c.snr_db[i]), fmt_f64(c.rmse_range_m[i]), fmt_f64(c.rmse_velocity_mps[i])]),
    )
}

/// `sep_bins,err1_m,err2_m`
pub fn write_sweep_csv(path: &Path, s: &SweepTable) -> Result<()> {
    write_rows(
        path,
        &["sep_bins", "err1_m", "err2_m"],
        (0..s.sep_bins.len()).map(|i| vec![fmt_f64(s.sep_bins[i]), fmt_f64(s.err1_m[i]), fmt_f64(s.err2_m[i])]),
    )
}

/// `k,l,tau_s,nu_hz,h_re,h_im,range_m,velocity_mps`; absent detections are
/// written as empty rows, unknown fades as empty fields.
pub fn write_estimates_csv(path: &Path, est: &[Option<PeakEstimate>]) -> Result<()> {
    write_rows(
        path,
        &["k", "l", "tau_s", "nu_hz", "h_re", "h_im", "range_m", "velocity_mps"],
        est.iter().map(|e| match e {
            None => vec![String::new(); 8],
            Some(p) => {
                let (hr, hi) = p.h_hat.map(|h| (fmt_f64(h.re), fmt_f64(h.im))).unwrap_or_default();
                vec![
                    p.k_hat.to_string(),
                    p.l_hat.to_string(),
                    fmt_f64(p.tau_hat),
                    fmt_f64(p.nu_hat),
                    hr,
                    hi,
                    fmt_f64(p.range_m),
                    fmt_f64(p.velocity_mps),
                ]
            }
        }),
    )
}

/// Scene entry as serialized: `{tau_s, nu_hz, h_re, h_im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub tau_s: f64,
    pub nu_hz: f64,
    pub h_re: f64,
    pub h_im: f64,
}

impl From<&Target> for SceneRecord {
    fn from(t: &Target) -> Self {
        Self { tau_s: t.tau, nu_hz: t.nu, h_re: t.h.re, h_im: t.h.im }
    }
}

impl From<SceneRecord> for Target {
    fn from(r: SceneRecord) -> Self {
        Target { tau: r.tau_s, nu: r.nu_hz, h: C64::new(r.h_re, r.h_im) }
    }
}

pub fn scene_to_json(targets: &[Target]) -> Result<String> {
    let recs: Vec<SceneRecord> = targets.iter().map(SceneRecord::from).collect();
    Ok(serde_json::to_string_pretty(&recs)?)
}

pub fn scene_from_json(s: &str) -> Result<Vec<Target>> {
    let recs: Vec<SceneRecord> = serde_json::from_str(s)?;
    Ok(recs.into_iter().map(Target::from).collect())
}

pub fn write_scene_json(path: &Path, targets: &[Target]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(scene_to_json(targets)?.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_scene_json(path: &Path) -> Result<Vec<Target>> {
    scene_from_json(&std::fs::read_to_string(path)?)
}

/// Pretty JSON of any serializable value, newline-terminated.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}
