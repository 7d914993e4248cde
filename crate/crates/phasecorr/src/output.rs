//! Result files: one CSV per correlation, a JSON manifest, optional gnuplot scripts,
//! and the binary ensemble checkpoint.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use phasecorr_core::ensemble::Ensemble;
use phasecorr_core::stats::Estimate;
use phasecorr_core::{SOrder, C64};
use serde::Serialize;

use crate::error::AppError;
use crate::runner::OccupationRecord;

/// Where a curve came from; oracle curves get a `.oracle.csv` suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Stochastic,
    Oracle,
}

#[derive(Debug, Serialize)]
struct CurveRow {
    tau: f64,
    re_value: f64,
    re_err: f64,
    im_value: f64,
    im_err: f64,
    n_effective: usize,
}

pub fn curve_path(dir: &Path, name: &str, source: Source) -> PathBuf {
    match source {
        Source::Stochastic => dir.join(format!("{name}.csv")),
        Source::Oracle => dir.join(format!("{name}.oracle.csv")),
    }
}

pub fn write_curve(path: &Path, taus: &[f64], points: &[Estimate]) -> Result<(), AppError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for (&tau, e) in taus.iter().zip(points) {
        w.serialize(CurveRow {
            tau,
            re_value: e.value.re,
            re_err: e.err_re,
            im_value: e.value.im,
            im_err: e.err_im,
            n_effective: e.samples,
        })
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Serialize)]
struct OccupationRow {
    time: f64,
    mode: usize,
    representation: String,
    re_value: f64,
    re_err: f64,
    im_value: f64,
    im_err: f64,
    n_effective: usize,
}

/// Occupation time series, one row per record and mode.
pub fn write_occupations(path: &Path, records: &[OccupationRecord]) -> Result<(), AppError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for r in records {
        for (j, e) in r.values.iter().enumerate() {
            w.serialize(OccupationRow {
                time: r.time,
                mode: j + 1,
                representation: r.order.to_string(),
                re_value: e.value.re,
                re_err: e.err_re,
                im_value: e.value.im,
                im_err: e.err_im,
                n_effective: e.samples,
            })
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        other => AppError::Numerical(format!("{}: {other:?}", path.display())),
    }
}

/// Plain gnuplot script plotting the real part with error bars, next to the CSV.
pub fn write_gnuplot(csv_path: &Path, title: &str) -> Result<PathBuf, AppError> {
    let gp = csv_path.with_extension("gp");
    let file = csv_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let png = csv_path.with_extension("png").file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    let script = format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 800,500\n\
         set output '{png}'\n\
         set xlabel 'tau'\n\
         set title '{title}'\n\
         set key autotitle columnhead\n\
         plot '{file}' using 1:2:3 with yerrorbars title 'Re', \\\n     '{file}' using 1:4:5 with yerrorbars title 'Im'\n"
    );
    std::fs::write(&gp, script).map_err(|e| AppError::io(&gp, e))?;
    Ok(gp)
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool_version: &'static str,
    pub command: &'a str,
    pub source: Source,
    pub seed: u64,
    pub workers: usize,
    pub escaped: usize,
    pub clamps: u64,
    pub wall_seconds: f64,
    pub files: Vec<String>,
    /// Timestep heuristic ratios at `t0`, if evaluated.
    pub timestep_ratios: Vec<(String, f64)>,
    pub notes: Vec<String>,
    /// Complete configuration as run, including command-line overrides.
    pub config: &'a crate::config::RunConfig,
}

pub fn write_manifest(path: &Path, m: &Manifest<'_>) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(m).map_err(|e| AppError::Numerical(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Writes `M: u64, S: u64, s: f64, time: f64`, then `S x 2M` complex doubles
/// (`[alpha_1 .. alpha_M, beta_1 .. beta_M]` per trajectory), all little-endian.
pub fn write_checkpoint(path: &Path, ens: &Ensemble) -> Result<(), AppError> {
    let f = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = BufWriter::new(f);
    let io = |e| AppError::io(path, e);
    w.write_all(&(ens.modes() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(ens.size() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&ens.order().s().to_le_bytes()).map_err(io)?;
    w.write_all(&ens.time().to_le_bytes()).map_err(io)?;
    for z in ens.raw() {
        w.write_all(&z.re.to_le_bytes()).map_err(io)?;
        w.write_all(&z.im.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a checkpoint. The file carries no classical-P flag or seed, so both are supplied.
pub fn read_checkpoint(path: &Path, classical: bool, seed: u64) -> Result<Ensemble, AppError> {
    let f = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8], AppError> {
        r.read_exact(&mut word).map_err(|e| AppError::io(path, e))?;
        Ok(word)
    };
    let modes = u64::from_le_bytes(next(&mut r)?) as usize;
    let size = u64::from_le_bytes(next(&mut r)?) as usize;
    let s = f64::from_le_bytes(next(&mut r)?);
    let time = f64::from_le_bytes(next(&mut r)?);
    let count = size
        .checked_mul(2 * modes)
        .filter(|&n| n <= 1 << 32)
        .ok_or_else(|| AppError::Config(format!("{}: implausible checkpoint header", path.display())))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let re = f64::from_le_bytes(next(&mut r)?);
        let im = f64::from_le_bytes(next(&mut r)?);
        data.push(C64::new(re, im));
    }
    let order = if classical { SOrder::CLASSICAL_P } else { SOrder::new(s)? };
    Ok(Ensemble::from_raw(modes, order, time, seed, data)?)
}
