//! Output files and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use strobo_core::diagnostics::{fidelity_error_curve, fmt_f64, width_curve};
use strobo_core::{snapshot, Grid, Trajectory, WaveFunction};

use crate::config::SnapshotFormat;

/// Bumped whenever a CSV layout or manifest field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;
pub const TRAJECTORY_HEADER: &str = "t,fidelity,width,norm";

#[derive(Debug, Serialize)]
pub struct CsvSchema {
    pub trajectory: &'static str,
    pub series: &'static str,
    pub snapshot_csv: &'static str,
    pub snapshot_binary: &'static str,
    pub float_format: &'static str,
}

pub const CSV_SCHEMA: CsvSchema = CsvSchema {
    trajectory: TRAJECTORY_HEADER,
    series: "t,value,label",
    snapshot_csv: snapshot::CSV_HEADER,
    snapshot_binary: "n_points pairs of little-endian f64 (re, im), no header",
    float_format: "17 significant digits, scientific notation, LF line endings",
};

#[derive(Debug, Serialize)]
pub struct GridInfo {
    pub n_points: usize,
    pub length: f64,
    pub dx: f64,
    pub dk: f64,
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        Self {
            n_points: g.n_points(),
            length: g.length(),
            dx: g.dx(),
            dk: g.dk(),
        }
    }
}

pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut out = create_file(path)?;
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for i in 0..traj.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(traj.times[i]),
            fmt_f64(traj.fidelities[i]),
            fmt_f64(traj.widths[i]),
            fmt_f64(traj.norms[i])
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Files written for one evolved curve.
#[derive(Debug, Serialize)]
pub struct CurveFiles {
    pub trajectory: PathBuf,
    pub fidelity_error: PathBuf,
    pub width: PathBuf,
    pub snapshots: Vec<SnapshotEntry>,
}

#[derive(Debug, Serialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub file: PathBuf,
}

/// Writes the trajectory, the two derived series and any snapshots of
/// `traj` under `dir`. Returned paths are relative to `dir`.
pub fn write_curve(dir: &Path, label: &str, traj: &Trajectory, format: SnapshotFormat) -> Result<CurveFiles> {
    let trajectory = PathBuf::from(format!("trajectory_{label}.csv"));
    write_trajectory(&dir.join(&trajectory), traj)?;

    let fidelity_error = PathBuf::from(format!("fidelity_error_{label}.csv"));
    let mut out = create_file(&dir.join(&fidelity_error))?;
    fidelity_error_curve(traj, label)?.write_csv(&mut out)?;
    out.flush()?;

    let width = PathBuf::from(format!("width_{label}.csv"));
    let mut out = create_file(&dir.join(&width))?;
    width_curve(traj, label)?.write_csv(&mut out)?;
    out.flush()?;

    let snapshots = traj
        .snapshots
        .iter()
        .enumerate()
        .map(|(i, (t, wf))| {
            let ext = match format {
                SnapshotFormat::Csv => "csv",
                SnapshotFormat::Binary => "bin",
            };
            let file = PathBuf::from("snapshots").join(format!("{label}_{i:05}.{ext}"));
            write_state(&dir.join(&file), wf, format)?;
            Ok(SnapshotEntry { t: *t, file })
        })
        .collect::<Result<_>>()?;

    Ok(CurveFiles {
        trajectory,
        fidelity_error,
        width,
        snapshots,
    })
}

pub fn write_state(path: &Path, wf: &WaveFunction, format: SnapshotFormat) -> Result<()> {
    let mut out = create_file(path)?;
    match format {
        SnapshotFormat::Csv => snapshot::write_csv(wf, &mut out)?,
        SnapshotFormat::Binary => snapshot::write_binary(wf, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

pub fn read_state(path: &Path, grid: &Grid, format: SnapshotFormat) -> Result<WaveFunction> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let wf = match format {
        SnapshotFormat::Csv => snapshot::read_csv(grid, f),
        SnapshotFormat::Binary => snapshot::read_binary(grid, f),
    }
    .with_context(|| format!("reading snapshot {}", path.display()))?;
    Ok(wf)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create_file(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
