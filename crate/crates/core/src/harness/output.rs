//! Bit-specified artifacts: report CSVs, snapshot files, and plot scripts.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::ConvergenceReport;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField};
use crate::splitting::Trajectory;

pub const CSV_HEADER: &str = "dt,error,norm,method,preset,fit_rate,fit_residual,ref_certificate";

/// 17 significant digits: enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a report in the CSV schema; fit columns repeat on every row and
/// read `NaN` for exact-regime studies.
pub fn report_csv(report: &ConvergenceReport) -> String {
    let (rate, residual) = report
        .fit()
        .map_or((f64::NAN, f64::NAN), |f| (f.rate, f.residual));
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        let fields = [
            format_float(row.dt),
            format_float(row.error),
            format_float(report.norm_index),
            report.method.name().to_string(),
            report.preset.clone(),
            format_float(rate),
            format_float(residual),
            format_float(report.certificate),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    write_atomic(path, report_csv(report).as_bytes())
}

/// Per-snapshot monitors of a trajectory.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("step,time,mass,l2,h4\n");
    for ((step, time), d) in traj.steps.iter().zip(&traj.times).zip(&traj.diagnostics) {
        out.push_str(&format!(
            "{step},{},{},{},{}\n",
            format_float(*time),
            format_float(d.mass),
            format_float(d.l2),
            format_float(d.h4)
        ));
    }
    out
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    Ok(())
}

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"ASCLSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;
pub const SNAPSHOT_HEADER_LEN: usize = 32;

/// A physical field at a time, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: RealField,
}

/// 32-byte header (magic, version `u32`, dims `u32`, n `u64`, time `f64`),
/// then row-major `f64` values; everything little-endian.
pub fn encode_snapshot(field: &RealField, time: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 8 * g.total());
    out.extend_from_slice(&SNAPSHOT_MAGIC);
    out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dims() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(Error::Snapshot(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let version = u32_at(8);
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dims = u32_at(12) as usize;
    let n = usize::try_from(u64_at(16)).map_err(|_| Error::Snapshot("n overflows".into()))?;
    let time = f64::from_bits(u64_at(24));
    let grid = GridSpec::new(dims, n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if body.len() != 8 * grid.total() {
        return Err(Error::Snapshot(format!(
            "expected {} value bytes for dims = {dims}, n = {n}, found {}",
            8 * grid.total(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let field = RealField::new(grid, values).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok(Snapshot { time, field })
}

pub fn write_snapshot(path: &Path, field: &RealField, time: f64) -> Result<()> {
    write_atomic(path, &encode_snapshot(field, time))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    decode_snapshot(&fs::read(path)?)
}

/// A matplotlib script drawing every study CSV in its own directory on
/// log-log axes.
pub fn plot_script(csv_names: &[String]) -> String {
    let list = csv_names
        .iter()
        .map(|n| format!("    \"{n}\",\n"))
        .collect::<String>();
    format!(
        r#"# Regenerate with the `study` command; draws error against dt.
import csv
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = [
{list}]


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = [r for r in csv.DictReader(f) if not math.isnan(float(r["error"]))]
    return rows


fig, ax = plt.subplots(figsize=(6, 4.5))
for name in FILES:
    rows = load(name)
    if not rows:
        continue
    dt = [float(r["dt"]) for r in rows]
    err = [float(r["error"]) for r in rows]
    r0 = rows[0]
    label = "{{}} {{}} H^{{}}: rate {{:.3f}}".format(
        r0["preset"], r0["method"], float(r0["norm"]), float(r0["fit_rate"])
    )
    ax.loglog(dt, err, "o-", label=label)
ax.set_xlabel("dt")
ax.set_ylabel("error")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "convergence.png")
fig.savefig(out, dpi=150)
"#
    )
}
