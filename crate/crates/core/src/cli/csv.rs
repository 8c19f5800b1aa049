//! Trajectory CSV logs and run summaries.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::sim::{Scenario, TrajectoryLog};

/// Column names of a trajectory log, in order.
pub const COLUMNS: [&str; 44] = [
    "t", "x0", "x1", "x2", "v0", "v1", "v2", "R00", "R01", "R02", "R10", "R11", "R12", "R20",
    "R21", "R22", "W0", "W1", "W2", "f", "M0", "M1", "M2", "f1", "f2", "f3", "f4", "ex0", "ex1",
    "ex2", "ev0", "ev1", "ev2", "eR0", "eR1", "eR2", "eW0", "eW1", "eW2", "Psi", "V1", "V2", "V",
    "V3",
];

pub fn header() -> String {
    COLUMNS.join(",")
}

pub fn write_log<W: Write + ?Sized>(log: &TrajectoryLog, out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", header())?;
    let mut row = Vec::with_capacity(COLUMNS.len());
    for r in &log.records {
        row.clear();
        let s = &r.state;
        row.push(r.t);
        row.extend(s.position.iter());
        row.extend(s.velocity.iter());
        let m = s.attitude.matrix();
        for i in 0..3 {
            for j in 0..3 {
                row.push(m[(i, j)]);
            }
        }
        row.extend(s.angular_velocity.iter());
        row.push(r.wrench.thrust);
        row.extend(r.wrench.moment.iter());
        row.extend(r.rotors.0.iter());
        let e = &r.errors;
        row.extend(e.e_x.iter());
        row.extend(e.e_v.iter());
        row.extend(e.e_r.iter());
        row.extend(e.e_omega.iter());
        let v = &r.monitors;
        row.extend([v.psi, v.v1, v.v2, v.v, v.v3]);
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Writes `contents` next to `path` and renames it into place, so a reader
/// never sees a half-written file.
pub fn write_atomically(
    path: &Path,
    contents: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut buf = io::BufWriter::new(tmp.as_file_mut());
        contents(&mut buf)?;
        buf.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub mode: &'static str,
    pub robust: bool,
    pub dt: f64,
    pub duration: f64,
    pub steps: usize,
    pub terminal_position_error: f64,
    pub terminal_attitude_error: f64,
    pub initial_psi: f64,
    pub max_psi: f64,
    pub switch_time: Option<f64>,
    pub max_orthogonality_error: f64,
    pub wall_time_s: f64,
    pub csv: String,
}

impl RunSummary {
    pub fn new(sc: &Scenario, log: &TrajectoryLog, wall_time_s: f64, csv: &Path) -> Self {
        RunSummary {
            scenario: sc.name.clone(),
            mode: sc.mode.as_str(),
            robust: sc.robust,
            dt: sc.dt,
            duration: sc.duration,
            steps: sc.steps(),
            terminal_position_error: log.terminal_position_error(),
            terminal_attitude_error: log.terminal_attitude_error(),
            initial_psi: log.initial_psi(),
            max_psi: log.max_psi(),
            switch_time: log.switch_time,
            max_orthogonality_error: log.max_orthogonality_error(),
            wall_time_s,
            csv: csv.display().to_string(),
        }
    }
}

/// `out.csv` -> `out.summary.json`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}
