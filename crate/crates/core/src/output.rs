//! CSV serialization: comma separated, quoted only when needed, `\n` line
//! endings, reals with 17 significant digits.

use std::io::Write;
use std::path::Path;

use csv::{QuoteStyle, Terminator, WriterBuilder};

use crate::dynamics::{ClosureRow, Trajectory};
use crate::energy::{EnergyLedgerRow, LEDGER_COLUMNS};
use crate::error::Result;
use crate::state::COMPONENT_NAMES;

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(sink: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .quote_style(QuoteStyle::Necessary)
        .from_writer(sink)
}

/// Writes a header and rows of reals.
pub fn write_table<W: Write>(sink: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_real(*x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn trajectory_header() -> Vec<&'static str> {
    let mut h = vec!["t", "S"];
    h.extend(COMPONENT_NAMES);
    h.extend(["phi_x", "phi_y", "phi_z", "qw", "qx", "qy", "qz"]);
    h
}

/// One row per snapshot and node.
pub fn write_trajectory<W: Write>(sink: W, traj: &Trajectory) -> Result<()> {
    let grid = traj.model.grid;
    let rows = traj.snapshots.iter().flat_map(|snap| {
        (0..grid.n_nodes()).map(move |j| {
            let mut row = vec![snap.t, grid.node(j)];
            row.extend((0..12).map(|c| snap.u.component(j, c)));
            row.extend(snap.kin.phi[j].iter());
            row.extend(snap.kin.rot[j].to_quaternion());
            row
        })
    });
    write_table(sink, &trajectory_header(), rows)
}

pub fn write_ledger<W: Write>(sink: W, rows: &[EnergyLedgerRow]) -> Result<()> {
    write_table(sink, &LEDGER_COLUMNS, rows.iter().map(|r| r.values().to_vec()))
}

pub fn write_closure<W: Write>(sink: W, rows: &[ClosureRow]) -> Result<()> {
    write_table(sink, &["t", "r_eps", "r_kappa"], rows.iter().map(|r| vec![r.t, r.r_eps, r.r_kappa]))
}

/// Writes the three files of a dynamic run into `dir`.
pub fn write_run(dir: &Path, traj: &Trajectory) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_trajectory(std::fs::File::create(dir.join("trajectory.csv"))?, traj)?;
    write_ledger(std::fs::File::create(dir.join("energy.csv"))?, &traj.ledger)?;
    write_closure(std::fs::File::create(dir.join("closure.csv"))?, &traj.closure)?;
    Ok(())
}
