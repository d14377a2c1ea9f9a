//! Scenario files, sweep tables and the command implementations behind the
//! `ris-cci` binary.

pub mod scenario;
pub mod table;

use std::io::Write;

use anyhow::Result;

use crate::scenario::{Scenario, SweepVariable};
use crate::table::SeriesSummary;

/// Writes the `analyze` CSV for every point of `s`.
pub fn analyze<W: Write>(s: &Scenario, out: W) -> Result<()> {
    let points = s.points()?;
    let rows = table::analytic_rows(&points)?;
    table::write_analyze(out, &points, &rows)
}

/// Writes the `simulate` CSV for every point of `s`.
pub fn simulate<W: Write>(s: &Scenario, out: W) -> Result<()> {
    let points = s.points()?;
    let rows = table::mc_rows(&points, &s.mc)?;
    table::write_simulate(out, &points, &rows)
}

/// Writes the `compare` CSV and returns the per-series summary.
pub fn compare<W: Write>(s: &Scenario, out: W) -> Result<Vec<SeriesSummary>> {
    let points = s.points()?;
    let a = table::analytic_rows(&points)?;
    let m = table::mc_rows(&points, &s.mc)?;
    table::write_compare(out, &points, &a, &m)?;
    Ok(table::summarize(&points, &a, &m, s.sweep.variable == SweepVariable::PSDb))
}
