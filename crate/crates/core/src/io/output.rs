//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::ellipticity::SweepReport;
use crate::error::Result;
use crate::solver::ScalarField;

/// `x1,…,xn,u` with one row per node, in node order.
pub fn solution_csv(u: &ScalarField) -> String {
    let g = u.grid();
    let mut out = String::new();
    for a in 0..g.n() {
        write!(out, "x{},", a + 1).unwrap();
    }
    out.push_str("u\n");
    for (node, v) in u.values().iter().enumerate() {
        for x in g.coords(node) {
            write!(out, "{x:e},").unwrap();
        }
        writeln!(out, "{v:e}").unwrap();
    }
    out
}

/// Header plus one row per report.
pub fn sweep_summary_csv(reports: &[SweepReport]) -> String {
    let mut out = String::from(SweepReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
