//! Rendering of computed jobs in the three output formats.

use std::io::Write;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use bps_core::BpsError;

use crate::check::Report;
use crate::job::{surface_name, Computed};
use crate::wire::{series_to_wire, table_to_wire, RowWire, SeriesWire};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultWire {
    pub surface: String,
    pub rank: u32,
    pub c1: Vec<i64>,
    pub polarization: String,
    pub qorders: u32,
    /// Classes with `rΔ` below this bound are included.
    pub bound: String,
    pub flavor: String,
    pub series: SeriesWire,
    pub table: Vec<RowWire>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorWire {
    pub kind: String,
    pub message: String,
}

pub fn to_wire(c: &Computed) -> Result<ResultWire, BpsError> {
    Ok(ResultWire {
        surface: surface_name(c.spec.surface),
        rank: c.spec.r,
        c1: c.spec.c1.clone(),
        polarization: c.spec.polarization.to_string(),
        qorders: c.spec.qorders,
        bound: c.bound.to_string(),
        flavor: c.omegabar.flavor.to_string(),
        series: series_to_wire(&c.omegabar.series),
        table: table_to_wire(&c.table).map_err(|e| BpsError::InvalidInput(e.to_string()))?,
    })
}

/// A single result is written as an object, several as an array.
pub fn write_json(out: &mut impl Write, results: &[ResultWire]) -> serde_json::Result<()> {
    match results {
        [one] => serde_json::to_writer_pretty(&mut *out, one)?,
        _ => serde_json::to_writer_pretty(&mut *out, results)?,
    }
    writeln!(out).map_err(serde_json::Error::io)
}

/// Table rows only; Betti columns are padded to the widest row.
pub fn write_csv(out: &mut impl Write, results: &[ResultWire]) -> csv::Result<()> {
    let width = results.iter().flat_map(|r| &r.table).map(|row| row.betti.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> =
        ["surface", "rank", "c1", "polarization", "c2", "delta", "dim", "euler"].map(String::from).to_vec();
    header.extend((0..width).map(|i| format!("b{}", 2 * i)));
    w.write_record(&header)?;
    for r in results {
        let c1 = r.c1.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        for row in &r.table {
            let mut rec = vec![
                r.surface.clone(),
                r.rank.to_string(),
                c1.clone(),
                r.polarization.clone(),
                row.c2.to_string(),
                row.delta.clone(),
                row.dim.to_string(),
                row.euler.to_string(),
            ];
            rec.extend((0..width).map(|i| row.betti.get(i).map(|b| b.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_text(out: &mut impl Write, computed: &[Computed]) -> std::io::Result<()> {
    for c in computed {
        let s = &c.spec;
        let c1 = s.c1.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        writeln!(out, "{} r={} c1=({c1}) {} rΔ<{}", surface_name(s.surface), s.r, s.polarization, c.bound)?;
        writeln!(out, "{} = {}", c.omegabar.flavor, c.omegabar.series)?;
        writeln!(out, "{:>4} {:>8} {:>4} {:>8}  betti", "c2", "delta", "dim", "euler")?;
        for row in &c.table.rows {
            let betti = row.betti.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(out, "{:>4} {:>8} {:>4} {:>8}  {betti}", row.c2, row.delta, row.dim, row.euler)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_report(out: &mut impl Write, report: &Report, format: Format) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["name", "pass", "detail"])?;
            for c in &report.checks {
                w.write_record([c.name.as_str(), if c.pass { "true" } else { "false" }, c.detail.as_str()])?;
            }
            w.flush()
        }
        Format::Text => {
            for c in &report.checks {
                writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            Ok(())
        }
    }
}

/// Exit status for an engine error: 2 for rejected input, 1 otherwise.
pub fn error_status(e: &BpsError) -> u8 {
    match e {
        BpsError::InvalidInput(_) | BpsError::Unsupported(_) | BpsError::OnWall | BpsError::NonAdjacent => 2,
        _ => 1,
    }
}

pub fn error_kind(e: &BpsError) -> &'static str {
    match e {
        BpsError::Series(_) => "series",
        BpsError::InvalidInput(_) => "invalid_input",
        BpsError::Unsupported(_) => "unsupported",
        BpsError::OnWall => "on_wall",
        BpsError::NonAdjacent => "non_adjacent",
        BpsError::Integrality(_) => "integrality",
        BpsError::Parity => "parity",
        BpsError::Unbounded(_) => "unbounded",
        BpsError::MissingInput(_) => "missing_input",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_status_by_error() {
        assert_eq!(error_status(&BpsError::InvalidInput("x".into())), 2);
        assert_eq!(error_status(&BpsError::OnWall), 2);
        assert_eq!(error_status(&BpsError::Unsupported("x".into())), 2);
        assert_eq!(error_status(&BpsError::Integrality("x".into())), 1);
        assert_eq!(error_status(&BpsError::Parity), 1);
    }
}
