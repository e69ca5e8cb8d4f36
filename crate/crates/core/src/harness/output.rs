//! Writers for `diagnostics.csv`, legacy VTK snapshots and `report.txt`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::solver::grid::Grid;
use crate::solver::stepper::FieldState;

pub const CSV_HEADER: &str = "time,kinetic,elastic,dissipated,residual,min_det";
pub const VTK_HEADER: &str = "# vtk DataFile Version 3.0";

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn diagnostics_csv(report: &EnergyReport<f64>, min_det: &[(f64, f64)]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for k in 0..report.len() {
        let row = [
            report.times[k],
            report.kinetic[k],
            report.elastic[k],
            report.dissipated[k],
            report.residual[k],
            min_det[k].1,
        ];
        let cells: Vec<String> = row.iter().map(|&x| fmt_real(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Legacy ASCII structured grid on the reference configuration with point
/// vectors `xi` and `v` (padded to three components).
pub fn vtk_snapshot(grid: &Grid<f64>, state: &FieldState<f64>) -> String {
    let d = grid.dim();
    let p = grid.nodes_per_side();
    let n = grid.node_count();
    let mut out = String::new();
    let _ = writeln!(out, "{VTK_HEADER}");
    let _ = writeln!(out, "viscolab snapshot t={}", fmt_real(state.time));
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_GRID");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", p, if d == 2 { p } else { 1 });
    let _ = writeln!(out, "POINTS {n} double");
    for node in 0..n {
        let x = grid.node_coords(node);
        let _ = writeln!(out, "{} {} {}", fmt_real(x[0]), fmt_real(x[1]), fmt_real(0.0));
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    for (name, field) in [("xi", &state.xi), ("v", &state.v)] {
        let _ = writeln!(out, "VECTORS {name} double");
        for node in 0..n {
            let mut c = [0.0; 3];
            c[..d].copy_from_slice(&field[node * d..(node + 1) * d]);
            let _ = writeln!(out, "{} {} {}", fmt_real(c[0]), fmt_real(c[1]), fmt_real(c[2]));
        }
    }
    out
}

/// What [`validate_vtk`] found in a snapshot file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VtkSummary {
    pub dimensions: [usize; 3],
    pub points: usize,
    pub vectors: Vec<String>,
}

fn vtk_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_triple(line_no: usize, line: &str) -> Result<[f64; 3]> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| vtk_error(line_no, format!("bad number `{t}`"))))
        .collect::<Result<_>>()?;
    if vals.len() != 3 || vals.iter().any(|v| !v.is_finite()) {
        return Err(vtk_error(line_no, "expected three finite numbers"));
    }
    Ok([vals[0], vals[1], vals[2]])
}

/// Checks the header, the structured-grid layout, the point count and that
/// the point data holds exactly the vectors `xi` and `v`.
pub fn validate_vtk(text: &str) -> Result<VtkSummary> {
    let lines: Vec<&str> = text.lines().collect();
    let get = |i: usize| lines.get(i).copied().ok_or_else(|| vtk_error(i + 1, "unexpected end of file"));
    if get(0)? != VTK_HEADER {
        return Err(vtk_error(1, "missing legacy VTK header"));
    }
    let title = get(1)?;
    if title.is_empty() || title.len() > 256 {
        return Err(vtk_error(2, "title line must be 1..256 characters"));
    }
    if get(2)? != "ASCII" {
        return Err(vtk_error(3, "only ASCII files are produced"));
    }
    if get(3)? != "DATASET STRUCTURED_GRID" {
        return Err(vtk_error(4, "expected DATASET STRUCTURED_GRID"));
    }
    let dims: Vec<usize> = get(4)?
        .strip_prefix("DIMENSIONS ")
        .ok_or_else(|| vtk_error(5, "expected DIMENSIONS"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| vtk_error(5, "bad dimension")))
        .collect::<Result<_>>()?;
    if dims.len() != 3 || dims.contains(&0) {
        return Err(vtk_error(5, "DIMENSIONS needs three positive integers"));
    }
    let count = dims[0] * dims[1] * dims[2];
    let header = get(5)?;
    if header != format!("POINTS {count} double") {
        return Err(vtk_error(6, format!("expected `POINTS {count} double`")));
    }
    let mut i = 6;
    for _ in 0..count {
        parse_triple(i + 1, get(i)?)?;
        i += 1;
    }
    if get(i)? != format!("POINT_DATA {count}") {
        return Err(vtk_error(i + 1, format!("expected `POINT_DATA {count}`")));
    }
    i += 1;
    let mut vectors = Vec::new();
    while i < lines.len() {
        let name = lines[i]
            .strip_prefix("VECTORS ")
            .and_then(|s| s.strip_suffix(" double"))
            .ok_or_else(|| vtk_error(i + 1, "expected `VECTORS <name> double`"))?;
        vectors.push(name.to_string());
        i += 1;
        for _ in 0..count {
            parse_triple(i + 1, get(i)?)?;
            i += 1;
        }
    }
    if vectors != ["xi", "v"] {
        return Err(vtk_error(lines.len(), format!("expected vectors xi and v, found {vectors:?}")));
    }
    Ok(VtkSummary {
        dimensions: [dims[0], dims[1], dims[2]],
        points: count,
        vectors,
    })
}

/// `key = value` lines in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn real(&mut self, key: &str, value: f64) {
        self.put(key, fmt_real(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
