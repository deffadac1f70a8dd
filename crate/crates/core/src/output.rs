//! CSV, display-table and legacy VTK writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::ErrorTableRow;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::runner::StepRecord;

pub const STEPS_HEADER: &str =
    "step,time,E_bulk_grad,E_bulk_pot,E_surf_grad,E_surf_pot,E_penalty,E_total,mass_bulk,mass_surf,newton_iters,residual_inf";
pub const SWEEP_HEADER: &str =
    "K,err_L2H1_bulk,eoc,err_L4L2_bulk,eoc,err_L2SigmaT,eoc,err_L2H1_surf,eoc,err_L4L2_surf,eoc";

/// Scientific notation with `digits` significant digits and a signed
/// two-digit exponent, e.g. `format_sci(0.00217, 3) == "2.17e-03"`.
pub fn format_sci(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Machine-readable number: 17 significant digits.
pub fn format_full(x: f64) -> String {
    format_sci(x, 17)
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn steps_csv(records: &[StepRecord]) -> String {
    let mut s = String::with_capacity(256 * (records.len() + 1));
    s.push_str(STEPS_HEADER);
    s.push('\n');
    for r in records {
        let e = &r.energy;
        let floats = [
            r.time,
            e.bulk_grad,
            e.bulk_pot,
            e.surf_grad,
            e.surf_pot,
            e.penalty,
            e.total,
            r.mass_bulk,
            r.mass_surf,
        ];
        let _ = write!(s, "{}", r.step);
        for x in floats {
            let _ = write!(s, ",{}", format_full(x));
        }
        let _ = writeln!(s, ",{},{}", r.newton_iters, format_full(r.residual));
    }
    s
}

fn snapshot_csv(points: impl Iterator<Item = [f64; 2]>, values: &[f64], name: &str) -> String {
    let mut s = format!("x,y,{name}\n");
    for (p, v) in points.zip(values) {
        let _ = writeln!(s, "{},{},{}", format_full(p[0]), format_full(p[1]), format_full(*v));
    }
    s
}

/// Writes `u_XXXXX.csv` on all nodes and `v_XXXXX.csv` on the boundary
/// nodes; returns the bulk file path.
pub fn write_snapshot(dir: &Path, step: usize, mesh: &Mesh, u: &[f64], v: &[f64]) -> Result<PathBuf> {
    let bulk = dir.join(format!("u_{step:05}.csv"));
    write_file(&bulk, &snapshot_csv(mesh.nodes().iter().copied(), u, "u"))?;
    let surf = mesh.boundary_nodes().iter().map(|&i| mesh.nodes()[i]);
    write_file(&dir.join(format!("v_{step:05}.csv")), &snapshot_csv(surf, v, "v"))?;
    Ok(bulk)
}

/// Legacy ASCII VTK unstructured grid with `u` as point data.
pub fn vtk_string(mesh: &Mesh, u: &[f64], step: usize) -> String {
    let nodes = mesh.nodes();
    let tris = mesh.triangles();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nphase field step {step}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", nodes.len());
    for p in nodes {
        let _ = writeln!(s, "{} {} 0", format_full(p[0]), format_full(p[1]));
    }
    let _ = writeln!(s, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in tris {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", tris.len());
    for _ in tris {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", nodes.len());
    for x in u {
        let _ = writeln!(s, "{}", format_full(*x));
    }
    s
}

pub fn write_vtk(dir: &Path, step: usize, mesh: &Mesh, u: &[f64]) -> Result<PathBuf> {
    let path = dir.join(format!("u_{step:05}.vtk"));
    write_file(&path, &vtk_string(mesh, u, step))?;
    Ok(path)
}

fn eoc_cell(e: Option<f64>, fmt: impl Fn(f64) -> String) -> String {
    e.map(fmt).unwrap_or_default()
}

pub fn sweep_csv(rows: &[ErrorTableRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        s.push_str(&format_full(row.k));
        for (err, rate) in row.errors().iter().zip(row.eocs()) {
            let _ = write!(s, ",{},{}", format_full(*err), eoc_cell(rate, format_full));
        }
        s.push('\n');
    }
    s
}

/// Human-readable table with 3 significant digits.
pub fn display_table(rows: &[ErrorTableRow]) -> String {
    let headers = [
        "K",
        "L2H1 bulk",
        "eoc",
        "L4L2 bulk",
        "eoc",
        "L2 SigmaT",
        "eoc",
        "L2H1 surf",
        "eoc",
        "L4L2 surf",
        "eoc",
    ];
    let short = |x: f64| format_sci(x, 3);
    let mut lines = vec![headers.iter().map(|h| h.to_string()).collect::<Vec<_>>()];
    for row in rows {
        let mut cells = vec![short(row.k)];
        for (err, rate) in row.errors().iter().zip(row.eocs()) {
            cells.push(short(*err));
            cells.push(eoc_cell(rate, short));
        }
        lines.push(cells);
    }
    let widths: Vec<usize> = (0..headers.len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for line in lines {
        let padded: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "{}", padded.join("  ").trim_end());
    }
    s
}
