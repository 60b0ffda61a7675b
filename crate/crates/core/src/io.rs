//! CSV and JSON serialization.
//!
//! Sampled functions go to CSV with header `x[,y],value`; extension fields to
//! CSV `x,v,value` with a JSON sidecar holding grid and order metadata.
//! Numbers are written with the shortest round-trip decimal representation,
//! so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::analysis::FrequencyProfile;
use crate::error::{Error, Result};
use crate::field::{HalfPlaneField, SampledFunction};
use crate::grid::{SpatialGrid, VerticalCoord, VerticalGrid};
use crate::order::FracOrder;
use crate::real::Real;
use crate::symbol_ode::SymbolTable;

fn parse<T: Real>(s: &str, context: &str) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("bad number {s:?} in {context}")))
}

pub fn sampled_to_csv<T: Real>(f: &SampledFunction<T>) -> String {
    let mut out = String::new();
    match f.grid().dim() {
        1 => {
            out.push_str("x,value\n");
            for (i, v) in f.values().iter().enumerate() {
                let _ = writeln!(out, "{},{}", f.grid().coord(i), v);
            }
        }
        2 => {
            out.push_str("x,y,value\n");
            let n = f.grid().n();
            for (k, v) in f.values().iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    f.grid().coord(k / n),
                    f.grid().coord(k % n),
                    v
                );
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Parse a sampled-function CSV. The grid is reconstructed from the
/// coordinate columns: equally spaced samples symmetric about 0 become a
/// line grid, samples starting at 0 a torus; `force_torus`/`force_line`
/// override the inference.
pub fn sampled_from_csv<T: Real>(text: &str, force: Option<bool>) -> Result<SampledFunction<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let dim = match cols.as_slice() {
        ["x", "value"] => 1,
        ["x", "y", "value"] => 2,
        _ => return Err(Error::Parse(format!("unrecognized header {header:?}"))),
    };
    let mut coords: Vec<T> = Vec::new();
    let mut values: Vec<T> = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 1 {
            return Err(Error::Parse(format!("bad row {line:?}")));
        }
        coords.push(parse(parts[0], "coordinate column")?);
        values.push(parse(parts[dim], "value column")?);
    }
    if values.is_empty() {
        return Err(Error::Parse("no data rows".into()));
    }
    let n = match dim {
        1 => values.len(),
        2 => {
            let n = (values.len() as f64).sqrt().round() as usize;
            if n * n != values.len() {
                return Err(Error::Parse("2-D CSV is not a square grid".into()));
            }
            n
        }
        _ => unreachable!(),
    };
    let first = coords[0];
    let step = coords[if dim == 1 { 1 } else { n }] - first;
    let torus = force.unwrap_or(first == T::zero());
    let grid = if torus {
        SpatialGrid::torus(dim, step * T::of_usize(n), n)?
    } else {
        SpatialGrid::line(dim, -first, n)?
    };
    SampledFunction::new(grid, Array1::from(values))
}

/// Sidecar metadata for an extension field.
#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct FieldSidecar<T> {
    pub xgrid: SpatialGrid<T>,
    pub coordinate: VerticalCoord,
    pub vnodes: Vec<T>,
    pub grading: T,
    pub order: FracOrder<T>,
}

pub fn field_to_csv<T: Real>(u: &HalfPlaneField<T>) -> String {
    let mut out = String::from("x,v,value\n");
    let xg = u.xgrid();
    for i in 0..xg.num_points() {
        // 2-D spatial grids flatten the x-columns into the point index
        let label = if xg.dim() == 1 {
            format!("{}", xg.coord(i))
        } else {
            let p = xg.point(i);
            format!("{};{}", p[0], p[1])
        };
        for (j, &v) in u.vgrid().nodes().iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", label, v, u.values()[(i, j)]);
        }
    }
    out
}

pub fn field_sidecar_json<T: Real + Serialize>(u: &HalfPlaneField<T>) -> String {
    let sidecar = FieldSidecar {
        xgrid: *u.xgrid(),
        coordinate: u.vgrid().coordinate(),
        vnodes: u.vgrid().nodes().to_vec(),
        grading: u.vgrid().grading(),
        order: u.order(),
    };
    serde_json::to_string_pretty(&sidecar).expect("sidecar serialization")
}

pub fn field_from_csv<T: Real + serde::de::DeserializeOwned>(
    csv: &str,
    sidecar_json: &str,
) -> Result<HalfPlaneField<T>> {
    let sidecar: FieldSidecar<T> = serde_json::from_str(sidecar_json)
        .map_err(|e| Error::Parse(format!("sidecar: {e}")))?;
    let vgrid = VerticalGrid::from_nodes(sidecar.coordinate, sidecar.vnodes, sidecar.grading)?;
    let rows = sidecar.xgrid.num_points();
    let cols = vgrid.levels();
    let mut values = Array2::zeros((rows, cols));
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header.trim() != "x,v,value" {
        return Err(Error::Parse(format!("unrecognized header {header:?}")));
    }
    let mut count = 0usize;
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("bad row {line:?}")));
        }
        let (i, j) = (count / cols, count % cols);
        if i >= rows {
            return Err(Error::Parse("too many rows for the sidecar grid".into()));
        }
        values[(i, j)] = parse(parts[2], "value column")?;
        count += 1;
    }
    if count != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} rows, found {count}",
            rows * cols
        )));
    }
    HalfPlaneField::new(sidecar.xgrid, vgrid, sidecar.order, values)
}

pub fn symbol_table_to_csv<T: Real>(t: &SymbolTable<T>) -> String {
    let mut out = String::from("xi,s\n");
    for (x, s) in t.xi.iter().zip(&t.s) {
        let _ = writeln!(out, "{x},{s}");
    }
    out
}

pub fn symbol_table_from_csv<T: Real>(text: &str) -> Result<SymbolTable<T>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header.trim() != "xi,s" {
        return Err(Error::Parse(format!("unrecognized header {header:?}")));
    }
    let mut xi = Vec::new();
    let mut s = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("bad row {line:?}")));
        }
        xi.push(parse(parts[0], "xi column")?);
        s.push(parse(parts[1], "s column")?);
    }
    Ok(SymbolTable {
        xi,
        s,
        coefficient: String::new(),
    })
}

pub fn profile_to_csv<T: Real>(p: &FrequencyProfile<T>) -> String {
    let mut out = String::from("R,Phi,num,den\n");
    for k in 0..p.radii.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.radii[k], p.phi[k], p.num[k], p.den[k]
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}
