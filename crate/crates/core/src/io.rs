//! CSV grids with `#` metadata headers, and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadSpec;
use crate::radiation::{FigureGrid, GridKind};

/// Everything needed to rerun a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: serde_json::Value,
    pub tolerances: QuadSpec,
    pub threads: usize,
    pub wall_time_s: f64,
    /// Named error estimates of the outputs.
    pub errors: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, tolerances: QuadSpec) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
            tolerances,
            threads: rayon::current_num_threads(),
            wall_time_s: 0.0,
            errors: BTreeMap::new(),
        }
    }
}

fn kind_name(kind: GridKind) -> &'static str {
    match kind {
        GridKind::Energy => "energy",
        GridKind::EnergyAsymptotic => "energy-asymptotic",
        GridKind::Rate => "rate",
    }
}

fn kind_from(s: &str) -> Result<GridKind> {
    match s {
        "energy" => Ok(GridKind::Energy),
        "energy-asymptotic" => Ok(GridKind::EnergyAsymptotic),
        "rate" => Ok(GridKind::Rate),
        _ => Err(Error::Parse(format!("unknown grid kind '{s}'"))),
    }
}

/// Shortest-exact rendering: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a grid; the manifest, when given, goes on one `# manifest=` line.
pub fn grid_to_csv(grid: &FigureGrid, manifest: Option<&RunManifest>) -> Result<String> {
    let mut s = String::new();
    let _ = writeln!(s, "# hyperrad grid");
    let _ = writeln!(s, "# figure={}", grid.figure);
    let _ = writeln!(s, "# kind={}", kind_name(grid.kind));
    let _ = writeln!(s, "# eta_in={}", fmt17(grid.eta_in));
    let _ = writeln!(s, "# eta={}", fmt17(grid.eta));
    let _ = writeln!(s, "# nx={}", grid.kx.len());
    let _ = writeln!(s, "# npar={}", grid.kpar.len());
    if let Some(m) = manifest {
        let _ = writeln!(s, "# manifest={}", serde_json::to_string(m).map_err(|e| Error::Io(e.to_string()))?);
    }
    s.push_str("kx,kpar,value\n");
    for (j, &kz) in grid.kpar.iter().enumerate() {
        for (i, &kx) in grid.kx.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", fmt17(kx), fmt17(kz), fmt17(grid.at(i, j)));
        }
    }
    Ok(s)
}

/// Parsed grid with its metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGrid {
    pub grid: FigureGrid,
    pub metadata: BTreeMap<String, String>,
    pub manifest: Option<RunManifest>,
}

pub fn grid_from_csv(text: &str) -> Result<ParsedGrid> {
    let mut metadata = BTreeMap::new();
    let mut rows = vec![];
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.trim_start().split_once('=') {
                metadata.insert(k.trim().to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            if line.trim() != "kx,kpar,value" {
                return Err(Error::Parse(format!("line {}: expected header 'kx,kpar,value'", lineno + 1)));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 3 fields, got {}", lineno + 1, fields.len())));
        }
        let mut v = [0.0; 3];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        rows.push(v);
    }
    let get = |k: &str| metadata.get(k).ok_or_else(|| Error::Parse(format!("missing metadata '{k}'")));
    let num = |k: &str| -> Result<f64> { get(k)?.trim().parse().map_err(|e| Error::Parse(format!("{k}: {e}"))) };
    let nx = num("nx")? as usize;
    let npar = num("npar")? as usize;
    if rows.len() != nx * npar || nx == 0 {
        return Err(Error::Parse(format!("expected {} rows, found {}", nx * npar, rows.len())));
    }
    let kx = rows[..nx].iter().map(|r| r[0]).collect();
    let kpar = (0..npar).map(|j| rows[j * nx][1]).collect();
    let values = rows.iter().map(|r| r[2]).collect();
    let grid = FigureGrid {
        figure: num("figure")? as u8,
        kind: kind_from(get("kind")?.trim())?,
        eta_in: num("eta_in")?,
        eta: num("eta")?,
        kx,
        kpar,
        values,
    };
    let manifest = match metadata.get("manifest") {
        Some(m) => Some(serde_json::from_str(m).map_err(|e| Error::Parse(format!("manifest: {e}")))?),
        None => None,
    };
    Ok(ParsedGrid { grid, metadata, manifest })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Pretty JSON of any serializable value.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))
}
