//! File emission. Every write goes to a temporary file in the target
//! directory and is renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use morawetz_core::functionals::{DiagnosticsRecord, DiagnosticsSeries};
use morawetz_core::grid::{FieldState, Grid, GridKind};
use serde::Serialize;

use crate::error::{LabError, LabResult};

pub const CSV_HEADER: [&str; 11] = [
    "t",
    "mass",
    "energy",
    "kinetic",
    "potential",
    "morawetz_p1",
    "morawetz_r3",
    "morawetz_ang",
    "mass_identity_residual",
    "energy_identity_residual",
    "outer_boundary_mass",
];

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"MWLAB1\0\0";
pub const SNAPSHOT_HEADER_LEN: usize = 32;

pub fn ensure_dir(dir: &Path) -> LabResult<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    ensure_dir(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LabError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| LabError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| LabError::io(path, e))?;
    tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> LabResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Runtime(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn row(r: &DiagnosticsRecord) -> [f64; 11] {
    let o = &r.obs;
    [
        r.t,
        o.mass,
        o.energy,
        o.kinetic,
        o.potential,
        o.morawetz_p1,
        o.morawetz_r3,
        o.morawetz_ang,
        r.mass_identity_residual,
        r.energy_identity_residual,
        r.outer_boundary_mass,
    ]
}

/// Diagnostics as CSV with the fixed header; floats use the shortest
/// round-trip representation.
pub fn diagnostics_csv(series: &DiagnosticsSeries) -> LabResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(|e| LabError::Runtime(e.to_string()))?;
    for r in &series.records {
        w.write_record(row(r).iter().map(|x| x.to_string())).map_err(|e| LabError::Runtime(e.to_string()))?;
    }
    w.into_inner().map_err(|e| LabError::Runtime(e.to_string()))
}

pub fn read_diagnostics_csv(path: &Path) -> LabResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| LabError::Runtime(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| LabError::Runtime(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| LabError::Runtime(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| LabError::Runtime(format!("{}: {e}", path.display()))))
            .collect::<LabResult<Vec<_>>>()?;
        rows.push(vals);
    }
    Ok((header, rows))
}

/// Whitespace-separated columns with a `#` header line.
pub fn diagnostics_dat(series: &DiagnosticsSeries) -> String {
    let mut s = format!("# {}\n", CSV_HEADER.join(" "));
    for r in &series.records {
        let cols: Vec<String> = row(r).iter().map(|x| format!("{x:.17e}")).collect();
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

/// Gnuplot script plotting the companion `.dat` file.
pub fn diagnostics_plt(dat_name: &str, title: &str) -> String {
    format!(
        "# gnuplot script for {dat_name}\n\
         set title \"{title}\"\n\
         set xlabel \"t\"\n\
         set logscale y\n\
         set key outside\n\
         plot \"{dat_name}\" using 1:3 with lines title \"energy\", \\\n\
         \x20    \"{dat_name}\" using 1:2 with lines title \"mass\", \\\n\
         \x20    \"{dat_name}\" using 1:6 with lines title \"m1\", \\\n\
         \x20    \"{dat_name}\" using 1:7 with lines title \"m2\"\n\
         pause -1\n"
    )
}

/// Paths of the files written for one diagnostics series.
pub fn write_series(
    dir: &Path,
    prefix: &str,
    series: &DiagnosticsSeries,
    csv: bool,
    plt: bool,
) -> LabResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    if csv {
        let p = dir.join(format!("{prefix}.csv"));
        write_atomic(&p, &diagnostics_csv(series)?)?;
        out.push(p);
    }
    if plt {
        let dat = format!("{prefix}.dat");
        let p = dir.join(&dat);
        write_atomic(&p, diagnostics_dat(series).as_bytes())?;
        out.push(p);
        let p = dir.join(format!("{prefix}.plt"));
        write_atomic(&p, diagnostics_plt(&dat, prefix).as_bytes())?;
        out.push(p);
    }
    Ok(out)
}

/// Binary snapshot: magic, `J` and `K` as little-endian u64, `t` as
/// little-endian f64, then `(re, im)` pairs in grid storage order.
pub fn snapshot_bytes(grid: &Grid, state: &FieldState) -> Vec<u8> {
    let mut b = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 16 * state.values.len());
    b.extend_from_slice(&SNAPSHOT_MAGIC);
    b.extend_from_slice(&(grid.j_intervals as u64).to_le_bytes());
    b.extend_from_slice(&(grid.k_nodes as u64).to_le_bytes());
    b.extend_from_slice(&state.t.to_le_bytes());
    for z in &state.values {
        b.extend_from_slice(&z.re.to_le_bytes());
        b.extend_from_slice(&z.im.to_le_bytes());
    }
    b
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub j: u64,
    pub k: u64,
    pub t: f64,
    /// `(re, im)` pairs.
    pub values: Vec<(f64, f64)>,
}

pub fn parse_snapshot(bytes: &[u8]) -> LabResult<Snapshot> {
    let bad = |m: &str| LabError::Runtime(format!("malformed snapshot: {m}"));
    if bytes.len() < SNAPSHOT_HEADER_LEN || bytes[..8] != SNAPSHOT_MAGIC {
        return Err(bad("missing MWLAB1 header"));
    }
    let word = |i: usize| <[u8; 8]>::try_from(&bytes[i..i + 8]).expect("8 bytes");
    let (j, k, t) = (u64::from_le_bytes(word(8)), u64::from_le_bytes(word(16)), f64::from_le_bytes(word(24)));
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    let expected = (j + 1) * k;
    if body.len() as u64 != 16 * expected {
        return Err(bad(&format!("expected {expected} values, found {} bytes", body.len())));
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            (re, im)
        })
        .collect();
    Ok(Snapshot { j, k, t, values })
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotSidecar {
    pub format: &'static str,
    pub scenario_hash: String,
    pub t: f64,
    pub geometry: &'static str,
    pub r_in: f64,
    pub r_out: f64,
    pub radial_intervals: usize,
    pub angular_nodes: usize,
    pub dr: f64,
    pub dtheta: f64,
    /// Storage order of the values.
    pub layout: &'static str,
    pub header_bytes: usize,
}

impl SnapshotSidecar {
    pub fn new(grid: &Grid, t: f64, scenario_hash: &str) -> Self {
        Self {
            format: "MWLAB1",
            scenario_hash: scenario_hash.into(),
            t,
            geometry: match grid.kind {
                GridKind::Radial(_) => "radial",
                GridKind::Warped(_) => "warped",
            },
            r_in: grid.r_in,
            r_out: grid.r_out,
            radial_intervals: grid.j_intervals,
            angular_nodes: grid.k_nodes,
            dr: grid.dr,
            dtheta: grid.dtheta,
            layout: "index = j * angular_nodes + k; (re, im) little-endian f64 pairs",
            header_bytes: SNAPSHOT_HEADER_LEN,
        }
    }
}

pub fn write_snapshot(dir: &Path, stem: &str, grid: &Grid, state: &FieldState, hash: &str) -> LabResult<Vec<PathBuf>> {
    let bin = dir.join(format!("{stem}.bin"));
    write_atomic(&bin, &snapshot_bytes(grid, state))?;
    let side = dir.join(format!("{stem}.json"));
    write_json(&side, &SnapshotSidecar::new(grid, state.t, hash))?;
    Ok(vec![bin, side])
}
