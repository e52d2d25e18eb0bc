//! Field and checkpoint files.
//!
//! Field CSV: a header line `# field half_width=<L> n=<n>` followed by `n` rows of `n`
//! comma-separated values, row `j` holding the nodes `(0..n, j)`. Field binary: the magic
//! bytes `ELF2`, `n` as little-endian u64, `L` as little-endian f64, then the values.
//! Numbers are written in shortest round-trip form, so files reload bit-exactly.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::lagrangian::{Lattice, VortexDiscretization, VortexState};

const MAGIC: &[u8; 4] = b"ELF2";

pub fn write_field_csv(field: &ScalarField2D, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# field half_width={} n={}", g.half_width(), g.n())?;
    for row in field.values().chunks(g.n()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn header_value<'a>(header: &'a str, key: &str) -> Result<&'a str> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key).and_then(|rest| rest.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("field header lacks `{key}`")))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField2D> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))??;
    if !header.starts_with("# field") {
        return Err(Error::Parse("missing field header".into()));
    }
    let half_width = parse_f64(header_value(&header, "half_width")?)?;
    let n: usize = header_value(&header, "n")?.parse().map_err(|_| Error::Parse("bad node count".into()))?;
    let grid = Grid2D::new(half_width, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split(',') {
            values.push(parse_f64(tok)?);
        }
    }
    ScalarField2D::new(grid, values)
}

pub fn write_field_bin(field: &ScalarField2D, path: &Path) -> Result<()> {
    let g = field.grid();
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(g.n() as u64).to_le_bytes())?;
    out.write_all(&g.half_width().to_le_bytes())?;
    for v in field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_field_bin(path: &Path) -> Result<ScalarField2D> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(Error::Parse("not a binary field file".into()));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().unwrap()) as usize;
    let half_width = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let grid = Grid2D::new(half_width, n)?;
    let body = &bytes[20..];
    if body.len() != 8 * grid.len() {
        return Err(Error::Parse(format!("expected {} values, found {} bytes", grid.len(), body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    ScalarField2D::new(grid, values)
}

/// Reads either field format, chosen by extension (`.bin` for binary).
pub fn read_field(path: &Path) -> Result<ScalarField2D> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => read_field_bin(path),
        _ => read_field_csv(path),
    }
}

const CHECKPOINT_COLUMNS: &str = "t,x1,x2,eta1,eta2,w,delta,F11,F12,F21,F22";

/// One row per particle; the tracer lattice, if any, is stored as JSON in the first line.
pub fn write_checkpoint_csv(state: &VortexState, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# lattice={}", serde_json::to_string(&state.disc.lattice)?)?;
    writeln!(out, "{CHECKPOINT_COLUMNS}")?;
    let d = &state.disc;
    for k in 0..state.len() {
        let f = &state.deformation[k];
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            state.time,
            d.seeds[k][0],
            d.seeds[k][1],
            state.positions[k][0],
            state.positions[k][1],
            d.weights[k],
            d.deltas[k],
            f[0][0],
            f[0][1],
            f[1][0],
            f[1][1]
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint_csv(path: &Path) -> Result<VortexState> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty checkpoint".into()))??;
    let lattice: Option<Lattice> = serde_json::from_str(
        first.strip_prefix("# lattice=").ok_or_else(|| Error::Parse("missing lattice line".into()))?,
    )?;
    let columns = lines.next().ok_or_else(|| Error::Parse("missing column header".into()))??;
    if columns.trim() != CHECKPOINT_COLUMNS {
        return Err(Error::Parse(format!("unexpected columns `{columns}`")));
    }
    let (mut time, mut seeds, mut positions, mut weights, mut deltas, mut deformation) =
        (0.0, Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line.split(',').map(parse_f64).collect::<Result<_>>()?;
        if v.len() != 11 {
            return Err(Error::Parse(format!("expected 11 columns, got {}", v.len())));
        }
        time = v[0];
        seeds.push([v[1], v[2]]);
        positions.push([v[3], v[4]]);
        weights.push(v[5]);
        deltas.push(v[6]);
        deformation.push([[v[7], v[8]], [v[9], v[10]]]);
    }
    let mut disc = VortexDiscretization::new(seeds, weights, deltas)?;
    disc.lattice = lattice;
    Ok(VortexState { time, positions, deformation, disc: Arc::new(disc) })
}
