// Copyright 2026 thermogate Contributors
// SPDX-License-Identifier: Apache-2.0

//! Result files: CSV tables, the run manifest and the binary trajectory
//! dump. All writes go through a temporary file and a rename.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{BohrTrace, ScanResult};
use crate::models::{ControlField, Shape};
use crate::oct::IterationRecord;
use crate::{CMat, Error, Result, C64};

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` via a sibling temporary file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::validation(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

/// Renders a CSV table; an empty row set gives the header alone.
pub fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::validation(format!("csv encoding: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::shape(format!(
                "row has {} fields, header has {}",
                r.len(),
                header.len()
            )));
        }
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::validation(format!("csv encoding: {e}")))
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, &csv_bytes(header, rows)?)
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub const ITERATION_HEADER: [&str; 6] = ["iter", "J_max", "F", "IF", "field_norm", "seconds"];

pub fn write_iteration_log(path: &Path, records: &[IterationRecord]) -> Result<()> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.iter.to_string(),
                fmt_f64(r.j_max),
                fmt_f64(r.fidelity),
                fmt_f64(r.infidelity),
                fmt_f64(r.field_change),
                fmt_f64(r.seconds),
            ]
        })
        .collect();
    write_csv(path, &strings(&ITERATION_HEADER), &rows)
}

pub fn fields_header(n_channels: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain((1..=n_channels).map(|c| format!("eps_{c}")))
        .collect()
}

pub fn fields_csv(field: &ControlField) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = (0..field.n_times())
        .map(|k| {
            std::iter::once(fmt_f64(field.time(k)))
                .chain(field.amplitudes.iter().map(|c| fmt_f64(c[k])))
                .collect()
        })
        .collect();
    csv_bytes(&fields_header(field.n_channels()), &rows)
}

pub fn write_fields_csv(path: &Path, field: &ControlField) -> Result<()> {
    write_atomic(path, &fields_csv(field)?)
}

/// Parses `t, eps_1, …, eps_n` rows on a uniform grid starting at 0.
pub fn parse_fields_csv(text: &str, shape: Shape) -> Result<ControlField> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::Parse(format!("fields header: {e}")))?
        .clone();
    let n_ch = header.len().saturating_sub(1);
    if header.get(0) != Some("t") || n_ch == 0 {
        return Err(Error::Parse("fields header must be `t,eps_1,...`".into()));
    }
    let mut times = Vec::new();
    let mut amps = vec![Vec::new(); n_ch];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("fields row {}: {e}", line + 2)))?;
        if rec.len() != n_ch + 1 {
            return Err(Error::Parse(format!("fields row {}: expected {} values", line + 2, n_ch + 1)));
        }
        let mut vals = rec.iter().map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("fields row {}: `{s}`: {e}", line + 2)))
        });
        times.push(vals.next().expect("non-empty")?);
        for a in amps.iter_mut() {
            a.push(vals.next().expect("length checked")?);
        }
    }
    if times.len() < 2 {
        return Err(Error::Parse("fields file needs at least two rows".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) || !dt.is_finite() || times[0].abs() > 1e-12 {
        return Err(Error::Parse("fields grid must start at t = 0 and increase".into()));
    }
    for (k, t) in times.iter().enumerate() {
        if !((t - k as f64 * dt).abs() <= 1e-9 * dt.max(1.0) * (k as f64 + 1.0)) {
            return Err(Error::Parse(format!("fields grid is not uniform at row {}", k + 2)));
        }
    }
    ControlField::from_samples(dt, amps, shape)
}

pub fn read_fields_csv(path: &Path, shape: Shape) -> Result<ControlField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fields_csv(&text, shape)
}

pub const SCAN_HEADER: [&str; 10] = [
    "gamma",
    "T",
    "IF_U",
    "IF_noise",
    "IF_controlled",
    "log_ratio",
    "gain",
    "purity_sub",
    "delta_E",
    "iters",
];

pub fn scan_csv(scan: &ScanResult) -> Result<Vec<u8>> {
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let rows: Vec<Vec<String>> = scan
        .points
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.gamma),
                fmt_f64(p.temperature),
                fmt_f64(scan.if_u),
                fmt_f64(p.if_noise),
                opt(p.if_controlled),
                fmt_f64(p.log_ratio),
                opt(p.gain),
                fmt_f64(p.purity_sub),
                fmt_f64(p.delta_e),
                p.iters.to_string(),
            ]
        })
        .collect();
    csv_bytes(&strings(&SCAN_HEADER), &rows)
}

pub fn write_scan_csv(path: &Path, scan: &ScanResult) -> Result<()> {
    write_atomic(path, &scan_csv(scan)?)
}

pub fn write_bohr_trace(path: &Path, trace: &BohrTrace) -> Result<()> {
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(trace.pairs.iter().map(|(i, j)| format!("omega_{i}_{j}")))
        .collect();
    let rows: Vec<Vec<String>> = trace
        .times
        .iter()
        .enumerate()
        .map(|(k, t)| {
            std::iter::once(fmt_f64(*t))
                .chain(trace.omegas.iter().map(|w| fmt_f64(w[k])))
                .collect()
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// A square matrix as `row, col, re, im` rows.
pub fn write_matrix_csv(path: &Path, m: &CMat) -> Result<()> {
    let mut rows = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            rows.push(vec![r.to_string(), c.to_string(), fmt_f64(z.re), fmt_f64(z.im)]);
        }
    }
    write_csv(path, &strings(&["row", "col", "re", "im"]), &rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub code_version: String,
    /// The resolved config, every default included.
    pub config: String,
    pub timings: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub summary: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(manifest).map_err(|e| Error::validation(format!("manifest: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub const TRAJECTORY_MAGIC: &[u8; 8] = b"TGTRAJ01";

/// Map trajectory as read back from a dump.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDump {
    pub times: Vec<f64>,
    pub maps: Vec<CMat>,
}

/// Little-endian layout: magic, `u64` count, `u64` side `n`, then per
/// entry the time and `n²` row-major `(re, im)` pairs.
pub fn trajectory_dump_bytes(times: &[f64], maps: &[CMat]) -> Result<Vec<u8>> {
    if times.len() != maps.len() {
        return Err(Error::shape("times and maps differ in length"));
    }
    if maps.is_empty() || maps[0].nrows() == 0 {
        return Err(Error::shape("trajectory dump needs at least one non-empty map"));
    }
    let n = maps[0].nrows();
    if maps.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::shape("maps differ in size"));
    }
    let mut out = Vec::with_capacity(24 + times.len() * (8 + 16 * n * n));
    out.extend_from_slice(TRAJECTORY_MAGIC);
    out.extend_from_slice(&(times.len() as u64).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for (t, m) in times.iter().zip(maps) {
        out.extend_from_slice(&t.to_le_bytes());
        for r in 0..n {
            for c in 0..n {
                out.extend_from_slice(&m[(r, c)].re.to_le_bytes());
                out.extend_from_slice(&m[(r, c)].im.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn write_trajectory_dump(path: &Path, times: &[f64], maps: &[CMat]) -> Result<()> {
    write_atomic(path, &trajectory_dump_bytes(times, maps)?)
}

pub fn read_trajectory_dump(bytes: &[u8]) -> Result<TrajectoryDump> {
    let bad = |msg: &str| Error::Parse(format!("trajectory dump: {msg}"));
    if bytes.len() < 24 || &bytes[..8] != TRAJECTORY_MAGIC {
        return Err(bad("missing header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let count = usize::try_from(word(8)).map_err(|_| bad("count overflows"))?;
    let n = usize::try_from(word(16)).map_err(|_| bad("size overflows"))?;
    if count == 0 || n == 0 {
        return Err(bad("empty trajectory"));
    }
    let entry = n
        .checked_mul(n)
        .and_then(|x| x.checked_mul(16))
        .and_then(|x| x.checked_add(8))
        .ok_or_else(|| bad("size overflows"))?;
    let body = count.checked_mul(entry).ok_or_else(|| bad("size overflows"))?;
    if bytes.len() - 24 != body {
        return Err(bad("length does not match header"));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let mut times = Vec::with_capacity(count);
    let mut maps = Vec::with_capacity(count);
    for e in 0..count {
        let base = 24 + e * entry;
        times.push(f(base));
        maps.push(CMat::from_fn(n, n, |r, c| {
            let at = base + 8 + 16 * (r * n + c);
            C64::new(f(at), f(at + 8))
        }));
    }
    Ok(TrajectoryDump { times, maps })
}

pub fn load_trajectory_dump(path: &Path) -> Result<TrajectoryDump> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_trajectory_dump(&bytes)
}
