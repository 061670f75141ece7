//! Matrix and label file IO. Text CSV holds one feature row per line with
//! samples as columns; MVDM is the canonical binary interchange format
//! (magic "MVDM", u32 version, u64 rows, u64 cols, then row-major f64, all
//! little-endian) and round-trips bit for bit.

use std::path::Path;

use nalgebra::DMatrix;

use crate::errors::CliError;
use crate::manifest::MatrixFormat;

pub const MVDM_MAGIC: &[u8; 4] = b"MVDM";
pub const MVDM_VERSION: u32 = 1;
const MVDM_HEADER_LEN: usize = 24;

/// Writes bytes and re-reads them to confirm the file holds exactly what
/// was intended: every artifact-producing path validates before exit 0.
pub fn write_verified(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    let back = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if back != bytes {
        return Err(CliError::io(path, "written file did not read back identically"));
    }
    Ok(())
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<DMatrix<f64>, CliError> {
    match format {
        MatrixFormat::Csv => load_csv(path),
        MatrixFormat::Mvdm => load_mvdm(path),
    }
}

fn load_csv(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (j, cell) in line.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                CliError::io(path, format!("row {}, column {}: bad cell {cell:?}", i + 1, j + 1))
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::io(
                    path,
                    format!("row {} has {} cells, expected {}", i + 1, row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::io(path, "no data rows"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn save_csv(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut text = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                text.push(',');
            }
            text.push_str(&format!("{}", m[(i, j)]));
        }
        text.push('\n');
    }
    write_verified(path, text.as_bytes())
}

fn load_mvdm(path: &Path) -> Result<DMatrix<f64>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    if bytes.len() < MVDM_HEADER_LEN {
        return Err(CliError::io(
            path,
            format!("expected at least {MVDM_HEADER_LEN} header bytes, got {}", bytes.len()),
        ));
    }
    if &bytes[0..4] != MVDM_MAGIC {
        return Err(CliError::io(
            path,
            format!("magic mismatch: expected {MVDM_MAGIC:?}, got {:?}", &bytes[0..4]),
        ));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MVDM_VERSION {
        return Err(CliError::io(
            path,
            format!("unsupported format version {version}, expected {MVDM_VERSION}"),
        ));
    }
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| CliError::io(path, format!("implausible shape {rows}x{cols}")))?;
    let expected = MVDM_HEADER_LEN + count * 8;
    if bytes.len() != expected {
        return Err(CliError::io(
            path,
            format!("expected {expected} bytes for {rows}x{cols}, got {}", bytes.len()),
        ));
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let off = MVDM_HEADER_LEN + (i * cols + j) * 8;
            m[(i, j)] = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        }
    }
    Ok(m)
}

pub fn save_mvdm(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(MVDM_HEADER_LEN + m.len() * 8);
    bytes.extend_from_slice(MVDM_MAGIC);
    bytes.extend_from_slice(&MVDM_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            bytes.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    write_verified(path, &bytes)
}

/// Labels are one nonnegative integer per line.
pub fn load_labels(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: usize = line
            .trim()
            .parse()
            .map_err(|_| CliError::io(path, format!("line {}: bad label {line:?}", i + 1)))?;
        labels.push(l);
    }
    if labels.is_empty() {
        return Err(CliError::io(path, "no labels"));
    }
    Ok(labels)
}

pub fn save_labels(path: &Path, labels: &[usize]) -> Result<(), CliError> {
    let mut text = String::new();
    for l in labels {
        text.push_str(&format!("{l}\n"));
    }
    write_verified(path, text.as_bytes())
}
