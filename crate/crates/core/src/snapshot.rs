//! Binary snapshot format for spectral fields.
//!
//! Layout (little-endian):
//!
//! | field   | type        |
//! |---------|-------------|
//! | magic   | `b"FNLS"`   |
//! | version | `u16` = 1   |
//! | dim N   | `u8`        |
//! | M       | `u32`       |
//! | s       | `f64`       |
//! | t       | `f64`       |
//! | coeffs  | `M^N × (f64 re, f64 im)` |
//!
//! Coefficients are written row-major in ascending wavenumber order,
//! `-M/2 … M/2-1` per axis, with the forward transform normalized by `1/M^N`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{FnlsError, Result};
use crate::spectral::{axis_index, SpectralField, TorusGrid};

pub const MAGIC: &[u8; 4] = b"FNLS";
pub const VERSION: u16 = 1;

/// A field together with the equation order and the time it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: SpectralField,
    pub s: f64,
    pub t: f64,
}

/// Map from ascending (file) order to FFT order.
fn file_to_fft_order(grid: &TorusGrid) -> Vec<usize> {
    let m = grid.points();
    let half = (m / 2) as i64;
    (0..grid.len())
        .map(|file_idx| {
            grid.multi_index(file_idx)
                .into_iter()
                .fold(0usize, |acc, j| acc * m + axis_index(j as i64 - half, m))
        })
        .collect()
}

pub fn write_snapshot<W: Write>(mut w: W, field: &SpectralField, s: f64, t: f64) -> Result<()> {
    let grid = field.grid();
    let dim = u8::try_from(grid.dim())
        .map_err(|_| FnlsError::Snapshot("dimension does not fit in u8".into()))?;
    let m = u32::try_from(grid.points())
        .map_err(|_| FnlsError::Snapshot("M does not fit in u32".into()))?;
    let mut buf = Vec::with_capacity(4 + 2 + 1 + 4 + 16 + 16 * grid.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(dim);
    buf.extend_from_slice(&m.to_le_bytes());
    buf.extend_from_slice(&s.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for idx in file_to_fft_order(grid) {
        let z = field.coeffs()[idx];
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(FnlsError::Snapshot("unexpected end of data".into()));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn take_f64(bytes: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, 8)?.try_into().unwrap()))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<Snapshot> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut bytes = data.as_slice();
    if take(&mut bytes, 4)? != MAGIC {
        return Err(FnlsError::Snapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes(take(&mut bytes, 2)?.try_into().unwrap());
    if version != VERSION {
        return Err(FnlsError::Snapshot(format!("unsupported version {version}")));
    }
    let dim = take(&mut bytes, 1)?[0] as usize;
    let m = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().unwrap()) as usize;
    let grid = TorusGrid::new(dim, m).map_err(|e| FnlsError::Snapshot(e.to_string()))?;
    let s = take_f64(&mut bytes)?;
    let t = take_f64(&mut bytes)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for idx in file_to_fft_order(&grid) {
        let re = take_f64(&mut bytes)?;
        let im = take_f64(&mut bytes)?;
        coeffs[idx] = Complex64::new(re, im);
    }
    if !bytes.is_empty() {
        return Err(FnlsError::Snapshot(format!("{} trailing bytes", bytes.len())));
    }
    Ok(Snapshot { field: SpectralField::from_coeffs(grid, coeffs)?, s, t })
}

pub fn save_snapshot(path: &Path, field: &SpectralField, s: f64, t: f64) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_snapshot(std::io::BufWriter::new(file), field, s, t)
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    read_snapshot(std::fs::File::open(path)?)
}
