//! SDF1 binary grid files, CSV export and PGM previews.
//!
//! SDF1 layout (little-endian):
//!
//! ```text
//! "SDF1" | u8 kind (0 = f64 scalar, 1 = u8 binary) | u8 ndim
//!        | u32 dims[ndim] | f64 spacing | f64 origin[ndim] | payload
//! ```
//!
//! The payload is row-major, one f64 or one u8 (0/1) per cell.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{BinaryField, GridSpec, ScalarField, MAX_DIM};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SDF1";
const KIND_SCALAR: u8 = 0;
const KIND_BINARY: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedField {
    Scalar(ScalarField),
    Binary(BinaryField),
}

fn encode_header(out: &mut Vec<u8>, kind: u8, spec: &GridSpec) {
    out.extend_from_slice(MAGIC);
    out.push(kind);
    out.push(spec.ndim() as u8);
    for &d in spec.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&spec.spacing().to_le_bytes());
    for &o in spec.origin() {
        out.extend_from_slice(&o.to_le_bytes());
    }
}

pub(crate) fn encode_scalar(field: &ScalarField) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * field.len());
    encode_header(&mut out, KIND_SCALAR, field.spec());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub(crate) fn encode_binary(field: &BinaryField) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + field.len());
    encode_header(&mut out, KIND_BINARY, field.spec());
    out.extend(field.values().iter().map(|&v| v as u8));
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::format(
                self.pos as u64,
                format!(
                    "truncated {what}: expected {n} bytes, got {}",
                    self.bytes.len() - self.pos
                ),
            )),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let b = self.take(8, what)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<LoadedField> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::format(
            0,
            format!("bad magic {:?}, expected \"SDF1\"", String::from_utf8_lossy(magic)),
        ));
    }
    let kind = r.u8("payload kind")?;
    if kind != KIND_SCALAR && kind != KIND_BINARY {
        return Err(Error::format(4, format!("unknown payload kind {kind}")));
    }
    let ndim = r.u8("ndim")? as usize;
    if ndim == 0 || ndim > MAX_DIM {
        return Err(Error::format(5, format!("ndim {ndim} outside 1..=3")));
    }
    let mut dims = Vec::with_capacity(ndim);
    let mut cells: u64 = 1;
    for axis in 0..ndim {
        let offset = r.pos as u64;
        let d = r.u32("dims")?;
        if d == 0 {
            return Err(Error::format(offset, format!("axis {axis} has zero samples")));
        }
        cells = cells
            .checked_mul(d as u64)
            .filter(|&c| c <= usize::MAX as u64)
            .ok_or_else(|| Error::format(offset, "dim overflow: cell count exceeds index type"))?;
        dims.push(d as usize);
    }
    let spacing_at = r.pos as u64;
    let spacing = r.f64("spacing")?;
    let mut origin = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        origin.push(r.f64("origin")?);
    }
    let spec = GridSpec::with_origin(&dims, spacing, &origin)
        .map_err(|e| Error::format(spacing_at, e.to_string()))?;

    let cell_bytes: u64 = if kind == KIND_SCALAR { 8 } else { 1 };
    let expected = cells
        .checked_mul(cell_bytes)
        .ok_or_else(|| Error::format(r.pos as u64, "dim overflow: payload size"))?;
    let payload_at = r.pos;
    let actual = (bytes.len() - payload_at) as u64;
    if actual != expected {
        return Err(Error::format(
            payload_at as u64,
            format!("payload size mismatch: expected {expected} bytes, got {actual}"),
        ));
    }
    let payload = &bytes[payload_at..];
    if kind == KIND_SCALAR {
        let mut values = Vec::with_capacity(cells as usize);
        for (i, chunk) in payload.chunks_exact(8).enumerate() {
            let v = f64::from_le_bytes(chunk.try_into().unwrap());
            if !v.is_finite() {
                return Err(Error::format(
                    (payload_at + 8 * i) as u64,
                    "non-finite scalar value",
                ));
            }
            values.push(v);
        }
        Ok(LoadedField::Scalar(ScalarField::from_vec_unchecked(spec, values)))
    } else {
        let mut values = Vec::with_capacity(cells as usize);
        for (i, &b) in payload.iter().enumerate() {
            match b {
                0 => values.push(false),
                1 => values.push(true),
                _ => {
                    return Err(Error::format(
                        (payload_at + i) as u64,
                        format!("binary cell holds {b}, expected 0 or 1"),
                    ))
                }
            }
        }
        Ok(LoadedField::Binary(BinaryField::new(spec, values)?))
    }
}

pub fn save_scalar(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    fs::write(path, encode_scalar(field))?;
    Ok(())
}

pub fn save_binary(path: impl AsRef<Path>, field: &BinaryField) -> Result<()> {
    fs::write(path, encode_binary(field))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<LoadedField> {
    decode(&fs::read(path)?)
}

pub fn load_scalar(path: impl AsRef<Path>) -> Result<ScalarField> {
    match load_field(path)? {
        LoadedField::Scalar(f) => Ok(f),
        LoadedField::Binary(_) => Err(Error::format(4, "expected scalar payload, found binary")),
    }
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<BinaryField> {
    match load_field(path)? {
        LoadedField::Binary(f) => Ok(f),
        LoadedField::Scalar(_) => Err(Error::format(4, "expected binary payload, found scalar")),
    }
}

/// Formats a value with 17 significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_header(spec: &GridSpec) -> Result<&'static str> {
    match spec.ndim() {
        1 => Ok("i,value"),
        2 => Ok("i,j,value"),
        n => Err(Error::invalid(format!("CSV export supports 1D/2D fields, got {n}D"))),
    }
}

fn write_csv_rows(
    path: &Path,
    spec: &GridSpec,
    mut value: impl FnMut(usize) -> String,
) -> Result<()> {
    let header = csv_header(spec)?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for lin in 0..spec.len() {
        let idx = spec.unravel(lin);
        if spec.ndim() == 1 {
            writeln!(w, "{},{}", idx[0], value(lin))?;
        } else {
            writeln!(w, "{},{},{}", idx[0], idx[1], value(lin))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV with header `i[,j],value`, one row per cell in row-major order.
pub fn write_csv_scalar(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    let values = field.values();
    write_csv_rows(path.as_ref(), field.spec(), |i| fmt_f64(values[i]))
}

pub fn write_csv_binary(path: impl AsRef<Path>, field: &BinaryField) -> Result<()> {
    let values = field.values();
    write_csv_rows(path.as_ref(), field.spec(), |i| {
        if values[i] { "1" } else { "0" }.to_string()
    })
}

pub(crate) fn encode_pgm(field: &ScalarField) -> Result<Vec<u8>> {
    let spec = field.spec();
    if spec.ndim() != 2 {
        return Err(Error::invalid("PGM export needs a 2D field"));
    }
    let (rows, cols) = (spec.dims()[0], spec.dims()[1]);
    let values = field.values();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut out = format!(
        "P5\n# min={} max={}\n{cols} {rows}\n255\n",
        fmt_f64(lo),
        fmt_f64(hi)
    )
    .into_bytes();
    out.extend(values.iter().map(|&v| {
        if span > 0.0 {
            (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    Ok(out)
}

/// Binary P5 preview, linearly normalized to [0, 255]. The original range is
/// kept in a comment line. Rows follow axis 0, columns axis 1.
pub fn write_pgm(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    fs::write(path, encode_pgm(field)?)?;
    Ok(())
}
