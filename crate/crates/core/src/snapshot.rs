//! Binary field snapshots: a fixed 64-byte header followed by
//! little-endian `f64` samples in row-major order.
//!
//! ```text
//! offset  size  field
//!      0     8  magic "NLSSNAP\0"
//!      8     4  version (u32)
//!     12     4  dim (u32)
//!     16     8  points per axis (u64)
//!     24     8  extent per axis (f64)
//!     32     8  time tag (f64)
//!     40     4  0 = real samples, 1 = interleaved (re, im) pairs
//!     44    20  zero
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{NlsError, Result};
use crate::grid::{Field, GridSpec};

pub const MAGIC: [u8; 8] = *b"NLSSNAP\0";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Real,
    Complex,
}

/// Real storage when every imaginary part is exactly zero.
pub fn natural_storage(f: &Field) -> Storage {
    if f.values().iter().all(|z| z.im == 0.0) {
        Storage::Real
    } else {
        Storage::Complex
    }
}

pub fn encode(f: &Field, storage: Storage) -> Result<Vec<u8>> {
    if storage == Storage::Real && f.values().iter().any(|z| z.im != 0.0) {
        return Err(NlsError::Argument("real storage requested for a complex field".into()));
    }
    let grid = f.grid();
    let per = if storage == Storage::Real { 8 } else { 16 };
    let mut out = Vec::with_capacity(HEADER_LEN + per * grid.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points() as u64).to_le_bytes());
    out.extend_from_slice(&grid.extent().to_le_bytes());
    out.extend_from_slice(&f.time.to_le_bytes());
    out.extend_from_slice(&(storage as u32).to_le_bytes());
    out.resize(HEADER_LEN, 0);
    for z in f.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        if storage == Storage::Complex {
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("range checked by caller")
}

pub fn decode(bytes: &[u8]) -> Result<(Field, Storage)> {
    if bytes.len() < HEADER_LEN {
        return Err(NlsError::Format(format!("snapshot shorter than its {HEADER_LEN}-byte header")));
    }
    if take::<8>(bytes, 0) != MAGIC {
        return Err(NlsError::Format("bad snapshot magic".into()));
    }
    let version = u32::from_le_bytes(take(bytes, 8));
    if version != VERSION {
        return Err(NlsError::Format(format!("unsupported snapshot version {version}")));
    }
    let dim = u32::from_le_bytes(take(bytes, 12)) as usize;
    let points = u64::from_le_bytes(take(bytes, 16)) as usize;
    let extent = f64::from_le_bytes(take(bytes, 24));
    let time = f64::from_le_bytes(take(bytes, 32));
    let storage = match u32::from_le_bytes(take(bytes, 40)) {
        0 => Storage::Real,
        1 => Storage::Complex,
        other => return Err(NlsError::Format(format!("unknown storage flag {other}"))),
    };
    if bytes[44..HEADER_LEN].iter().any(|&b| b != 0) {
        return Err(NlsError::Format("non-zero header padding".into()));
    }
    let grid = GridSpec::new(dim, extent, points).map_err(|e| NlsError::Format(format!("bad snapshot grid: {e}")))?;
    let per = if storage == Storage::Real { 8 } else { 16 };
    let body = &bytes[HEADER_LEN..];
    if body.len() != per * grid.len() {
        return Err(NlsError::Format(format!(
            "snapshot body holds {} bytes, expected {}",
            body.len(),
            per * grid.len()
        )));
    }
    let values = body
        .chunks_exact(per)
        .map(|c| {
            let re = f64::from_le_bytes(take(c, 0));
            let im = if per == 16 { f64::from_le_bytes(take(c, 8)) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    Ok((Field::new(grid, values, time)?, storage))
}

pub fn write(path: &Path, f: &Field) -> Result<()> {
    let bytes = encode(f, natural_storage(f))?;
    std::fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Field> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes).map(|(f, _)| f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip_is_bit_exact() {
        let g = GridSpec::new(2, 5.0, 16).unwrap();
        let mut f = Field::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] * 0.3));
        f.time = 0.125;
        let bytes = encode(&f, Storage::Complex).unwrap();
        assert_eq!(bytes.len(), 64 + 16 * 256);
        let (back, storage) = decode(&bytes).unwrap();
        assert_eq!(storage, Storage::Complex);
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.time, 0.125);
        assert!(back.values().iter().zip(f.values()).all(|(a, b)| a == b));
    }

    #[test]
    fn real_fields_store_half_the_bytes() {
        let g = GridSpec::new(1, 5.0, 32).unwrap();
        let f = Field::from_real_fn(g, |x| x[0]);
        assert_eq!(natural_storage(&f), Storage::Real);
        let bytes = encode(&f, Storage::Real).unwrap();
        assert_eq!(bytes.len(), 64 + 8 * 32);
        assert_eq!(&bytes[..8], b"NLSSNAP\0");
        assert_eq!(decode(&bytes).unwrap().0.values(), f.values());
        let c = Field::from_fn(g, |x| Complex64::new(0.0, x[0]));
        assert!(encode(&c, Storage::Real).is_err());
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let g = GridSpec::new(1, 5.0, 16).unwrap();
        let bytes = encode(&Field::zeros(g), Storage::Complex).unwrap();
        assert!(decode(&bytes[..40]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad = bytes;
        bad[50] = 1;
        assert!(decode(&bad).is_err());
    }
}
