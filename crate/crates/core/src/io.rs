//! GFSF binary field snapshots.
//!
//! Layout: `b"GFSF"`, a version byte, little-endian `u32` values `d`, `M`,
//! `dim_E`, then every coefficient as a little-endian `(re, im)` pair of
//! `f64`, component-major and row-major in `k` with axes ordered `-K..K`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{SpectralField, TorusGrid};

pub const MAGIC: &[u8; 4] = b"GFSF";
pub const VERSION: u8 = 1;

/// Header mirrored into the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u8,
    pub dim: u32,
    pub modes: u32,
    pub components: u32,
}

impl SnapshotHeader {
    pub fn of(field: &SpectralField) -> Self {
        Self {
            format: "GFSF".into(),
            version: VERSION,
            dim: field.grid().dim() as u32,
            modes: field.grid().modes() as u32,
            components: field.components() as u32,
        }
    }
}

pub fn write_field<W: Write>(mut w: W, field: &SpectralField) -> Result<()> {
    let header = SnapshotHeader::of(field);
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    for v in [header.dim, header.modes, header.components] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(field.coeffs().len() * 16);
    for c in field.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads a snapshot. The physical grid takes the default size for the band.
pub fn read_field<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", version[0])));
    }
    let mut word = [0u8; 4];
    let mut header = [0usize; 3];
    for h in header.iter_mut() {
        r.read_exact(&mut word)?;
        *h = u32::from_le_bytes(word) as usize;
    }
    let [dim, modes, components] = header;
    let grid = TorusGrid::new(dim, modes).map_err(|e| Error::Format(e.to_string()))?;
    let count = grid
        .len()
        .checked_mul(components)
        .ok_or_else(|| Error::Format("header overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 16 {
        return Err(Error::Format(format!(
            "expected {} coefficient bytes, found {}",
            count * 16,
            bytes.len()
        )));
    }
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    SpectralField::from_coeffs(grid, components, coeffs)
}

/// Writes `path` and `path.json` (the header sidecar).
pub fn save_field(path: &Path, field: &SpectralField) -> Result<()> {
    let file = fs::File::create(path)?;
    write_field(std::io::BufWriter::new(file), field)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".json");
    fs::write(sidecar, serde_json::to_string_pretty(&SnapshotHeader::of(field))?)?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<SpectralField> {
    read_field(std::io::BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let grid = TorusGrid::new(2, 5).unwrap();
        let coeffs = (0..grid.len() * 2)
            .map(|i| Complex64::new(i as f64 * 0.1, -(i as f64).sqrt()))
            .collect();
        let f = SpectralField::from_coeffs(grid, 2, coeffs).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(&buf[..4], b"GFSF");
        assert_eq!(buf[4], VERSION);
        assert_eq!(u32::from_le_bytes(buf[5..9].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(buf[9..13].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(buf[13..17].try_into().unwrap()), 2);
        assert_eq!(buf.len(), 17 + 50 * 16);
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn truncated_and_corrupt_inputs_are_rejected() {
        let grid = TorusGrid::new(1, 3).unwrap();
        let f = SpectralField::zeros(grid, 1);
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert!(read_field(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field(&bad[..]).is_err());
        let mut bad = buf;
        bad[4] = 9;
        assert!(read_field(&bad[..]).is_err());
    }
}
