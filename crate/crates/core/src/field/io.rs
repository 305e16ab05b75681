//! Binary field snapshots and 16-bit PGM density dumps.
//!
//! Snapshot layout (all little-endian, 8 bytes per item after the magic):
//!
//! ```text
//! "PFL1" | nx u64 | ny u64 | dx f64 | dy f64 | unit u64 | z f64 | nx·ny × (re f64, im f64)
//! ```
//!
//! Samples are row-major, x fastest. `unit` is 0 for physical, 1 for
//! dimensionless fields.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::field::{Field2D, Grid, UnitTag};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"PFL1";
pub const HEADER_LEN: usize = 4 + 6 * 8;

pub fn write_snapshot<W: Write>(mut w: W, field: &Field2D, z: f64) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.nx() as u64).to_le_bytes())?;
    w.write_all(&(g.ny() as u64).to_le_bytes())?;
    w.write_all(&g.dx().to_le_bytes())?;
    w.write_all(&g.dy().to_le_bytes())?;
    w.write_all(&field.unit().code().to_le_bytes())?;
    w.write_all(&z.to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(Field2D, f64)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let nx = u64::from_le_bytes(next(&mut r)?) as usize;
    let ny = u64::from_le_bytes(next(&mut r)?) as usize;
    let dx = f64::from_le_bytes(next(&mut r)?);
    let dy = f64::from_le_bytes(next(&mut r)?);
    let unit_code = u64::from_le_bytes(next(&mut r)?);
    let z = f64::from_le_bytes(next(&mut r)?);
    let unit = UnitTag::from_code(unit_code).ok_or_else(|| Error::Format(format!("unknown unit tag {unit_code}")))?;
    let grid = Grid::new(nx, ny, dx, dy)?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let re = f64::from_le_bytes(next(&mut r)?);
        let im = f64::from_le_bytes(next(&mut r)?);
        values.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    Ok((Field2D::new(grid, values, unit)?, z))
}

pub fn save_snapshot(path: &Path, field: &Field2D, z: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, field, z)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(Field2D, f64)> {
    read_snapshot(BufReader::new(File::open(path)?))
}

/// Encode a non-negative map as binary 16-bit PGM (P5, big-endian samples),
/// scaled so the maximum maps to 65535. Returns the bytes and the scale
/// (value represented by 65535).
pub fn encode_pgm16(width: usize, height: usize, data: &[f64]) -> (Vec<u8>, f64) {
    assert_eq!(data.len(), width * height);
    let max = data.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * data.len());
    for &v in data {
        let level = if max > 0.0 { (v.max(0.0) / max * 65535.0).round() as u16 } else { 0 };
        out.extend_from_slice(&level.to_be_bytes());
    }
    (out, max)
}

/// Write `<path>` as a PGM and `<path>.scale` with the max-scaling factor.
/// Returns both paths.
pub fn save_pgm16(path: &Path, width: usize, height: usize, data: &[f64], label: &str) -> Result<[PathBuf; 2]> {
    let (bytes, max) = encode_pgm16(width, height, data);
    std::fs::write(path, bytes)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".scale");
    let sidecar = PathBuf::from(sidecar);
    std::fs::write(&sidecar, format!("quantity = {label}\nmax = {max:e}\nlevels = 65535\n"))?;
    Ok([path.to_path_buf(), sidecar])
}

pub fn save_density_pgm(path: &Path, field: &Field2D) -> Result<[PathBuf; 2]> {
    let g = field.grid();
    save_pgm16(path, g.nx(), g.ny(), &field.density(), "density |E|^2")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_layout_is_bit_exact() {
        let g = Grid::new(8, 10, 0.5, 0.25).unwrap();
        let vals: Vec<Complex64> = (0..80).map(|n| Complex64::new(n as f64, -(n as f64) / 3.0)).collect();
        let f = Field2D::new(g, vals, UnitTag::Dimensionless).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 1.25).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 80 * 16);
        assert_eq!(&buf[0..4], b"PFL1");
        assert_eq!(u64::from_le_bytes(buf[4..12].try_into().unwrap()), 8);
        assert_eq!(u64::from_le_bytes(buf[12..20].try_into().unwrap()), 10);
        assert_eq!(f64::from_le_bytes(buf[20..28].try_into().unwrap()), 0.5);
        assert_eq!(u64::from_le_bytes(buf[36..44].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(buf[44..52].try_into().unwrap()), 1.25);
        // sample (i=1, j=0) follows sample 0
        assert_eq!(f64::from_le_bytes(buf[68..76].try_into().unwrap()), 1.0);
        let (back, z) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert_eq!(z, 1.25);
    }

    #[test]
    fn corrupt_snapshot_rejected() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let f = Field2D::zeros(g, UnitTag::Physical);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 0.0).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(&bad[..]).is_err());
        assert!(read_snapshot(&buf[..buf.len() - 3]).is_err());
        buf.push(0);
        assert!(read_snapshot(&buf[..]).is_err());
    }

    #[test]
    fn pgm_is_max_scaled() {
        let (bytes, max) = encode_pgm16(2, 1, &[1.0, 4.0]);
        assert_eq!(max, 4.0);
        let header = b"P5\n2 1\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let body = &bytes[header.len()..];
        assert_eq!(u16::from_be_bytes([body[0], body[1]]), 16384);
        assert_eq!(u16::from_be_bytes([body[2], body[3]]), 65535);
    }
}
