//! Field persistence.
//!
//! Binary snapshot layout, all little-endian:
//!
//! | bytes      | content                         |
//! |------------|---------------------------------|
//! | 0..8       | magic `KSFPSNAP`                |
//! | 8..16      | `N` as `u64`                    |
//! | 16..24     | `L` as `f64`                    |
//! | 24..32     | `t` as `f64`                    |
//! | 32..32+8N  | `N` cell values as `f64`        |

use std::fmt::Write as _;
use std::io::{Read, Write};

use super::field::PeriodicField;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"KSFPSNAP";

/// `x,value` rows with a header line.
pub fn field_to_csv(field: &PeriodicField) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in field.grid().centers().iter().zip(field.values()) {
        let _ = writeln!(out, "{x},{v}");
    }
    out
}

pub fn write_snapshot(mut w: impl Write, field: &PeriodicField, t: f64) -> Result<()> {
    let grid = field.grid();
    let mut buf = Vec::with_capacity(32 + 8 * grid.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&(grid.len() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.half_length().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Returns the field and its time stamp.
pub fn read_snapshot(mut r: impl Read) -> Result<(PeriodicField, f64)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 32 || &bytes[..8] != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("missing magic header".into()));
    }
    let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().expect("8-byte slice") };
    let n = u64::from_le_bytes(word(8)) as usize;
    let l = f64::from_le_bytes(word(16));
    let t = f64::from_le_bytes(word(24));
    if bytes.len() != 32 + 8 * n {
        return Err(Error::Snapshot(format!(
            "expected {} payload bytes, found {}",
            8 * n,
            bytes.len() - 32
        )));
    }
    let grid = PeriodicGrid::new(l, n).map_err(|e| Error::Snapshot(e.to_string()))?;
    let values = (0..n)
        .map(|i| f64::from_le_bytes(word(32 + 8 * i)))
        .collect();
    Ok((PeriodicField::new(grid, values)?, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let g = PeriodicGrid::new(1.25, 16).unwrap();
        let f = PeriodicField::from_fn(g, |x| x.sin() + 2.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 0.375).unwrap();
        assert_eq!(buf.len(), 32 + 16 * 8);
        let (back, t) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 0.375);
    }

    #[test]
    fn snapshot_rejects_garbage() {
        assert!(read_snapshot(&b"NOTASNAPSHOT...................."[..]).is_err());
        let g = PeriodicGrid::new(1.0, 16).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &PeriodicField::constant(g, 1.0), 0.0).unwrap();
        buf.pop();
        assert!(matches!(
            read_snapshot(buf.as_slice()),
            Err(Error::Snapshot(_))
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = PeriodicGrid::new(1.0, 16).unwrap();
        let csv = field_to_csv(&PeriodicField::constant(g, 1.0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,value");
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1], "-0.9375,1");
    }
}
