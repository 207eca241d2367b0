//! Depth-map writers: 16-bit binary PGM quantized at 0.1 mm per unit, plus a
//! raw little-endian f32 sidecar with full precision.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Real;

/// Millimetres per PGM grey level.
pub const PGM_MM_PER_UNIT: f64 = 0.1;

/// Writes `depths` (row-major, mm, 0 = no hit) as a 16-bit binary PGM.
/// Values saturate at 6553.5 mm.
pub fn write_depth_pgm16<R: Real>(
    path: impl AsRef<Path>,
    width: u32,
    height: u32,
    depths: &[R],
) -> Result<()> {
    let path = path.as_ref();
    if depths.len() != (width as usize) * (height as usize) {
        return Err(Error::invalid_parameter(
            "depths",
            format!("length {} != {}x{}", depths.len(), width, height),
        ));
    }
    let mut buf = Vec::with_capacity(depths.len() * 2 + 32);
    buf.extend_from_slice(format!("P5\n{width} {height}\n65535\n").as_bytes());
    for d in depths {
        let q = (d.f64() / PGM_MM_PER_UNIT).round();
        let v = if q < 0.0 {
            0u16
        } else if q > 65535.0 {
            65535u16
        } else {
            q as u16
        };
        // PGM stores the most significant byte first.
        buf.extend_from_slice(&v.to_be_bytes());
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| Error::io(path, e))
}

/// Writes `depths` as raw little-endian f32, row-major, no header.
pub fn write_depth_f32<R: Real>(path: impl AsRef<Path>, depths: &[R]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::with_capacity(depths.len() * 4);
    for d in depths {
        buf.extend_from_slice(&(d.f64() as f32).to_le_bytes());
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&buf))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_quantization() {
        let dir = std::env::temp_dir().join("depthforge_pgm_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("depth.pgm");
        write_depth_pgm16(&path, 2, 1, &[100.0f64, 99999.0]).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P5\n2 1\n65535\n"));
        let data = &bytes[b"P5\n2 1\n65535\n".len()..];
        assert_eq!(u16::from_be_bytes([data[0], data[1]]), 1000); // 100 mm / 0.1
        assert_eq!(u16::from_be_bytes([data[2], data[3]]), 65535); // saturated
    }

    #[test]
    fn raw_f32_layout() {
        let dir = std::env::temp_dir().join("depthforge_pgm_tests");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("depth.f32");
        write_depth_f32(&path, &[1.5f64, 0.0]).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes.len(), 8);
        assert_eq!(f32::from_le_bytes(bytes[0..4].try_into().unwrap()), 1.5);
    }
}
