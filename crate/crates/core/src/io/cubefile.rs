//! `MSC1` cube files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MSC1"
//! 4       4     height  (u32 LE)
//! 8       4     width   (u32 LE)
//! 12      4     bands   (u32 LE)
//! 16      4     dtype   (u32 LE, 1 = f32)
//! 20      4·B·H·W  samples, f32 LE, band-major then row-major
//! ```

use std::fs;
use std::path::Path;

use super::bytes::Reader;
use crate::cube::SpectralCube;
use crate::error::{Error, Result};

pub const CUBE_MAGIC: [u8; 4] = *b"MSC1";
pub const DTYPE_F32: u32 = 1;
pub const CUBE_HEADER_LEN: usize = 20;

pub fn encode_cube(cube: &SpectralCube<f32>) -> Vec<u8> {
    let (h, w, b) = cube.dims();
    let mut out = Vec::with_capacity(CUBE_HEADER_LEN + 4 * cube.data().len());
    out.extend_from_slice(&CUBE_MAGIC);
    for v in [h as u32, w as u32, b as u32, DTYPE_F32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in cube.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_cube(bytes: &[u8], origin: &Path) -> Result<SpectralCube<f32>> {
    let mut r = Reader::new(bytes, origin);
    if r.take(4)? != CUBE_MAGIC {
        return Err(Error::format(origin, "not a cube file (bad magic)"));
    }
    let h = r.u32()? as usize;
    let w = r.u32()? as usize;
    let b = r.u32()? as usize;
    let dtype = r.u32()?;
    if dtype != DTYPE_F32 {
        return Err(Error::format(origin, format!("unsupported dtype code {dtype}")));
    }
    let n = h
        .checked_mul(w)
        .and_then(|v| v.checked_mul(b))
        .ok_or_else(|| Error::format(origin, "cube dimensions overflow"))?;
    if r.remaining() != 4 * n {
        return Err(Error::format(
            origin,
            format!("payload is {} bytes, a {h}x{w}x{b} cube needs {}", r.remaining(), 4 * n),
        ));
    }
    let data = r.f32_vec(n)?;
    SpectralCube::from_vec(h, w, b, data).map_err(|e| Error::format(origin, e.to_string()))
}

pub fn read_cube(path: impl AsRef<Path>) -> Result<SpectralCube<f32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cube(&bytes, path)
}

pub fn write_cube(path: impl AsRef<Path>, cube: &SpectralCube<f32>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_cube(cube)).map_err(|e| Error::io(path, e))
}
