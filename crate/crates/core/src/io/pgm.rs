//! Binary graymap (`P5`) import and preview output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::cube::SpectralCube;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graymap {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

/// Parses a `P5` graymap. Two-byte samples (maxval > 255) are big-endian.
pub fn decode_pgm(bytes: &[u8], origin: &Path) -> Result<Graymap> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // whitespace and comments between header tokens
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(origin, "truncated graymap header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(Error::format(
            origin,
            format!("unsupported encoding `{}` (only binary P5 graymaps)", fields[0]),
        ));
    }
    let num = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::format(origin, format!("bad graymap {what} `{s}`")))
    };
    let width = num(&fields[1], "width")?;
    let height = num(&fields[2], "height")?;
    let maxval = num(&fields[3], "maxval")?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(Error::format(
            origin,
            format!("unsupported graymap geometry {width}x{height}, maxval {maxval}"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = width * height;
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < n * bytes_per {
        return Err(Error::format(
            origin,
            format!("raster has {} bytes, expected {}", raster.len(), n * bytes_per),
        ));
    }
    let samples: Vec<u16> = if bytes_per == 2 {
        raster[..2 * n].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        raster[..n].iter().map(|&b| b as u16).collect()
    };
    if let Some(bad) = samples.iter().find(|&&s| s as usize > maxval) {
        return Err(Error::format(origin, format!("sample {bad} exceeds maxval {maxval}")));
    }
    Ok(Graymap { width, height, maxval: maxval as u16, samples })
}

pub fn encode_pgm(map: &Graymap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", map.width, map.height, map.maxval).into_bytes();
    if map.maxval > 255 {
        for s in &map.samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(map.samples.iter().map(|&s| s as u8));
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Graymap> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, path)
}

pub fn write_pgm(path: impl AsRef<Path>, map: &Graymap) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(map)).map_err(|e| Error::io(path, e))
}

/// Stacks per-band graymaps from `dir`, in the listed order, into a cube
/// normalized by each file's maxval.
pub fn import_band_images(dir: impl AsRef<Path>, band_files: &[impl AsRef<Path>]) -> Result<SpectralCube<f32>> {
    let dir = dir.as_ref();
    if band_files.is_empty() {
        return Err(Error::Config("no band files listed".into()));
    }
    let mut first: Option<(PathBuf, usize, usize)> = None;
    let mut data = Vec::new();
    for name in band_files {
        let path = dir.join(name);
        let map = read_pgm(&path)?;
        match &first {
            None => first = Some((path.clone(), map.height, map.width)),
            Some((p0, h, w)) if (*h, *w) != (map.height, map.width) => {
                return Err(Error::Shape(format!(
                    "{} is {}x{} but {} is {h}x{w}",
                    path.display(),
                    map.width,
                    map.height,
                    p0.display(),
                )));
            }
            Some(_) => {}
        }
        let scale = map.maxval as f64;
        data.extend(map.samples.iter().map(|&s| (s as f64 / scale) as f32));
    }
    let (_, h, w) = first.expect("at least one band");
    SpectralCube::from_vec(h, w, band_files.len(), data)
}

/// 8-bit preview of one band, values clamped to [0, 1].
pub fn band_preview(cube: &SpectralCube<f32>, band: usize) -> Result<Graymap> {
    if band >= cube.bands() {
        return Err(Error::Bounds(format!(
            "band {band} out of range for a {}-band cube",
            cube.bands()
        )));
    }
    let samples = cube
        .band(band)
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u16)
        .collect();
    Ok(Graymap { width: cube.width(), height: cube.height(), maxval: 255, samples })
}
