//! On-disk formats: cube files, checkpoints, pattern sidecars, graymaps and
//! CSV reports.

mod bytes;
mod checkpoint;
mod cubefile;
mod pgm;
mod report;

use std::path::{Path, PathBuf};

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint, Checkpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use cubefile::{decode_cube, encode_cube, read_cube, write_cube, CUBE_HEADER_LEN, CUBE_MAGIC, DTYPE_F32};
pub use pgm::{band_preview, decode_pgm, encode_pgm, import_band_images, read_pgm, write_pgm, Graymap};
pub use report::{report_csv, write_report, REPORT_HEADER};

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::pattern::MsfaPattern;
use crate::train::{Access, Dataset};

pub fn read_pattern(path: impl AsRef<Path>) -> Result<MsfaPattern> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse().map_err(|e: Error| Error::format(path, e.to_string()))
}

pub fn write_pattern(path: impl AsRef<Path>, pattern: &MsfaPattern) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, pattern.to_string()).map_err(|e| Error::io(path, e))
}

/// Pattern sidecar stored next to a mosaic file: `<mosaic path>.pattern`.
pub fn pattern_sidecar(mosaic_path: impl AsRef<Path>) -> PathBuf {
    let mut s = mosaic_path.as_ref().as_os_str().to_owned();
    s.push(".pattern");
    PathBuf::from(s)
}

/// Every `*.msc` file in a directory, sorted by file name; ids are file stems.
#[derive(Clone, Debug)]
pub struct CubeDirectory {
    paths: Vec<PathBuf>,
}

impl CubeDirectory {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_file() && path.extension().is_some_and(|e| e == "msc") {
                paths.push(path);
            }
        }
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Config(format!("no .msc cubes in {}", dir.display())));
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }
}

impl Dataset for CubeDirectory {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn id(&self, index: usize) -> String {
        self.paths[index]
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    fn load(&self, index: usize, _access: Access) -> Result<SpectralCube<f32>> {
        read_cube(&self.paths[index])
    }
}
