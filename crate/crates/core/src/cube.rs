//! Spectral cubes and network feature tensors.
//!
//! A [`SpectralCube`] stores `bands` planes of `height × width` samples,
//! band-major then row-major. A [`FeatureCube`] adds a leading channel axis
//! and is what flows through the refinement network.

use crate::error::{Error, Result};
use crate::scalar::{convert_slice, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCube<T: Scalar = f32> {
    height: usize,
    width: usize,
    bands: usize,
    data: Vec<T>,
}

impl<T: Scalar> SpectralCube<T> {
    /// Builds a cube from band-major data. Every value must be finite.
    pub fn from_vec(height: usize, width: usize, bands: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || bands == 0 {
            return Err(Error::Shape(format!(
                "cube dimensions must be positive, got {height}x{width}x{bands}"
            )));
        }
        let expected = bands * height * width;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "cube {height}x{width}x{bands} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let plane = height * width;
            return Err(Error::InvalidValue(format!(
                "non-finite value at band {}, row {}, col {}",
                pos / plane,
                (pos % plane) / width,
                pos % width
            )));
        }
        Ok(Self { height, width, bands, data })
    }

    pub fn zeros(height: usize, width: usize, bands: usize) -> Result<Self> {
        Self::filled(height, width, bands, T::ZERO)
    }

    pub fn filled(height: usize, width: usize, bands: usize, value: T) -> Result<Self> {
        Self::from_vec(height, width, bands, vec![value; bands * height * width])
    }

    /// Builds a cube by evaluating `f(band, row, col)` at every position.
    pub fn from_fn(
        height: usize,
        width: usize,
        bands: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(bands * height * width);
        for b in 0..bands {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(b, y, x));
                }
            }
        }
        Self::from_vec(height, width, bands, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// `(height, width, bands)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.bands)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, band: usize, row: usize, col: usize) -> T {
        self.data[(band * self.height + row) * self.width + col]
    }

    pub fn band(&self, band: usize) -> &[T] {
        let plane = self.height * self.width;
        &self.data[band * plane..(band + 1) * plane]
    }

    pub fn same_dims<U: Scalar>(&self, other: &SpectralCube<U>) -> bool {
        self.dims() == other.dims()
    }

    pub fn convert<U: Scalar>(&self) -> SpectralCube<U> {
        SpectralCube {
            height: self.height,
            width: self.width,
            bands: self.bands,
            data: convert_slice(&self.data),
        }
    }

    /// Extracts the `h × w` rectangle whose top-left corner is `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, h: usize, w: usize) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::Bounds(format!("crop size {h}x{w} is empty")));
        }
        if top + h > self.height {
            return Err(Error::Bounds(format!(
                "crop bottom row {} exceeds height {} (top {top}, h {h})",
                top + h,
                self.height
            )));
        }
        if left + w > self.width {
            return Err(Error::Bounds(format!(
                "crop right column {} exceeds width {} (left {left}, w {w})",
                left + w,
                self.width
            )));
        }
        let mut data = Vec::with_capacity(self.bands * h * w);
        for b in 0..self.bands {
            for y in top..top + h {
                let start = (b * self.height + y) * self.width + left;
                data.extend_from_slice(&self.data[start..start + w]);
            }
        }
        Ok(Self { height: h, width: w, bands: self.bands, data })
    }

    /// Splits the cube into `grid_rows × grid_cols` equal tiles, row-major.
    pub fn tile(&self, grid_rows: usize, grid_cols: usize) -> Result<Vec<Self>> {
        if grid_rows == 0
            || grid_cols == 0
            || self.height % grid_rows != 0
            || self.width % grid_cols != 0
        {
            return Err(Error::Shape(format!(
                "cannot tile {}x{} cube into a {grid_rows}x{grid_cols} grid: \
                 height {} and width {} must be divisible by the grid",
                self.height, self.width, self.height, self.width
            )));
        }
        let th = self.height / grid_rows;
        let tw = self.width / grid_cols;
        let mut tiles = Vec::with_capacity(grid_rows * grid_cols);
        for r in 0..grid_rows {
            for c in 0..grid_cols {
                tiles.push(self.crop(r * th, c * tw, th, tw)?);
            }
        }
        Ok(tiles)
    }

    /// Inverse of [`tile`](Self::tile): reassembles row-major tiles.
    pub fn untile(tiles: &[Self], grid_rows: usize, grid_cols: usize) -> Result<Self> {
        if grid_rows == 0 || grid_cols == 0 || tiles.len() != grid_rows * grid_cols {
            return Err(Error::Shape(format!(
                "{} tiles do not form a {grid_rows}x{grid_cols} grid",
                tiles.len()
            )));
        }
        let (th, tw, bands) = tiles[0].dims();
        if let Some(bad) = tiles.iter().position(|t| t.dims() != (th, tw, bands)) {
            return Err(Error::Shape(format!(
                "tile {bad} has dims {:?}, expected {:?}",
                tiles[bad].dims(),
                (th, tw, bands)
            )));
        }
        let height = th * grid_rows;
        let width = tw * grid_cols;
        let mut data = vec![T::ZERO; bands * height * width];
        for (idx, t) in tiles.iter().enumerate() {
            let (r, c) = (idx / grid_cols, idx % grid_cols);
            for b in 0..bands {
                for y in 0..th {
                    let dst = (b * height + r * th + y) * width + c * tw;
                    data[dst..dst + tw].copy_from_slice(&t.data[(b * th + y) * tw..][..tw]);
                }
            }
        }
        Ok(Self { height, width, bands, data })
    }

    /// Elementwise sum; dimensions must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_dims(other) {
            return Err(Error::Shape(format!(
                "cannot add cubes {:?} and {:?}",
                self.dims(),
                other.dims()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self::from_vec(self.height, self.width, self.bands, data)
    }

    /// `max |a - b|` over all entries, in double precision.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if !self.same_dims(other) {
            return Err(Error::Shape(format!(
                "cannot compare cubes {:?} and {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.to_f64() - b.to_f64()).abs())
            .fold(0.0, f64::max))
    }
}

/// 4-axis tensor addressed `(channel, band, row, col)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureCube<T: Scalar = f32> {
    channels: usize,
    bands: usize,
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureCube<T> {
    pub fn from_vec(
        channels: usize,
        bands: usize,
        height: usize,
        width: usize,
        data: Vec<T>,
    ) -> Result<Self> {
        if channels == 0 || bands == 0 || height == 0 || width == 0 {
            return Err(Error::Shape(format!(
                "feature dimensions must be positive, got {channels}x{bands}x{height}x{width}"
            )));
        }
        let expected = channels * bands * height * width;
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "feature cube {channels}x{bands}x{height}x{width} needs {expected} values, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite value in feature cube".into()));
        }
        Ok(Self { channels, bands, height, width, data })
    }

    pub fn zeros(channels: usize, bands: usize, height: usize, width: usize) -> Result<Self> {
        Self::from_vec(
            channels,
            bands,
            height,
            width,
            vec![T::ZERO; channels * bands * height * width],
        )
    }

    /// Unchecked constructor for tensors produced by the network internals,
    /// where dimensions are known to be consistent.
    pub(crate) fn from_raw(
        channels: usize,
        bands: usize,
        height: usize,
        width: usize,
        data: Vec<T>,
    ) -> Self {
        debug_assert_eq!(data.len(), channels * bands * height * width);
        Self { channels, bands, height, width, data }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(channels, bands, height, width)`
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.channels, self.bands, self.height, self.width)
    }

    /// Number of scalars in one channel volume (`bands × height × width`).
    pub fn volume(&self) -> usize {
        self.bands * self.height * self.width
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, channel: usize, band: usize, row: usize, col: usize) -> T {
        self.data[((channel * self.bands + band) * self.height + row) * self.width + col]
    }

    pub fn channel(&self, channel: usize) -> &[T] {
        let vol = self.volume();
        &self.data[channel * vol..(channel + 1) * vol]
    }

    pub fn convert<U: Scalar>(&self) -> FeatureCube<U> {
        FeatureCube {
            channels: self.channels,
            bands: self.bands,
            height: self.height,
            width: self.width,
            data: convert_slice(&self.data),
        }
    }
}

/// Lifts a cube into a single-channel feature tensor.
pub fn cube_to_features<T: Scalar>(cube: &SpectralCube<T>) -> FeatureCube<T> {
    FeatureCube::from_raw(1, cube.bands, cube.height, cube.width, cube.data.clone())
}

/// Drops the channel axis of a single-channel feature tensor.
pub fn features_to_cube<T: Scalar>(features: &FeatureCube<T>) -> Result<SpectralCube<T>> {
    if features.channels != 1 {
        return Err(Error::Shape(format!(
            "expected a single-channel feature cube, got {} channels",
            features.channels
        )));
    }
    SpectralCube::from_vec(
        features.height,
        features.width,
        features.bands,
        features.data.clone(),
    )
}
