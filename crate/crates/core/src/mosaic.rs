//! Ideal point-sampling capture through a multispectral filter array.

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::pattern::MsfaPattern;
use crate::scalar::Scalar;

/// Single-plane raw capture: one band's value per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct MosaicImage<T: Scalar = f32> {
    height: usize,
    width: usize,
    samples: Vec<T>,
    pattern: MsfaPattern,
}

impl<T: Scalar> MosaicImage<T> {
    pub fn new(height: usize, width: usize, samples: Vec<T>, pattern: MsfaPattern) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Shape(format!("mosaic dimensions {height}x{width} must be positive")));
        }
        if samples.len() != height * width {
            return Err(Error::Shape(format!(
                "mosaic {height}x{width} needs {} samples, got {}",
                height * width,
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite mosaic sample".into()));
        }
        Ok(Self { height, width, samples, pattern })
    }

    /// Reinterprets a one-band cube (the on-disk mosaic form) as a mosaic.
    pub fn from_plane(cube: &SpectralCube<T>, pattern: MsfaPattern) -> Result<Self> {
        if cube.bands() != 1 {
            return Err(Error::Shape(format!(
                "a mosaic plane must have exactly one band, got {}",
                cube.bands()
            )));
        }
        Self::new(cube.height(), cube.width(), cube.data().to_vec(), pattern)
    }

    /// The samples as a one-band cube.
    pub fn to_plane(&self) -> SpectralCube<T> {
        SpectralCube::from_vec(self.height, self.width, 1, self.samples.clone())
            .expect("mosaic invariants imply a valid cube")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn pattern(&self) -> &MsfaPattern {
        &self.pattern
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.samples[row * self.width + col]
    }

    pub fn convert<U: Scalar>(&self) -> MosaicImage<U> {
        MosaicImage {
            height: self.height,
            width: self.width,
            samples: crate::scalar::convert_slice(&self.samples),
            pattern: self.pattern.clone(),
        }
    }
}

/// Per-pixel flags marking where one band is sampled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BandMask {
    pub height: usize,
    pub width: usize,
    pub flags: Vec<bool>,
}

impl BandMask {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.flags[row * self.width + col]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }
}

/// Samples `cube` through `pattern`: pixel `(y, x)` keeps only the band the
/// pattern places there.
pub fn apply_msfa<T: Scalar>(cube: &SpectralCube<T>, pattern: &MsfaPattern) -> Result<MosaicImage<T>> {
    if cube.bands() != pattern.band_count() {
        return Err(Error::Config(format!(
            "cube has {} bands but the pattern expects {}",
            cube.bands(),
            pattern.band_count()
        )));
    }
    let (h, w, _) = cube.dims();
    let mut samples = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            samples.push(cube.get(pattern.band_at(y, x), y, x));
        }
    }
    Ok(MosaicImage { height: h, width: w, samples, pattern: pattern.clone() })
}

pub fn band_mask(pattern: &MsfaPattern, band: usize, height: usize, width: usize) -> Result<BandMask> {
    if band >= pattern.band_count() {
        return Err(Error::Bounds(format!(
            "band {band} out of range for a {}-band pattern",
            pattern.band_count()
        )));
    }
    let mut flags = Vec::with_capacity(height * width);
    for y in 0..height {
        for x in 0..width {
            flags.push(pattern.band_at(y, x) == band);
        }
    }
    Ok(BandMask { height, width, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_cube_gives_constant_mosaic() {
        let cube = SpectralCube::<f32>::filled(7, 9, 16, 0.375).unwrap();
        let m = apply_msfa(&cube, &MsfaPattern::default()).unwrap();
        assert!(m.samples().iter().all(|&v| v == 0.375));
    }

    #[test]
    fn band_ramp_default_pattern() {
        let cube = SpectralCube::<f64>::from_fn(4, 4, 16, |b, _, _| b as f64 / 15.0).unwrap();
        let m = apply_msfa(&cube, &MsfaPattern::default()).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 1), 1.0 / 15.0);
        assert_eq!(m.get(3, 3), 1.0);
    }

    #[test]
    fn random_cube_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cube = SpectralCube::<f64>::from_fn(8, 8, 16, |_, _, _| rng.random()).unwrap();
        let p = MsfaPattern::default();
        let m = apply_msfa(&cube, &p).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let band = p.cells()[(y % 4) * 4 + x % 4];
                assert_eq!(m.get(y, x), cube.data()[(band * 8 + y) * 8 + x]);
            }
        }
    }

    #[test]
    fn band_count_mismatch() {
        let cube = SpectralCube::<f32>::zeros(4, 4, 3).unwrap();
        assert!(matches!(apply_msfa(&cube, &MsfaPattern::default()), Err(Error::Config(_))));
    }

    #[test]
    fn masks_on_lattice() {
        let p = MsfaPattern::default();
        let on = |m: &BandMask| -> Vec<(usize, usize)> {
            (0..8).flat_map(|y| (0..8).map(move |x| (y, x))).filter(|&(y, x)| m.get(y, x)).collect()
        };
        assert_eq!(on(&band_mask(&p, 0, 8, 8).unwrap()), vec![(0, 0), (0, 4), (4, 0), (4, 4)]);
        assert_eq!(on(&band_mask(&p, 5, 8, 8).unwrap()), vec![(1, 1), (1, 5), (5, 1), (5, 5)]);
        let total: usize = (0..16).map(|b| band_mask(&p, b, 8, 8).unwrap().count()).sum();
        assert_eq!(total, 64);
        assert!(matches!(band_mask(&p, 16, 8, 8), Err(Error::Bounds(_))));
    }

    #[test]
    fn masks_partition_non_multiple_sizes() {
        let p = MsfaPattern::default();
        let (h, w) = (10, 7);
        let masks: Vec<_> = (0..16).map(|b| band_mask(&p, b, h, w).unwrap()).collect();
        for i in 0..h * w {
            assert_eq!(masks.iter().filter(|m| m.flags[i]).count(), 1);
        }
        // rows 0..10: residues 0,1 three times, 2,3 twice; cols 0..7: residues 0,1,2 twice, 3 once
        assert_eq!(masks[0].count(), 3 * 2);
        assert_eq!(masks[15].count(), 2);
    }

    #[test]
    fn uniform_bands_resample_to_plane() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let plane: Vec<f32> = (0..30).map(|_| rng.random()).collect();
        let cube = SpectralCube::from_fn(5, 6, 16, |_, y, x| plane[y * 6 + x]).unwrap();
        let m = apply_msfa(&cube, &MsfaPattern::default()).unwrap();
        assert_eq!(m.samples(), &plane[..]);
    }

    #[test]
    fn plane_round_trip() {
        let m = MosaicImage::<f32>::new(2, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5], MsfaPattern::default())
            .unwrap();
        assert_eq!(MosaicImage::from_plane(&m.to_plane(), m.pattern().clone()).unwrap(), m);
    }
}
