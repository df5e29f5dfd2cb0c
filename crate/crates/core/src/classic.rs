//! Classical demosaickers.
//!
//! [`bilinear_demosaic`] interpolates every band independently with a
//! normalized triangle kernel: the sparse band plane and its 0/1 sampling
//! mask are both convolved with the kernel and divided pointwise. In the
//! interior this is exact bilinear interpolation between lattice samples; at
//! the borders it averages whatever samples are in reach, so constants are
//! preserved everywhere.
//!
//! [`ppi_demosaic`] is a simplified pseudo-panchromatic difference method:
//! it estimates the per-pixel band average straight from the mosaic,
//! interpolates each band's difference to that estimate, and adds it back.

use rayon::prelude::*;

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::mosaic::MosaicImage;
use crate::scalar::Scalar;

/// Taps of the PPI smoothing filter for period-4 patterns, before the 1/8 scale.
pub const PPI_TAPS: [f64; 5] = [1.0, 2.0, 2.0, 2.0, 1.0];

/// 1D triangle kernel `t(k) = (p - |k|) / p` for `|k| < p`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleKernel<T: Scalar = f32> {
    period: usize,
    weights: Vec<T>,
}

impl<T: Scalar> TriangleKernel<T> {
    pub fn new(period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::Config("triangle kernel period must be positive".into()));
        }
        let p = period as f64;
        let weights = (0..2 * period - 1)
            .map(|i| {
                let k = i as f64 - (period as f64 - 1.0);
                T::from_f64((p - k.abs()) / p)
            })
            .collect();
        Ok(Self { period, weights })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// Taps for offsets `-(p-1) ..= p-1`.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weight at signed offset `k`; zero outside the support.
    pub fn at(&self, k: isize) -> T {
        let r = self.period as isize - 1;
        if k.abs() > r {
            T::ZERO
        } else {
            self.weights[(k + r) as usize]
        }
    }
}

/// Zero-extended separable filtering of an `h × w` plane with centered taps.
fn separable_filter<T: Scalar>(plane: &[T], h: usize, w: usize, taps: &[T]) -> Vec<T> {
    debug_assert_eq!(taps.len() % 2, 1);
    let r = taps.len() / 2;
    let mut tmp = vec![T::ZERO; h * w];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        let out = &mut tmp[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            let mut acc = T::ZERO;
            for (xx, &v) in row.iter().enumerate().take(hi + 1).skip(lo) {
                acc += taps[xx + r - x] * v;
            }
            *o = acc;
        }
    }
    let mut out = vec![T::ZERO; h * w];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        let dst = &mut out[y * w..(y + 1) * w];
        for yy in lo..=hi {
            let t = taps[yy + r - y];
            for (d, &s) in dst.iter_mut().zip(&tmp[yy * w..(yy + 1) * w]) {
                *d += t * s;
            }
        }
    }
    out
}

/// Normalized triangle interpolation of one band: `K*(values·mask) / K*mask`.
///
/// Evaluated as `a + K*((values − a)·mask) / K*mask` with `a` the band's
/// first sample, which is the same quantity but reproduces a constant band
/// bit-exactly. `values` only needs to be meaningful where `mask` is set.
fn interpolate_band<T: Scalar>(
    values: &[T],
    mask: &[bool],
    h: usize,
    w: usize,
    kernel: &TriangleKernel<T>,
    band: usize,
) -> Result<Vec<T>> {
    let anchor = values.iter().zip(mask).find(|(_, &m)| m).map_or(T::ZERO, |(&v, _)| v);
    let sparse: Vec<T> = values
        .iter()
        .zip(mask)
        .map(|(&v, &m)| if m { v - anchor } else { T::ZERO })
        .collect();
    let ones: Vec<T> = mask.iter().map(|&m| if m { T::ONE } else { T::ZERO }).collect();
    let num = separable_filter(&sparse, h, w, kernel.weights());
    let den = separable_filter(&ones, h, w, kernel.weights());
    num.iter()
        .zip(&den)
        .enumerate()
        .map(|(i, (&n, &d))| {
            if d > T::ZERO {
                Ok(anchor + n / d)
            } else {
                Err(Error::DegeneratePattern { band, row: i / w, col: i % w })
            }
        })
        .collect()
}

fn band_masks<T: Scalar>(mosaic: &MosaicImage<T>) -> Vec<Vec<bool>> {
    let (h, w) = (mosaic.height(), mosaic.width());
    let pattern = mosaic.pattern();
    let mut masks = vec![vec![false; h * w]; pattern.band_count()];
    for y in 0..h {
        for x in 0..w {
            masks[pattern.band_at(y, x)][y * w + x] = true;
        }
    }
    masks
}

fn stack_bands<T: Scalar>(h: usize, w: usize, planes: Vec<Vec<T>>) -> Result<SpectralCube<T>> {
    let bands = planes.len();
    SpectralCube::from_vec(h, w, bands, planes.concat())
}

/// Per-band bilinear interpolation with a `(2P-1)`-tap triangle kernel.
pub fn bilinear_demosaic<T: Scalar>(mosaic: &MosaicImage<T>) -> Result<SpectralCube<T>> {
    let (h, w) = (mosaic.height(), mosaic.width());
    let kernel = TriangleKernel::<T>::new(mosaic.pattern().period())?;
    let planes = band_masks(mosaic)
        .par_iter()
        .enumerate()
        .map(|(b, mask)| interpolate_band(mosaic.samples(), mask, h, w, &kernel, b))
        .collect::<Result<Vec<_>>>()?;
    stack_bands(h, w, planes)
}

fn require_period_4<T: Scalar>(mosaic: &MosaicImage<T>) -> Result<()> {
    match mosaic.pattern().period() {
        4 => Ok(()),
        p => Err(Error::Unsupported(format!(
            "the PPI estimate is defined for period-4 patterns, got period {p}"
        ))),
    }
}

/// Pseudo-panchromatic estimate: the mosaic smoothed with `[1,2,2,2,1]/8`
/// in both directions, renormalized by the in-bounds weight at the borders.
/// Anchored on the first sample like [`bilinear_demosaic`].
pub fn ppi_estimate<T: Scalar>(mosaic: &MosaicImage<T>) -> Result<Vec<T>> {
    require_period_4(mosaic)?;
    let (h, w) = (mosaic.height(), mosaic.width());
    let taps: Vec<T> = PPI_TAPS.iter().map(|&t| T::from_f64(t / 8.0)).collect();
    let anchor = mosaic.samples()[0];
    let centered: Vec<T> = mosaic.samples().iter().map(|&s| s - anchor).collect();
    let num = separable_filter(&centered, h, w, &taps);
    let den = separable_filter(&vec![T::ONE; h * w], h, w, &taps);
    Ok(num.iter().zip(&den).map(|(&n, &d)| anchor + n / d).collect())
}

/// Simplified PPI-difference demosaicking.
pub fn ppi_demosaic<T: Scalar>(mosaic: &MosaicImage<T>) -> Result<SpectralCube<T>> {
    let ppi = ppi_estimate(mosaic)?;
    let (h, w) = (mosaic.height(), mosaic.width());
    let kernel = TriangleKernel::<T>::new(mosaic.pattern().period())?;
    let diff: Vec<T> = mosaic.samples().iter().zip(&ppi).map(|(&s, &m)| s - m).collect();
    let planes = band_masks(mosaic)
        .par_iter()
        .enumerate()
        .map(|(b, mask)| {
            let d = interpolate_band(&diff, mask, h, w, &kernel, b)?;
            Ok(ppi.iter().zip(d).map(|(&m, d)| m + d).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    stack_bands(h, w, planes)
}
