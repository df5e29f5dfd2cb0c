//! PSNR over normalized cubes (peak value 1).

use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_dims<T: Scalar>(a: &SpectralCube<T>, b: &SpectralCube<T>) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::Shape(format!(
            "cannot compare cubes {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

fn mse_of(a: &[impl Scalar], b: &[impl Scalar]) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.to_f64() - y.to_f64();
            d * d
        })
        .sum();
    sum / a.len() as f64
}

fn db_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}

/// Mean squared error over every entry, accumulated in double precision.
pub fn mse<T: Scalar>(reference: &SpectralCube<T>, test: &SpectralCube<T>) -> Result<f64> {
    check_dims(reference, test)?;
    Ok(mse_of(reference.data(), test.data()))
}

/// `10·log10(1 / MSE)` over the whole cube; `f64::INFINITY` when identical.
pub fn psnr<T: Scalar>(reference: &SpectralCube<T>, test: &SpectralCube<T>) -> Result<f64> {
    Ok(db_from_mse(mse(reference, test)?))
}

/// Mean of the per-band PSNR values.
pub fn psnr_per_band<T: Scalar>(reference: &SpectralCube<T>, test: &SpectralCube<T>) -> Result<f64> {
    check_dims(reference, test)?;
    let bands = reference.bands();
    let total: f64 = (0..bands)
        .map(|b| db_from_mse(mse_of(reference.band(b), test.band(b))))
        .sum();
    Ok(total / bands as f64)
}

/// How a cube's PSNR is aggregated over bands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PsnrConvention {
    /// One MSE over every entry of the cube.
    #[default]
    WholeCube,
    /// Mean of the per-band dB values.
    PerBandMean,
}

impl PsnrConvention {
    pub fn evaluate<T: Scalar>(self, reference: &SpectralCube<T>, test: &SpectralCube<T>) -> Result<f64> {
        match self {
            PsnrConvention::WholeCube => psnr(reference, test),
            PsnrConvention::PerBandMean => psnr_per_band(reference, test),
        }
    }
}

/// dB value with four decimals, or `inf`.
pub fn format_db(db: f64) -> String {
    if db.is_infinite() && db > 0.0 {
        "inf".to_string()
    } else {
        format!("{db:.4}")
    }
}
