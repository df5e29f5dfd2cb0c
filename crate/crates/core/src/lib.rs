//! Multispectral filter-array demosaicking.
//!
//! The pipeline simulates a periodic filter-array capture ([`mosaic`]),
//! produces an initial cube by per-band bilinear interpolation
//! ([`classic`]), and refines it with a residual network of 3D
//! convolutions ([`net`]) trained with Adam ([`train`]). File formats and
//! PSNR evaluation live in [`io`] and [`metrics`].

pub mod classic;
pub mod cube;
pub mod error;
pub mod io;
pub mod metrics;
pub mod mosaic;
pub mod net;
pub mod pattern;
pub mod scalar;
pub mod synth;
pub mod train;

pub use cube::{cube_to_features, features_to_cube, FeatureCube, SpectralCube};
pub use error::{Error, Result};
pub use mosaic::{apply_msfa, band_mask, BandMask, MosaicImage};
pub use pattern::MsfaPattern;
pub use scalar::Scalar;
