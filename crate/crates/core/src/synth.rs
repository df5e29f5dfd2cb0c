//! Seeded synthetic multispectral scenes for smoke tests and demos.
//!
//! A scene mixes a few smooth reflectance spectra with spatial abundance
//! maps: a sinusoidal background texture plus sharp-edged discs and
//! rectangles of single materials. Values stay in [0, 1].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::SpectralCube;
use crate::error::Result;

const MATERIALS: usize = 4;

struct Wave {
    fy: f64,
    fx: f64,
    phase: f64,
    amp: f64,
}

enum Shape {
    Disc { cy: f64, cx: f64, r: f64 },
    Rect { y0: f64, x0: f64, y1: f64, x1: f64 },
}

impl Shape {
    fn contains(&self, y: f64, x: f64) -> bool {
        match *self {
            Shape::Disc { cy, cx, r } => (y - cy).powi(2) + (x - cx).powi(2) <= r * r,
            Shape::Rect { y0, x0, y1, x1 } => y >= y0 && y < y1 && x >= x0 && x < x1,
        }
    }
}

/// A `height × width × bands` textured scene determined by `seed`.
pub fn textured_cube(height: usize, width: usize, bands: usize, seed: u64) -> Result<SpectralCube<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = bands.max(1) as f64;

    let spectra: Vec<Vec<f64>> = (0..MATERIALS)
        .map(|_| {
            let center = rng.random_range(0.0..nb);
            let spread = rng.random_range(0.2..0.6) * nb;
            let floor = rng.random_range(0.05..0.25);
            let peak = rng.random_range(0.5..0.75);
            (0..bands)
                .map(|b| floor + peak * (-((b as f64 - center) / spread).powi(2)).exp())
                .collect()
        })
        .collect();

    let waves: Vec<Vec<Wave>> = (0..MATERIALS)
        .map(|_| {
            (0..3)
                .map(|_| Wave {
                    fy: rng.random_range(-0.35..0.35),
                    fx: rng.random_range(-0.35..0.35),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    amp: rng.random_range(0.3..1.0),
                })
                .collect()
        })
        .collect();

    let (h, w) = (height as f64, width as f64);
    let shape_count = 3 + (height * width) / 512;
    let shapes: Vec<(Shape, usize)> = (0..shape_count)
        .map(|_| {
            let material = rng.random_range(0..MATERIALS);
            let shape = if rng.random_bool(0.5) {
                Shape::Disc {
                    cy: rng.random_range(0.0..h),
                    cx: rng.random_range(0.0..w),
                    r: rng.random_range(0.08..0.25) * h.min(w),
                }
            } else {
                let y0 = rng.random_range(0.0..h);
                let x0 = rng.random_range(0.0..w);
                let sh = rng.random_range(0.1..0.4) * h;
                let sw = rng.random_range(0.1..0.4) * w;
                Shape::Rect { y0, x0, y1: y0 + sh, x1: x0 + sw }
            };
            (shape, material)
        })
        .collect();

    let mut abundance = vec![[0.0f64; MATERIALS]; height * width];
    for y in 0..height {
        for x in 0..width {
            let (fy, fx) = (y as f64, x as f64);
            let a = &mut abundance[y * width + x];
            let topmost = shapes.iter().rev().find(|(s, _)| s.contains(fy, fx));
            match topmost {
                Some(&(_, m)) => a[m] = 1.0,
                None => {
                    let mut total = 0.0;
                    for (k, ws) in waves.iter().enumerate() {
                        let v: f64 = ws
                            .iter()
                            .map(|wv| wv.amp * (wv.fy * fy + wv.fx * fx + wv.phase).sin())
                            .sum();
                        a[k] = v.exp();
                        total += a[k];
                    }
                    a.iter_mut().for_each(|v| *v /= total);
                }
            }
        }
    }

    SpectralCube::from_fn(height, width, bands, |b, y, x| {
        let a = &abundance[y * width + x];
        let v: f64 = (0..MATERIALS).map(|k| a[k] * spectra[k][b]).sum();
        v.clamp(0.0, 1.0) as f32
    })
}
