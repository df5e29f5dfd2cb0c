//! Same-size 3D convolution over `(band, row, col)` with zero padding.
//!
//! Weights are laid out `(out, in, kz, ky, kx)`. Output voxel
//! `(co, b, i, j)` is `bias[co] + Σ w[co, ci, dz, dy, dx] · x[ci, b+dz-rz, i+dy-ry, j+dx-rx]`
//! with `r* = (k* - 1) / 2` and out-of-range reads treated as zero.

use std::ops::Range;

use rayon::prelude::*;

use crate::cube::FeatureCube;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kernel extent along the spectral (`depth`), vertical and horizontal axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct KernelShape {
    pub depth: usize,
    pub height: usize,
    pub width: usize,
}

impl KernelShape {
    pub const POINT: Self = Self { depth: 1, height: 1, width: 1 };
    pub const CUBE: Self = Self { depth: 3, height: 3, width: 3 };
    /// Spatial-only 3×3 kernel with spectral depth 1.
    pub const PLANAR: Self = Self { depth: 1, height: 3, width: 3 };

    pub fn taps(&self) -> usize {
        self.depth * self.height * self.width
    }

    fn is_valid(&self) -> bool {
        [self.depth, self.height, self.width].iter().all(|&k| k % 2 == 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conv3dLayer<T: Scalar = f32> {
    in_channels: usize,
    out_channels: usize,
    shape: KernelShape,
    /// `(out, in, kz, ky, kx)` row-major.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Conv3dLayer<T> {
    /// A layer with all weights and biases zero.
    pub fn zeros(in_channels: usize, out_channels: usize, shape: KernelShape) -> Result<Self> {
        let n = in_channels * out_channels * shape.taps();
        Self::from_parts(in_channels, out_channels, shape, vec![T::ZERO; n], vec![T::ZERO; out_channels])
    }

    pub fn from_parts(
        in_channels: usize,
        out_channels: usize,
        shape: KernelShape,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 {
            return Err(Error::Shape(format!(
                "conv layer channels must be positive, got {in_channels}->{out_channels}"
            )));
        }
        if !shape.is_valid() {
            return Err(Error::Shape(format!("kernel extents must be odd, got {shape:?}")));
        }
        let expected = out_channels * in_channels * shape.taps();
        if weights.len() != expected || bias.len() != out_channels {
            return Err(Error::Shape(format!(
                "conv {in_channels}->{out_channels} {shape:?} needs {expected} weights and \
                 {out_channels} biases, got {} and {}",
                weights.len(),
                bias.len()
            )));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("non-finite conv parameter".into()));
        }
        Ok(Self { in_channels, out_channels, shape, weights, bias })
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    #[inline]
    pub fn weight_index(&self, co: usize, ci: usize, dz: usize, dy: usize, dx: usize) -> usize {
        let k = self.shape;
        (((co * self.in_channels + ci) * k.depth + dz) * k.height + dy) * k.width + dx
    }

    pub fn convert<U: Scalar>(&self) -> Conv3dLayer<U> {
        Conv3dLayer {
            in_channels: self.in_channels,
            out_channels: self.out_channels,
            shape: self.shape,
            weights: crate::scalar::convert_slice(&self.weights),
            bias: crate::scalar::convert_slice(&self.bias),
        }
    }

    fn check_input(&self, x: &FeatureCube<T>) -> Result<()> {
        if x.channels() != self.in_channels {
            return Err(Error::Shape(format!(
                "conv layer expects {} input channels, got {}",
                self.in_channels,
                x.channels()
            )));
        }
        Ok(())
    }
}

/// Range of output indices `o` in `0..n` whose shifted input `o + off` is in `0..n`.
#[inline]
fn valid(n: usize, off: isize) -> Range<usize> {
    let lo = (-off).max(0) as usize;
    let hi = (n as isize - off).clamp(0, n as isize) as usize;
    lo..hi.max(lo)
}

/// One kernel tap: the signed input offset along each axis and the output
/// ranges for which the shifted read stays inside the volume.
struct Tap {
    dz: usize,
    dy: usize,
    dx: usize,
    off: (isize, isize, isize),
    bands: Range<usize>,
    rows: Range<usize>,
    cols: Range<usize>,
}

fn taps(shape: KernelShape, dims: (usize, usize, usize)) -> Vec<Tap> {
    let (nb, nh, nw) = dims;
    let (rz, ry, rx) = (
        (shape.depth / 2) as isize,
        (shape.height / 2) as isize,
        (shape.width / 2) as isize,
    );
    let mut out = Vec::with_capacity(shape.taps());
    for dz in 0..shape.depth {
        for dy in 0..shape.height {
            for dx in 0..shape.width {
                let off = (dz as isize - rz, dy as isize - ry, dx as isize - rx);
                out.push(Tap {
                    dz,
                    dy,
                    dx,
                    off,
                    bands: valid(nb, off.0),
                    rows: valid(nh, off.1),
                    cols: valid(nw, off.2),
                });
            }
        }
    }
    out
}

#[inline]
fn shifted(b: usize, i: usize, off: (isize, isize, isize), nh: usize, nw: usize, j0: usize) -> usize {
    let bb = (b as isize + off.0) as usize;
    let ii = (i as isize + off.1) as usize;
    (bb * nh + ii) * nw + (j0 as isize + off.2) as usize
}

pub fn conv3d_forward<T: Scalar>(layer: &Conv3dLayer<T>, x: &FeatureCube<T>) -> Result<FeatureCube<T>> {
    layer.check_input(x)?;
    let (_, nb, nh, nw) = x.dims();
    let vol = x.volume();
    let taps = taps(layer.shape, (nb, nh, nw));
    let mut out = vec![T::ZERO; layer.out_channels * vol];
    out.par_chunks_mut(vol).enumerate().for_each(|(co, o)| {
        o.fill(layer.bias[co]);
        for ci in 0..layer.in_channels {
            let xin = x.channel(ci);
            for t in &taps {
                let w = layer.weights[layer.weight_index(co, ci, t.dz, t.dy, t.dx)];
                let len = t.cols.len();
                for b in t.bands.clone() {
                    for i in t.rows.clone() {
                        let dst = (b * nh + i) * nw + t.cols.start;
                        let src = shifted(b, i, t.off, nh, nw, t.cols.start);
                        for (a, &v) in o[dst..dst + len].iter_mut().zip(&xin[src..src + len]) {
                            *a += w * v;
                        }
                    }
                }
            }
        }
    });
    Ok(FeatureCube::from_raw(layer.out_channels, nb, nh, nw, out))
}

/// Gradients of a convolution with respect to its input and parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvGrads<T: Scalar> {
    pub input: FeatureCube<T>,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

pub fn conv3d_backward<T: Scalar>(
    layer: &Conv3dLayer<T>,
    x: &FeatureCube<T>,
    grad_out: &FeatureCube<T>,
) -> Result<ConvGrads<T>> {
    layer.check_input(x)?;
    let (_, nb, nh, nw) = x.dims();
    if grad_out.dims() != (layer.out_channels, nb, nh, nw) {
        return Err(Error::Shape(format!(
            "output gradient has dims {:?}, expected {:?}",
            grad_out.dims(),
            (layer.out_channels, nb, nh, nw)
        )));
    }
    let vol = x.volume();
    let taps = taps(layer.shape, (nb, nh, nw));
    let (cin, cout, ktaps) = (layer.in_channels, layer.out_channels, layer.shape.taps());

    let bias: Vec<T> = (0..cout).map(|co| grad_out.channel(co).iter().copied().sum()).collect();

    let mut weights = vec![T::ZERO; layer.weights.len()];
    weights.par_chunks_mut(cin * ktaps).enumerate().for_each(|(co, gw)| {
        let g = grad_out.channel(co);
        for ci in 0..cin {
            let xin = x.channel(ci);
            for (k, t) in taps.iter().enumerate() {
                let len = t.cols.len();
                let mut acc = T::ZERO;
                for b in t.bands.clone() {
                    for i in t.rows.clone() {
                        let go = (b * nh + i) * nw + t.cols.start;
                        let src = shifted(b, i, t.off, nh, nw, t.cols.start);
                        for (&a, &v) in g[go..go + len].iter().zip(&xin[src..src + len]) {
                            acc += a * v;
                        }
                    }
                }
                gw[ci * ktaps + k] = acc;
            }
        }
    });

    let mut input = vec![T::ZERO; cin * vol];
    input.par_chunks_mut(vol).enumerate().for_each(|(ci, gx)| {
        for co in 0..cout {
            let g = grad_out.channel(co);
            for t in &taps {
                let w = layer.weights[layer.weight_index(co, ci, t.dz, t.dy, t.dx)];
                let len = t.cols.len();
                for b in t.bands.clone() {
                    for i in t.rows.clone() {
                        let go = (b * nh + i) * nw + t.cols.start;
                        let dst = shifted(b, i, t.off, nh, nw, t.cols.start);
                        for (a, &v) in gx[dst..dst + len].iter_mut().zip(&g[go..go + len]) {
                            *a += w * v;
                        }
                    }
                }
            }
        }
    });

    Ok(ConvGrads {
        input: FeatureCube::from_raw(cin, nb, nh, nw, input),
        weights,
        bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_layer_single_voxel() {
        let layer = Conv3dLayer::<f64>::from_parts(1, 1, KernelShape::POINT, vec![1.5], vec![0.25]).unwrap();
        let x = FeatureCube::from_vec(1, 1, 1, 1, vec![2.0]).unwrap();
        assert_eq!(conv3d_forward(&layer, &x).unwrap().data(), &[3.25]);
    }

    #[test]
    fn ones_kernel_counts_taps() {
        let layer =
            Conv3dLayer::<f64>::from_parts(1, 1, KernelShape::CUBE, vec![1.0; 27], vec![0.0]).unwrap();
        let c = 0.7;
        let x = FeatureCube::from_vec(1, 5, 5, 5, vec![c; 125]).unwrap();
        let y = conv3d_forward(&layer, &x).unwrap();
        assert!((y.get(0, 2, 2, 2) - 27.0 * c).abs() < 1e-12);
        assert!((y.get(0, 0, 0, 0) - 8.0 * c).abs() < 1e-12);
        assert!((y.get(0, 4, 0, 2) - 12.0 * c).abs() < 1e-12);
        assert_eq!(y.dims(), (1, 5, 5, 5));
    }

    #[test]
    fn channel_mismatch() {
        let layer = Conv3dLayer::<f32>::zeros(2, 3, KernelShape::CUBE).unwrap();
        let x = FeatureCube::zeros(3, 2, 2, 2).unwrap();
        assert!(matches!(conv3d_forward(&layer, &x), Err(Error::Shape(_))));
        let x = FeatureCube::zeros(2, 2, 2, 2).unwrap();
        let g = FeatureCube::zeros(2, 2, 2, 2).unwrap();
        assert!(matches!(conv3d_backward(&layer, &x, &g), Err(Error::Shape(_))));
    }

    #[test]
    fn bad_layer_shapes() {
        assert!(Conv3dLayer::<f32>::zeros(0, 1, KernelShape::POINT).is_err());
        let even = KernelShape { depth: 2, height: 3, width: 3 };
        assert!(Conv3dLayer::<f32>::zeros(1, 1, even).is_err());
        assert!(Conv3dLayer::<f32>::from_parts(1, 1, KernelShape::POINT, vec![], vec![0.0]).is_err());
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let layer = Conv3dLayer::<f64>::from_parts(
            2,
            2,
            KernelShape::CUBE,
            (0..108).map(|i| i as f64 * 0.01).collect(),
            vec![0.3, -0.2],
        )
        .unwrap();
        let x = FeatureCube::from_vec(2, 3, 3, 3, (0..54).map(|i| i as f64).collect()).unwrap();
        let g = FeatureCube::zeros(2, 3, 3, 3).unwrap();
        let grads = conv3d_backward(&layer, &x, &g).unwrap();
        assert!(grads.input.data().iter().all(|&v| v == 0.0));
        assert!(grads.weights.iter().all(|&v| v == 0.0));
        assert!(grads.bias.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn point_layer_scalar_chain_rule() {
        let w = -1.25;
        let layer = Conv3dLayer::<f64>::from_parts(1, 1, KernelShape::POINT, vec![w], vec![0.5]).unwrap();
        let xs = [0.5, -1.0, 2.0, 0.25];
        let gs = [1.0, 3.0, -2.0, 0.5];
        let x = FeatureCube::from_vec(1, 1, 2, 2, xs.to_vec()).unwrap();
        let g = FeatureCube::from_vec(1, 1, 2, 2, gs.to_vec()).unwrap();
        let grads = conv3d_backward(&layer, &x, &g).unwrap();
        let expected_w: f64 = xs.iter().zip(&gs).map(|(a, b)| a * b).sum();
        assert_eq!(grads.weights, vec![expected_w]);
        assert_eq!(grads.bias, vec![gs.iter().sum::<f64>()]);
        let expected_x: Vec<f64> = gs.iter().map(|g| w * g).collect();
        assert_eq!(grads.input.data(), &expected_x[..]);
    }

    #[test]
    fn valid_ranges() {
        assert_eq!(valid(5, -1), 1..5);
        assert_eq!(valid(5, 1), 0..4);
        assert_eq!(valid(5, 0), 0..5);
        assert!(valid(1, 1).is_empty());
        assert!(valid(1, -1).is_empty());
    }
}
