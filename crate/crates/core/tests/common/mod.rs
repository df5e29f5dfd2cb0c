//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use msfa_demosaic::net::{
    network_backward, network_forward_traced, Conv3dLayer, ConvMode, FinalKernel, KernelShape, NetworkConfig,
    NetworkParams, ReluPlacement,
};
use msfa_demosaic::train::mse_loss;
use msfa_demosaic::{FeatureCube, SpectralCube};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn random_features(rng: &mut ChaCha8Rng, c: usize, b: usize, h: usize, w: usize) -> FeatureCube<f64> {
    FeatureCube::from_vec(c, b, h, w, uniform_vec(rng, c * b * h * w, -1.0, 1.0)).unwrap()
}

pub fn random_cube(rng: &mut ChaCha8Rng, h: usize, w: usize, b: usize) -> SpectralCube<f64> {
    SpectralCube::from_vec(h, w, b, uniform_vec(rng, h * w * b, 0.0, 1.0)).unwrap()
}

pub fn random_layer(rng: &mut ChaCha8Rng, cin: usize, cout: usize, shape: KernelShape) -> Conv3dLayer<f64> {
    let w = uniform_vec(rng, cin * cout * shape.taps(), -1.0, 1.0);
    let b = uniform_vec(rng, cout, -0.5, 0.5);
    Conv3dLayer::from_parts(cin, cout, shape, w, b).unwrap()
}

/// Same-padded, stride-1 3D convolution written as the plain six-deep loop
/// over (out, in, band, row, col, tap).
pub fn conv_oracle(layer: &Conv3dLayer<f64>, x: &FeatureCube<f64>) -> FeatureCube<f64> {
    let (cin, nb, nh, nw) = x.dims();
    let k = layer.shape();
    let cout = layer.out_channels();
    let (rz, ry, rx) = ((k.depth / 2) as isize, (k.height / 2) as isize, (k.width / 2) as isize);
    let mut out = vec![0.0; cout * nb * nh * nw];
    for co in 0..cout {
        for b in 0..nb {
            for i in 0..nh {
                for j in 0..nw {
                    let mut acc = layer.bias[co];
                    for ci in 0..cin {
                        for dz in 0..k.depth {
                            for dy in 0..k.height {
                                for dx in 0..k.width {
                                    let bb = b as isize + dz as isize - rz;
                                    let ii = i as isize + dy as isize - ry;
                                    let jj = j as isize + dx as isize - rx;
                                    if bb < 0 || ii < 0 || jj < 0 || bb >= nb as isize || ii >= nh as isize || jj >= nw as isize {
                                        continue;
                                    }
                                    acc += layer.weights[layer.weight_index(co, ci, dz, dy, dx)]
                                        * x.get(ci, bb as usize, ii as usize, jj as usize);
                                }
                            }
                        }
                    }
                    out[((co * nb + b) * nh + i) * nw + j] = acc;
                }
            }
        }
    }
    FeatureCube::from_vec(cout, nb, nh, nw, out).unwrap()
}

/// `‖a − n‖ / max(‖a‖ + ‖n‖, floor)`: relative error between an analytic
/// and a numeric gradient.
pub fn rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let norm_a: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let norm_n: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / (norm_a + norm_n).max(1e-12)
}

pub const FD_STEP: f64 = 1e-5;

/// Central difference of `f` with respect to `values[i]` for each listed `i`.
pub fn central_diff(values: &mut [f64], indices: &[usize], mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    indices
        .iter()
        .map(|&i| {
            let orig = values[i];
            values[i] = orig + FD_STEP;
            let up = f(values);
            values[i] = orig - FD_STEP;
            let down = f(values);
            values[i] = orig;
            (up - down) / (2.0 * FD_STEP)
        })
        .collect()
}

/// Every combination of the structural switches.
pub fn config_variants(channels: [usize; 5]) -> Vec<NetworkConfig> {
    let mut out = Vec::new();
    for final_kernel in [FinalKernel::Point, FinalKernel::Cube] {
        for module_shortcuts in [true, false] {
            for longest_shortcut in [true, false] {
                for conv_mode in [ConvMode::Spectral3d, ConvMode::Planar2d] {
                    for relu_placement in [ReluPlacement::BeforeAdd, ReluPlacement::AfterAdd] {
                        out.push(NetworkConfig {
                            module_channels: channels,
                            final_kernel,
                            module_shortcuts,
                            longest_shortcut,
                            conv_mode,
                            relu_placement,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Parameters with every tensor (including the combiner) drawn uniformly,
/// so no gradient path is trivially zero.
pub fn random_params(config: &NetworkConfig, rng: &mut ChaCha8Rng, scale: f64) -> NetworkParams<f64> {
    let mut p = NetworkParams::<f64>::zeros(config).unwrap();
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.random_range(-scale..scale);
        }
    }
    p
}

pub fn network_loss(config: &NetworkConfig, params: &NetworkParams<f64>, initial: &SpectralCube<f64>, target: &SpectralCube<f64>) -> f64 {
    let (out, _) = network_forward_traced(config, params, initial).unwrap();
    mse_loss(&out.refined, target).unwrap().0
}

/// Worst per-tensor relative error of the end-to-end loss gradient, checking
/// at most `per_tensor` entries of each tensor, plus the initial-cube gradient.
pub fn network_gradient_error(
    config: &NetworkConfig,
    params: &NetworkParams<f64>,
    initial: &SpectralCube<f64>,
    target: &SpectralCube<f64>,
    per_tensor: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let (out, trace) = network_forward_traced(config, params, initial).unwrap();
    let (_, g) = mse_loss(&out.refined, target).unwrap();
    let grads = network_backward(config, params, &trace, &g).unwrap();

    let mut worst: f64 = 0.0;
    let analytic: Vec<Vec<f64>> = grads.params.tensors().iter().map(|t| t.to_vec()).collect();
    let mut probe = params.clone();
    for (t, a) in analytic.iter().enumerate() {
        let idx = sample_indices(a.len(), per_tensor, rng);
        let mut values = probe.tensors()[t].to_vec();
        let numeric = central_diff(&mut values, &idx, |v| {
            probe.tensors_mut()[t].copy_from_slice(v);
            network_loss(config, &probe, initial, target)
        });
        probe.tensors_mut()[t].copy_from_slice(&values);
        let picked: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
        worst = worst.max(rel_error(&picked, &numeric));
    }

    let idx = sample_indices(initial.data().len(), per_tensor, rng);
    let (h, w, b) = initial.dims();
    let mut values = initial.data().to_vec();
    let numeric = central_diff(&mut values, &idx, |v| {
        let cube = SpectralCube::from_vec(h, w, b, v.to_vec()).unwrap();
        network_loss(config, params, &cube, target)
    });
    let picked: Vec<f64> = idx.iter().map(|&i| grads.initial.data()[i]).collect();
    worst.max(rel_error(&picked, &numeric))
}

pub fn sample_indices(len: usize, max: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    (0..max).map(|_| rng.random_range(0..len)).collect()
}

/// Bilinear reference: for each band and pixel, the triangle-weighted mean
/// of every same-band sample inside the (2P−1)×(2P−1) window.
pub fn bilinear_window_oracle(mosaic: &msfa_demosaic::MosaicImage<f64>) -> SpectralCube<f64> {
    let pattern = mosaic.pattern();
    let p = pattern.period() as isize;
    let (h, w) = (mosaic.height() as isize, mosaic.width() as isize);
    let t = |k: isize| (p - k.abs()) as f64 / p as f64;
    SpectralCube::from_fn(mosaic.height(), mosaic.width(), pattern.band_count(), |b, y, x| {
        let (mut num, mut den) = (0.0, 0.0);
        for dy in -(p - 1)..p {
            for dx in -(p - 1)..p {
                let (yy, xx) = (y as isize + dy, x as isize + dx);
                if yy < 0 || xx < 0 || yy >= h || xx >= w {
                    continue;
                }
                if pattern.band_at(yy as usize, xx as usize) == b {
                    let wt = t(dy) * t(dx);
                    num += wt * mosaic.get(yy as usize, xx as usize);
                    den += wt;
                }
            }
        }
        num / den
    })
    .unwrap()
}

/// Worst relative error of `conv3d_backward` (input, weights, bias) against
/// central differences of `L = <r, conv(x)>` for a random `r`.
pub fn conv_gradient_error(layer: &Conv3dLayer<f64>, x: &FeatureCube<f64>, rng: &mut ChaCha8Rng) -> f64 {
    use msfa_demosaic::net::{conv3d_backward, conv3d_forward};
    let (c, b, h, w) = x.dims();
    let r = random_features(rng, layer.out_channels(), b, h, w);
    let loss = |layer: &Conv3dLayer<f64>, x: &FeatureCube<f64>| -> f64 {
        conv3d_forward(layer, x).unwrap().data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
    };
    let g = conv3d_backward(layer, x, &r).unwrap();

    let all_x: Vec<usize> = (0..x.data().len()).collect();
    let mut xv = x.data().to_vec();
    let num_x = central_diff(&mut xv, &all_x, |v| loss(layer, &FeatureCube::from_vec(c, b, h, w, v.to_vec()).unwrap()));

    let mut probe = layer.clone();
    let all_w: Vec<usize> = (0..layer.weights.len()).collect();
    let mut wv = layer.weights.clone();
    let num_w = central_diff(&mut wv, &all_w, |v| {
        probe.weights.copy_from_slice(v);
        loss(&probe, x)
    });
    probe.weights.copy_from_slice(&wv);

    let all_b: Vec<usize> = (0..layer.bias.len()).collect();
    let mut bv = layer.bias.clone();
    let num_b = central_diff(&mut bv, &all_b, |v| {
        probe.bias.copy_from_slice(v);
        loss(&probe, x)
    });

    rel_error(g.input.data(), &num_x).max(rel_error(&g.weights, &num_w)).max(rel_error(&g.bias, &num_b))
}

/// Relative error of `relu_backward` away from the kink, and of the MSE
/// loss gradient.
pub fn relu_and_loss_gradient_error(rng: &mut ChaCha8Rng, dims: (usize, usize, usize, usize)) -> f64 {
    use msfa_demosaic::net::{relu, relu_backward};
    let (c, b, h, w) = dims;
    let x = random_features(rng, c, b, h, w);
    let r = random_features(rng, c, b, h, w);
    let analytic = relu_backward(&x, &r).unwrap();
    let idx: Vec<usize> = (0..x.data().len()).filter(|&i| x.data()[i].abs() > 10.0 * FD_STEP).collect();
    let mut xv = x.data().to_vec();
    let numeric = central_diff(&mut xv, &idx, |v| {
        let y = relu(&FeatureCube::from_vec(c, b, h, w, v.to_vec()).unwrap());
        y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
    });
    let picked: Vec<f64> = idx.iter().map(|&i| analytic.data()[i]).collect();
    let relu_err = rel_error(&picked, &numeric);

    let pred = random_cube(rng, h, w, b);
    let target = random_cube(rng, h, w, b);
    let (_, g) = mse_loss(&pred, &target).unwrap();
    let all: Vec<usize> = (0..pred.data().len()).collect();
    let mut pv = pred.data().to_vec();
    let numeric = central_diff(&mut pv, &all, |v| mse_loss(&SpectralCube::from_vec(h, w, b, v.to_vec()).unwrap(), &target).unwrap().0);
    relu_err.max(rel_error(g.data(), &numeric))
}

/// Smallest |ReLU argument| anywhere in the network for `initial`. A central
/// difference of step h is only meaningful when no argument sits within
/// reach of the kink, so gradient checks redraw instances whose margin is
/// too small.
pub fn relu_margin(config: &NetworkConfig, params: &NetworkParams<f64>, initial: &SpectralCube<f64>) -> f64 {
    use msfa_demosaic::cube_to_features;
    use msfa_demosaic::net::{conv3d_forward, module_forward};
    let mut x = cube_to_features(initial);
    let mut margin = f64::INFINITY;
    for (m, mp) in params.modules.iter().enumerate() {
        let mut z = conv3d_forward(&mp.main, &x).unwrap();
        if let (Some(proj), ReluPlacement::AfterAdd) = (&mp.projection, config.relu_placement) {
            let p = conv3d_forward(proj, &x).unwrap();
            z.data_mut().iter_mut().zip(p.data()).for_each(|(a, b)| *a += b);
        }
        margin = z.data().iter().fold(margin, |acc, v| acc.min(v.abs()));
        x = module_forward(m + 1, config, params, &x).unwrap();
    }
    margin
}

/// Minimum ReLU margin accepted for a network gradient-check instance.
pub const KINK_MARGIN: f64 = 1e-3;
