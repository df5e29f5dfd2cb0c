mod common;

use common::*;
use msfa_demosaic::net::{
    conv3d_forward, init_params, module_forward, network_forward, param_count, ConvMode, FinalKernel, KernelShape,
    NetworkConfig, NetworkParams,
};
use msfa_demosaic::{cube_to_features, FeatureCube, SpectralCube};
use rand::Rng;

#[test]
fn conv_matches_nested_loops() {
    let mut rng = rng(11);
    let shapes = [KernelShape::POINT, KernelShape::CUBE, KernelShape::PLANAR];
    for case in 0..100 {
        let c = rng.random_range(1..=3);
        let b = rng.random_range(1..=4);
        let h = rng.random_range(1..=6);
        let w = rng.random_range(1..=6);
        let cout = rng.random_range(1..=3);
        let layer = random_layer(&mut rng, c, cout, shapes[case % 3]);
        let x = random_features(&mut rng, c, b, h, w);
        let fast = conv3d_forward(&layer, &x).unwrap();
        let slow = conv_oracle(&layer, &x);
        let diff = fast.data().iter().zip(slow.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "case {case}: {diff}");
    }
}

#[test]
fn conv_backward_matches_finite_differences() {
    let mut rng = rng(12);
    let shapes = [KernelShape::POINT, KernelShape::CUBE, KernelShape::PLANAR];
    for case in 0..9 {
        let (c, cout) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let (b, h, w) = (rng.random_range(1..=4), rng.random_range(2..=5), rng.random_range(2..=5));
        let layer = random_layer(&mut rng, c, cout, shapes[case % 3]);
        let x = random_features(&mut rng, c, b, h, w);
        let err = conv_gradient_error(&layer, &x, &mut rng);
        assert!(err < 1e-8, "case {case}: {err}");
    }
}

#[test]
fn relu_and_loss_gradients() {
    let mut rng = rng(13);
    for _ in 0..10 {
        assert!(relu_and_loss_gradient_error(&mut rng, (2, 3, 4, 4)) < 1e-9);
    }
}

#[test]
fn network_gradients_every_variant() {
    let mut rng = rng(14);
    for (i, config) in config_variants([2, 3, 2, 3, 2]).iter().enumerate() {
        let (params, initial) = loop {
            let params = random_params(config, &mut rng, 0.5);
            let initial = random_cube(&mut rng, 4, 3, 3);
            if relu_margin(config, &params, &initial) >= KINK_MARGIN {
                break (params, initial);
            }
        };
        let target = random_cube(&mut rng, 4, 3, 3);
        let err = network_gradient_error(config, &params, &initial, &target, 12, &mut rng);
        assert!(err < 1e-5, "variant {i} {config:?}: {err}");
    }
}

#[test]
fn network_gradients_default_width_subset() {
    let mut rng = rng(15);
    let config = NetworkConfig::default();
    let mut params = init_params::<f64>(&config, 2).unwrap();
    // nonzero combiner so the upstream gradients are informative
    for v in params.combiner.weights.iter_mut() {
        *v = rng.random_range(-0.2..0.2);
    }
    let initial = random_cube(&mut rng, 4, 4, 3);
    let target = random_cube(&mut rng, 4, 4, 3);
    let err = network_gradient_error(&config, &params, &initial, &target, 6, &mut rng);
    assert!(err < 1e-5, "{err}");
}

#[test]
fn module_composition_matches_network() {
    let mut rng = rng(16);
    for config in config_variants([2, 3, 4, 3, 2]) {
        let params = random_params(&config, &mut rng, 0.4);
        let initial = random_cube(&mut rng, 5, 4, 3);
        let mut x = cube_to_features(&initial);
        for m in 1..=5 {
            x = module_forward(m, &config, &params, &x).unwrap();
        }
        let residual = conv_oracle(&params.combiner, &x);
        let out = network_forward(&config, &params, &initial).unwrap();
        for (i, &r) in residual.data().iter().enumerate() {
            let expect = if config.longest_shortcut { r + initial.data()[i] } else { r };
            assert!((out.refined.data()[i] - expect).abs() < 1e-12);
            assert!((out.residual.data()[i] - r).abs() < 1e-12);
        }
    }
}

#[test]
fn module_one_by_hand() {
    // 1 -> 2 channels on a single voxel: only the centre tap of each kernel sees data
    let config = NetworkConfig { module_channels: [2, 1, 1, 1, 1], ..Default::default() };
    let mut params = NetworkParams::<f64>::zeros(&config).unwrap();
    let centre = |p: &NetworkParams<f64>, co| p.modules[0].main.weight_index(co, 0, 1, 1, 1);
    let (c0, c1) = (centre(&params, 0), centre(&params, 1));
    params.modules[0].main.weights[c0] = 2.0;
    params.modules[0].main.weights[c1] = -3.0;
    params.modules[0].main.bias = vec![0.5, 0.25];
    let proj = params.modules[0].projection.as_mut().unwrap();
    proj.weights = vec![10.0, 20.0];
    proj.bias = vec![1.0, -1.0];
    let x = FeatureCube::from_vec(1, 1, 1, 1, vec![0.5]).unwrap();
    let y = module_forward(1, &config, &params, &x).unwrap();
    // relu(2·0.5 + 0.5) + 10·0.5 + 1, relu(−3·0.5 + 0.25) + 20·0.5 − 1
    assert_eq!(y.data(), &[1.5 + 6.0, 0.0 + 9.0]);
}

#[test]
fn golden_forward_value() {
    let config = NetworkConfig { module_channels: [2, 2, 2, 2, 2], final_kernel: FinalKernel::Point, ..Default::default() };
    let mut params = NetworkParams::<f64>::zeros(&config).unwrap();
    for (t, tensor) in params.tensors_mut().into_iter().enumerate() {
        for (i, v) in tensor.iter_mut().enumerate() {
            *v = (((t * 31 + i * 7) % 13) as f64 - 6.0) / 20.0;
        }
    }
    let initial = SpectralCube::from_fn(3, 3, 2, |b, y, x| (b * 9 + y * 3 + x) as f64 / 20.0).unwrap();
    let out = network_forward(&config, &params, &initial).unwrap();
    let sum: f64 = out.refined.data().iter().sum();
    let centre = out.refined.get(1, 1, 1);
    // the centre voxel is cross-checked against the nested-loop oracle;
    // the total is a regression pin
    let mut x = cube_to_features(&initial);
    for m in 1..=5 {
        x = module_forward(m, &config, &params, &x).unwrap();
    }
    let oracle = conv_oracle(&params.combiner, &x);
    let expect_centre = oracle.get(0, 1, 1, 1) + initial.get(1, 1, 1);
    assert!((centre - expect_centre).abs() < 1e-12);
    assert!((sum - GOLDEN_SUM).abs() < 1e-9, "refined sum {sum:.12}");
}

const GOLDEN_SUM: f64 = 2.814626932031;

#[test]
fn ablations_shrink_parameter_count() {
    let base = NetworkConfig::default();
    let no_short = NetworkConfig { module_shortcuts: false, ..base.clone() };
    let planar = NetworkConfig { conv_mode: ConvMode::Planar2d, ..base.clone() };
    assert!(param_count(&no_short) < param_count(&base));
    assert!(param_count(&planar) < param_count(&base));
    let cube_final = NetworkConfig { final_kernel: FinalKernel::Cube, ..base.clone() };
    assert_eq!(param_count(&cube_final) - param_count(&base), 32 * 26);
}
