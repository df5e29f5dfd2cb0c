//! The refinement graph: five shortcut modules, a combiner producing the
//! residual cube, and the longest shortcut adding the initial cube back.

use super::activation::{relu, relu_backward};
use super::config::{NetworkConfig, ReluPlacement, MODULES};
use super::conv::{conv3d_backward, conv3d_forward};
use super::params::{ModuleParams, NetworkParams};
use crate::cube::{cube_to_features, features_to_cube, FeatureCube, SpectralCube};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn add_assign<T: Scalar>(acc: &mut FeatureCube<T>, other: &FeatureCube<T>) {
    debug_assert_eq!(acc.dims(), other.dims());
    for (a, &b) in acc.data_mut().iter_mut().zip(other.data()) {
        *a += b;
    }
}

fn module_params<'a, T: Scalar>(params: &'a NetworkParams<T>, module: usize) -> Result<&'a ModuleParams<T>> {
    if module == 0 || module > MODULES {
        return Err(Error::Bounds(format!("module index {module} outside 1..={MODULES}")));
    }
    params
        .modules
        .get(module - 1)
        .ok_or_else(|| Error::Config(format!("parameters have no module {module}")))
}

/// Activations of one module kept for the backward pass.
#[derive(Clone, Debug)]
struct ModuleTrace<T: Scalar> {
    input: FeatureCube<T>,
    /// Argument of the ReLU: `conv(x)` before-add, `conv(x) + proj(x)` after-add.
    pre_activation: FeatureCube<T>,
}

fn module_step<T: Scalar>(
    config: &NetworkConfig,
    mp: &ModuleParams<T>,
    x: &FeatureCube<T>,
) -> Result<(FeatureCube<T>, FeatureCube<T>)> {
    let z = conv3d_forward(&mp.main, x)?;
    match (&mp.projection, config.relu_placement) {
        (None, _) => {
            let y = relu(&z);
            Ok((y, z))
        }
        (Some(proj), ReluPlacement::BeforeAdd) => {
            let mut y = relu(&z);
            add_assign(&mut y, &conv3d_forward(proj, x)?);
            Ok((y, z))
        }
        (Some(proj), ReluPlacement::AfterAdd) => {
            let mut s = z;
            add_assign(&mut s, &conv3d_forward(proj, x)?);
            Ok((relu(&s), s))
        }
    }
}

/// Output of shortcut module `module` (1-based) for input `x`.
pub fn module_forward<T: Scalar>(
    module: usize,
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    x: &FeatureCube<T>,
) -> Result<FeatureCube<T>> {
    let mp = module_params(params, module)?;
    if x.channels() != config.in_channels(module) {
        return Err(Error::Shape(format!(
            "module {module} expects {} channels, got {}",
            config.in_channels(module),
            x.channels()
        )));
    }
    Ok(module_step(config, mp, x)?.0)
}

/// Forward activations needed to backpropagate one network evaluation.
#[derive(Clone, Debug)]
pub struct ForwardTrace<T: Scalar> {
    modules: Vec<ModuleTrace<T>>,
    last: FeatureCube<T>,
    dims: (usize, usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkOutput<T: Scalar> {
    pub refined: SpectralCube<T>,
    pub residual: SpectralCube<T>,
}

fn check_network<T: Scalar>(config: &NetworkConfig, params: &NetworkParams<T>) -> Result<()> {
    config.validate()?;
    params.check(config)
}

/// Runs the network and keeps the activations for [`network_backward`].
pub fn network_forward_traced<T: Scalar>(
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    initial: &SpectralCube<T>,
) -> Result<(NetworkOutput<T>, ForwardTrace<T>)> {
    check_network(config, params)?;
    let mut x = cube_to_features(initial);
    let mut traces = Vec::with_capacity(MODULES);
    for mp in &params.modules {
        let (y, pre) = module_step(config, mp, &x)?;
        traces.push(ModuleTrace { input: x, pre_activation: pre });
        x = y;
    }
    let residual = features_to_cube(&conv3d_forward(&params.combiner, &x)?)?;
    let refined = if config.longest_shortcut {
        initial.add(&residual)?
    } else {
        residual.clone()
    };
    Ok((
        NetworkOutput { refined, residual },
        ForwardTrace { modules: traces, last: x, dims: initial.dims() },
    ))
}

/// `(refined, residual)` for an initial demosaicked cube.
pub fn network_forward<T: Scalar>(
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    initial: &SpectralCube<T>,
) -> Result<NetworkOutput<T>> {
    Ok(network_forward_traced(config, params, initial)?.0)
}

/// Gradients of a scalar loss with respect to the parameters and the initial cube.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGrads<T: Scalar> {
    pub params: NetworkParams<T>,
    pub initial: SpectralCube<T>,
}

/// Backpropagates `grad_refined` (dLoss/dRefined) through a traced evaluation.
pub fn network_backward<T: Scalar>(
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    trace: &ForwardTrace<T>,
    grad_refined: &SpectralCube<T>,
) -> Result<NetworkGrads<T>> {
    check_network(config, params)?;
    if grad_refined.dims() != trace.dims {
        return Err(Error::Shape(format!(
            "refined-cube gradient has dims {:?}, expected {:?}",
            grad_refined.dims(),
            trace.dims
        )));
    }
    let mut grads = NetworkParams::<T>::zeros(config)?;

    let g_res = cube_to_features(grad_refined);
    let cg = conv3d_backward(&params.combiner, &trace.last, &g_res)?;
    grads.combiner.weights = cg.weights;
    grads.combiner.bias = cg.bias;
    let mut g = cg.input;

    for (idx, (mp, mt)) in params.modules.iter().zip(&trace.modules).enumerate().rev() {
        let gm = &mut grads.modules[idx];
        let (g_main, g_proj) = match (&mp.projection, config.relu_placement) {
            (None, _) => (relu_backward(&mt.pre_activation, &g)?, None),
            (Some(_), ReluPlacement::BeforeAdd) => (relu_backward(&mt.pre_activation, &g)?, Some(g)),
            (Some(_), ReluPlacement::AfterAdd) => {
                let gs = relu_backward(&mt.pre_activation, &g)?;
                (gs.clone(), Some(gs))
            }
        };
        let main = conv3d_backward(&mp.main, &mt.input, &g_main)?;
        gm.main.weights = main.weights;
        gm.main.bias = main.bias;
        let mut gx = main.input;
        if let (Some(proj), Some(gp)) = (&mp.projection, g_proj) {
            let pg = conv3d_backward(proj, &mt.input, &gp)?;
            let slot = gm.projection.as_mut().expect("zeros() mirrors the config");
            slot.weights = pg.weights;
            slot.bias = pg.bias;
            add_assign(&mut gx, &pg.input);
        }
        g = gx;
    }

    let mut initial = features_to_cube(&g)?;
    if config.longest_shortcut {
        initial = initial.add(grad_refined)?;
    }
    Ok(NetworkGrads { params: grads, initial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::conv::Conv3dLayer;
    use crate::net::params::init_params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cube(h: usize, w: usize, b: usize, seed: u64) -> SpectralCube<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralCube::from_fn(h, w, b, |_, _, _| rng.random()).unwrap()
    }

    #[test]
    fn zero_module_gives_zero() {
        let cfg = NetworkConfig::default();
        let p = NetworkParams::<f64>::zeros(&cfg).unwrap();
        let x = FeatureCube::from_vec(2, 2, 2, 2, (0..16).map(|i| i as f64 - 8.0).collect()).unwrap();
        let y = module_forward(2, &cfg, &p, &x).unwrap();
        assert_eq!(y.dims(), (4, 2, 2, 2));
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_path_isolation() {
        let cfg = NetworkConfig::default();
        let mut p = NetworkParams::<f64>::zeros(&cfg).unwrap();
        // module 3: 4 -> 8, projection copies input channel c into output channel c
        let proj = p.modules[2].projection.as_mut().unwrap();
        for c in 0..4 {
            let idx = proj.weight_index(c, c, 0, 0, 0);
            proj.weights[idx] = 1.0;
        }
        let x = FeatureCube::from_vec(4, 2, 3, 3, (0..72).map(|i| (i as f64).sin()).collect()).unwrap();
        let y = module_forward(3, &cfg, &p, &x).unwrap();
        assert_eq!(&y.data()[..72], x.data());
        assert!(y.data()[72..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn module_index_and_channel_errors() {
        let cfg = NetworkConfig::default();
        let p = NetworkParams::<f32>::zeros(&cfg).unwrap();
        let x = FeatureCube::<f32>::zeros(1, 1, 2, 2).unwrap();
        assert!(matches!(module_forward(0, &cfg, &p, &x), Err(Error::Bounds(_))));
        assert!(matches!(module_forward(6, &cfg, &p, &x), Err(Error::Bounds(_))));
        assert!(matches!(module_forward(2, &cfg, &p, &x), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_combiner_is_identity() {
        let cfg = NetworkConfig::default();
        let p = init_params::<f32>(&cfg, 3).unwrap();
        let initial = random_cube(8, 8, 16, 1).convert::<f32>();
        let out = network_forward(&cfg, &p, &initial).unwrap();
        assert!(out.residual.data().iter().all(|&v| v == 0.0));
        assert_eq!(out.refined, initial);
    }

    #[test]
    fn no_longest_shortcut_zero_combiner_is_zero() {
        let cfg = NetworkConfig { longest_shortcut: false, ..Default::default() };
        let p = init_params::<f64>(&cfg, 3).unwrap();
        let out = network_forward(&cfg, &p, &random_cube(4, 4, 3, 2)).unwrap();
        assert!(out.refined.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_params_rejected() {
        let cfg = NetworkConfig::default();
        let p = NetworkParams::<f64>::zeros(&NetworkConfig { module_shortcuts: false, ..cfg.clone() }).unwrap();
        assert!(matches!(network_forward(&cfg, &p, &random_cube(4, 4, 2, 1)), Err(Error::Config(_))));
    }

    #[test]
    fn forward_deterministic_and_shape_preserving() {
        let cfg = NetworkConfig::default();
        let mut p = init_params::<f32>(&cfg, 9).unwrap();
        p.combiner = Conv3dLayer::from_parts(32, 1, cfg.final_kernel_shape(), vec![0.01; 32], vec![0.1]).unwrap();
        let initial = random_cube(6, 5, 4, 3).convert::<f32>();
        let a = network_forward(&cfg, &p, &initial).unwrap();
        let b = network_forward(&cfg, &p, &initial).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.refined.dims(), initial.dims());
    }

    #[test]
    fn backward_rejects_bad_gradient_dims() {
        let cfg = NetworkConfig::default();
        let p = init_params::<f64>(&cfg, 1).unwrap();
        let (_, trace) = network_forward_traced(&cfg, &p, &random_cube(4, 4, 2, 1)).unwrap();
        let bad = SpectralCube::zeros(4, 4, 3).unwrap();
        assert!(network_backward(&cfg, &p, &trace, &bad).is_err());
    }
}
