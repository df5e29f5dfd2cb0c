use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{NetworkConfig, MODULES};
use super::conv::{Conv3dLayer, KernelShape};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ModuleParams<T: Scalar = f32> {
    pub main: Conv3dLayer<T>,
    /// 1×1×1 shortcut projection; absent when module shortcuts are disabled.
    pub projection: Option<Conv3dLayer<T>>,
}

/// Parameters of the five shortcut modules and the final combiner.
///
/// The canonical layer order (used by the optimizer and checkpoints) is
/// `main₁, proj₁, main₂, proj₂, …, main₅, proj₅, combiner`, skipping absent
/// projections.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T: Scalar = f32> {
    pub modules: Vec<ModuleParams<T>>,
    pub combiner: Conv3dLayer<T>,
}

impl<T: Scalar> NetworkParams<T> {
    /// All-zero parameters shaped for `config`.
    pub fn zeros(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let mut modules = Vec::with_capacity(MODULES);
        for m in 1..=MODULES {
            let (cin, cout) = (config.in_channels(m), config.out_channels(m));
            modules.push(ModuleParams {
                main: Conv3dLayer::zeros(cin, cout, config.main_kernel())?,
                projection: if config.module_shortcuts {
                    Some(Conv3dLayer::zeros(cin, cout, KernelShape::POINT)?)
                } else {
                    None
                },
            });
        }
        let combiner =
            Conv3dLayer::zeros(config.module_channels[MODULES - 1], 1, config.final_kernel_shape())?;
        Ok(Self { modules, combiner })
    }

    pub fn layers(&self) -> Vec<&Conv3dLayer<T>> {
        let mut out = Vec::new();
        for m in &self.modules {
            out.push(&m.main);
            out.extend(m.projection.as_ref());
        }
        out.push(&self.combiner);
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut Conv3dLayer<T>> {
        let mut out = Vec::new();
        for m in &mut self.modules {
            out.push(&mut m.main);
            out.extend(m.projection.as_mut());
        }
        out.push(&mut self.combiner);
        out
    }

    /// Parameter tensors in canonical order, each layer contributing its
    /// weights then its bias.
    pub fn tensors(&self) -> Vec<&[T]> {
        self.layers()
            .into_iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        self.layers_mut()
            .into_iter()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.param_count()).sum()
    }

    /// Checks that every layer has the shape `config` implies.
    pub fn check(&self, config: &NetworkConfig) -> Result<()> {
        let reference = NetworkParams::<T>::zeros(config)?;
        let shapes = |p: &Self| {
            p.layers()
                .iter()
                .map(|l| (l.in_channels(), l.out_channels(), l.shape()))
                .collect::<Vec<_>>()
        };
        if shapes(self) != shapes(&reference) || self.modules.len() != MODULES {
            return Err(Error::Config(
                "network parameters do not match the network configuration".into(),
            ));
        }
        Ok(())
    }

    pub fn convert<U: Scalar>(&self) -> NetworkParams<U> {
        NetworkParams {
            modules: self
                .modules
                .iter()
                .map(|m| ModuleParams {
                    main: m.main.convert(),
                    projection: m.projection.as_ref().map(Conv3dLayer::convert),
                })
                .collect(),
            combiner: self.combiner.convert(),
        }
    }
}

/// He-normal hidden kernels (variance `2 / fan_in`), zero biases and a zero
/// combiner, so the untrained network returns its input unchanged.
pub fn init_params<T: Scalar>(config: &NetworkConfig, seed: u64) -> Result<NetworkParams<T>> {
    let mut params = NetworkParams::<T>::zeros(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in &mut params.modules {
        for layer in std::iter::once(&mut m.main).chain(m.projection.as_mut()) {
            let fan_in = layer.in_channels() * layer.shape().taps();
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
                .expect("standard deviation is positive and finite");
            for w in &mut layer.weights {
                *w = T::from_f64(normal.sample(&mut rng));
            }
        }
    }
    Ok(params)
}
