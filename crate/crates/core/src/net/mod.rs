//! Residual 3D-convolutional refinement network with explicit backward passes.

mod activation;
mod config;
mod conv;
mod graph;
mod params;

pub use activation::{relu, relu_backward};
pub use config::{param_count, ConvMode, FinalKernel, NetworkConfig, ReluPlacement, MODULES};
pub use conv::{conv3d_backward, conv3d_forward, Conv3dLayer, ConvGrads, KernelShape};
pub use graph::{
    module_forward, network_backward, network_forward, network_forward_traced, ForwardTrace,
    NetworkGrads, NetworkOutput,
};
pub use params::{init_params, ModuleParams, NetworkParams};
