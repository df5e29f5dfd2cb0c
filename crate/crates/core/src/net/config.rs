use serde::{Deserialize, Serialize};

use super::conv::KernelShape;
use crate::error::{Error, Result};

/// Number of shortcut modules ahead of the combiner.
pub const MODULES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalKernel {
    /// 1×1×1 channel mixer.
    Point,
    /// 3×3×3 (or 1×3×3 in the 2D ablation).
    Cube,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvMode {
    #[serde(rename = "3d")]
    Spectral3d,
    /// Spectral kernel depth 1 wherever a 3×3×3 kernel would appear.
    #[serde(rename = "2d")]
    Planar2d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReluPlacement {
    /// `y = relu(conv(x)) + proj(x)`
    BeforeAdd,
    /// `y = relu(conv(x) + proj(x))`
    AfterAdd,
}

/// Shape and wiring of the refinement network.
///
/// Serialized (for `--config` files) as TOML, e.g.
///
/// ```toml
/// module_channels = [2, 4, 8, 16, 32]
/// final_kernel = "point"
/// module_shortcuts = true
/// longest_shortcut = true
/// conv_mode = "3d"
/// relu_placement = "before-add"
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub module_channels: [usize; MODULES],
    pub final_kernel: FinalKernel,
    pub module_shortcuts: bool,
    pub longest_shortcut: bool,
    pub conv_mode: ConvMode,
    pub relu_placement: ReluPlacement,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            module_channels: [2, 4, 8, 16, 32],
            final_kernel: FinalKernel::Point,
            module_shortcuts: true,
            longest_shortcut: true,
            conv_mode: ConvMode::Spectral3d,
            relu_placement: ReluPlacement::BeforeAdd,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.module_channels.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!("module {} has zero channels", i + 1)));
        }
        Ok(())
    }

    /// Input channel count of module `i` (1-based); module 1 sees the cube itself.
    pub fn in_channels(&self, module: usize) -> usize {
        if module == 1 {
            1
        } else {
            self.module_channels[module - 2]
        }
    }

    pub fn out_channels(&self, module: usize) -> usize {
        self.module_channels[module - 1]
    }

    pub fn main_kernel(&self) -> KernelShape {
        match self.conv_mode {
            ConvMode::Spectral3d => KernelShape::CUBE,
            ConvMode::Planar2d => KernelShape::PLANAR,
        }
    }

    pub fn final_kernel_shape(&self) -> KernelShape {
        match self.final_kernel {
            FinalKernel::Point => KernelShape::POINT,
            FinalKernel::Cube => self.main_kernel(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| Error::Config(format!("network config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network config is always representable as TOML")
    }
}

/// Total scalar parameter count implied by `config`.
pub fn param_count(config: &NetworkConfig) -> usize {
    let conv = |cin: usize, cout: usize, k: KernelShape| cin * cout * k.taps() + cout;
    let mut total = 0;
    for m in 1..=MODULES {
        let (cin, cout) = (config.in_channels(m), config.out_channels(m));
        total += conv(cin, cout, config.main_kernel());
        if config.module_shortcuts {
            total += conv(cin, cout, KernelShape::POINT);
        }
    }
    total + conv(config.module_channels[MODULES - 1], 1, config.final_kernel_shape())
}
