//! `MSCK` network checkpoints.
//!
//! All integers little-endian.
//!
//! ```text
//! magic "MSCK" | version u32 (= 1)
//! config:  module_channels 5×u32 | final_kernel u8 (0 point, 1 cube)
//!          | module_shortcuts u8 | longest_shortcut u8
//!          | conv_mode u8 (0 3d, 1 2d) | relu_placement u8 (0 before-add, 1 after-add)
//! seed u64 | epoch u32
//! layer_count u32, then per layer: in u32, out u32, kz u32, ky u32, kx u32
//! per layer in the same order: weights f32×(out·in·kz·ky·kx), bias f32×out
//! has_adam u8; when 1:
//!     step u64 | lr f64 | beta1 f64 | beta2 f64 | eps f64
//!     first moments, then second moments, both f32 in parameter layout
//! ```
//!
//! Layers follow [`NetworkParams::layers`] order.

use std::fs;
use std::path::Path;

use super::bytes::Reader;
use crate::error::{Error, Result};
use crate::net::{ConvMode, FinalKernel, KernelShape, NetworkConfig, NetworkParams, ReluPlacement, MODULES};
use crate::train::{AdamHyper, AdamState};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"MSCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: NetworkConfig,
    pub params: NetworkParams<f32>,
    pub adam: Option<AdamState<f32>>,
    pub seed: u64,
    pub epoch: u32,
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f32s(out: &mut Vec<u8>, vals: &[f32]) {
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn flag(b: u8, what: &str, origin: &Path) -> Result<bool> {
    match b {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::format(origin, format!("bad {what} flag {other}"))),
    }
}

pub fn encode_checkpoint(ck: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION as usize);
    let c = &ck.config;
    for &ch in &c.module_channels {
        put_u32(&mut out, ch);
    }
    out.push(match c.final_kernel {
        FinalKernel::Point => 0,
        FinalKernel::Cube => 1,
    });
    out.push(c.module_shortcuts as u8);
    out.push(c.longest_shortcut as u8);
    out.push(match c.conv_mode {
        ConvMode::Spectral3d => 0,
        ConvMode::Planar2d => 1,
    });
    out.push(match c.relu_placement {
        ReluPlacement::BeforeAdd => 0,
        ReluPlacement::AfterAdd => 1,
    });
    out.extend_from_slice(&ck.seed.to_le_bytes());
    out.extend_from_slice(&ck.epoch.to_le_bytes());

    let layers = ck.params.layers();
    put_u32(&mut out, layers.len());
    for l in &layers {
        let k = l.shape();
        for v in [l.in_channels(), l.out_channels(), k.depth, k.height, k.width] {
            put_u32(&mut out, v);
        }
    }
    for l in &layers {
        put_f32s(&mut out, &l.weights);
        put_f32s(&mut out, &l.bias);
    }

    match &ck.adam {
        None => out.push(0),
        Some(st) => {
            out.push(1);
            out.extend_from_slice(&st.step.to_le_bytes());
            for v in [st.hyper.lr, st.hyper.beta1, st.hyper.beta2, st.hyper.eps] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for m in st.first.iter().chain(&st.second) {
                put_f32s(&mut out, m);
            }
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8], origin: &Path) -> Result<Checkpoint> {
    let mut r = Reader::new(bytes, origin);
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(Error::format(origin, "not a checkpoint (bad magic)"));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(origin, format!("unsupported checkpoint version {version}")));
    }
    let mut module_channels = [0usize; MODULES];
    for ch in &mut module_channels {
        *ch = r.u32()? as usize;
    }
    let final_kernel = match r.u8()? {
        0 => FinalKernel::Point,
        1 => FinalKernel::Cube,
        v => return Err(Error::format(origin, format!("bad final kernel code {v}"))),
    };
    let module_shortcuts = flag(r.u8()?, "module shortcut", origin)?;
    let longest_shortcut = flag(r.u8()?, "longest shortcut", origin)?;
    let conv_mode = match r.u8()? {
        0 => ConvMode::Spectral3d,
        1 => ConvMode::Planar2d,
        v => return Err(Error::format(origin, format!("bad conv mode code {v}"))),
    };
    let relu_placement = match r.u8()? {
        0 => ReluPlacement::BeforeAdd,
        1 => ReluPlacement::AfterAdd,
        v => return Err(Error::format(origin, format!("bad relu placement code {v}"))),
    };
    let config = NetworkConfig {
        module_channels,
        final_kernel,
        module_shortcuts,
        longest_shortcut,
        conv_mode,
        relu_placement,
    };
    config.validate().map_err(|e| Error::format(origin, e.to_string()))?;
    let seed = r.u64()?;
    let epoch = r.u32()?;

    let mut params = NetworkParams::<f32>::zeros(&config)?;
    let expected: Vec<(usize, usize, KernelShape)> = params
        .layers()
        .iter()
        .map(|l| (l.in_channels(), l.out_channels(), l.shape()))
        .collect();
    let count = r.u32()? as usize;
    if count != expected.len() {
        return Err(Error::format(
            origin,
            format!("{count} layer headers, the embedded config implies {}", expected.len()),
        ));
    }
    for (i, &(cin, cout, k)) in expected.iter().enumerate() {
        let got = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
        if got != (cin, cout, k.depth, k.height, k.width) {
            return Err(Error::format(
                origin,
                format!("layer {i} header {got:?} does not match the embedded config"),
            ));
        }
    }
    for l in params.layers_mut() {
        let w = r.f32_vec(l.weights.len())?;
        let b = r.f32_vec(l.bias.len())?;
        if w.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::format(origin, "non-finite parameter"));
        }
        l.weights = w;
        l.bias = b;
    }

    let adam = if flag(r.u8()?, "optimizer", origin)? {
        let step = r.u64()?;
        let hyper = AdamHyper { lr: r.f64()?, beta1: r.f64()?, beta2: r.f64()?, eps: r.f64()? };
        let mut st = AdamState::for_params(&params, hyper);
        st.step = step;
        for m in st.first.iter_mut().chain(st.second.iter_mut()) {
            *m = r.f32_vec(m.len())?;
        }
        Some(st)
    } else {
        None
    };
    r.finish()?;
    Ok(Checkpoint { config, params, adam, seed, epoch })
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes, path)
}

pub fn write_checkpoint(path: impl AsRef<Path>, ck: &Checkpoint) -> Result<()> {
    let path = path.as_ref();
    ck.params.check(&ck.config)?;
    fs::write(path, encode_checkpoint(ck)).map_err(|e| Error::io(path, e))
}
