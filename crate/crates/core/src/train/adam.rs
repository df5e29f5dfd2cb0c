use crate::error::{Error, Result};
use crate::net::NetworkParams;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Bias-corrected Adam moments, one buffer per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T: Scalar = f32> {
    pub hyper: AdamHyper,
    pub step: u64,
    pub first: Vec<Vec<T>>,
    pub second: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Fresh state for tensors of the given lengths.
    pub fn new(lengths: &[usize], hyper: AdamHyper) -> Self {
        let zeros: Vec<Vec<T>> = lengths.iter().map(|&n| vec![T::ZERO; n]).collect();
        Self { hyper, step: 0, first: zeros.clone(), second: zeros }
    }

    pub fn for_params(params: &NetworkParams<T>, hyper: AdamHyper) -> Self {
        let lengths: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
        Self::new(&lengths, hyper)
    }

    fn check_lengths(&self, what: &str, lengths: impl Iterator<Item = usize> + Clone) -> Result<()> {
        let expected = self.first.iter().map(Vec::len);
        if lengths.clone().count() != self.first.len() || !lengths.eq(expected) {
            return Err(Error::Shape(format!("{what} do not match the optimizer state shapes")));
        }
        Ok(())
    }

    /// One update over matching parameter and gradient tensors.
    pub fn apply(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
        self.check_lengths("parameters", params.iter().map(|p| p.len()))?;
        self.check_lengths("gradients", grads.iter().map(|g| g.len()))?;
        self.step += 1;
        let h = self.hyper;
        let t = self.step as i32;
        let (b1, b2) = (T::from_f64(h.beta1), T::from_f64(h.beta2));
        let (c1, c2) = (T::from_f64(1.0 - h.beta1), T::from_f64(1.0 - h.beta2));
        let corr1 = T::from_f64(1.0 - h.beta1.powi(t));
        let corr2 = T::from_f64(1.0 - h.beta2.powi(t));
        let (lr, eps) = (T::from_f64(h.lr), T::from_f64(h.eps));
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let (m, v) = (&mut self.first[k], &mut self.second[k]);
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + c1 * gi;
                v[i] = b2 * v[i] + c2 * gi * gi;
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Applies one Adam update to network parameters.
pub fn adam_step<T: Scalar>(
    state: &mut AdamState<T>,
    params: &mut NetworkParams<T>,
    grads: &NetworkParams<T>,
) -> Result<()> {
    let grad_tensors = grads.tensors();
    let mut param_tensors = params.tensors_mut();
    state.apply(&mut param_tensors, &grad_tensors)
}
