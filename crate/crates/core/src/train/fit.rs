use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::loss::mse_loss;
use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::net::{network_backward, network_forward, network_forward_traced, NetworkConfig, NetworkParams};
use crate::scalar::Scalar;

/// An initial demosaicked cube and the ground truth it should be refined towards.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainPair<T: Scalar = f32> {
    pub initial: SpectralCube<T>,
    pub target: SpectralCube<T>,
}

impl<T: Scalar> TrainPair<T> {
    pub fn new(initial: SpectralCube<T>, target: SpectralCube<T>) -> Result<Self> {
        if !initial.same_dims(&target) {
            return Err(Error::Shape(format!(
                "training pair dims differ: initial {:?}, target {:?}",
                initial.dims(),
                target.dims()
            )));
        }
        Ok(Self { initial, target })
    }
}

/// How long to train.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Budget {
    /// Full passes over the training sub-images.
    Epochs(usize),
    /// Optimizer updates, cycling through reshuffled epochs as needed.
    Steps(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    pub budget: Budget,
    pub batch_size: usize,
    pub seed: u64,
    /// Number of cross-validation folds.
    pub folds: usize,
    /// Sub-image grid `(rows, cols)` each training image is split into.
    pub sub_grid: (usize, usize),
}

impl Default for TrainPlan {
    fn default() -> Self {
        Self { budget: Budget::Epochs(300), batch_size: 8, seed: 0, folds: 8, sub_grid: (4, 4) }
    }
}

/// Mean loss and mean parameter gradient over one batch.
///
/// Items are evaluated in parallel; the reduction runs in item order so the
/// result does not depend on scheduling.
pub fn batch_gradient<T: Scalar>(
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    batch: &[TrainPair<T>],
) -> Result<(f64, NetworkParams<T>)> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let per_item = batch
        .par_iter()
        .map(|pair| {
            let (out, trace) = network_forward_traced(config, params, &pair.initial)?;
            let (loss, grad) = mse_loss(&out.refined, &pair.target)?;
            Ok((loss, network_backward(config, params, &trace, &grad)?.params))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut total = NetworkParams::<T>::zeros(config)?;
    let mut loss = 0.0;
    for (l, g) in &per_item {
        loss += l;
        for (acc, src) in total.tensors_mut().into_iter().zip(g.tensors()) {
            for (a, &s) in acc.iter_mut().zip(src) {
                *a += s;
            }
        }
    }
    let scale = T::from_f64(1.0 / batch.len() as f64);
    for t in total.tensors_mut() {
        for v in t.iter_mut() {
            *v *= scale;
        }
    }
    Ok((loss / batch.len() as f64, total))
}

/// One pass over pre-formed batches, one Adam update per batch.
///
/// Returns the mean batch loss (measured before each update), or `None` when
/// there were no batches.
pub fn train_epoch<T: Scalar>(
    config: &NetworkConfig,
    params: &mut NetworkParams<T>,
    state: &mut AdamState<T>,
    batches: &[Vec<TrainPair<T>>],
) -> Result<Option<f64>> {
    if batches.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for batch in batches {
        let (loss, grads) = batch_gradient(config, params, batch)?;
        adam_step(state, params, &grads)?;
        total += loss;
    }
    Ok(Some(total / batches.len() as f64))
}

/// Mean per-item MSE of the refined output against the target.
pub fn evaluate_loss<T: Scalar>(
    config: &NetworkConfig,
    params: &NetworkParams<T>,
    pairs: &[TrainPair<T>],
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Shape("no pairs to evaluate".into()));
    }
    let losses = pairs
        .par_iter()
        .map(|p| Ok(mse_loss(&network_forward(config, params, &p.initial)?.refined, &p.target)?.0))
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / pairs.len() as f64)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitReport {
    /// Mean batch loss of each (possibly partial) epoch.
    pub epoch_losses: Vec<f64>,
    pub steps: u64,
}

/// Trains on `pairs` following `plan`, reshuffling every epoch with a
/// generator seeded from `plan.seed`. `on_epoch(epoch, loss)` runs after
/// each epoch.
pub fn fit<T: Scalar>(
    config: &NetworkConfig,
    params: &mut NetworkParams<T>,
    state: &mut AdamState<T>,
    pairs: &[TrainPair<T>],
    plan: &TrainPlan,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<FitReport> {
    if plan.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let mut report = FitReport::default();
    if pairs.is_empty() {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut epoch = 0;
    loop {
        let remaining = match plan.budget {
            Budget::Epochs(n) if epoch >= n => break,
            Budget::Steps(n) if report.steps as usize >= n => break,
            Budget::Epochs(_) => usize::MAX,
            Budget::Steps(n) => n - report.steps as usize,
        };
        order.shuffle(&mut rng);
        let batches: Vec<Vec<TrainPair<T>>> = order
            .chunks(plan.batch_size)
            .take(remaining)
            .map(|idx| idx.iter().map(|&i| pairs[i].clone()).collect())
            .collect();
        let loss = train_epoch(config, params, state, &batches)?.expect("pairs are non-empty");
        report.steps += batches.len() as u64;
        report.epoch_losses.push(loss);
        on_epoch(epoch, loss);
        epoch += 1;
    }
    Ok(report)
}
