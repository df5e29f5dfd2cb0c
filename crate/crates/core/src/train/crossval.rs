//! k-fold cross-validation: train a fresh network on all folds but one,
//! score the held-out images against bilinear.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{AdamHyper, AdamState};
use super::fit::{fit, TrainPair, TrainPlan};
use crate::classic::bilinear_demosaic;
use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::metrics::PsnrConvention;
use crate::mosaic::apply_msfa;
use crate::net::{init_params, network_forward, NetworkConfig};
use crate::pattern::MsfaPattern;

/// Seeded shuffle followed by contiguous chunking into `k` equal groups.
pub fn make_folds<I: Clone>(items: &[I], k: usize, seed: u64) -> Result<Vec<Vec<I>>> {
    if k == 0 || items.len() % k != 0 {
        return Err(Error::Config(format!(
            "{} items cannot be split evenly into {k} folds",
            items.len()
        )));
    }
    let mut shuffled = items.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(shuffled.chunks(items.len() / k).map(<[I]>::to_vec).collect())
}

/// Why an image is being read.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Access {
    Training { fold: usize },
    Evaluation { fold: usize },
}

/// Indexed source of ground-truth cubes.
pub trait Dataset: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn id(&self, index: usize) -> String;

    fn load(&self, index: usize, access: Access) -> Result<SpectralCube<f32>>;
}

#[derive(Clone, Debug, Default)]
pub struct InMemoryDataset {
    pub items: Vec<(String, SpectralCube<f32>)>,
}

impl Dataset for InMemoryDataset {
    fn len(&self) -> usize {
        self.items.len()
    }

    fn id(&self, index: usize) -> String {
        self.items[index].0.clone()
    }

    fn load(&self, index: usize, _access: Access) -> Result<SpectralCube<f32>> {
        self.items
            .get(index)
            .map(|(_, c)| c.clone())
            .ok_or_else(|| Error::Bounds(format!("dataset has no image {index}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossvalRow {
    pub id: String,
    /// Fold in which this image was held out.
    pub fold: usize,
    pub bilinear_db: f64,
    pub refined_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossvalReport {
    /// One row per image, in dataset order.
    pub rows: Vec<CrossvalRow>,
    pub mean_bilinear_db: f64,
    pub mean_refined_db: f64,
    /// Per-fold training loss history.
    pub fold_losses: Vec<Vec<f64>>,
}

/// Bilinear initial cube for a ground-truth image.
pub fn bilinear_initial(truth: &SpectralCube<f32>, pattern: &MsfaPattern) -> Result<SpectralCube<f32>> {
    bilinear_demosaic(&apply_msfa(truth, pattern)?)
}

/// Training pairs from a full image: bilinear on the whole image, then both
/// the initial and the ground-truth cubes are split on the same grid.
pub fn training_pairs(
    truth: &SpectralCube<f32>,
    pattern: &MsfaPattern,
    grid: (usize, usize),
) -> Result<Vec<TrainPair<f32>>> {
    let initial = bilinear_initial(truth, pattern)?;
    initial
        .tile(grid.0, grid.1)?
        .into_iter()
        .zip(truth.tile(grid.0, grid.1)?)
        .map(|(i, t)| TrainPair::new(i, t))
        .collect()
}

/// Runs `plan.folds`-fold cross-validation over `dataset`, scoring with
/// whole-cube PSNR.
pub fn crossval_run(
    dataset: &dyn Dataset,
    pattern: &MsfaPattern,
    config: &NetworkConfig,
    plan: &TrainPlan,
) -> Result<CrossvalReport> {
    crossval_run_with(dataset, pattern, config, plan, PsnrConvention::WholeCube)
}

pub fn crossval_run_with(
    dataset: &dyn Dataset,
    pattern: &MsfaPattern,
    config: &NetworkConfig,
    plan: &TrainPlan,
    metric: PsnrConvention,
) -> Result<CrossvalReport> {
    if dataset.is_empty() {
        return Err(Error::Config("cross-validation needs at least one image".into()));
    }
    let indices: Vec<usize> = (0..dataset.len()).collect();
    let folds = make_folds(&indices, plan.folds, plan.seed)?;
    let mut rows: Vec<Option<CrossvalRow>> = vec![None; dataset.len()];
    let mut fold_losses = Vec::with_capacity(folds.len());

    for (fold, held_out) in folds.iter().enumerate() {
        let mut pairs = Vec::new();
        for (other, group) in folds.iter().enumerate() {
            if other == fold {
                continue;
            }
            for &i in group {
                let truth = dataset.load(i, Access::Training { fold })?;
                pairs.extend(training_pairs(&truth, pattern, plan.sub_grid)?);
            }
        }

        let fold_seed = plan.seed.wrapping_add(fold as u64 + 1);
        let mut params = init_params::<f32>(config, fold_seed)?;
        let mut state = AdamState::for_params(&params, AdamHyper::default());
        let fold_plan = TrainPlan { seed: fold_seed, ..plan.clone() };
        let report = fit(config, &mut params, &mut state, &pairs, &fold_plan, |_, _| {})?;
        fold_losses.push(report.epoch_losses);

        for &i in held_out {
            let truth = dataset.load(i, Access::Evaluation { fold })?;
            let initial = bilinear_initial(&truth, pattern)?;
            let refined = network_forward(config, &params, &initial)?.refined;
            rows[i] = Some(CrossvalRow {
                id: dataset.id(i),
                fold,
                bilinear_db: metric.evaluate(&truth, &initial)?,
                refined_db: metric.evaluate(&truth, &refined)?,
            });
        }
    }

    let rows: Vec<CrossvalRow> = rows.into_iter().map(|r| r.expect("folds cover every image")).collect();
    let n = rows.len() as f64;
    Ok(CrossvalReport {
        mean_bilinear_db: rows.iter().map(|r| r.bilinear_db).sum::<f64>() / n,
        mean_refined_db: rows.iter().map(|r| r.refined_db).sum::<f64>() / n,
        rows,
        fold_losses,
    })
}
