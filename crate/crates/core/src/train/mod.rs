//! Loss, optimizer, training loop and cross-validation driver.

mod adam;
mod crossval;
mod fit;
mod loss;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use crossval::{
    bilinear_initial, crossval_run, crossval_run_with, make_folds, training_pairs, Access, CrossvalReport, CrossvalRow,
    Dataset, InMemoryDataset,
};
pub use fit::{batch_gradient, evaluate_loss, fit, train_epoch, Budget, FitReport, TrainPair, TrainPlan};
pub use loss::mse_loss;
