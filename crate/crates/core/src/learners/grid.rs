//! Exhaustive hyperparameter search scored by k-fold F1.

use serde::{Deserialize, Serialize};

use super::{Dataset, Hyperparameters};
use crate::bench::{kfold_f1, make_folds};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: Hyperparameters,
    pub fold_f1: Vec<f64>,
    /// `None` when training failed for this cell.
    pub mean_f1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    /// Index of the winning cell.
    pub best: usize,
}

impl GridResult {
    pub fn best_params(&self) -> &Hyperparameters {
        &self.cells[self.best].params
    }
}

/// KNN grid over the given neighbour counts.
pub fn knn_grid(ks: &[usize]) -> Vec<Hyperparameters> {
    ks.iter().map(|&k| Hyperparameters::Knn { k }).collect()
}

/// Evaluates every cell with stratified `folds`-fold F1 on the same fold
/// plan. The best cell has the highest mean F1; ties keep the earlier cell.
/// A cell whose training fails is recorded and skipped.
pub fn grid_search<T: Scalar>(data: &Dataset<T>, grid: &[Hyperparameters], folds: usize, seed: u64) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::param("grid", "must contain at least one cell"));
    }
    let plan = make_folds(data.targets(), folds, seed)?;
    let mut cells = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    let mut first_error = None;
    for (i, params) in grid.iter().enumerate() {
        match kfold_f1(params, data, &plan) {
            Ok(fold_f1) => {
                let mean = fold_f1.iter().sum::<f64>() / fold_f1.len() as f64;
                if best.is_none_or(|(_, b)| mean > b) {
                    best = Some((i, mean));
                }
                cells.push(GridCell { params: params.clone(), fold_f1, mean_f1: Some(mean), error: None });
            }
            Err(e) => {
                cells.push(GridCell { params: params.clone(), fold_f1: Vec::new(), mean_f1: None, error: Some(e.to_string()) });
                first_error.get_or_insert(e);
            }
        }
    }
    match best {
        Some((best, _)) => Ok(GridResult { cells, best }),
        None => Err(first_error.expect("every cell failed")),
    }
}
