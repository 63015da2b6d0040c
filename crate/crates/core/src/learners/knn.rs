use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::scalar::Scalar;

/// Euclidean k-nearest-neighbour vote over the stored training set.
///
/// Every training point at the k-th smallest distance joins the vote, so the
/// result does not depend on training row order. A tied vote goes to label 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KnnModel<T> {
    pub k: usize,
    train: Dataset<T>,
}

pub fn knn_train<T: Scalar>(data: &Dataset<T>, k: usize) -> Result<KnnModel<T>> {
    if k == 0 || k > data.n_rows() {
        return Err(Error::param("k", format!("must be in 1..={}, got {k}", data.n_rows())));
    }
    Ok(KnnModel { k, train: data.clone() })
}

#[inline]
pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

impl<T: Scalar> KnnModel<T> {
    pub fn n_features(&self) -> usize {
        self.train.n_features()
    }

    pub fn training_set(&self) -> &Dataset<T> {
        &self.train
    }

    fn vote(&self, query: &[T], dist: &mut [T], scratch: &mut Vec<T>) -> Label {
        for (i, d) in dist.iter_mut().enumerate() {
            *d = squared_distance(query, self.train.row(i));
        }
        scratch.clear();
        scratch.extend_from_slice(dist);
        let (_, kth, _) = scratch.select_nth_unstable_by(self.k - 1, |a, b| a.partial_cmp(b).expect("finite"));
        let radius = *kth;
        let mut votes = [0usize; 2];
        for (d, &t) in dist.iter().zip(self.train.targets()) {
            if *d <= radius {
                votes[t as usize] += 1;
            }
        }
        Label::from(votes[1] > votes[0])
    }

    pub fn predict_row(&self, query: &[T]) -> Label {
        let mut dist = vec![T::zero(); self.train.n_rows()];
        self.vote(query, &mut dist, &mut Vec::new())
    }

    pub(crate) fn predict_rows<'a>(&self, rows: impl Iterator<Item = &'a [T]>) -> Vec<Label> {
        let mut dist = vec![T::zero(); self.train.n_rows()];
        let mut scratch = Vec::with_capacity(self.train.n_rows());
        rows.map(|q| self.vote(q, &mut dist, &mut scratch)).collect()
    }
}
