use ndarray::{Array2, Axis};

use crate::error::{Error, Result};
use crate::rng;

/// Feature vectors with one class label each.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub vectors: Array2<f64>,
    pub labels: Vec<u32>,
}

impl LabeledDataset {
    pub fn new(vectors: Array2<f64>, labels: Vec<u32>) -> Result<Self> {
        if vectors.nrows() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors but {} labels",
                vectors.nrows(),
                labels.len()
            )));
        }
        Ok(Self { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            vectors: self.vectors.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Uniformly samples `count` items whose label is in `classes`, without
/// replacement. The chosen items keep their original relative order.
pub fn subsample(
    ds: &LabeledDataset,
    classes: &[u32],
    count: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let pool: Vec<usize> = (0..ds.len())
        .filter(|&i| classes.contains(&ds.labels[i]))
        .collect();
    if count > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} items but only {} match classes {classes:?}",
            pool.len()
        )));
    }
    let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng::init_source(seed), pool.len(), count)
        .into_iter()
        .map(|k| pool[k])
        .collect();
    picked.sort_unstable();
    Ok(ds.select(&picked))
}
