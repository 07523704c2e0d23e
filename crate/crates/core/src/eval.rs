//! KNN classification accuracy on embeddings.
//!
//! Ties are resolved deterministically: equal distances favor the lower
//! training index, equal vote counts favor the smaller label.

use std::collections::BTreeMap;

use ndarray::{ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random permutation split with `round(frac · n)` training indices.
pub fn train_test_split(n: usize, frac: f64, seed: u64) -> Result<SplitIndices> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 items, got {n}")));
    }
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction must lie in (0, 1), got {frac}")));
    }
    let n_train = (frac * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {frac} of {n} items leaves an empty side"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::init_source(seed));
    let test = perm.split_off(n_train);
    Ok(SplitIndices { train: perm, test })
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Training indices sorted by distance to `query`, ties by index.
fn neighbor_order(train_x: ArrayView2<'_, f64>, query: ArrayView1<'_, f64>) -> Vec<usize> {
    let d: Vec<f64> = train_x.rows().into_iter().map(|r| sq_dist(r, query)).collect();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

fn vote(labels: impl Iterator<Item = u32>) -> u32 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    // BTreeMap iterates labels ascending; keep the first maximum.
    let mut best = (0, 0);
    for (label, c) in counts {
        if c > best.1 {
            best = (label, c);
        }
    }
    best.0
}

/// Majority label among the `k` nearest training points.
pub fn knn_predict(
    train_x: ArrayView2<'_, f64>,
    train_y: &[u32],
    query: ArrayView1<'_, f64>,
    k: usize,
) -> Result<u32> {
    check_training(train_x, train_y, query.len())?;
    if k == 0 || k > train_y.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            train_y.len()
        )));
    }
    let order = neighbor_order(train_x, query);
    Ok(vote(order[..k].iter().map(|&i| train_y[i])))
}

fn check_training(train_x: ArrayView2<'_, f64>, train_y: &[u32], dims: usize) -> Result<()> {
    if train_y.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if train_x.nrows() != train_y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} training vectors but {} labels",
            train_x.nrows(),
            train_y.len()
        )));
    }
    if train_x.ncols() != dims {
        return Err(Error::InvalidArgument(format!(
            "query has {dims} dimensions, training data {}",
            train_x.ncols()
        )));
    }
    Ok(())
}

/// Fraction of positions where `pred` equals `truth`.
pub fn accuracy(pred: &[u32], truth: &[u32]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("no predictions".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Held-out accuracy for every `k` in `ks` on one split.
pub fn evaluate_knn(
    x: ArrayView2<'_, f64>,
    labels: &[u32],
    split: &SplitIndices,
    ks: &[usize],
) -> Result<Vec<(usize, f64)>> {
    if x.nrows() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    if let Some(&i) = split.train.iter().chain(&split.test).find(|&&i| i >= labels.len()) {
        return Err(Error::InvalidArgument(format!("split index {i} out of range")));
    }
    let train_x = x.select(Axis(0), &split.train);
    let train_y: Vec<u32> = split.train.iter().map(|&i| labels[i]).collect();
    let truth: Vec<u32> = split.test.iter().map(|&i| labels[i]).collect();
    check_training(train_x.view(), &train_y, x.ncols())?;
    if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > train_y.len()) {
        return Err(Error::InvalidArgument(format!(
            "k must lie in 1..={}, got {k}",
            train_y.len()
        )));
    }
    let predictions: Vec<Vec<u32>> = split
        .test
        .par_iter()
        .map(|&q| {
            let order = neighbor_order(train_x.view(), x.row(q));
            ks.iter()
                .map(|&k| vote(order[..k].iter().map(|&i| train_y[i])))
                .collect()
        })
        .collect();
    ks.iter()
        .enumerate()
        .map(|(col, &k)| {
            let pred: Vec<u32> = predictions.iter().map(|p| p[col]).collect();
            Ok((k, accuracy(&pred, &truth)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn split_sizes() {
        let s = train_test_split(3000, 0.9, 1).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (2700, 300));
        let s = train_test_split(10, 0.5, 2).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (5, 5));
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(s, train_test_split(10, 0.5, 2).unwrap());
    }

    #[test]
    fn degenerate_splits() {
        assert!(train_test_split(1, 0.5, 0).is_err());
        assert!(train_test_split(10, 0.0, 0).is_err());
        assert!(train_test_split(10, 0.01, 0).is_err());
        assert!(train_test_split(10, 0.99, 0).is_err());
    }

    #[test]
    fn nearest_point_label() {
        let x = array![[0.0, 0.0], [5.0, 5.0], [9.0, 1.0]];
        let y = [4, 7, 2];
        assert_eq!(knn_predict(x.view(), &y, x.row(1), 1).unwrap(), 7);
    }

    #[test]
    fn majority_and_vote_ties() {
        let x = array![[0.0], [1.0], [2.0], [10.0]];
        assert_eq!(knn_predict(x.view(), &[1, 1, 9, 9], array![0.5].view(), 3).unwrap(), 1);
        // 1 vs 9 tie with k=2 goes to the smaller label.
        assert_eq!(knn_predict(x.view(), &[9, 1, 9, 1], array![0.5].view(), 2).unwrap(), 1);
        assert!(knn_predict(x.view(), &[1, 1, 9, 9], array![0.5].view(), 5).is_err());
        let empty = Array2::<f64>::zeros((0, 1));
        assert!(knn_predict(empty.view(), &[], array![0.5].view(), 1).is_err());
    }

    #[test]
    fn distance_ties_use_lower_index() {
        let x = array![[-1.0], [1.0]];
        assert_eq!(knn_predict(x.view(), &[3, 5], array![0.0].view(), 1).unwrap(), 3);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 2, 3, 4], &[1, 2, 3, 0]).unwrap(), 0.75);
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn separable_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let n = 200;
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::new();
        for i in 0..n {
            let c = (i % 2) as u32;
            let centre = if c == 0 { -10.0 } else { 10.0 };
            x[[i, 0]] = centre + noise.sample(&mut rng);
            x[[i, 1]] = noise.sample(&mut rng);
            y.push(c);
        }
        let split = train_test_split(n, 0.8, 3).unwrap();
        let res = evaluate_knn(x.view(), &y, &split, &[5]).unwrap();
        assert_eq!(res, vec![(5, 1.0)]);
    }

    #[test]
    fn full_k_predicts_majority() {
        let x = array![[0.0], [1.0], [2.0], [3.0], [4.0]];
        let y = [2, 8, 8, 2, 8];
        for q in [-5.0, 0.0, 2.5, 100.0] {
            assert_eq!(knn_predict(x.view(), &y, array![q].view(), 5).unwrap(), 8);
        }
    }
}
