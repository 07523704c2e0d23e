//! Stress objectives and their O(N) incremental evaluation.
//!
//! The optimized objective is the full double sum `Σ_i Σ_j (t_ij - d_ij)²`,
//! so every off-diagonal pair is counted twice.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::types::{Embedding, TargetMatrix};

/// Raw stress paired with the normalized Stress-1 value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressValue {
    pub raw: f64,
    pub stress1: f64,
}

/// Pairwise Euclidean distances between the rows of `coords`.
pub fn compute_distance_matrix(coords: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if let Some(((i, j), v)) = coords.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite coordinate {v} at ({i}, {j})"
        )));
    }
    let n = coords.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        let xi = coords.row(i);
        for j in i + 1..n {
            let dist = xi
                .iter()
                .zip(coords.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            d[[i, j]] = dist;
            d[[j, i]] = dist;
        }
    }
    Ok(d)
}

fn check_shape(t: &TargetMatrix, d: ArrayView2<'_, f64>) -> Result<()> {
    let n = t.n();
    if d.dim() != (n, n) {
        return Err(Error::InvalidArgument(format!(
            "shape mismatch: target {n}×{n}, distances {:?}",
            d.dim()
        )));
    }
    Ok(())
}

/// `||T - D||²_F`.
pub fn raw_stress(t: &TargetMatrix, d: ArrayView2<'_, f64>) -> Result<f64> {
    check_shape(t, d)?;
    Ok(t.values()
        .iter()
        .zip(d.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Kruskal's Stress-1: `sqrt(Σ (t_ij - d_ij)² / Σ d_ij²)`.
pub fn stress1(t: &TargetMatrix, d: ArrayView2<'_, f64>) -> Result<f64> {
    let num = raw_stress(t, d)?;
    let den: f64 = d.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return Err(Error::DivisionByZero(
            "Stress-1 of an all-zero distance matrix".into(),
        ));
    }
    Ok((num / den).sqrt())
}

pub fn stress_value(t: &TargetMatrix, d: ArrayView2<'_, f64>) -> Result<StressValue> {
    Ok(StressValue {
        raw: raw_stress(t, d)?,
        stress1: stress1(t, d)?,
    })
}

/// Stress of `emb` with point `i` moved to `candidate`, given the current
/// stress `current`. Only row/column `i` is touched, so the cost is O(N·L).
///
/// Returns the new stress and the new distance row of point `i`.
pub fn move_delta_stress(
    t: &TargetMatrix,
    emb: &Embedding,
    i: usize,
    candidate: &[f64],
    current: f64,
) -> Result<(f64, Vec<f64>)> {
    let n = emb.n();
    let l = emb.dims();
    if i >= n {
        return Err(Error::InvalidArgument(format!("point {i} out of range (N={n})")));
    }
    if candidate.len() != l {
        return Err(Error::InvalidArgument(format!(
            "candidate has {} coordinates, embedding has {l}",
            candidate.len()
        )));
    }
    if candidate.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite candidate".into()));
    }
    let coords = emb.coords_slice();
    let old_row = emb.distance_row(i);
    let t_row = t.row(i);
    let mut new_row = vec![0.0; n];
    let mut delta = 0.0;
    for j in 0..n {
        if j == i {
            continue;
        }
        let xj = &coords[j * l..(j + 1) * l];
        let d = candidate
            .iter()
            .zip(xj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        new_row[j] = d;
        let before = t_row[j] - old_row[j];
        let after = t_row[j] - d;
        delta += after * after - before * before;
    }
    Ok((current + 2.0 * delta, new_row))
}

/// Stress change from moving point `i` by `step` along axis `dim`.
///
/// Uses `d'² = d² + 2·step·(x_i,dim - x_j,dim) + step²`, which needs no loop
/// over the other coordinates. Writes the new distance row into `row`.
pub(crate) fn axis_move_delta(
    t: &TargetMatrix,
    emb: &Embedding,
    i: usize,
    dim: usize,
    step: f64,
    row: &mut [f64],
) -> f64 {
    let n = emb.n();
    let l = emb.dims();
    let coords = emb.coords_slice();
    let old_row = emb.distance_row(i);
    let t_row = t.row(i);
    let xi = coords[i * l + dim];
    let step_sq = step * step;
    let mut delta = 0.0;
    for j in 0..n {
        if j == i {
            row[j] = 0.0;
            continue;
        }
        let d = old_row[j];
        let sq = d * d + 2.0 * step * (xi - coords[j * l + dim]) + step_sq;
        let d_new = sq.max(0.0).sqrt();
        row[j] = d_new;
        let before = t_row[j] - d;
        let after = t_row[j] - d_new;
        delta += after * after - before * before;
    }
    2.0 * delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::validate_target;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn target(v: Array2<f64>) -> TargetMatrix {
        validate_target(v.view()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let d = compute_distance_matrix(array![[0.0, 0.0], [0.0, 0.0]].view()).unwrap();
        assert_eq!(d, array![[0.0, 0.0], [0.0, 0.0]]);
        let d = compute_distance_matrix(array![[0.0, 0.0], [3.0, 4.0]].view()).unwrap();
        assert_eq!(d, array![[0.0, 5.0], [5.0, 0.0]]);
        assert!(compute_distance_matrix(array![[f64::NAN, 0.0]].view()).is_err());
    }

    #[test]
    fn triangle_inequality_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Array2::from_shape_simple_fn((5, 3), || rng.random_range(-2.0..2.0));
        let d = compute_distance_matrix(x.view()).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    assert!(d[[a, c]] <= d[[a, b]] + d[[b, c]] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn raw_stress_examples() {
        let t = target(array![[0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(raw_stress(&t, t.values()).unwrap(), 0.0);
        let d = array![[0.0, 3.0], [3.0, 0.0]];
        assert_eq!(raw_stress(&t, d.view()).unwrap(), 8.0);
        assert!(raw_stress(&t, Array2::zeros((3, 3)).view()).is_err());
    }

    #[test]
    fn raw_stress_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = Array2::from_shape_simple_fn((4, 2), || rng.random::<f64>());
        let t = target(compute_distance_matrix(pts.view()).unwrap());
        let d = Array2::from_shape_simple_fn((4, 4), || rng.random::<f64>());
        let mut expected = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                expected += (t.get(i, j) - d[[i, j]]).powi(2);
            }
        }
        let got = raw_stress(&t, d.view()).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn stress1_examples() {
        let t = target(array![[0.0, 2.0], [2.0, 0.0]]);
        assert_eq!(stress1(&t, t.values()).unwrap(), 0.0);
        let d = array![[0.0, 1.0], [1.0, 0.0]];
        assert!((stress1(&t, d.view()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            stress1(&t, Array2::zeros((2, 2)).view()),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn stress1_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = Array2::from_shape_simple_fn((5, 3), || rng.random::<f64>());
        let t = target(compute_distance_matrix(pts.view()).unwrap());
        let other = Array2::from_shape_simple_fn((5, 2), || rng.random::<f64>());
        let d = compute_distance_matrix(other.view()).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..5 {
            for j in 0..5 {
                num += (t.get(i, j) - d[[i, j]]).powi(2);
                den += d[[i, j]].powi(2);
            }
        }
        let expected = (num / den).sqrt();
        let got = stress1(&t, d.view()).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn null_move_is_identity() {
        let t = target(array![[0.0, 2.0, 1.0], [2.0, 0.0, 1.5], [1.0, 1.5, 0.0]]);
        let emb = Embedding::new(array![[0.0, 0.1], [1.0, 0.0], [0.3, 0.7]]).unwrap();
        let e = raw_stress(&t, emb.distances()).unwrap();
        let here: Vec<f64> = emb.point(1).to_vec();
        let (s, row) = move_delta_stress(&t, &emb, 1, &here, e).unwrap();
        assert!((s - e).abs() <= 1e-12 * e);
        assert_eq!(row, emb.distances().row(1).to_vec());
    }

    #[test]
    fn hand_evaluated_move() {
        let t = target(array![[0.0, 2.0], [2.0, 0.0]]);
        let emb = Embedding::new(array![[0.0], [1.0]]).unwrap();
        let e = raw_stress(&t, emb.distances()).unwrap();
        assert_eq!(e, 2.0);
        let (s, row) = move_delta_stress(&t, &emb, 0, &[-1.0], e).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(row, vec![0.0, 2.0]);
        assert!(move_delta_stress(&t, &emb, 2, &[0.0], e).is_err());
    }

    #[test]
    fn incremental_matches_full_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let n = 20;
        let pts = Array2::from_shape_simple_fn((n, 4), || rng.random::<f64>() * 3.0);
        let t = target(compute_distance_matrix(pts.view()).unwrap());
        let x = Array2::from_shape_simple_fn((n, 2), || rng.random::<f64>());
        let emb = Embedding::new(x.clone()).unwrap();
        let e = raw_stress(&t, emb.distances()).unwrap();
        for _ in 0..50 {
            let i = rng.random_range(0..n);
            let cand: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (s, _) = move_delta_stress(&t, &emb, i, &cand, e).unwrap();
            let mut moved = x.clone();
            moved.row_mut(i).assign(&ndarray::arr1(&cand));
            let full = raw_stress(&t, compute_distance_matrix(moved.view()).unwrap().view()).unwrap();
            assert!((s - full).abs() <= 1e-9 * full, "{s} vs {full}");
        }
    }

    #[test]
    fn axis_fast_path_matches_general() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 15;
        let pts = Array2::from_shape_simple_fn((n, 3), || rng.random::<f64>() * 3.0);
        let t = target(compute_distance_matrix(pts.view()).unwrap());
        let emb = Embedding::new(Array2::from_shape_simple_fn((n, 3), || rng.random::<f64>())).unwrap();
        let e = raw_stress(&t, emb.distances()).unwrap();
        let mut row = vec![0.0; n];
        for i in 0..n {
            for dim in 0..3 {
                for step in [0.25, -0.25, 2.0, -3.0] {
                    let delta = axis_move_delta(&t, &emb, i, dim, step, &mut row);
                    let mut cand = emb.point(i).to_vec();
                    cand[dim] += step;
                    let (s, expected_row) = move_delta_stress(&t, &emb, i, &cand, e).unwrap();
                    assert!((e + delta - s).abs() <= 1e-10 * s);
                    for (a, b) in row.iter().zip(&expected_row) {
                        assert!((a - b).abs() <= 1e-10 * (1.0 + b));
                    }
                }
            }
        }
    }
}
