//! Classical (Torgerson) MDS.

use ndarray::{Array2, ArrayView2};

use super::eigen::symmetric_eig;
use crate::error::{Error, Result};
use crate::types::{Embedding, TargetMatrix};

/// Double-centered squared dissimilarities, `B = -½ H (Δ∘Δ) H`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Array2<f64>,
}

impl GramMatrix {
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

pub fn double_center(delta: &TargetMatrix) -> GramMatrix {
    let n = delta.n();
    let sq = delta.values().mapv(|v| v * v);
    let row_means: Vec<f64> = sq.rows().into_iter().map(|r| r.sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    // Δ∘Δ is symmetric, so column means equal row means.
    let values = Array2::from_shape_fn((n, n), |(i, j)| {
        -0.5 * (sq[[i, j]] - row_means[i] - row_means[j] + grand)
    });
    GramMatrix { values }
}

#[derive(Debug, Clone)]
pub struct ClassicalMds {
    pub embedding: Embedding,
    /// All eigenvalues of the Gram matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Set when one of the top-`l` eigenvalues was negative and clamped to 0.
    pub clamped: bool,
}

/// `X = V_l · diag(sqrt(max(λ, 0)))` over the top `l` eigenpairs.
pub fn classical_mds(delta: &TargetMatrix, l: usize) -> Result<ClassicalMds> {
    let n = delta.n();
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!(
            "dimension {l} must lie in 1..={n}"
        )));
    }
    let gram = double_center(delta);
    let eig = symmetric_eig(gram.values())?;
    let mut clamped = false;
    let mut coords = Array2::zeros((n, l));
    for k in 0..l {
        let lambda = eig.values[k];
        if lambda < 0.0 {
            clamped = true;
        }
        let scale = lambda.max(0.0).sqrt();
        for i in 0..n {
            coords[[i, k]] = eig.vectors[[i, k]] * scale;
        }
    }
    Ok(ClassicalMds {
        embedding: Embedding::new(coords)?,
        eigenvalues: eig.values,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stress::compute_distance_matrix;
    use crate::types::validate_target;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_gram() {
        let t = validate_target(array![[0.0, 1.0], [1.0, 0.0]].view()).unwrap();
        let b = double_center(&t);
        let want = array![[0.25, -0.25], [-0.25, 0.25]];
        for (a, w) in b.values().iter().zip(want.iter()) {
            assert!((a - w).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_dissimilarities() {
        let t = validate_target(Array2::<f64>::zeros((4, 4)).view()).unwrap();
        assert!(double_center(&t).values().iter().all(|&v| v == 0.0));
        let c = classical_mds(&t, 2).unwrap();
        assert!(c.embedding.coords().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gram_equals_inner_products_for_centered_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut x = Array2::from_shape_simple_fn((7, 3), || rng.random_range(-1.0..1.0));
        let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
        x -= &mean;
        let t = validate_target(compute_distance_matrix(x.view()).unwrap().view()).unwrap();
        let b = double_center(&t);
        let xxt = x.dot(&x.t());
        for (a, w) in b.values().iter().zip(xxt.iter()) {
            assert!((a - w).abs() < 1e-8);
        }
        for r in b.values().rows() {
            assert!(r.sum().abs() < 1e-8);
        }
    }

    #[test]
    fn two_points_one_dim() {
        let t = validate_target(array![[0.0, 1.0], [1.0, 0.0]].view()).unwrap();
        let c = classical_mds(&t, 1).unwrap();
        let x = c.embedding.coords();
        assert!((x[[0, 0]].abs() - 0.5).abs() < 1e-12);
        assert!((x[[0, 0]] + x[[1, 0]]).abs() < 1e-12);
        assert!((c.embedding.distances()[[0, 1]] - 1.0).abs() < 1e-12);
        assert!(!c.clamped);
    }

    #[test]
    fn exact_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x0 = Array2::from_shape_simple_fn((20, 3), || rng.random_range(-2.0..2.0));
        let d = compute_distance_matrix(x0.view()).unwrap();
        let t = validate_target(d.view()).unwrap();
        let c = classical_mds(&t, 3).unwrap();
        for (a, b) in c.embedding.distances().iter().zip(d.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn flags_negative_eigenvalues() {
        // Non-Euclidean dissimilarities: a violated triangle inequality.
        let t = validate_target(array![[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]].view()).unwrap();
        let c = classical_mds(&t, 3).unwrap();
        assert!(c.clamped);
        assert!(classical_mds(&t, 4).is_err());
    }
}
