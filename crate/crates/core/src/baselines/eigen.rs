//! Cyclic Jacobi eigendecomposition for dense symmetric matrices.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// fraction of the full Frobenius norm.
pub const OFF_DIAGONAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: Array2<f64>,
}

/// Decomposes symmetric `b` as `V Λ Vᵀ`.
///
/// Each eigenvector is sign-normalized so its largest-magnitude component is
/// positive, which makes the output deterministic.
pub fn symmetric_eig(b: ArrayView2<'_, f64>) -> Result<SymmetricEigen> {
    let (n, m) = b.dim();
    if n != m {
        return Err(Error::InvalidArgument(format!("matrix is not square ({n}×{m})")));
    }
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in i + 1..n {
            if (b[[i, j]] - b[[j, i]]).abs() > 1e-9 * scale {
                return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut a: Vec<f64> = b.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = OFF_DIAGONAL_TOL * total;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > threshold {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &k) in order.iter().enumerate() {
        let mut pivot = 0.0_f64;
        for r in 0..n {
            let x = v[r * n + k];
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[[r, col]] = sign * v[r * n + k];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[k * n + p] = new_p;
        a[p * n + k] = new_p;
        a[k * n + q] = new_q;
        a[q * n + k] = new_q;
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity() {
        let e = symmetric_eig(Array2::<f64>::eye(3).view()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_by_two_gram() {
        let b = array![[0.25, -0.25], [-0.25, 0.25]];
        let e = symmetric_eig(b.view()).unwrap();
        assert!((e.values[0] - 0.5).abs() < 1e-12);
        assert!(e.values[1].abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = Array2::from_shape_simple_fn((8, 8), || rng.random_range(-1.0..1.0));
        let b = &m + &m.t();
        let e = symmetric_eig(b.view()).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let lam = Array2::from_diag(&ndarray::arr1(&e.values));
        let rebuilt = e.vectors.dot(&lam).dot(&e.vectors.t());
        let err = (&rebuilt - &b).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err < 1e-6, "reconstruction error {err}");
        let gram = e.vectors.t().dot(&e.vectors);
        for ((i, j), g) in gram.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-7);
        }
        for k in 0..8 {
            let v = e.vectors.column(k);
            let bv = b.dot(&v);
            for r in 0..8 {
                assert!((bv[r] - e.values[k] * v[r]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(symmetric_eig(array![[1.0, 2.0], [0.0, 1.0]].view()).is_err());
    }
}
