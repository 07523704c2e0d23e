use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;

/// Points in ambient space with one auxiliary value per point (the manifold
/// parameter for synthetic data, the label for image data).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Array2<f64>,
    pub aux: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>, aux: Vec<f64>) -> Result<Self> {
        if points.nrows() != aux.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} aux values",
                points.nrows(),
                aux.len()
            )));
        }
        if let Some(((i, j), v)) = points.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation {
                index: (i, j),
                reason: format!("non-finite coordinate {v}"),
            });
        }
        Ok(Self { points, aux })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }
}

/// Swiss roll: `t = 1.5π(1 + 2u)`, point `(t cos t, 21 v, t sin t)` with
/// `u, v ~ U[0, 1)`, plus isotropic Gaussian noise of std `noise`.
/// `aux` holds `t`.
pub fn generate_swissroll(n: usize, noise: f64, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidArgument("swiss roll needs at least one point".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise must be >= 0, got {noise}")));
    }
    let mut rng = rng::init_source(seed);
    let gauss = Normal::new(0.0, noise).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut points = Array2::zeros((n, 3));
    let mut aux = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let t = 1.5 * PI * (1.0 + 2.0 * u);
        let mut p = [t * t.cos(), 21.0 * v, t * t.sin()];
        if noise > 0.0 {
            p.iter_mut().for_each(|c| *c += gauss.sample(&mut rng));
        }
        for (k, c) in p.into_iter().enumerate() {
            points[[i, k]] = c;
        }
        aux.push(t);
    }
    PointCloud::new(points, aux)
}
