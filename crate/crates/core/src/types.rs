//! Value types shared across the optimizers.

use std::fmt;

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::stress::compute_distance_matrix;

/// Absolute asymmetry accepted when ingesting a dissimilarity matrix.
pub const INGEST_SYMMETRY_TOL: f64 = 1e-6;

/// Tolerance for internal consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Symmetric, zero-diagonal, non-negative dissimilarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetMatrix {
    values: Array2<f64>,
}

impl TargetMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }
}

/// Validates and symmetrizes a raw dissimilarity matrix.
///
/// Entries must be finite and non-negative, and `|t_ij - t_ji|` may not
/// exceed [`INGEST_SYMMETRY_TOL`]. Accepted input is replaced by `(T + Tᵀ)/2`
/// with the diagonal forced to zero.
pub fn validate_target(values: ArrayView2<'_, f64>) -> Result<TargetMatrix> {
    let (rows, cols) = values.dim();
    if rows != cols {
        return Err(Error::Validation {
            index: (rows, cols),
            reason: format!("matrix is not square ({rows}×{cols})"),
        });
    }
    for ((i, j), &v) in values.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::Validation {
                index: (i, j),
                reason: format!("non-finite entry {v}"),
            });
        }
        if v < 0.0 {
            return Err(Error::Validation {
                index: (i, j),
                reason: format!("negative entry {v}"),
            });
        }
    }
    for i in 0..rows {
        if values[[i, i]].abs() > INGEST_SYMMETRY_TOL {
            return Err(Error::Validation {
                index: (i, i),
                reason: format!("non-zero diagonal {}", values[[i, i]]),
            });
        }
        for j in i + 1..rows {
            let gap = (values[[i, j]] - values[[j, i]]).abs();
            if gap > INGEST_SYMMETRY_TOL {
                return Err(Error::Validation {
                    index: (i, j),
                    reason: format!("asymmetric by {gap:e}"),
                });
            }
        }
    }
    let mut sym = Array2::zeros((rows, rows));
    for i in 0..rows {
        for j in i + 1..rows {
            let v = 0.5 * (values[[i, j]] + values[[j, i]]);
            sym[[i, j]] = v;
            sym[[j, i]] = v;
        }
    }
    Ok(TargetMatrix { values: sym })
}

/// Points in `R^L` together with their cached Euclidean distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Array2<f64>,
    distances: Array2<f64>,
}

impl Embedding {
    pub fn new(coords: Array2<f64>) -> Result<Self> {
        let distances = compute_distance_matrix(coords.view())?;
        Ok(Self { coords, distances })
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dims(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> ArrayView2<'_, f64> {
        self.coords.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.coords.row(i)
    }

    pub fn distances(&self) -> ArrayView2<'_, f64> {
        self.distances.view()
    }

    pub(crate) fn coords_slice(&self) -> &[f64] {
        self.coords.as_slice().expect("standard layout")
    }

    pub(crate) fn distance_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.distances.as_slice().expect("standard layout")[i * n..(i + 1) * n]
    }

    /// Replaces point `i` and its distance row/column.
    pub(crate) fn replace_point(&mut self, i: usize, coords: &[f64], row: &[f64]) {
        self.coords.row_mut(i).iter_mut().zip(coords).for_each(|(c, &v)| *c = v);
        for (j, &d) in row.iter().enumerate() {
            self.distances[[i, j]] = d;
            self.distances[[j, i]] = d;
        }
        self.distances[[i, i]] = 0.0;
    }

    pub fn into_coords(self) -> Array2<f64> {
        self.coords
    }
}

/// Direction of a coordinate step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Per-point, per-signed-coordinate evaluation probabilities (`N × 2L`).
///
/// Column `s` holds the probability of the `+e_s` step, column `s + L` the
/// probability of `-e_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    dims: usize,
    probs: Array2<f64>,
}

impl ProbabilityMatrix {
    pub fn filled(n: usize, dims: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            dims,
            probs: Array2::from_elem((n, 2 * dims), p),
        })
    }

    pub fn from_array(dims: usize, probs: Array2<f64>) -> Result<Self> {
        if probs.ncols() != 2 * dims {
            return Err(Error::InvalidArgument(format!(
                "expected {} columns, got {}",
                2 * dims,
                probs.ncols()
            )));
        }
        if let Some(((i, j), p)) = probs
            .indexed_iter()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::Validation {
                index: (i, j),
                reason: format!("probability {p} outside [0, 1]"),
            });
        }
        Ok(Self { dims, probs })
    }

    pub fn n(&self) -> usize {
        self.probs.nrows()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn column(&self, dim: usize, sign: Sign) -> usize {
        match sign {
            Sign::Plus => dim,
            Sign::Minus => dim + self.dims,
        }
    }

    pub fn signed_coordinate(&self, column: usize) -> (usize, Sign) {
        if column < self.dims {
            (column, Sign::Plus)
        } else {
            (column - self.dims, Sign::Minus)
        }
    }

    pub fn get(&self, i: usize, dim: usize, sign: Sign) -> f64 {
        self.probs[[i, self.column(dim, sign)]]
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.probs.view()
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> ndarray::ArrayViewMut1<'_, f64> {
        self.probs.row_mut(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    FullSearch,
    Randomized,
    Bootstrapped,
}

impl Variant {
    pub fn short_name(self) -> &'static str {
        match self {
            Variant::FullSearch => "fs",
            Variant::Randomized => "rn",
            Variant::Bootstrapped => "bs",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fs" | "full" | "fullsearch" | "full-search" => Ok(Variant::FullSearch),
            "rn" | "randomized" => Ok(Variant::Randomized),
            "bs" | "bootstrapped" => Ok(Variant::Bootstrapped),
            other => Err(Error::InvalidArgument(format!("unknown variant {other:?}"))),
        }
    }
}

/// Hyperparameters of one coordinate-search run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub variant: Variant,
    pub dims: usize,
    pub r0: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub p_init: f64,
    pub p_a: f64,
    pub p_th: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Sampling stream; jobs sharing `seed` share their initial embedding.
    pub stream: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.dims == 0 {
            return bad("target dimension must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.r0 > self.delta && self.r0.is_finite()) {
            return bad(format!(
                "need r0 > delta > 0, got r0={} delta={}",
                self.r0, self.delta
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.p_init > 0.0 && self.p_init <= 1.0) {
            return bad(format!("p_init must lie in (0, 1], got {}", self.p_init));
        }
        if !(0.0..=1.0).contains(&self.p_a) {
            return bad(format!("p_a must lie in [0, 1], got {}", self.p_a));
        }
        if !(0.0..=1.0).contains(&self.p_th) {
            return bad(format!("p_th must lie in [0, 1], got {}", self.p_th));
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        match self.variant {
            Variant::FullSearch if self.p_init != 1.0 || self.p_a != 0.0 => bad(format!(
                "full search requires p_init=1 and p_a=0, got p_init={} p_a={}",
                self.p_init, self.p_a
            )),
            Variant::Randomized if self.p_a != 0.0 => {
                bad(format!("randomized search requires p_a=0, got {}", self.p_a))
            }
            Variant::Randomized if self.p_init >= 1.0 => bad(format!(
                "randomized search requires p_init < 1, got {}",
                self.p_init
            )),
            Variant::Bootstrapped if self.p_a <= 0.0 => {
                bad(format!("bootstrapped search requires p_a > 0, got {}", self.p_a))
            }
            Variant::Bootstrapped if self.p_th >= self.p_init => bad(format!(
                "bootstrapped search requires p_th < p_init, got p_th={} p_init={}",
                self.p_th, self.p_init
            )),
            _ => Ok(()),
        }
    }
}

/// Evolving optimizer state.
#[derive(Debug, Clone)]
pub struct RunState {
    pub epoch: usize,
    pub radius: f64,
    pub halvings: u32,
    pub stress: f64,
    /// Stress at the start of the previous epoch (`+∞` before the first).
    pub prev_stress: f64,
    pub evals: u64,
    pub(crate) rng: RandomSource,
}

impl RunState {
    pub fn rng(&mut self) -> &mut RandomSource {
        &mut self.rng
    }
}

/// One row of an optimizer trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub epoch: usize,
    pub stress: f64,
    pub radius: f64,
    pub evals: u64,
    pub elapsed_ms: f64,
}
