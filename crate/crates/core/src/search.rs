//! Probabilistic coordinate search for metric MDS.
//!
//! Each epoch visits the points in ascending order. For every point a random
//! subset of the `2L` signed axis steps of the current radius is drawn from
//! the point's row of the probability matrix, all drawn steps are evaluated,
//! and the point takes the one with the lowest stress (or stays put when no
//! step strictly improves). The bootstrapped variant then shifts probability
//! mass towards the winning step. When an epoch improves the stress by no
//! more than `epsilon` relative, the radius is halved before the next one;
//! the run ends once the radius drops to `delta`.
//!
//! Full search and randomized search are the same loop with a frozen
//! probability matrix (all ones, or a constant `p_init < 1`).

use std::time::Instant;

use crate::error::{Error, Result};
use crate::rng::{self, RandomSource};
use crate::stress::{axis_move_delta, raw_stress};
use crate::types::{
    Embedding, ProbabilityMatrix, RunConfig, RunState, Sign, TargetMatrix, TraceRecord, Variant,
    CONSISTENCY_TOL,
};

pub const DEFAULT_R0: f64 = 5.0;
pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_DELTA: f64 = 1e-3;
pub const DEFAULT_MAX_EPOCHS: usize = 10_000;
/// Probabilities used by the randomized and bootstrapped variants when the
/// caller gives none.
pub const DEFAULT_P_INIT: f64 = 0.7;
pub const DEFAULT_P_A: f64 = 0.05;
pub const DEFAULT_P_TH: f64 = 0.2;

/// A signed axis step of a given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateStep {
    pub dim: usize,
    pub sign: Sign,
    pub radius: f64,
}

impl CandidateStep {
    /// Signed displacement along `dim`.
    pub fn offset(&self) -> f64 {
        self.sign.factor() * self.radius
    }
}

/// Result of the greedy move for one point. `chosen == None` is the zero step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveOutcome {
    pub chosen: Option<CandidateStep>,
    pub new_stress: f64,
    pub evaluated: usize,
}

/// Caller-supplied values layered over the variant defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub r0: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub p_init: Option<f64>,
    pub p_a: Option<f64>,
    pub p_th: Option<f64>,
    pub max_epochs: Option<usize>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
}

/// Resolves a full configuration for `variant`.
///
/// Full search pins `p_init = 1, p_a = 0`; randomized search pins `p_a = 0`.
/// Overrides that contradict those pins are rejected rather than ignored.
pub fn config_for_variant(
    variant: Variant,
    dims: usize,
    overrides: &ConfigOverrides,
) -> Result<RunConfig> {
    let (p_init, p_a, p_th) = match variant {
        Variant::FullSearch => (1.0, 0.0, overrides.p_th.unwrap_or(0.0)),
        Variant::Randomized => (
            overrides.p_init.unwrap_or(DEFAULT_P_INIT),
            0.0,
            overrides.p_th.unwrap_or(0.0),
        ),
        Variant::Bootstrapped => (
            overrides.p_init.unwrap_or(DEFAULT_P_INIT),
            overrides.p_a.unwrap_or(DEFAULT_P_A),
            overrides.p_th.unwrap_or(DEFAULT_P_TH),
        ),
    };
    if let Some(p) = overrides.p_init {
        if p != p_init {
            return Err(Error::InvalidConfig(format!(
                "{variant} search fixes p_init={p_init}, got {p}"
            )));
        }
    }
    if let Some(p) = overrides.p_a {
        if p != p_a {
            return Err(Error::InvalidConfig(format!(
                "{variant} search fixes p_a={p_a}, got {p}"
            )));
        }
    }
    let config = RunConfig {
        variant,
        dims,
        r0: overrides.r0.unwrap_or(DEFAULT_R0),
        epsilon: overrides.epsilon.unwrap_or(DEFAULT_EPSILON),
        delta: overrides.delta.unwrap_or(DEFAULT_DELTA),
        p_init,
        p_a,
        p_th,
        max_epochs: overrides.max_epochs.unwrap_or(DEFAULT_MAX_EPOCHS),
        seed: overrides.seed.unwrap_or(0),
        stream: overrides.stream.unwrap_or(0),
    };
    config.validate()?;
    Ok(config)
}

/// Draws the signed steps to evaluate for point `i`.
///
/// One Bernoulli trial per signed coordinate, in the order
/// `+0, -0, +1, -1, …`; the returned steps keep that order.
pub fn search_coordinates(
    radius: f64,
    i: usize,
    probs: &ProbabilityMatrix,
    rng: &mut RandomSource,
) -> Result<Vec<CandidateStep>> {
    let mut out = Vec::with_capacity(2 * probs.dims());
    search_coordinates_into(radius, i, probs, rng, &mut out)?;
    Ok(out)
}

fn search_coordinates_into(
    radius: f64,
    i: usize,
    probs: &ProbabilityMatrix,
    rng: &mut RandomSource,
    out: &mut Vec<CandidateStep>,
) -> Result<()> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    if i >= probs.n() {
        return Err(Error::InvalidArgument(format!(
            "point {i} out of range (N={})",
            probs.n()
        )));
    }
    out.clear();
    for dim in 0..probs.dims() {
        for sign in [Sign::Plus, Sign::Minus] {
            if rng::bernoulli(probs.get(i, dim, sign), rng)? {
                out.push(CandidateStep { dim, sign, radius });
            }
        }
    }
    Ok(())
}

/// Scratch rows reused across point moves.
#[derive(Debug, Default)]
struct MoveScratch {
    trial: Vec<f64>,
    best: Vec<f64>,
    coords: Vec<f64>,
}

/// Evaluates `candidates` for point `i` and applies the best strict
/// improvement over `stress` to `emb`.
///
/// `stress` must be the raw stress of `emb` against `t`; a stale value is
/// reported as [`Error::Consistency`].
pub fn optimal_move(
    t: &TargetMatrix,
    emb: &mut Embedding,
    i: usize,
    candidates: &[CandidateStep],
    stress: f64,
) -> Result<MoveOutcome> {
    if t.n() != emb.n() {
        return Err(Error::InvalidArgument(format!(
            "target has {} points, embedding has {}",
            t.n(),
            emb.n()
        )));
    }
    if i >= emb.n() {
        return Err(Error::InvalidArgument(format!("point {i} out of range (N={})", emb.n())));
    }
    if let Some(c) = candidates.iter().find(|c| c.dim >= emb.dims() || !c.radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid candidate {c:?}")));
    }
    let actual = raw_stress(t, emb.distances())?;
    if (actual - stress).abs() > CONSISTENCY_TOL * actual.max(stress) + f64::MIN_POSITIVE {
        return Err(Error::Consistency(format!(
            "stale stress {stress}, embedding has {actual}"
        )));
    }
    Ok(apply_best_move(t, emb, i, candidates, stress, &mut MoveScratch::default()))
}

fn apply_best_move(
    t: &TargetMatrix,
    emb: &mut Embedding,
    i: usize,
    candidates: &[CandidateStep],
    stress: f64,
    scratch: &mut MoveScratch,
) -> MoveOutcome {
    let n = emb.n();
    scratch.trial.resize(n, 0.0);
    scratch.best.resize(n, 0.0);
    let mut best = MoveOutcome {
        chosen: None,
        new_stress: stress,
        evaluated: candidates.len(),
    };
    for step in candidates {
        let delta = axis_move_delta(t, emb, i, step.dim, step.offset(), &mut scratch.trial);
        let trial = stress + delta;
        if trial < best.new_stress {
            best.chosen = Some(*step);
            best.new_stress = trial;
            std::mem::swap(&mut scratch.trial, &mut scratch.best);
        }
    }
    if let Some(step) = best.chosen {
        scratch.coords.clear();
        scratch.coords.extend(emb.point(i).iter());
        scratch.coords[step.dim] += step.offset();
        // Recompute the accepted row from coordinates so cached distances
        // do not accumulate rounding from the incremental formula.
        exact_row(emb, i, &scratch.coords, &mut scratch.best);
        emb.replace_point(i, &scratch.coords, &scratch.best);
    }
    best
}

fn exact_row(emb: &Embedding, i: usize, point: &[f64], row: &mut [f64]) {
    let l = emb.dims();
    let coords = emb.coords_slice();
    for (j, d) in row.iter_mut().enumerate() {
        *d = if j == i {
            0.0
        } else {
            point
                .iter()
                .zip(&coords[j * l..(j + 1) * l])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
    }
}

/// Bootstrapped probability update for point `i`.
///
/// After a successful step the winner gains `2·p_a` (capped at 1), then every
/// signed coordinate of the row, winner included, loses `p_a` (floored at
/// `p_th`). Zero steps and `p_a = 0` leave the matrix untouched.
pub fn update_probabilities(
    probs: &mut ProbabilityMatrix,
    i: usize,
    outcome: &MoveOutcome,
    p_a: f64,
    p_th: f64,
) {
    let Some(step) = outcome.chosen else {
        return;
    };
    if p_a == 0.0 {
        return;
    }
    let winner = probs.column(step.dim, step.sign);
    let mut row = probs.row_mut(i);
    row[winner] = (row[winner] + 2.0 * p_a).min(1.0);
    row.iter_mut().for_each(|p| *p = (*p - p_a).max(p_th));
}

/// Output of a complete coordinate-search run.
#[derive(Debug, Clone)]
pub struct CsmdsRun {
    pub embedding: Embedding,
    pub trace: Vec<TraceRecord>,
    pub probabilities: ProbabilityMatrix,
    pub initial_stress: f64,
    pub stress: f64,
    pub evals: u64,
    pub halvings: u32,
    /// False when the run stopped at `max_epochs` with the radius above `delta`.
    pub converged: bool,
}

/// Stateful driver for one coordinate-search run.
///
/// [`CoordinateSearch::run`] drives the whole loop; the epoch and point
/// methods are public so callers can observe every intermediate state.
pub struct CoordinateSearch<'a> {
    target: &'a TargetMatrix,
    config: RunConfig,
    embedding: Embedding,
    probs: ProbabilityMatrix,
    state: RunState,
    initial_stress: f64,
    trace: Vec<TraceRecord>,
    clock: Instant,
    candidates: Vec<CandidateStep>,
    scratch: MoveScratch,
}

impl<'a> CoordinateSearch<'a> {
    /// Draws the initial embedding uniformly from `[0, 1)^(N×L)`.
    pub fn new(target: &'a TargetMatrix, config: RunConfig) -> Result<Self> {
        config.validate()?;
        let n = target.n();
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 points, got {n}")));
        }
        let coords = rng::uniform_coords(n, config.dims, &mut rng::init_source(config.seed));
        let embedding = Embedding::new(coords)?;
        Self::with_embedding(target, config, embedding)
    }

    /// Starts from a caller-supplied embedding.
    pub fn with_embedding(
        target: &'a TargetMatrix,
        config: RunConfig,
        embedding: Embedding,
    ) -> Result<Self> {
        config.validate()?;
        if embedding.n() != target.n() || embedding.dims() != config.dims {
            return Err(Error::InvalidArgument(format!(
                "embedding is {}×{}, expected {}×{}",
                embedding.n(),
                embedding.dims(),
                target.n(),
                config.dims
            )));
        }
        if target.n() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 points, got {}",
                target.n()
            )));
        }
        let stress = raw_stress(target, embedding.distances())?;
        let probs = ProbabilityMatrix::filled(target.n(), config.dims, config.p_init)?;
        let state = RunState {
            epoch: 0,
            radius: config.r0,
            halvings: 0,
            stress,
            prev_stress: f64::INFINITY,
            evals: 0,
            rng: rng::search_source(config.seed, config.stream),
        };
        Ok(Self {
            target,
            config,
            embedding,
            probs,
            state,
            initial_stress: stress,
            trace: Vec::new(),
            clock: Instant::now(),
            candidates: Vec::new(),
            scratch: MoveScratch::default(),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn probabilities(&self) -> &ProbabilityMatrix {
        &self.probs
    }

    pub fn state(&self) -> &RunState {
        &self.state
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Candidates drawn for the most recent point step.
    pub fn last_candidates(&self) -> &[CandidateStep] {
        &self.candidates
    }

    /// Opens the next epoch, halving the radius when the previous epoch's
    /// relative improvement was at most `epsilon`. Returns false once the
    /// radius is at or below `delta` or the epoch cap is reached.
    pub fn start_epoch(&mut self) -> bool {
        let s = &mut self.state;
        if s.radius <= self.config.delta || s.epoch >= self.config.max_epochs {
            return false;
        }
        if s.prev_stress - s.stress <= self.config.epsilon * s.stress {
            s.radius /= 2.0;
            s.halvings += 1;
        }
        s.prev_stress = s.stress;
        true
    }

    /// Samples, evaluates and applies the greedy move for point `i`.
    pub fn step_point(&mut self, i: usize) -> Result<MoveOutcome> {
        search_coordinates_into(
            self.state.radius,
            i,
            &self.probs,
            &mut self.state.rng,
            &mut self.candidates,
        )?;
        let outcome = apply_best_move(
            self.target,
            &mut self.embedding,
            i,
            &self.candidates,
            self.state.stress,
            &mut self.scratch,
        );
        self.state.evals += outcome.evaluated as u64;
        self.state.stress = outcome.new_stress;
        if self.config.variant == Variant::Bootstrapped {
            update_probabilities(&mut self.probs, i, &outcome, self.config.p_a, self.config.p_th);
        }
        Ok(outcome)
    }

    /// Closes the current epoch and appends its trace record.
    ///
    /// The stress is re-derived from the cached distances here so rounding
    /// from the per-move increments cannot accumulate across epochs.
    pub fn end_epoch(&mut self) -> TraceRecord {
        self.state.epoch += 1;
        self.state.stress = raw_stress(self.target, self.embedding.distances())
            .expect("embedding matches target");
        let record = TraceRecord {
            epoch: self.state.epoch,
            stress: self.state.stress,
            radius: self.state.radius,
            evals: self.state.evals,
            elapsed_ms: self.clock.elapsed().as_secs_f64() * 1e3,
        };
        self.trace.push(record);
        record
    }

    pub fn run_epoch(&mut self) -> Result<TraceRecord> {
        for i in 0..self.embedding.n() {
            self.step_point(i)?;
        }
        Ok(self.end_epoch())
    }

    pub fn run(mut self) -> Result<CsmdsRun> {
        while self.start_epoch() {
            self.run_epoch()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> CsmdsRun {
        CsmdsRun {
            converged: self.state.radius <= self.config.delta,
            stress: self.state.stress,
            evals: self.state.evals,
            halvings: self.state.halvings,
            initial_stress: self.initial_stress,
            embedding: self.embedding,
            trace: self.trace,
            probabilities: self.probs,
        }
    }
}

/// Runs coordinate search from a uniform random start.
pub fn run_csmds(t: &TargetMatrix, config: RunConfig) -> Result<CsmdsRun> {
    CoordinateSearch::new(t, config)?.run()
}
