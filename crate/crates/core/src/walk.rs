//! Random transposition chains over one state or a field of states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{Transposition, Walk};
use crate::rng::RandomStream;
use crate::stats::{PairedState, TwoSampleState};

/// A state the chain can move with O(1) updates.
pub trait WalkState {
    type Move: Copy;

    /// Group sizes `(m, n)` in the pooled slot ordering.
    fn shape(&self) -> (usize, usize);
    fn sample_move(&self, rng: &mut RandomStream) -> Self::Move;
    fn apply_move(&mut self, mv: Self::Move);
    fn statistic(&self) -> Option<f64>;
    fn refresh(&mut self);
    /// The move as an exchange of two pooled slots.
    fn slot_transposition(&self, mv: Self::Move) -> Transposition;
}

impl WalkState for TwoSampleState {
    type Move = Walk;

    fn shape(&self) -> (usize, usize) {
        (self.m(), self.n())
    }

    #[inline]
    fn sample_move(&self, rng: &mut RandomStream) -> Walk {
        Walk::sample_unchecked(rng, self.m(), self.n())
    }

    #[inline]
    fn apply_move(&mut self, mv: Walk) {
        self.swap_unchecked(mv.i, mv.j);
    }

    #[inline]
    fn statistic(&self) -> Option<f64> {
        self.t_statistic()
    }

    fn refresh(&mut self) {
        TwoSampleState::refresh(self);
    }

    fn slot_transposition(&self, mv: Walk) -> Transposition {
        mv.as_transposition(self.m())
    }
}

impl WalkState for PairedState {
    /// Pair index.
    type Move = usize;

    fn shape(&self) -> (usize, usize) {
        (self.n(), self.n())
    }

    #[inline]
    fn sample_move(&self, rng: &mut RandomStream) -> usize {
        rng.index(self.n())
    }

    #[inline]
    fn apply_move(&mut self, pair: usize) {
        self.swap_unchecked(pair);
    }

    #[inline]
    fn statistic(&self) -> Option<f64> {
        self.correlation()
    }

    fn refresh(&mut self) {
        PairedState::refresh(self);
    }

    fn slot_transposition(&self, pair: usize) -> Transposition {
        Transposition {
            a: pair,
            b: self.n() + pair,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPlan {
    pub n_walks: u64,
    pub seed: u64,
    /// Checkpoint interval for convergence curves.
    pub report_every: u64,
    /// Unobserved walks taken before the first reported one.
    #[serde(default)]
    pub burn_in: u64,
    /// Recompute accumulators from raw values every this many walks.
    #[serde(default)]
    pub refresh_every: Option<u64>,
}

impl WalkPlan {
    pub const DEFAULT_REPORT_EVERY: u64 = 100;

    pub fn new(n_walks: u64, seed: u64) -> Self {
        Self {
            n_walks,
            seed,
            report_every: Self::DEFAULT_REPORT_EVERY,
            burn_in: 0,
            refresh_every: None,
        }
    }

    pub fn report_every(mut self, every: u64) -> Self {
        self.report_every = every;
        self
    }

    pub fn burn_in(mut self, walks: u64) -> Self {
        self.burn_in = walks;
        self
    }

    pub fn refresh_every(mut self, walks: Option<u64>) -> Self {
        self.refresh_every = walks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_walks == 0 {
            return Err(Error::InvalidPlan("n_walks must be at least 1".into()));
        }
        if self.report_every == 0 {
            return Err(Error::InvalidPlan("report_every must be at least 1".into()));
        }
        if self.refresh_every == Some(0) {
            return Err(Error::InvalidPlan("refresh_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> RandomStream {
        RandomStream::new(self.seed)
    }

    #[inline]
    fn due_refresh(&self, step: u64) -> bool {
        matches!(self.refresh_every, Some(r) if step.is_multiple_of(r))
    }
}

/// Runs `plan.n_walks` random moves on `state`, calling `observer(k, stat)`
/// after walk `k = 1..=n_walks`. The chain starts from the current labeling.
pub fn run_walks<S, F>(state: &mut S, plan: &WalkPlan, mut observer: F) -> Result<()>
where
    S: WalkState,
    F: FnMut(u64, Option<f64>),
{
    plan.validate()?;
    let mut rng = plan.rng();
    let mut step = 0u64;
    for _ in 0..plan.burn_in {
        step += 1;
        let mv = state.sample_move(&mut rng);
        state.apply_move(mv);
        if plan.due_refresh(step) {
            state.refresh();
        }
    }
    for k in 1..=plan.n_walks {
        step += 1;
        let mv = state.sample_move(&mut rng);
        state.apply_move(mv);
        if plan.due_refresh(step) {
            state.refresh();
        }
        observer(k, state.statistic());
    }
    Ok(())
}

/// Per-vertex states driven by one shared subject-level walk.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState<S> {
    vertices: Vec<S>,
    /// `slots[s]` is the original subject index now occupying pooled slot `s`;
    /// subjects `0..m` started in `x`.
    slots: Vec<usize>,
}

impl<S: WalkState> FieldState<S> {
    pub fn new(vertices: Vec<S>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::FieldLength(0, 1));
        };
        let (m, n) = first.shape();
        for (vertex, v) in vertices.iter().enumerate() {
            let (vm, vn) = v.shape();
            if (vm, vn) != (m, n) {
                return Err(Error::ShapeMismatch {
                    vertex,
                    m: vm,
                    n: vn,
                    expected_m: m,
                    expected_n: n,
                });
            }
        }
        Ok(Self {
            vertices,
            slots: (0..m + n).collect(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.vertices[0].shape()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[S] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<S> {
        self.vertices
    }

    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// Number of x-slots holding a subject that started in y.
    pub fn crossed(&self) -> usize {
        let (m, _) = self.shape();
        self.slots[..m].iter().filter(|&&s| s >= m).count()
    }

    pub fn statistics(&self) -> Vec<Option<f64>> {
        self.vertices.iter().map(S::statistic).collect()
    }

    /// Applies one random subject-level move to every vertex.
    pub fn step(&mut self, rng: &mut RandomStream) {
        let mv = self.vertices[0].sample_move(rng);
        self.vertices[0].slot_transposition(mv).apply_to(&mut self.slots);
        for v in self.vertices.iter_mut() {
            v.apply_move(mv);
        }
    }

    fn refresh(&mut self) {
        self.vertices.iter_mut().for_each(S::refresh);
    }
}

/// Field version of [`run_walks`]: every walk draws one subject-level move
/// and applies it to all vertices; `observer(k, stats)` sees all V statistics.
/// With one vertex the move sequence equals that of [`run_walks`] for the same
/// seed.
pub fn run_walks_field<S, F>(field: &mut FieldState<S>, plan: &WalkPlan, mut observer: F) -> Result<()>
where
    S: WalkState,
    F: FnMut(u64, &[Option<f64>]),
{
    plan.validate()?;
    let mut rng = plan.rng();
    let mut stats = vec![None; field.len()];
    let mut step = 0u64;
    for _ in 0..plan.burn_in {
        step += 1;
        field.step(&mut rng);
        if plan.due_refresh(step) {
            field.refresh();
        }
    }
    for k in 1..=plan.n_walks {
        step += 1;
        field.step(&mut rng);
        if plan.due_refresh(step) {
            field.refresh();
        }
        for (out, v) in stats.iter_mut().zip(&field.vertices) {
            *out = v.statistic();
        }
        observer(k, &stats);
    }
    Ok(())
}

/// Average fraction of x-slots holding y-origin elements after each walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub m: usize,
    pub n: usize,
    pub n_reps: u64,
    /// Index `w` holds the mean proportion after `w` walks; index 0 is 0.
    pub proportions: Vec<f64>,
}

/// Starts each repetition at the original labeling and applies `n_walks`
/// uniform between-group transpositions. Repetition `r` uses stream `r` of
/// `seed`.
pub fn estimate_mixing(m: usize, n: usize, n_walks: usize, n_reps: u64, seed: u64) -> Result<MixingEstimate> {
    if m == 0 || n == 0 {
        return Err(Error::GroupTooSmall {
            group: if m == 0 { "x" } else { "y" },
            len: 0,
            min: 1,
        });
    }
    if n_walks == 0 || n_reps == 0 {
        return Err(Error::InvalidPlan("n_walks and n_reps must be at least 1".into()));
    }
    let mut crossed_total = vec![0u64; n_walks + 1];
    // true = element originated in y
    let mut origin = vec![false; m + n];
    for rep in 0..n_reps {
        let mut rng = RandomStream::with_stream(seed, rep);
        origin[..m].fill(false);
        origin[m..].fill(true);
        let mut crossed = 0u64;
        for total in crossed_total.iter_mut().skip(1) {
            let w = Walk::sample_unchecked(&mut rng, m, n);
            let (a, b) = (w.i, m + w.j);
            match (origin[a], origin[b]) {
                (false, true) => crossed += 1,
                (true, false) => crossed -= 1,
                _ => {}
            }
            origin.swap(a, b);
            *total += crossed;
        }
    }
    let denom = (n_reps * m as u64) as f64;
    Ok(MixingEstimate {
        m,
        n,
        n_reps,
        proportions: crossed_total.iter().map(|&c| c as f64 / denom).collect(),
    })
}
