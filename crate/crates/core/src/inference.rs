//! Iterative p-values, max-statistic correction, exact and naive baselines,
//! twin-correlation averaging and the heritability index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::stats::{PairedState, TwoSampleState};
use crate::walk::{run_walks, run_walks_field, FieldState, WalkPlan, WalkState};

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Large values of the statistic are evidence against the null.
    Greater,
    Less,
}

/// Whether a permuted statistic equal to the observed one counts as
/// exceeding it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Strict,
    AtLeast,
}

impl Side {
    #[inline]
    pub fn exceeds(self, permuted: f64, observed: f64, cmp: Comparison) -> bool {
        match (self, cmp) {
            (Side::Greater, Comparison::Strict) => permuted > observed,
            (Side::Greater, Comparison::AtLeast) => permuted >= observed,
            (Side::Less, Comparison::Strict) => permuted < observed,
            (Side::Less, Comparison::AtLeast) => permuted <= observed,
        }
    }
}

/// Running count of walks whose statistic is at least as extreme as the
/// observed one. Undefined (degenerate or non-finite) statistics are tallied
/// separately and do not count towards `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueAccumulator {
    pub observed: f64,
    pub side: Side,
    pub k: u64,
    pub exceed: u64,
    pub degenerate: u64,
}

impl PValueAccumulator {
    pub fn new(observed: f64, side: Side) -> Self {
        Self {
            observed,
            side,
            k: 0,
            exceed: 0,
            degenerate: 0,
        }
    }

    #[inline]
    pub fn update(&mut self, permuted: Option<f64>) {
        match permuted {
            Some(v) if v.is_finite() => {
                self.k += 1;
                if self.side.exceeds(v, self.observed, Comparison::AtLeast) {
                    self.exceed += 1;
                }
            }
            _ => self.degenerate += 1,
        }
    }

    /// `exceed / k`, or `None` before the first counted walk.
    pub fn p_value(&self) -> Option<f64> {
        (self.k > 0).then(|| self.exceed as f64 / self.k as f64)
    }

    /// `(exceed + 1) / (k + 1)`; never zero.
    pub fn p_value_add_one(&self) -> f64 {
        (self.exceed + 1) as f64 / (self.k + 1) as f64
    }

    pub fn merge(&mut self, other: &PValueAccumulator) -> Result<()> {
        if self.side != other.side || self.observed.to_bits() != other.observed.to_bits() {
            return Err(Error::Merge(format!(
                "observed/side differ: ({}, {:?}) vs ({}, {:?})",
                self.observed, self.side, other.observed, other.side
            )));
        }
        self.k += other.k;
        self.exceed += other.exceed;
        self.degenerate += other.degenerate;
        Ok(())
    }
}

/// Null distribution of the supremum and infimum of a statistic field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxStatAccumulator {
    pub vertices: usize,
    pub observed_sup: f64,
    pub observed_inf: f64,
    pub k: u64,
    pub exceed_sup: u64,
    pub exceed_inf: u64,
    pub degenerate: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf_samples: Option<Vec<f64>>,
}

fn sup_inf(field: &[Option<f64>]) -> Option<(f64, f64)> {
    field
        .iter()
        .flatten()
        .filter(|v| v.is_finite())
        .fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((hi, lo)) => Some((hi.max(v), lo.min(v))),
        })
}

impl MaxStatAccumulator {
    /// `observed` is the statistic field on the original labeling.
    pub fn new(observed: &[Option<f64>], retain: bool) -> Result<Self> {
        let (observed_sup, observed_inf) = sup_inf(observed).ok_or(Error::DegenerateObserved)?;
        Ok(Self {
            vertices: observed.len(),
            observed_sup,
            observed_inf,
            k: 0,
            exceed_sup: 0,
            exceed_inf: 0,
            degenerate: 0,
            sup_samples: retain.then(Vec::new),
            inf_samples: retain.then(Vec::new),
        })
    }

    pub fn update(&mut self, field: &[Option<f64>]) -> Result<()> {
        if field.len() != self.vertices {
            return Err(Error::FieldLength(field.len(), self.vertices));
        }
        self.record(sup_inf(field));
        Ok(())
    }

    /// Counts one walk whose field sup/inf is already known.
    #[inline]
    pub fn record(&mut self, extremes: Option<(f64, f64)>) {
        let Some((sup, inf)) = extremes else {
            self.degenerate += 1;
            return;
        };
        self.k += 1;
        if sup >= self.observed_sup {
            self.exceed_sup += 1;
        }
        if inf <= self.observed_inf {
            self.exceed_inf += 1;
        }
        if let Some(s) = self.sup_samples.as_mut() {
            s.push(sup);
        }
        if let Some(s) = self.inf_samples.as_mut() {
            s.push(inf);
        }
    }

    /// Corrected p-value of the observed supremum (alternative `Greater`).
    pub fn p_sup(&self) -> Option<f64> {
        (self.k > 0).then(|| self.exceed_sup as f64 / self.k as f64)
    }

    /// Corrected p-value of the observed infimum (alternative `Less`).
    pub fn p_inf(&self) -> Option<f64> {
        (self.k > 0).then(|| self.exceed_inf as f64 / self.k as f64)
    }

    /// Thresholds `(h_upper, h_lower)` with `P(sup > h_upper) <= alpha` and
    /// `P(inf < h_lower) <= alpha` under the retained null samples.
    ///
    /// `h_upper` is the `ceil(k(1 - alpha))`-th smallest null supremum;
    /// `h_lower` is the mirrored order statistic of the null infima, the
    /// `(k + 1 - ceil(k(1 - alpha)))`-th smallest.
    pub fn threshold_at_alpha(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let (Some(sups), Some(infs)) = (&self.sup_samples, &self.inf_samples) else {
            return Err(Error::RetentionDisabled);
        };
        let k = sups.len() as u64;
        let needed = (1.0 / alpha - 1e-9).ceil() as u64;
        if k < needed {
            return Err(Error::InsufficientSamples { needed, have: k, alpha });
        }
        let beyond = ((k as f64 * alpha) + 1e-9).floor() as u64;
        let upper_rank = (k - beyond.min(k)).max(1);
        let lower_rank = k + 1 - upper_rank;
        let mut sups = sups.clone();
        let mut infs = infs.clone();
        sups.sort_by(f64::total_cmp);
        infs.sort_by(f64::total_cmp);
        Ok((sups[(upper_rank - 1) as usize], infs[(lower_rank - 1) as usize]))
    }

    pub fn merge(&mut self, other: &MaxStatAccumulator) -> Result<()> {
        if self.vertices != other.vertices
            || self.observed_sup.to_bits() != other.observed_sup.to_bits()
            || self.observed_inf.to_bits() != other.observed_inf.to_bits()
        {
            return Err(Error::Merge("observed field differs".into()));
        }
        if self.sup_samples.is_some() != other.sup_samples.is_some() {
            return Err(Error::Merge("sample retention differs".into()));
        }
        self.k += other.k;
        self.exceed_sup += other.exceed_sup;
        self.exceed_inf += other.exceed_inf;
        self.degenerate += other.degenerate;
        if let (Some(a), Some(b)) = (self.sup_samples.as_mut(), &other.sup_samples) {
            a.extend_from_slice(b);
        }
        if let (Some(a), Some(b)) = (self.inf_samples.as_mut(), &other.inf_samples) {
            a.extend_from_slice(b);
        }
        Ok(())
    }
}

/// Configuration for walk-based inference over a statistic field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldTest {
    pub side: Side,
    /// Track the null sup/inf for family-wise corrected p-values.
    pub correction: bool,
    /// Keep every null sup/inf so thresholds can be read off.
    pub retain: bool,
    /// Worker threads; vertices are split into contiguous chunks that each
    /// replay the same walk sequence, so results do not depend on this.
    pub threads: usize,
}

impl Default for FieldTest {
    fn default() -> Self {
        Self {
            side: Side::Greater,
            correction: false,
            retain: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldTestResult {
    pub observed: Vec<Option<f64>>,
    /// `None` where the observed statistic is degenerate.
    pub pointwise: Vec<Option<PValueAccumulator>>,
    pub maxstat: Option<MaxStatAccumulator>,
    /// Per-vertex family-wise corrected p-values.
    pub corrected: Option<Vec<Option<f64>>>,
}

impl FieldTestResult {
    pub fn pointwise_p(&self) -> Vec<Option<f64>> {
        self.pointwise
            .iter()
            .map(|a| a.as_ref().and_then(PValueAccumulator::p_value))
            .collect()
    }
}

struct ChunkOutput {
    pointwise: Vec<Option<PValueAccumulator>>,
    extremes: Vec<Option<(f64, f64)>>,
}

fn run_chunk<S: WalkState + Clone>(
    vertices: &[S],
    observed: &[Option<f64>],
    plan: &WalkPlan,
    side: Side,
    track_extremes: bool,
) -> Result<ChunkOutput> {
    let mut field = FieldState::new(vertices.to_vec())?;
    let mut pointwise: Vec<_> = observed
        .iter()
        .map(|o| o.map(|v| PValueAccumulator::new(v, side)))
        .collect();
    let mut extremes = Vec::with_capacity(if track_extremes { plan.n_walks as usize } else { 0 });
    run_walks_field(&mut field, plan, |_, stats| {
        for (acc, &s) in pointwise.iter_mut().zip(stats) {
            if let Some(acc) = acc {
                acc.update(s);
            }
        }
        if track_extremes {
            extremes.push(sup_inf(stats));
        }
    })?;
    Ok(ChunkOutput { pointwise, extremes })
}

impl FieldTest {
    pub fn run<S>(&self, field: &FieldState<S>, plan: &WalkPlan) -> Result<FieldTestResult>
    where
        S: WalkState + Clone + Send + Sync,
    {
        plan.validate()?;
        let observed = field.statistics();
        let mut maxstat = if self.correction {
            Some(MaxStatAccumulator::new(&observed, self.retain)?)
        } else {
            None
        };

        let vertices = field.vertices();
        let threads = self.threads.clamp(1, vertices.len());
        let chunk = vertices.len().div_ceil(threads);
        let outputs: Vec<Result<ChunkOutput>> = if threads == 1 {
            vec![run_chunk(vertices, &observed, plan, self.side, self.correction)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = vertices
                    .chunks(chunk)
                    .zip(observed.chunks(chunk))
                    .map(|(vs, obs)| scope.spawn(move || run_chunk(vs, obs, plan, self.side, self.correction)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("field worker panicked"))
                    .collect()
            })
        };
        let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;

        let mut pointwise = Vec::with_capacity(vertices.len());
        let mut corrected = None;
        if let Some(ms) = maxstat.as_mut() {
            let mut null = Vec::with_capacity(plan.n_walks as usize);
            for w in 0..plan.n_walks as usize {
                let merged = outputs
                    .iter()
                    .fold(None, |acc: Option<(f64, f64)>, out| match (acc, out.extremes[w]) {
                        (None, e) | (e, None) => e,
                        (Some((h1, l1)), Some((h2, l2))) => Some((h1.max(h2), l1.min(l2))),
                    });
                ms.record(merged);
                if let Some((sup, inf)) = merged {
                    null.push(match self.side {
                        Side::Greater => sup,
                        Side::Less => inf,
                    });
                }
            }
            null.sort_by(f64::total_cmp);
            let k = null.len();
            corrected = Some(
                observed
                    .iter()
                    .map(|o| {
                        let obs = (*o)?;
                        if k == 0 {
                            return None;
                        }
                        let extreme = match self.side {
                            // null sups >= obs
                            Side::Greater => k - null.partition_point(|&v| v < obs),
                            // null infs <= obs
                            Side::Less => null.partition_point(|&v| v <= obs),
                        };
                        Some(extreme as f64 / k as f64)
                    })
                    .collect(),
            );
        }
        for out in outputs {
            pointwise.extend(out.pointwise);
        }
        Ok(FieldTestResult {
            observed,
            pointwise,
            maxstat,
            corrected,
        })
    }
}

/// Outcome of exhaustive enumeration over all `C(m+n, m)` group assignments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub p_value: f64,
    pub observed: f64,
    pub assignments: u64,
    pub exceeding: u64,
    /// Assignments with an undefined statistic; counted as not exceeding.
    pub degenerate: u64,
}

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

pub fn binomial(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Exact one-sided p-value: the fraction of group assignments whose
/// statistic exceeds the observed one. `Comparison::Strict` counts only
/// strictly more extreme assignments.
pub fn exact_enumeration_pvalue<F>(
    x: &[f64],
    y: &[f64],
    statistic: F,
    side: Side,
    cmp: Comparison,
    limit: u128,
) -> Result<Enumeration>
where
    F: Fn(&[f64], &[f64]) -> Option<f64>,
{
    let (m, n) = (x.len(), y.len());
    if m == 0 || n == 0 {
        return Err(Error::GroupTooSmall {
            group: if m == 0 { "x" } else { "y" },
            len: 0,
            min: 1,
        });
    }
    let count = binomial((m + n) as u64, m as u64).unwrap_or(u128::MAX);
    if count > limit {
        return Err(Error::EnumerationLimit { count, limit });
    }
    let observed = statistic(x, y)
        .filter(|v| v.is_finite())
        .ok_or(Error::DegenerateObserved)?;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let l = pooled.len();

    let mut chosen: Vec<usize> = (0..m).collect();
    let mut in_x = vec![false; l];
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(n);
    let (mut assignments, mut exceeding, mut degenerate) = (0u64, 0u64, 0u64);
    loop {
        in_x.fill(false);
        for &c in &chosen {
            in_x[c] = true;
        }
        xs.clear();
        ys.clear();
        for (k, &v) in pooled.iter().enumerate() {
            if in_x[k] {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
        assignments += 1;
        match statistic(&xs, &ys).filter(|v| v.is_finite()) {
            Some(v) if side.exceeds(v, observed, cmp) => exceeding += 1,
            Some(_) => {}
            None => degenerate += 1,
        }
        // next combination in lexicographic order
        let Some(pos) = (0..m).rev().find(|&p| chosen[p] < l - m + p) else {
            break;
        };
        chosen[pos] += 1;
        for q in pos + 1..m {
            chosen[q] = chosen[q - 1] + 1;
        }
    }
    Ok(Enumeration {
        p_value: exceeding as f64 / assignments as f64,
        observed,
        assignments,
        exceeding,
        degenerate,
    })
}

/// Standard resampling baseline: every draw shuffles the pooled sample
/// uniformly and recomputes the statistic from scratch.
#[derive(Debug, Clone)]
pub struct NaiveSampler<F> {
    pooled: Vec<f64>,
    m: usize,
    statistic: F,
    rng: RandomStream,
}

impl<F> NaiveSampler<F>
where
    F: Fn(&[f64], &[f64]) -> Option<f64>,
{
    pub fn new(x: &[f64], y: &[f64], statistic: F, seed: u64) -> Self {
        Self {
            pooled: x.iter().chain(y).copied().collect(),
            m: x.len(),
            statistic,
            rng: RandomStream::new(seed),
        }
    }

    #[inline]
    pub fn draw(&mut self) -> Option<f64> {
        self.rng.shuffle(&mut self.pooled);
        let (xs, ys) = self.pooled.split_at(self.m);
        (self.statistic)(xs, ys)
    }
}

/// Monte Carlo p-value from `n_perms` uniform resamples, using the same `>=`
/// convention as the walk accumulator.
pub fn naive_mc_pvalue<F>(
    x: &[f64],
    y: &[f64],
    statistic: F,
    side: Side,
    n_perms: u64,
    seed: u64,
) -> Result<PValueAccumulator>
where
    F: Fn(&[f64], &[f64]) -> Option<f64>,
{
    if n_perms == 0 {
        return Err(Error::InvalidPlan("n_perms must be at least 1".into()));
    }
    let observed = statistic(x, y)
        .filter(|v| v.is_finite())
        .ok_or(Error::DegenerateObserved)?;
    let mut acc = PValueAccumulator::new(observed, side);
    let mut sampler = NaiveSampler::new(x, y, statistic, seed);
    for _ in 0..n_perms {
        acc.update(sampler.draw());
    }
    Ok(acc)
}

/// Walk-based one-sided p-value for the two-sample t-statistic.
pub fn walk_pvalue(state: &TwoSampleState, side: Side, plan: &WalkPlan) -> Result<PValueAccumulator> {
    let observed = state.t_statistic().ok_or(Error::DegenerateObserved)?;
    let mut acc = PValueAccumulator::new(observed, side);
    let mut chain = state.clone();
    run_walks(&mut chain, plan, |_, t| acc.update(t))?;
    Ok(acc)
}

/// Running mean of the twin correlation over random pair flips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinAverage {
    pub mean: f64,
    pub used: u64,
    pub degenerate: u64,
    /// First checkpoint whose running mean moved less than
    /// [`TwinAverage::CONVERGENCE_TOL`] since the previous checkpoint.
    pub converged_at: Option<u64>,
    /// `(walk, running mean)` at every checkpoint.
    pub checkpoints: Vec<(u64, f64)>,
}

impl TwinAverage {
    pub const CONVERGENCE_TOL: f64 = 5e-4;
}

#[derive(Debug, Clone, Default)]
struct TwinRunner {
    total: f64,
    used: u64,
    degenerate: u64,
    converged_at: Option<u64>,
    checkpoints: Vec<(u64, f64)>,
}

impl TwinRunner {
    #[inline]
    fn observe(&mut self, k: u64, rho: Option<f64>, report_every: u64) {
        match rho {
            Some(r) => {
                self.total += r;
                self.used += 1;
            }
            None => self.degenerate += 1,
        }
        if k.is_multiple_of(report_every) && self.used > 0 {
            let mean = self.total / self.used as f64;
            if let (None, Some(&(_, prev))) = (self.converged_at, self.checkpoints.last()) {
                if (mean - prev).abs() < TwinAverage::CONVERGENCE_TOL {
                    self.converged_at = Some(k);
                }
            }
            self.checkpoints.push((k, mean));
        }
    }

    fn finish(self) -> Result<TwinAverage> {
        if self.used == 0 {
            return Err(Error::DegenerateObserved);
        }
        Ok(TwinAverage {
            mean: self.total / self.used as f64,
            used: self.used,
            degenerate: self.degenerate,
            converged_at: self.converged_at,
            checkpoints: self.checkpoints,
        })
    }
}

/// Averages the correlation over the configurations visited by random
/// pair flips, approximating the mean over all `2^n` twin orderings.
pub fn average_twin_correlation(state: &PairedState, plan: &WalkPlan) -> Result<TwinAverage> {
    if state.correlation().is_none() {
        return Err(Error::DegenerateObserved);
    }
    let mut chain = state.clone();
    let mut runner = TwinRunner::default();
    run_walks(&mut chain, plan, |k, r| runner.observe(k, r, plan.report_every))?;
    runner.finish()
}

/// [`average_twin_correlation`] for every vertex of a field sharing one
/// pair-flip sequence. Vertices with no defined correlation yield `None`.
pub fn average_twin_correlation_field(
    field: &FieldState<PairedState>,
    plan: &WalkPlan,
) -> Result<Vec<Option<TwinAverage>>> {
    average_twin_correlation_field_threaded(field, plan, 1)
}

/// Same as [`average_twin_correlation_field`], splitting vertices across
/// `threads` workers. Each worker replays the same flip sequence, so the
/// output does not depend on the thread count.
pub fn average_twin_correlation_field_threaded(
    field: &FieldState<PairedState>,
    plan: &WalkPlan,
    threads: usize,
) -> Result<Vec<Option<TwinAverage>>> {
    plan.validate()?;
    let run = |vertices: &[PairedState]| -> Result<Vec<Option<TwinAverage>>> {
        let mut chain = FieldState::new(vertices.to_vec())?;
        let mut runners = vec![TwinRunner::default(); vertices.len()];
        run_walks_field(&mut chain, plan, |k, stats| {
            for (r, &s) in runners.iter_mut().zip(stats) {
                r.observe(k, s, plan.report_every);
            }
        })?;
        Ok(runners.into_iter().map(|r| r.finish().ok()).collect())
    };
    let vertices = field.vertices();
    let threads = threads.clamp(1, vertices.len());
    if threads == 1 {
        return run(vertices);
    }
    let chunk = vertices.len().div_ceil(threads);
    let parts: Vec<Result<Vec<Option<TwinAverage>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = vertices.chunks(chunk).map(|vs| scope.spawn(move || run(vs))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("twin worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(vertices.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

/// Per-vertex heritability index `HI = C_MZ − C_DZ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeritabilityMap {
    pub mz: Vec<f64>,
    pub dz: Vec<f64>,
    pub hi: Vec<f64>,
}

pub fn heritability_index(mz: &[f64], dz: &[f64]) -> Result<HeritabilityMap> {
    if mz.len() != dz.len() {
        return Err(Error::LengthMismatch(mz.len(), dz.len()));
    }
    Ok(HeritabilityMap {
        mz: mz.to_vec(),
        dz: dz.to_vec(),
        hi: mz.iter().zip(dz).map(|(a, b)| a - b).collect(),
    })
}
