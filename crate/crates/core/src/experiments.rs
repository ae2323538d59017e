//! Benchmark and simulation harness comparing walk-based resampling with
//! the standard shuffle-and-recompute permutation test.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::inference::{NaiveSampler, PValueAccumulator, Side};
use crate::rng::RandomStream;
use crate::stats::{direct_t, TwoSampleState};
use crate::walk::{run_walks, WalkPlan};

/// Statistic evaluations per second for both methods on the same data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub m: usize,
    pub n: usize,
    pub walks: u64,
    pub walk_seconds: f64,
    pub naive_perms: u64,
    pub naive_seconds: f64,
}

impl Throughput {
    pub fn walks_per_second(&self) -> f64 {
        self.walks as f64 / self.walk_seconds
    }

    pub fn naive_per_second(&self) -> f64 {
        self.naive_perms as f64 / self.naive_seconds
    }

    pub fn speedup(&self) -> f64 {
        self.walks_per_second() / self.naive_per_second()
    }

    /// Mean wall time of one walk (sample, update, statistic, accumulate).
    pub fn seconds_per_walk(&self) -> f64 {
        self.walk_seconds / self.walks as f64
    }
}

fn gaussian_groups(rng: &mut RandomStream, m: usize, n: usize, shift: f64) -> (Vec<f64>, Vec<f64>) {
    let x = (0..m).map(|_| rng.normal()).collect();
    let y = (0..n).map(|_| rng.normal() + shift).collect();
    (x, y)
}

/// Times `walks` walk-based and `naive_perms` naive statistic evaluations,
/// each feeding a p-value accumulator.
pub fn measure_throughput(m: usize, n: usize, walks: u64, naive_perms: u64, seed: u64) -> Result<Throughput> {
    if naive_perms == 0 {
        return Err(Error::InvalidPlan("naive_perms must be at least 1".into()));
    }
    let mut rng = RandomStream::new(seed);
    let (x, y) = gaussian_groups(&mut rng, m, n, 0.1);
    let state = TwoSampleState::new(x.clone(), y.clone())?;
    let observed = state.t_statistic().ok_or(Error::DegenerateObserved)?;

    let mut chain = state.clone();
    let mut acc = PValueAccumulator::new(observed, Side::Greater);
    let start = Instant::now();
    run_walks(&mut chain, &WalkPlan::new(walks, seed), |_, t| acc.update(t))?;
    let walk_seconds = start.elapsed().as_secs_f64();
    black_box(&acc);

    let mut sampler = NaiveSampler::new(&x, &y, direct_t, seed);
    let mut acc = PValueAccumulator::new(observed, Side::Greater);
    let start = Instant::now();
    for _ in 0..naive_perms {
        acc.update(sampler.draw());
    }
    let naive_seconds = start.elapsed().as_secs_f64();
    black_box(&acc);

    Ok(Throughput {
        m,
        n,
        walks,
        walk_seconds,
        naive_perms,
        naive_seconds,
    })
}

/// Simulation settings: `x ~ N(0, 1)`, `y ~ 0.1 + N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// m = n = 10
    Small,
    /// m = n = 100
    Large,
}

impl Scenario {
    pub fn group_size(self) -> usize {
        match self {
            Scenario::Small => 10,
            Scenario::Large => 100,
        }
    }

    pub const SHIFT: f64 = 0.1;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub reps: u64,
    pub seed: u64,
    /// Naive permutations per replicate; fixes the time budget.
    pub naive_perms: u64,
    /// Walks per naive permutation that fit in the same wall time. Measured
    /// when absent.
    pub speedup: Option<f64>,
    pub checkpoints: usize,
}

impl SimulationConfig {
    pub fn new(scenario: Scenario, reps: u64, seed: u64) -> Self {
        Self {
            scenario,
            reps,
            seed,
            naive_perms: match scenario {
                Scenario::Small => 10_000,
                Scenario::Large => 100_000,
            },
            speedup: None,
            checkpoints: 20,
        }
    }
}

/// Mean relative error of both estimators at matched time checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Fraction of the per-replicate time budget spent.
    pub budget_fraction: f64,
    pub naive_perms: u64,
    pub walks: u64,
    pub naive_rel_error: f64,
    pub walk_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurves {
    pub config: SimulationConfig,
    /// Speedup actually used (measured or given).
    pub speedup: f64,
    pub points: Vec<CurvePoint>,
}

impl ConvergenceCurves {
    /// Share of checkpoints where the walk estimator's mean relative error is
    /// at most the naive one.
    pub fn walk_dominance(&self) -> f64 {
        let wins = self
            .points
            .iter()
            .filter(|p| p.walk_rel_error <= p.naive_rel_error)
            .count();
        wins as f64 / self.points.len() as f64
    }
}

/// One-sided Student-t tail probability in the direction of `t`.
pub fn gaussian_ground_truth(t: f64, df: f64) -> (Side, f64) {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    if t >= 0.0 {
        (Side::Greater, 1.0 - dist.cdf(t))
    } else {
        (Side::Less, dist.cdf(t))
    }
}

/// Runs `reps` replicates: draw Gaussian data, take the Student-t tail
/// probability as ground truth, and track both estimators' relative error.
/// The walk chain gets `speedup` times as many evaluations as the naive
/// sampler, emulating equal wall time.
pub fn simulate_convergence(config: &SimulationConfig) -> Result<ConvergenceCurves> {
    if config.reps == 0 || config.naive_perms == 0 || config.checkpoints == 0 {
        return Err(Error::InvalidPlan(
            "reps, naive_perms and checkpoints must be positive".into(),
        ));
    }
    let size = config.scenario.group_size();
    let speedup = match config.speedup {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::InvalidPlan(format!("speedup must be positive, got {s}"))),
        None => measure_throughput(size, size, 2_000_000, 50_000, config.seed)?.speedup(),
    };
    let k = config.checkpoints;
    let naive_marks: Vec<u64> = (1..=k)
        .map(|c| (config.naive_perms * c as u64 / k as u64).max(1))
        .collect();
    let total_walks = (config.naive_perms as f64 * speedup).round().max(1.0) as u64;
    let walk_marks: Vec<u64> = (1..=k).map(|c| (total_walks * c as u64 / k as u64).max(1)).collect();

    let mut naive_err = vec![0.0; k];
    let mut walk_err = vec![0.0; k];
    let df = (2 * size - 2) as f64;
    for rep in 0..config.reps {
        let mut rng = RandomStream::with_stream(config.seed, rep);
        let (x, y) = gaussian_groups(&mut rng, size, size, Scenario::SHIFT);
        let state = TwoSampleState::new(x.clone(), y.clone())?;
        let observed = state.t_statistic().ok_or(Error::DegenerateObserved)?;
        let (side, truth) = gaussian_ground_truth(observed, df);

        let mut sampler = NaiveSampler::new(&x, &y, direct_t, rng.next_u64());
        let mut acc = PValueAccumulator::new(observed, side);
        let mut next = 0;
        for i in 1..=config.naive_perms {
            acc.update(sampler.draw());
            while next < k && naive_marks[next] == i {
                naive_err[next] += (acc.p_value().unwrap_or(0.0) - truth).abs() / truth;
                next += 1;
            }
        }

        let mut chain = state;
        let mut acc = PValueAccumulator::new(observed, side);
        let mut next = 0;
        run_walks(&mut chain, &WalkPlan::new(total_walks, rng.next_u64()), |w, t| {
            acc.update(t);
            while next < k && walk_marks[next] == w {
                walk_err[next] += (acc.p_value().unwrap_or(0.0) - truth).abs() / truth;
                next += 1;
            }
        })?;
    }
    let reps = config.reps as f64;
    let points = (0..k)
        .map(|c| CurvePoint {
            budget_fraction: (c + 1) as f64 / k as f64,
            naive_perms: naive_marks[c],
            walks: walk_marks[c],
            naive_rel_error: naive_err[c] / reps,
            walk_rel_error: walk_err[c] / reps,
        })
        .collect();
    Ok(ConvergenceCurves {
        config: *config,
        speedup,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_tails() {
        let (side, p) = gaussian_ground_truth(2.39, 198.0);
        assert_eq!(side, Side::Greater);
        assert!((p - 0.0089).abs() < 2e-4, "{p}");
        let (side, p) = gaussian_ground_truth(-0.48, 18.0);
        assert_eq!(side, Side::Less);
        assert!((p - 0.3185).abs() < 2e-3, "{p}");
    }

    #[test]
    fn curves_are_deterministic_with_fixed_speedup() {
        let mut cfg = SimulationConfig::new(Scenario::Small, 3, 11);
        cfg.naive_perms = 500;
        cfg.speedup = Some(4.0);
        cfg.checkpoints = 5;
        let a = simulate_convergence(&cfg).unwrap();
        let b = simulate_convergence(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 5);
        assert_eq!(a.points[4].naive_perms, 500);
        assert_eq!(a.points[4].walks, 2_000);
        assert!((0.0..=1.0).contains(&a.walk_dominance()));
    }

    #[test]
    fn throughput_reports_rates() {
        let t = measure_throughput(20, 20, 10_000, 1_000, 1).unwrap();
        assert!(t.walks_per_second() > 0.0 && t.naive_per_second() > 0.0);
        assert!(measure_throughput(20, 20, 10, 0, 1).is_err());
    }
}
