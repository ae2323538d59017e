//! Acceptance suite. Runs every criterion sequentially (timing checks must
//! not share the CPU with other tests) and prints one PASS/FAIL line each.

mod common;

use std::time::Instant;

use common::*;
use permwalk::experiments::{measure_throughput, simulate_convergence, Scenario, SimulationConfig};
use permwalk::{
    average_twin_correlation, direct_t, estimate_mixing, exact_enumeration_pvalue, run_walks, walk_pvalue, Comparison,
    FieldState, FieldTest, PairedState, Permutation, RandomStream, Side, TwoSampleState, WalkPlan,
};
use statrs::distribution::{Binomial, DiscreteCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

const DRIFT_TOL: f64 = 1e-9;
const DRIFT_WALKS: u64 = 500_000;

fn c1_drift_t() -> Outcome {
    let mut errors = Vec::new();
    for rep in 0..100 {
        let mut rng = RandomStream::with_stream(1, rep);
        let x = uniform(&mut rng, 40, 0.1);
        let y = uniform(&mut rng, 40, 0.0);
        let mut state = TwoSampleState::new(x, y).unwrap();
        let mut last = None;
        run_walks(&mut state, &WalkPlan::new(DRIFT_WALKS, rep), |_, t| last = t).unwrap();
        errors.push((last.unwrap() - textbook_t(state.x(), state.y())).abs());
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let (mean, sd) = mean_sd(&errors);
    outcome(
        worst < DRIFT_TOL,
        format!("abs error {mean:.2e} ± {sd:.2e}, max {worst:.2e} (tol {DRIFT_TOL:e})"),
    )
}

fn c2_drift_rho() -> Outcome {
    let mut errors = Vec::new();
    for rep in 0..100 {
        let mut rng = RandomStream::with_stream(2, rep);
        let x = uniform(&mut rng, 40, 0.1);
        let y = uniform(&mut rng, 40, 0.0);
        let mut state = PairedState::new(x, y).unwrap();
        let mut last = None;
        run_walks(&mut state, &WalkPlan::new(DRIFT_WALKS, rep), |_, r| last = r).unwrap();
        errors.push((last.unwrap() - textbook_corr(state.x(), state.y())).abs());
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let (mean, sd) = mean_sd(&errors);
    outcome(
        worst < DRIFT_TOL,
        format!("abs error {mean:.2e} ± {sd:.2e}, max {worst:.2e} (tol {DRIFT_TOL:e})"),
    )
}

fn c3_factorization() -> Outcome {
    let mut rng = RandomStream::new(3);
    let mut exact = 0;
    let mut walks = 0;
    for _ in 0..1000 {
        let l = 1 + rng.index(12);
        let mut map: Vec<usize> = (0..l).collect();
        rng.shuffle(&mut map);
        let p = Permutation::from_zero_based(map).unwrap();
        let ts = p.factor_into_walks();
        walks += ts.len();
        if Permutation::from_transpositions(l, &ts).unwrap() == p {
            exact += 1;
        }
    }
    outcome(
        exact == 1000,
        format!("{exact}/1000 exact reconstructions ({walks} transpositions)"),
    )
}

fn c4_enumeration() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let mut rng = RandomStream::with_stream(4, seed);
        let x = gaussian(&mut rng, 7, 0.0);
        let y = gaussian(&mut rng, 7, 0.1);
        let exact = exact_enumeration_pvalue(&x, &y, direct_t, Side::Greater, Comparison::AtLeast, 1 << 20).unwrap();
        assert_eq!(exact.assignments, 3432);
        let state = TwoSampleState::new(x, y).unwrap();
        let acc = walk_pvalue(&state, Side::Greater, &WalkPlan::new(1_000_000, seed)).unwrap();
        worst = worst.max((acc.p_value().unwrap() - exact.p_value).abs());
    }
    outcome(
        worst <= 0.01,
        format!("max |walk p - exact p| = {worst:.4} over 10 seeds (tol 0.01)"),
    )
}

fn c5_twin_average() -> Outcome {
    let mut rng = RandomStream::new(5);
    let shared = gaussian(&mut rng, 10, 0.0);
    let x: Vec<f64> = shared.iter().map(|s| s + 0.6 * rng.normal()).collect();
    let y: Vec<f64> = shared.iter().map(|s| s + 0.6 * rng.normal()).collect();
    let exact = brute_force_twin_average(&x, &y);
    let state = PairedState::new(x, y).unwrap();
    let avg = average_twin_correlation(&state, &WalkPlan::new(1_000_000, 5).report_every(10_000)).unwrap();
    let err = (avg.mean - exact).abs();
    outcome(
        err < 1e-3,
        format!(
            "walk mean {:.5} vs 2^10 mean {exact:.5}, error {err:.1e} (tol 1e-3), converged at walk {:?}",
            avg.mean, avg.converged_at
        ),
    )
}

fn c6_throughput() -> Outcome {
    let t = measure_throughput(100, 100, 20_000_000, 200_000, 6).unwrap();
    let speedup = t.speedup();
    outcome(
        speedup >= 20.0,
        format!(
            "{:.2e} walks/s vs {:.2e} naive perms/s: {speedup:.1}x (need >= 20x)",
            t.walks_per_second(),
            t.naive_per_second()
        ),
    )
}

fn c7_constant_cost() -> Outcome {
    let per_walk = |size: usize| {
        (0..5)
            .map(|k| {
                measure_throughput(size, size, 5_000_000, 1, 70 + k)
                    .unwrap()
                    .seconds_per_walk()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = per_walk(100);
    let large = per_walk(1000);
    let ratio = large / small;
    outcome(
        ratio <= 2.0,
        format!(
            "{:.1} ns/walk at m+n=200, {:.1} ns/walk at m+n=2000, ratio {ratio:.2} (need <= 2)",
            small * 1e9,
            large * 1e9
        ),
    )
}

fn c8_mixing() -> Outcome {
    let est = estimate_mixing(200, 200, 2000, 1000, 8).unwrap();
    let at500 = est.proportions[500];
    let at2000 = est.proportions[2000];
    outcome(
        at500 >= 0.45 && (at2000 - 0.5).abs() <= 0.02,
        format!("proportion {at500:.4} at walk 500 (need >= 0.45), {at2000:.4} at walk 2000 (need 0.5 ± 0.02)"),
    )
}

fn c9_dominance() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for scenario in [Scenario::Small, Scenario::Large] {
        let curves = simulate_convergence(&SimulationConfig::new(scenario, 100, 2019)).unwrap();
        let share = curves.walk_dominance();
        pass &= share >= 0.8;
        let last = curves.points.last().unwrap();
        parts.push(format!(
            "{scenario:?}: speedup {:.1}x, walk <= naive at {:.0}% of checkpoints, final rel err {:.4} vs {:.4}",
            curves.speedup,
            share * 100.0,
            last.walk_rel_error,
            last.naive_rel_error
        ));
    }
    outcome(pass, format!("{} (need >= 80%)", parts.join("; ")))
}

fn c10_null_calibration() -> Outcome {
    const REPS: u64 = 200;
    const V: usize = 50;
    const ALPHA: f64 = 0.05;
    let mut pointwise = Vec::with_capacity(REPS as usize * V);
    let mut corrected_fp = 0u64;
    let mut threshold_fp = 0u64;
    let cfg = FieldTest {
        side: Side::Greater,
        correction: true,
        retain: true,
        threads: 1,
    };
    for rep in 0..REPS {
        let mut rng = RandomStream::with_stream(10, rep);
        let states = (0..V)
            .map(|_| TwoSampleState::new(gaussian(&mut rng, 10, 0.0), gaussian(&mut rng, 10, 0.0)).unwrap())
            .collect();
        let field = FieldState::new(states).unwrap();
        let res = cfg.run(&field, &WalkPlan::new(10_000, rep)).unwrap();
        pointwise.extend(res.pointwise_p().into_iter().flatten());
        let ms = res.maxstat.as_ref().unwrap();
        if ms.p_sup().unwrap() <= ALPHA {
            corrected_fp += 1;
        }
        let (h_upper, _) = ms.threshold_at_alpha(ALPHA).unwrap();
        if ms.observed_sup > h_upper {
            threshold_fp += 1;
        }
    }
    let ks = ks_uniform_pvalue(&pointwise);
    let binom = Binomial::new(ALPHA, REPS).unwrap();
    let (lo, hi) = (binom.inverse_cdf(0.005), binom.inverse_cdf(0.995));
    let inside = |c: u64| (lo..=hi).contains(&c);
    outcome(
        ks > 0.01 && inside(corrected_fp) && inside(threshold_fp),
        format!(
            "KS p = {ks:.3} over {} pointwise p-values (need > 0.01); family-wise false positives {corrected_fp}/{REPS} by corrected p, {threshold_fp}/{REPS} by threshold (99% binomial interval [{lo}, {hi}])",
            pointwise.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1 numerical drift (t)", c1_drift_t),
        ("C2 numerical drift (rho)", c2_drift_rho),
        ("C3 transposition factorization", c3_factorization),
        ("C4 enumeration agreement", c4_enumeration),
        ("C5 twin-average oracle", c5_twin_average),
        ("C6 throughput", c6_throughput),
        ("C7 constant per-walk cost", c7_constant_cost),
        ("C8 mixing curve", c8_mixing),
        ("C9 convergence dominance", c9_dominance),
        ("C10 null calibration", c10_null_calibration),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let Outcome { pass, detail } = run();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {name}: {detail} ({:.1}s)", start.elapsed().as_secs_f64());
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
