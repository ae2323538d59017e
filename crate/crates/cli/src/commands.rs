//! Command implementations. Each `run_*` takes a fully resolved config, so
//! a document's config can be fed straight back in to reproduce it.

use std::path::Path;

use permwalk::experiments::{measure_throughput, simulate_convergence, Scenario, SimulationConfig};
use permwalk::{
    average_twin_correlation_field_threaded, direct_corr, direct_t, estimate_mixing, exact_enumeration_pvalue,
    FieldState, FieldTest, PairedState, TwoSampleState, WalkPlan,
};
use sha2::{Digest, Sha256};

use crate::document::*;
use crate::error::{CliError, Result};
use crate::ingest::{DataMatrix, GroupColumns, GroupLabels, PairLabels};

/// Reads a file, returning its bytes and a reference carrying its digest.
/// When `expected` is given the digest must match it.
pub fn read_input(path: &str, expected: Option<&str>) -> Result<(Vec<u8>, InputRef)> {
    let bytes = std::fs::read(Path::new(path)).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    if let Some(want) = expected {
        if want != sha256 {
            return Err(CliError::Input(format!(
                "{path}: contents changed since the recorded run (sha256 {sha256}, expected {want})"
            )));
        }
    }
    Ok((
        bytes,
        InputRef {
            path: path.to_string(),
            sha256,
        },
    ))
}

fn plan(w: &WalkConfig) -> WalkPlan {
    WalkPlan::new(w.walks, w.seed)
        .burn_in(w.burnin)
        .report_every(w.report_every)
}

fn load_groups(data: &InputRef, groups: &InputRef) -> Result<(DataMatrix, GroupColumns)> {
    let (bytes, _) = read_input(&data.path, Some(&data.sha256))?;
    let matrix = DataMatrix::parse(&bytes, &data.path)?;
    let (bytes, _) = read_input(&groups.path, Some(&groups.sha256))?;
    let labels = GroupLabels::parse(&bytes, &groups.path)?;
    let cols = labels.resolve(&matrix, &groups.path)?;
    Ok((matrix, cols))
}

pub fn run_ttest(config: &TtestConfig, threads: usize) -> Result<TtestResult> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(CliError::Input(format!(
            "--alpha must lie in (0, 1), got {}",
            config.alpha
        )));
    }
    let (matrix, cols) = load_groups(&config.data, &config.groups)?;
    let states = (0..matrix.n_features())
        .map(|v| TwoSampleState::new(matrix.select(v, &cols.x), matrix.select(v, &cols.y)))
        .collect::<permwalk::Result<Vec<_>>>()?;
    let field = FieldState::new(states)?;
    let correct = config.correction == Correction::Maxstat;
    let test = FieldTest {
        side: config.side,
        correction: correct,
        retain: correct,
        threads,
    };
    let res = test.run(&field, &plan(&config.walk))?;

    let mut tally = DegenerateTally {
        observed: 0,
        permuted: 0,
    };
    let vertices = res
        .observed
        .iter()
        .zip(&res.pointwise)
        .enumerate()
        .map(|(index, (&statistic, acc))| {
            if statistic.is_none() {
                tally.observed += 1;
            }
            let (k, exceed, degenerate) = acc.as_ref().map_or((0, 0, 0), |a| (a.k, a.exceed, a.degenerate));
            tally.permuted += degenerate;
            VertexTest {
                index,
                id: matrix.feature_id(index),
                statistic,
                k,
                exceed,
                degenerate,
                p_value: acc.as_ref().and_then(|a| a.p_value()),
                corrected_p: res.corrected.as_ref().and_then(|c| c[index]),
            }
        })
        .collect();
    let maxstat = res.maxstat.as_ref().map(|ms| {
        let thresholds = ms.threshold_at_alpha(config.alpha).ok();
        MaxStatSummary {
            observed_sup: ms.observed_sup,
            observed_inf: ms.observed_inf,
            k: ms.k,
            degenerate: ms.degenerate,
            p_sup: ms.p_sup(),
            p_inf: ms.p_inf(),
            threshold_upper: thresholds.map(|t| t.0),
            threshold_lower: thresholds.map(|t| t.1),
        }
    });
    Ok(TtestResult {
        features: matrix.n_features(),
        m: cols.x.len(),
        n: cols.y.len(),
        vertices,
        maxstat,
        degenerate: tally,
    })
}

pub fn run_twin(config: &TwinConfig, threads: usize) -> Result<TwinResult> {
    let (bytes, _) = read_input(&config.data.path, Some(&config.data.sha256))?;
    let matrix = DataMatrix::parse(&bytes, &config.data.path)?;
    let (bytes, _) = read_input(&config.pairs.path, Some(&config.pairs.sha256))?;
    let pairs = PairLabels::parse(&bytes, &config.pairs.path)?.resolve(&matrix, &config.pairs.path)?;
    if pairs.len() < 2 {
        return Err(CliError::Input(format!(
            "{}: {} pairs, need at least 2",
            config.pairs.path,
            pairs.len()
        )));
    }
    let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    let states = (0..matrix.n_features())
        .map(|v| PairedState::new(matrix.select(v, &a), matrix.select(v, &b)))
        .collect::<permwalk::Result<Vec<_>>>()?;
    let field = FieldState::new(states)?;
    let averages = average_twin_correlation_field_threaded(&field, &plan(&config.walk), threads)?;
    let vertices = averages
        .into_iter()
        .enumerate()
        .map(|(index, avg)| {
            let v = &field.vertices()[index];
            TwinVertex {
                index,
                id: matrix.feature_id(index),
                observed: direct_corr(v.x(), v.y()),
                mean: avg.as_ref().map(|t| t.mean),
                used: avg.as_ref().map_or(0, |t| t.used),
                degenerate: avg.as_ref().map_or(0, |t| t.degenerate),
                converged_at: avg.as_ref().and_then(|t| t.converged_at),
            }
        })
        .collect();
    Ok(TwinResult {
        pairs: pairs.len(),
        vertices,
    })
}

fn load_twin(input: &InputRef) -> Result<TwinResult> {
    let (bytes, _) = read_input(&input.path, Some(&input.sha256))?;
    let text = String::from_utf8(bytes).map_err(|e| CliError::Input(format!("{}: {e}", input.path)))?;
    match ResultDocument::from_json(&text, &input.path)?.run {
        Run::Twin { result, .. } => Ok(result),
        _ => Err(CliError::Input(format!(
            "{}: not the output of the twin command",
            input.path
        ))),
    }
}

pub fn run_heritability(config: &HeritabilityConfig) -> Result<HeritabilityResult> {
    let mz = load_twin(&config.mz)?;
    let dz = load_twin(&config.dz)?;
    if mz.vertices.len() != dz.vertices.len() {
        return Err(CliError::Input(format!(
            "{} has {} vertices but {} has {}",
            config.mz.path,
            mz.vertices.len(),
            config.dz.path,
            dz.vertices.len()
        )));
    }
    let vertices = mz
        .vertices
        .iter()
        .zip(&dz.vertices)
        .map(|(a, b)| {
            if a.id != b.id {
                return Err(CliError::Input(format!(
                    "vertex {} has id {:?} in MZ but {:?} in DZ",
                    a.index, a.id, b.id
                )));
            }
            Ok(HeritabilityVertex {
                index: a.index,
                id: a.id.clone(),
                mz: a.mean,
                dz: b.mean,
                hi: a.mean.zip(b.mean).map(|(x, y)| x - y),
            })
        })
        .collect::<Result<_>>()?;
    Ok(HeritabilityResult { vertices })
}

/// Fills in the speedup by timing both methods when not given.
pub fn resolve_simulate(
    scenario: Scenario,
    reps: u64,
    seed: u64,
    naive_perms: Option<u64>,
    checkpoints: usize,
    speedup: Option<f64>,
) -> Result<SimulateConfig> {
    let defaults = SimulationConfig::new(scenario, reps, seed);
    let naive_perms = naive_perms.unwrap_or(defaults.naive_perms);
    let (speedup, measured) = match speedup {
        Some(s) => (s, false),
        None => {
            let size = scenario.group_size();
            (measure_throughput(size, size, 2_000_000, 50_000, seed)?.speedup(), true)
        }
    };
    Ok(SimulateConfig {
        scenario,
        reps,
        seed,
        naive_perms,
        checkpoints,
        speedup,
        speedup_measured: measured,
    })
}

pub fn run_simulate(config: &SimulateConfig) -> Result<SimulateResult> {
    let curves = simulate_convergence(&SimulationConfig {
        scenario: config.scenario,
        reps: config.reps,
        seed: config.seed,
        naive_perms: config.naive_perms,
        speedup: Some(config.speedup),
        checkpoints: config.checkpoints,
    })?;
    Ok(SimulateResult {
        walk_dominance: curves.walk_dominance(),
        points: curves.points,
    })
}

pub fn run_mixing(config: &MixingConfig) -> Result<MixingResult> {
    let est = estimate_mixing(config.m, config.n, config.walks, config.reps, config.seed)?;
    Ok(MixingResult {
        proportions: est.proportions,
    })
}

pub fn run_bench(config: &BenchConfig) -> Result<permwalk::experiments::Throughput> {
    Ok(measure_throughput(
        config.m,
        config.n,
        config.walks,
        config.naive_perms,
        config.seed,
    )?)
}

pub fn run_enumerate(config: &EnumerateConfig) -> Result<EnumerateResult> {
    let (matrix, cols) = load_groups(&config.data, &config.groups)?;
    let vertices = (0..matrix.n_features())
        .map(|v| {
            let x = matrix.select(v, &cols.x);
            let y = matrix.select(v, &cols.y);
            let e = exact_enumeration_pvalue(&x, &y, direct_t, config.side, config.comparison, config.limit as u128)
                .map_err(|e| CliError::Compute(format!("vertex {v}: {e}")))?;
            Ok(EnumeratedVertex {
                index: v,
                id: matrix.feature_id(v),
                statistic: e.observed,
                assignments: e.assignments,
                exceeding: e.exceeding,
                degenerate: e.degenerate,
                p_value: e.p_value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnumerateResult {
        m: cols.x.len(),
        n: cols.y.len(),
        vertices,
    })
}

/// Re-runs whatever produced `doc`, yielding the run part of a new document.
pub fn replay(doc: &ResultDocument, threads: usize) -> Result<Run> {
    Ok(match &doc.run {
        Run::Ttest { config, .. } => Run::Ttest {
            config: config.clone(),
            result: run_ttest(config, threads)?,
        },
        Run::Twin { config, .. } => Run::Twin {
            config: config.clone(),
            result: run_twin(config, threads)?,
        },
        Run::Heritability { config, .. } => Run::Heritability {
            config: config.clone(),
            result: run_heritability(config)?,
        },
        Run::Simulate { config, .. } => Run::Simulate {
            config: *config,
            result: run_simulate(config)?,
        },
        Run::Mixing { config, .. } => Run::Mixing {
            config: *config,
            result: run_mixing(config)?,
        },
        Run::Bench { config, .. } => Run::Bench {
            config: *config,
            result: run_bench(config)?,
        },
        Run::Enumerate { config, .. } => Run::Enumerate {
            config: config.clone(),
            result: run_enumerate(config)?,
        },
    })
}
