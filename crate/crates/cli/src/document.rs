//! Versioned JSON result document and flat CSV tables.

use std::io::Write;

use permwalk::experiments::{CurvePoint, Scenario, Throughput};
use permwalk::{Comparison, Side};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Every command writes one of these. `config` holds everything needed to
/// re-run the command; `runtime` is only filled in on request so that
/// default output is byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub generator: String,
    #[serde(flatten)]
    pub run: Run,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Runtime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Run {
    Ttest {
        config: TtestConfig,
        result: TtestResult,
    },
    Twin {
        config: TwinConfig,
        result: TwinResult,
    },
    Heritability {
        config: HeritabilityConfig,
        result: HeritabilityResult,
    },
    Simulate {
        config: SimulateConfig,
        result: SimulateResult,
    },
    Mixing {
        config: MixingConfig,
        result: MixingResult,
    },
    Bench {
        config: BenchConfig,
        result: Throughput,
    },
    Enumerate {
        config: EnumerateConfig,
        result: EnumerateResult,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub seconds: f64,
    pub threads: usize,
}

/// An input file and the SHA-256 of its bytes at the time of the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRef {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    None,
    Maxstat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walks: u64,
    pub seed: u64,
    pub burnin: u64,
    pub report_every: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtestConfig {
    pub data: InputRef,
    pub groups: InputRef,
    #[serde(flatten)]
    pub walk: WalkConfig,
    pub side: Side,
    pub correction: Correction,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexTest {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Observed statistic; `None` when the vertex is degenerate.
    pub statistic: Option<f64>,
    pub k: u64,
    pub exceed: u64,
    pub degenerate: u64,
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxStatSummary {
    pub observed_sup: f64,
    pub observed_inf: f64,
    pub k: u64,
    pub degenerate: u64,
    pub p_sup: Option<f64>,
    pub p_inf: Option<f64>,
    /// Null sup/inf thresholds at `alpha`; absent when too few walks.
    pub threshold_upper: Option<f64>,
    pub threshold_lower: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateTally {
    /// Vertices whose observed statistic is undefined.
    pub observed: usize,
    /// Permuted statistics dropped, summed over vertices.
    pub permuted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtestResult {
    pub features: usize,
    pub m: usize,
    pub n: usize,
    pub vertices: Vec<VertexTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maxstat: Option<MaxStatSummary>,
    pub degenerate: DegenerateTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinConfig {
    pub data: InputRef,
    pub pairs: InputRef,
    #[serde(flatten)]
    pub walk: WalkConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinVertex {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Correlation with pairs in file order.
    pub observed: Option<f64>,
    /// Average over random pair flips.
    pub mean: Option<f64>,
    pub used: u64,
    pub degenerate: u64,
    pub converged_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinResult {
    pub pairs: usize,
    pub vertices: Vec<TwinVertex>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeritabilityConfig {
    pub mz: InputRef,
    pub dz: InputRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeritabilityVertex {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub mz: Option<f64>,
    pub dz: Option<f64>,
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeritabilityResult {
    pub vertices: Vec<HeritabilityVertex>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub scenario: Scenario,
    pub reps: u64,
    pub seed: u64,
    pub naive_perms: u64,
    pub checkpoints: usize,
    /// Walks per naive permutation at equal wall time.
    pub speedup: f64,
    /// Whether `speedup` was measured on this machine or given.
    pub speedup_measured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub walk_dominance: f64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingConfig {
    pub m: usize,
    pub n: usize,
    pub walks: usize,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    /// Mean crossed proportion after 0, 1, ..., walks transpositions.
    pub proportions: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub walks: u64,
    pub naive_perms: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateConfig {
    pub data: InputRef,
    pub groups: InputRef,
    pub side: Side,
    pub comparison: Comparison,
    pub limit: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedVertex {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub statistic: f64,
    pub assignments: u64,
    pub exceeding: u64,
    pub degenerate: u64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerateResult {
    pub m: usize,
    pub n: usize,
    pub vertices: Vec<EnumeratedVertex>,
}

impl ResultDocument {
    pub fn new(run: Run) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            generator: concat!("permwalk ", env!("CARGO_PKG_VERSION")).to_string(),
            run,
            runtime: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| CliError::Input(format!("{source}: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "{source}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        Ok(doc)
    }

    /// Flat table of the main per-row results, for plotting.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut put = |cells: Vec<String>| w.write_record(&cells).map_err(|e| CliError::Output(e.to_string()));
        match &self.run {
            Run::Ttest { result, .. } => {
                put(strings(&[
                    "index",
                    "id",
                    "statistic",
                    "p_value",
                    "corrected_p",
                    "k",
                    "degenerate",
                ]))?;
                for v in &result.vertices {
                    put(vec![
                        v.index.to_string(),
                        v.id.clone().unwrap_or_default(),
                        opt(v.statistic),
                        opt(v.p_value),
                        opt(v.corrected_p),
                        v.k.to_string(),
                        v.degenerate.to_string(),
                    ])?;
                }
            }
            Run::Twin { result, .. } => {
                put(strings(&[
                    "index",
                    "id",
                    "observed",
                    "mean",
                    "used",
                    "degenerate",
                    "converged_at",
                ]))?;
                for v in &result.vertices {
                    put(vec![
                        v.index.to_string(),
                        v.id.clone().unwrap_or_default(),
                        opt(v.observed),
                        opt(v.mean),
                        v.used.to_string(),
                        v.degenerate.to_string(),
                        v.converged_at.map(|c| c.to_string()).unwrap_or_default(),
                    ])?;
                }
            }
            Run::Heritability { result, .. } => {
                put(strings(&["index", "id", "mz", "dz", "hi"]))?;
                for v in &result.vertices {
                    put(vec![
                        v.index.to_string(),
                        v.id.clone().unwrap_or_default(),
                        opt(v.mz),
                        opt(v.dz),
                        opt(v.hi),
                    ])?;
                }
            }
            Run::Simulate { result, .. } => {
                put(strings(&[
                    "budget_fraction",
                    "naive_perms",
                    "walks",
                    "naive_rel_error",
                    "walk_rel_error",
                ]))?;
                for p in &result.points {
                    put(vec![
                        p.budget_fraction.to_string(),
                        p.naive_perms.to_string(),
                        p.walks.to_string(),
                        p.naive_rel_error.to_string(),
                        p.walk_rel_error.to_string(),
                    ])?;
                }
            }
            Run::Mixing { result, .. } => {
                put(strings(&["walk", "proportion"]))?;
                for (k, p) in result.proportions.iter().enumerate() {
                    put(vec![k.to_string(), p.to_string()])?;
                }
            }
            Run::Bench { result, .. } => {
                put(strings(&[
                    "m",
                    "n",
                    "walks",
                    "walk_seconds",
                    "naive_perms",
                    "naive_seconds",
                    "speedup",
                ]))?;
                put(vec![
                    result.m.to_string(),
                    result.n.to_string(),
                    result.walks.to_string(),
                    result.walk_seconds.to_string(),
                    result.naive_perms.to_string(),
                    result.naive_seconds.to_string(),
                    result.speedup().to_string(),
                ])?;
            }
            Run::Enumerate { result, .. } => {
                put(strings(&[
                    "index",
                    "id",
                    "statistic",
                    "assignments",
                    "exceeding",
                    "degenerate",
                    "p_value",
                ]))?;
                for v in &result.vertices {
                    put(vec![
                        v.index.to_string(),
                        v.id.clone().unwrap_or_default(),
                        v.statistic.to_string(),
                        v.assignments.to_string(),
                        v.exceeding.to_string(),
                        v.degenerate.to_string(),
                        v.p_value.to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    }
}

fn strings(cells: &[&str]) -> Vec<String> {
    cells.iter().map(|s| s.to_string()).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
