//! Permutation tests by random transposition walks.
//!
//! Instead of drawing every resample uniformly from the symmetric group, the
//! chain moves from one group assignment to the next by exchanging a single
//! element of `x` with a single element of `y`. Sufficient statistics for the
//! two-sample t-statistic and for paired (twin) correlation can be updated in
//! constant time per exchange, so a walk costs O(1) where a fresh resample
//! costs O(m + n).
//!
//! * [`perm`]: permutations, cycles, transposition factorization, walk sampling.
//! * [`stats`]: incremental two-sample and paired states plus direct oracles.
//! * [`walk`]: walk plans, single- and multi-vertex chains, mixing curves.
//! * [`inference`]: iterative and max-statistic p-values, enumeration and
//!   naive Monte Carlo baselines, twin averaging, heritability index.
//! * [`experiments`]: throughput measurement and convergence simulations.

pub mod error;
pub mod experiments;
pub mod inference;
pub mod perm;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use inference::{
    average_twin_correlation, average_twin_correlation_field, average_twin_correlation_field_threaded,
    exact_enumeration_pvalue, heritability_index, naive_mc_pvalue, walk_pvalue, Comparison, Enumeration, FieldTest,
    FieldTestResult, HeritabilityMap, MaxStatAccumulator, NaiveSampler, PValueAccumulator, Side, TwinAverage,
};
pub use perm::{Cycle, Permutation, Transposition, Walk};
pub use rng::RandomStream;
pub use stats::{direct_corr, direct_t, PairedState, TwoSampleState};
pub use walk::{estimate_mixing, run_walks, run_walks_field, FieldState, MixingEstimate, WalkPlan, WalkState};
