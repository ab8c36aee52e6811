//! Subset and partition search.
//!
//! The existence results this crate certifies are nonconstructive, so the
//! solvers search: exhaustive enumeration gives ground truth for small `m`,
//! seeded flip descent scales further without a guarantee.
//!
//! Indices are 0-based throughout.

mod descent;
mod lift;
mod partition;
mod search;
mod subset;

pub use lift::{lift_assignment, lifted_expectation, LiftedFamily};
pub use partition::{
    centered_deviation, r_partition, split_bound, two_partition, weighted_block_bound, CenteredDeviation, RPartition,
    TwoPartition,
};
pub use subset::{best_subset_oracle, best_subset_oracle_with_limit, local_search_subset};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Objective values closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Hard cap on `exhaustive_limit`.
pub const MAX_EXHAUSTIVE_LIMIT: usize = 26;

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 22;

/// Incremental sums are rebuilt from scratch after this many updates.
pub(crate) const RECOMPUTE_EVERY: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    LocalSearch,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalSearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 10_000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub strategy: Strategy,
    pub exhaustive_limit: usize,
    pub local_search: LocalSearchConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            local_search: LocalSearchConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn exhaustive() -> Self {
        Self { strategy: Strategy::Exhaustive, ..Self::default() }
    }

    pub fn local(seed: u64) -> Self {
        Self {
            strategy: Strategy::LocalSearch,
            local_search: LocalSearchConfig { seed, ..LocalSearchConfig::default() },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exhaustive_limit > MAX_EXHAUSTIVE_LIMIT {
            return Err(Error::InvalidInput(format!(
                "exhaustive limit {} exceeds the maximum of {MAX_EXHAUSTIVE_LIMIT}",
                self.exhaustive_limit
            )));
        }
        Ok(())
    }

    /// Whether a search over `2^bits` states runs exhaustively.
    pub(crate) fn pick_exhaustive(&self, bits: usize) -> Result<bool> {
        self.validate()?;
        match self.strategy {
            Strategy::Exhaustive if bits > self.exhaustive_limit => {
                Err(Error::TooLarge { size: bits, limit: self.exhaustive_limit })
            }
            Strategy::Exhaustive => Ok(true),
            Strategy::LocalSearch => Ok(false),
            Strategy::Auto => Ok(bits <= self.exhaustive_limit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Oracle,
    LocalSearch,
    Pipeline,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Oracle => "oracle",
            SolverKind::LocalSearch => "local-search",
            SolverKind::Pipeline => "pipeline",
        }
    }
}

/// Where a result came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub solver: SolverKind,
    pub seed: Option<u64>,
    /// Nodes visited (exhaustive) or accepted moves (descent).
    pub iterations: u64,
}

/// Disjoint blocks covering `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPartition {
    m: usize,
    blocks: Vec<Vec<usize>>,
}

impl IndexPartition {
    pub fn new(m: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; m];
        for block in &blocks {
            for &i in block {
                if i >= m || seen[i] {
                    return Err(Error::InvalidAssignment(format!("index {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidAssignment(format!("index {missing} is not covered")));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Self { m, blocks })
    }

    pub fn from_labels(labels: &[usize], r: usize) -> Result<Self> {
        let mut blocks = vec![Vec::new(); r];
        for (i, &j) in labels.iter().enumerate() {
            if j >= r {
                return Err(Error::InvalidAssignment(format!("index {i} has label {j} >= {r}")));
            }
            blocks[j].push(i);
        }
        Self::new(labels.len(), blocks)
    }

    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &[usize] {
        &self.blocks[j]
    }

    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.m];
        for (j, block) in self.blocks.iter().enumerate() {
            for &i in block {
                labels[i] = j;
            }
        }
        labels
    }
}

/// A chosen index set with its sum, target and error.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    /// Sorted, 0-based.
    pub subset: Vec<usize>,
    pub achieved: HermitianMatrix,
    pub target: HermitianMatrix,
    /// `||achieved - target||`.
    pub error: f64,
    pub certified_bound: Option<f64>,
    pub provenance: Provenance,
}

impl SelectionResult {
    pub(crate) fn evaluate(
        frame: &crate::frames::FrameSystem,
        mut subset: Vec<usize>,
        target: HermitianMatrix,
        certified_bound: Option<f64>,
        provenance: Provenance,
    ) -> Self {
        subset.sort_unstable();
        let achieved = frame.subset_sum(&subset);
        let error = (&achieved - &target).norm();
        Self { subset, achieved, target, error, certified_bound, provenance }
    }

    pub fn meets_bound(&self) -> Option<bool> {
        self.certified_bound.map(|b| self.error <= b)
    }
}

/// Lexicographic order on equal-cardinality subsets given as bitmasks:
/// the set holding the lowest differing index comes first.
pub(crate) fn mask_lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) != 0
}

pub(crate) fn mask_to_indices(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&i| mask >> i & 1 == 1).collect()
}
