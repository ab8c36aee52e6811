use super::descent::label_descent;
use super::search::min_max_partition;
use super::{IndexPartition, Provenance, SolverConfig, SolverKind};
use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::linalg::{raw_max_eigenvalue, CMatrix, HermitianMatrix};

/// Two blocks whose sums both stay near `I / 2`.
#[derive(Clone, Debug)]
pub struct TwoPartition {
    pub partition: IndexPartition,
    pub norms: [f64; 2],
    /// `1/2 + sqrt(2 eps) + eps`.
    pub bound: f64,
    pub meets_bound: bool,
    pub provenance: Provenance,
}

impl TwoPartition {
    pub fn max_norm(&self) -> f64 {
        self.norms[0].max(self.norms[1])
    }
}

#[derive(Clone, Debug)]
pub struct RPartition {
    pub partition: IndexPartition,
    pub weights: Vec<f64>,
    pub norms: Vec<f64>,
    /// `t_j (1 + sqrt(r eps))^2` per block.
    pub bounds: Vec<f64>,
    pub meets_bound: Vec<bool>,
    pub provenance: Provenance,
}

/// Splits a tight frame into two blocks minimizing the larger block norm.
///
/// The exhaustive search pins index 0 to the first block, halving the space.
pub fn two_partition(frame: &FrameSystem, cfg: &SolverConfig) -> Result<TwoPartition> {
    require_tight(frame)?;
    let m = frame.m();
    let (labels, provenance) = if cfg.pick_exhaustive(m)? {
        let out = min_max_partition(frame.vectors(), frame.d(), &[1.0, 1.0], true);
        (out.labels, Provenance { solver: SolverKind::Oracle, seed: None, iterations: out.nodes })
    } else {
        let out = label_descent(
            frame.vectors(),
            frame.d(),
            2,
            |s: &[CMatrix]| (raw_max_eigenvalue(&s[0]).max(raw_max_eigenvalue(&s[1])), spread(s, &[1.0, 1.0])),
            vec![vec![0; m]],
            &cfg.local_search,
        );
        let provenance = Provenance {
            solver: SolverKind::LocalSearch,
            seed: Some(cfg.local_search.seed),
            iterations: out.iterations,
        };
        (out.labels, provenance)
    };
    let partition = IndexPartition::from_labels(&labels, 2)?;
    let norms =
        [frame.subset_sum(partition.block(0)).max_eigenvalue(), frame.subset_sum(partition.block(1)).max_eigenvalue()];
    let bound = split_bound(frame.epsilon());
    let meets_bound = norms[0].max(norms[1]) <= bound;
    Ok(TwoPartition { partition, norms, bound, meets_bound, provenance })
}

/// `1/2 + sqrt(2 eps) + eps`.
pub fn split_bound(eps: f64) -> f64 {
    0.5 + (2.0 * eps).sqrt() + eps
}

/// `t (1 + sqrt(r eps))^2`.
pub fn weighted_block_bound(t: f64, r: usize, eps: f64) -> f64 {
    t * (1.0 + (r as f64 * eps).sqrt()).powi(2)
}

/// Partitions a tight frame into `r = weights.len()` blocks, minimizing
/// `max_j ||sum_{S_j} u_i u_i*|| / t_j`.
pub fn r_partition(frame: &FrameSystem, weights: &[f64], cfg: &SolverConfig) -> Result<RPartition> {
    require_tight(frame)?;
    validate_weights(weights)?;
    let r = weights.len();
    let m = frame.m();
    let bits = (m as f64 * (r as f64).log2()).ceil() as usize;
    let scales: Vec<f64> = weights.iter().map(|t| 1.0 / t).collect();
    let (labels, provenance) = if cfg.pick_exhaustive(bits)? {
        let out = min_max_partition(frame.vectors(), frame.d(), &scales, false);
        (out.labels, Provenance { solver: SolverKind::Oracle, seed: None, iterations: out.nodes })
    } else {
        let out = label_descent(
            frame.vectors(),
            frame.d(),
            r,
            |s: &[CMatrix]| {
                let primary = s.iter().zip(&scales).map(|(x, c)| raw_max_eigenvalue(x) * c).fold(0.0, f64::max);
                (primary, spread(s, &scales))
            },
            vec![vec![0; m]],
            &cfg.local_search,
        );
        let provenance = Provenance {
            solver: SolverKind::LocalSearch,
            seed: Some(cfg.local_search.seed),
            iterations: out.iterations,
        };
        (out.labels, provenance)
    };
    let partition = IndexPartition::from_labels(&labels, r)?;
    let eps = frame.epsilon();
    let norms: Vec<f64> = partition.blocks().iter().map(|b| frame.subset_sum(b).max_eigenvalue()).collect();
    let bounds: Vec<f64> = weights.iter().map(|&t| weighted_block_bound(t, r, eps)).collect();
    let meets_bound = norms.iter().zip(&bounds).map(|(n, b)| n <= b).collect();
    Ok(RPartition { partition, weights: weights.to_vec(), norms, bounds, meets_bound, provenance })
}

/// Distance of one block sum from its recentred scalar target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CenteredDeviation {
    /// `t' = t + (t - 1/2)(2 sqrt(r eps) + r eps)`.
    pub t_prime: f64,
    /// `||sum_{S_j} u_i u_i* - t' I||`.
    pub deviation: f64,
    /// `sqrt(r eps) + r eps / 2`.
    pub bound: f64,
    pub within: bool,
}

/// Recentred deviations for each block of `partition`.
///
/// When every block meets `t_j (1 + sqrt(r eps))^2`, each deviation is
/// within its bound; the bound is the average of the resulting upper and
/// lower Loewner estimates.
pub fn centered_deviation(
    partition: &IndexPartition,
    frame: &FrameSystem,
    weights: &[f64],
) -> Result<Vec<CenteredDeviation>> {
    if partition.r() != weights.len() {
        return Err(Error::InvalidWeights(format!("{} weights for {} blocks", weights.len(), partition.r())));
    }
    if partition.m() != frame.m() {
        return Err(Error::DimensionMismatch { expected: frame.m(), found: partition.m() });
    }
    let reps = weights.len() as f64 * frame.epsilon();
    let spread = 2.0 * reps.sqrt() + reps;
    let bound = reps.sqrt() + 0.5 * reps;
    let identity = HermitianMatrix::identity(frame.d());
    Ok(partition
        .blocks()
        .iter()
        .zip(weights)
        .map(|(block, &t)| {
            let t_prime = t + (t - 0.5) * spread;
            let deviation = (&frame.subset_sum(block) - &identity.scale(t_prime)).norm();
            CenteredDeviation { t_prime, deviation, bound, within: deviation <= bound }
        })
        .collect())
}

/// `sum_j c_j ||S_j||_F^2`, smallest when the scaled blocks are balanced.
fn spread(sums: &[CMatrix], scales: &[f64]) -> f64 {
    sums.iter().zip(scales).map(|(x, c)| c * x.norm_squared()).sum()
}

fn require_tight(frame: &FrameSystem) -> Result<()> {
    if frame.is_tight() {
        Ok(())
    } else {
        Err(Error::NotTight { deviation: frame.tight_deviation() })
    }
}

pub(crate) fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("need at least one weight".into()));
    }
    if let Some(bad) = weights.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {bad} is not positive")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}
