//! Projection-side adapters.
//!
//! A rank-`d` projection `P` in `C^{m x m}` and a tight frame of `m` vectors
//! in `C^d` carry the same information: with `P = W W*`, the vectors are
//! `u_i = W* e_i` and `P Q_S P = W (sum_{i in S} u_i u_i*) W*`. Every
//! operation here factors `P`, runs the frame-side solver, and maps the
//! chosen indices back to a diagonal mask.

use crate::error::{Error, Result};
use crate::frames::{projection_to_frame, ProjectionSystem};
use crate::linalg::HermitianMatrix;
use crate::pipeline::{convex_combination_subset, CoefficientVector};
use crate::solvers::{r_partition, two_partition, IndexPartition, Provenance, SolverConfig};

/// A diagonal matrix with entries in `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalProjection {
    mask: Vec<bool>,
}

impl DiagonalProjection {
    pub fn new(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn identity(m: usize) -> Self {
        Self { mask: vec![true; m] }
    }

    pub fn zeros(m: usize) -> Self {
        Self { mask: vec![false; m] }
    }

    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; m];
        for &i in indices {
            if i >= m {
                return Err(Error::InvalidInput(format!("index {i} out of range for size {m}")));
            }
            mask[i] = true;
        }
        Ok(Self { mask })
    }

    pub fn m(&self) -> usize {
        self.mask.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Indices of the 1 entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.mask[i]).collect()
    }

    pub fn complement(&self) -> Self {
        Self { mask: self.mask.iter().map(|b| !b).collect() }
    }

    /// `self <= other` as diagonal projections.
    pub fn is_contained_in(&self, other: &DiagonalProjection) -> bool {
        self.m() == other.m() && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect::<Vec<_>>())
    }
}

/// A diagonal matrix with entries in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMatrix {
    values: Vec<f64>,
}

impl DiagonalMatrix {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("diagonal entry {i} is {v}, outside [0, 1]")));
        }
        Ok(Self { values })
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn matrix(&self) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&self.values)
    }
}

fn check_size(p: &ProjectionSystem, m: usize) -> Result<()> {
    if p.m() != m {
        return Err(Error::DimensionMismatch { expected: p.m(), found: m });
    }
    Ok(())
}

/// `P Q P`.
pub fn pqp(p: &ProjectionSystem, q: &DiagonalProjection) -> Result<HermitianMatrix> {
    check_size(p, q.m())?;
    Ok(q.matrix().congruence(p.matrix().as_matrix()))
}

/// `P B P` for a diagonal `B`.
pub fn pbp(p: &ProjectionSystem, b: &DiagonalMatrix) -> Result<HermitianMatrix> {
    check_size(p, b.m())?;
    Ok(b.matrix().congruence(p.matrix().as_matrix()))
}

#[derive(Clone, Debug)]
pub struct DiagonalSelection {
    /// `Q' <= Q`.
    pub q_prime: DiagonalProjection,
    /// `||P Q' P - P B P||`.
    pub error: f64,
    /// The same error measured on the frame side.
    pub frame_error: f64,
    pub certified_bound: f64,
    pub meets_bound: bool,
    pub provenance: Provenance,
}

/// Finds `Q' <= Q` with `P Q' P` close to `P B P`, for diagonal `0 <= B <= Q`.
///
/// When `eps_bound` is given, every diagonal entry of `Q P Q` must be at most
/// that value.
pub fn diagonal_projection_select(
    p: &ProjectionSystem,
    q: &DiagonalProjection,
    b: &DiagonalMatrix,
    eps_bound: Option<f64>,
    cfg: &SolverConfig,
) -> Result<DiagonalSelection> {
    check_size(p, q.m())?;
    check_size(p, b.m())?;
    if let Some(i) = (0..q.m()).find(|&i| !q.mask()[i] && b.values()[i] != 0.0) {
        return Err(Error::InvalidInput(format!(
            "B has entry {} at index {i}, outside the support of Q",
            b.values()[i]
        )));
    }
    let diag = p.matrix().real_diagonal();
    let support = q.support();
    if let Some(bound) = eps_bound {
        if let Some(&index) = support.iter().find(|&&i| diag[i] > bound + 1e-12) {
            return Err(Error::DiagonalBound { index, value: diag[index], bound });
        }
    }

    let frame = projection_to_frame(p)?.sub_frame(&support)?;
    let t = CoefficientVector::new(support.iter().map(|&i| b.values()[i]).collect())?;
    let solved = convex_combination_subset(&frame, &t, cfg)?;
    let chosen: Vec<usize> = solved.result.subset.iter().map(|&j| support[j]).collect();
    let q_prime = DiagonalProjection::from_indices(q.m(), &chosen)?;

    let error = (&pqp(p, &q_prime)? - &pbp(p, b)?).norm();
    let certified_bound = solved.result.certified_bound.unwrap_or(0.0);
    Ok(DiagonalSelection {
        q_prime,
        error,
        frame_error: solved.result.error,
        certified_bound,
        meets_bound: error <= certified_bound,
        provenance: solved.result.provenance,
    })
}

#[derive(Clone, Debug)]
pub struct ProjectionSplit {
    pub q: DiagonalProjection,
    /// `(||P Q P||, ||P (I - Q) P||)`.
    pub norms: [f64; 2],
    /// `||P Q P - P / 2||`.
    pub half_deviation: f64,
    pub bound: f64,
    pub meets_bound: bool,
    pub provenance: Provenance,
}

/// A diagonal projection `Q` with both `P Q P` and `P (I - Q) P` small.
pub fn two_partition_projection(p: &ProjectionSystem, cfg: &SolverConfig) -> Result<ProjectionSplit> {
    let frame = projection_to_frame(p)?;
    let split = two_partition(&frame, cfg)?;
    let q = DiagonalProjection::from_indices(p.m(), split.partition.block(0))?;
    let upper = pqp(p, &q)?;
    let lower = pqp(p, &q.complement())?;
    let norms = [upper.norm(), lower.norm()];
    let half_deviation = (&upper - &p.matrix().scale(0.5)).norm();
    Ok(ProjectionSplit {
        q,
        norms,
        half_deviation,
        bound: split.bound,
        meets_bound: norms[0].max(norms[1]) <= split.bound,
        provenance: split.provenance,
    })
}

#[derive(Clone, Debug)]
pub struct ProjectionPartition {
    /// Disjoint, summing to `I`.
    pub blocks: Vec<DiagonalProjection>,
    pub partition: IndexPartition,
    /// `||P Q_j P||`.
    pub norms: Vec<f64>,
    pub bounds: Vec<f64>,
    pub provenance: Provenance,
}

/// `r` diagonal projections summing to `I` with `||P Q_j P||` near `t_j`.
pub fn r_partition_projection(
    p: &ProjectionSystem,
    weights: &[f64],
    cfg: &SolverConfig,
) -> Result<ProjectionPartition> {
    let frame = projection_to_frame(p)?;
    let split = r_partition(&frame, weights, cfg)?;
    let blocks = split
        .partition
        .blocks()
        .iter()
        .map(|b| DiagonalProjection::from_indices(p.m(), b))
        .collect::<Result<Vec<_>>>()?;
    let norms = blocks.iter().map(|q| pqp(p, q).map(|x| x.norm())).collect::<Result<Vec<_>>>()?;
    Ok(ProjectionPartition {
        blocks,
        partition: split.partition,
        norms,
        bounds: split.bounds,
        provenance: split.provenance,
    })
}
