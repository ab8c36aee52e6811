//! The block-embedding used to reduce weighted partitions to a single
//! two-sided bound in `C^{rd}`.

use super::partition::validate_weights;
use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::linalg::{CVector, HermitianMatrix, C64};

/// Vectors in `C^{rd}`, viewed as `r` stacked copies of `C^d`.
///
/// A lifted family is generally not sub-tight, so this is kept apart from
/// [`FrameSystem`].
#[derive(Clone, Debug)]
pub struct LiftedFamily {
    pub r: usize,
    pub d: usize,
    pub vectors: Vec<CVector>,
}

impl LiftedFamily {
    pub fn frame_operator(&self) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.r * self.d);
        for v in &self.vectors {
            acc.add_outer(v);
        }
        acc
    }
}

fn embed(u: &CVector, block: usize, r: usize, scale: f64) -> CVector {
    let d = u.len();
    let mut v = CVector::zeros(r * d);
    v.rows_mut(block * d, d).copy_from(&(u * C64::new(scale, 0.0)));
    v
}

/// Places `t_j^{-1/2} u_i` in summand `j = assignment[i]` of `C^{rd}`.
pub fn lift_assignment(frame: &FrameSystem, weights: &[f64], assignment: &[usize]) -> Result<LiftedFamily> {
    if !frame.is_tight() {
        return Err(Error::NotTight { deviation: frame.tight_deviation() });
    }
    validate_weights(weights)?;
    let r = weights.len();
    if assignment.len() != frame.m() {
        return Err(Error::InvalidAssignment(format!(
            "assignment covers {} of {} indices",
            assignment.len(),
            frame.m()
        )));
    }
    if let Some((i, j)) = assignment.iter().enumerate().find(|(_, &j)| j >= r) {
        return Err(Error::InvalidAssignment(format!("index {i} assigned to block {j} of {r}")));
    }
    let vectors = frame.vectors().iter().zip(assignment).map(|(u, &j)| embed(u, j, r, weights[j].powf(-0.5))).collect();
    Ok(LiftedFamily { r, d: frame.d(), vectors })
}

/// `sum_i E[v_i v_i*]` when each index independently lands in block `j` with
/// probability `t_j`; for a tight frame this is `I_{rd}`.
pub fn lifted_expectation(frame: &FrameSystem, weights: &[f64]) -> Result<HermitianMatrix> {
    validate_weights(weights)?;
    let r = weights.len();
    let mut acc = HermitianMatrix::zeros(r * frame.d());
    for u in frame.vectors() {
        for (j, &t) in weights.iter().enumerate() {
            let v = embed(u, j, r, t.powf(-0.5));
            acc = &acc + &HermitianMatrix::outer(&v).scale(t);
        }
    }
    Ok(acc)
}
