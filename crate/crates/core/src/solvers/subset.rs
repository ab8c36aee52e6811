use super::descent::label_descent;
use super::search::min_over_subsets;
use super::{mask_to_indices, Provenance, SelectionResult, SolverConfig, SolverKind, DEFAULT_EXHAUSTIVE_LIMIT};
use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::linalg::{raw_norm, CMatrix, HermitianMatrix};

/// The subset minimizing `||sum_{i in S} u_i u_i* - target||` over all
/// `2^m` subsets, with `m` capped at the default exhaustive limit.
pub fn best_subset_oracle(frame: &FrameSystem, target: &HermitianMatrix) -> Result<SelectionResult> {
    best_subset_oracle_with_limit(frame, target, DEFAULT_EXHAUSTIVE_LIMIT)
}

pub fn best_subset_oracle_with_limit(
    frame: &FrameSystem,
    target: &HermitianMatrix,
    limit: usize,
) -> Result<SelectionResult> {
    check_target(frame, target)?;
    if frame.m() > limit {
        return Err(Error::TooLarge { size: frame.m(), limit });
    }
    let t = target.as_matrix();
    let outcome = min_over_subsets(frame.vectors(), frame.d(), |s| raw_norm(&(s - t)));
    Ok(SelectionResult::evaluate(
        frame,
        mask_to_indices(outcome.mask, frame.m()),
        target.clone(),
        None,
        Provenance { solver: SolverKind::Oracle, seed: None, iterations: outcome.nodes },
    ))
}

/// Seeded flip descent on `||D - target||`, started from the empty set, the
/// full set and `restarts` random subsets.
pub fn local_search_subset(
    frame: &FrameSystem,
    target: &HermitianMatrix,
    cfg: &SolverConfig,
) -> Result<SelectionResult> {
    check_target(frame, target)?;
    cfg.validate()?;
    let m = frame.m();
    let t: &CMatrix = target.as_matrix();
    let outcome = label_descent(
        frame.vectors(),
        frame.d(),
        2,
        |sums: &[CMatrix]| {
            let diff = &sums[1] - t;
            (raw_norm(&diff), diff.norm())
        },
        vec![vec![0; m], vec![1; m]],
        &cfg.local_search,
    );
    let subset = (0..m).filter(|&i| outcome.labels[i] == 1).collect();
    Ok(SelectionResult::evaluate(
        frame,
        subset,
        target.clone(),
        None,
        Provenance {
            solver: SolverKind::LocalSearch,
            seed: Some(cfg.local_search.seed),
            iterations: outcome.iterations,
        },
    ))
}

fn check_target(frame: &FrameSystem, target: &HermitianMatrix) -> Result<()> {
    if target.dim() != frame.d() {
        return Err(Error::DimensionMismatch { expected: frame.d(), found: target.dim() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{diagonal_counterexample, random_sub_tight, random_tight};

    #[test]
    fn zero_target_picks_empty_set() {
        let f = random_tight(2, 6, 1).unwrap();
        let r = best_subset_oracle(&f, &HermitianMatrix::zeros(2)).unwrap();
        assert!(r.subset.is_empty());
        assert_eq!(r.error, 0.0);
        let l = local_search_subset(&f, &HermitianMatrix::zeros(2), &SolverConfig::local(3)).unwrap();
        assert!(l.subset.is_empty());
        assert_eq!(l.error, 0.0);
    }

    #[test]
    fn full_target_picks_everything() {
        let f = random_sub_tight(3, 7, 2).unwrap();
        let b = f.frame_operator().clone();
        let r = best_subset_oracle(&f, &b).unwrap();
        assert_eq!(r.subset, (0..7).collect::<Vec<_>>());
        assert!(r.error < 1e-12);
        let l = local_search_subset(&f, &b, &SolverConfig::local(3)).unwrap();
        assert!(l.error < 1e-12);
    }

    #[test]
    fn counterexample_half_identity() {
        let f = diagonal_counterexample(2).unwrap();
        let r = best_subset_oracle(&f, &HermitianMatrix::identity(2).scale(0.5)).unwrap();
        assert_eq!(r.subset, vec![0, 2]);
        assert!(r.error < 1e-15);
        assert_eq!(r.provenance.iterations, 16);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let f = random_tight(2, 10, 0).unwrap();
        let err = best_subset_oracle_with_limit(&f, &HermitianMatrix::zeros(2), 9).unwrap_err();
        assert!(matches!(err, Error::TooLarge { size: 10, limit: 9 }));
        assert!(best_subset_oracle(&f, &HermitianMatrix::zeros(3)).is_err());
    }

    #[test]
    fn local_search_never_beats_oracle() {
        let f = random_tight(2, 14, 21).unwrap();
        let target = HermitianMatrix::identity(2).scale(0.3);
        let oracle = best_subset_oracle(&f, &target).unwrap();
        let local = local_search_subset(&f, &target, &SolverConfig::local(5)).unwrap();
        assert!(local.error >= oracle.error - 1e-12);
        let again = local_search_subset(&f, &target, &SolverConfig::local(5)).unwrap();
        assert_eq!(local.subset, again.subset);
        assert_eq!(local.error, again.error);
    }
}
