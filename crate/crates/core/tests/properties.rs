use kspart_core::frames::frame_to_projection;
use kspart_core::generate::{random_sub_tight, random_tight};
use kspart_core::pipeline::{bucket_coefficients, convex_combination_subset, scalar_target_subset};
use kspart_core::projection::{pqp, DiagonalProjection};
use kspart_core::solvers::{
    best_subset_oracle, lift_assignment, lifted_expectation, r_partition, two_partition, IndexPartition,
};
use kspart_core::{CoefficientVector, HermitianMatrix, SolverConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dictionary_consistency(d in 1usize..4, extra in 0usize..8, seed in 0u64..1000, mask in any::<u16>(), t in 0.0f64..1.0) {
        let m = d + extra;
        let frame = random_tight(d, m, seed).unwrap();
        let p = frame_to_projection(&frame).unwrap();
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let q = DiagonalProjection::from_indices(m, &subset).unwrap();
        let frame_side = (&frame.subset_sum(&subset) - &HermitianMatrix::identity(d).scale(t)).norm();
        let proj_side = (&pqp(&p, &q).unwrap() - &p.matrix().scale(t)).norm();
        prop_assert!((frame_side - proj_side).abs() <= 1e-9);
    }

    #[test]
    fn pqp_is_a_contraction(d in 1usize..4, extra in 0usize..8, seed in 0u64..1000, mask in any::<u16>()) {
        let m = d + extra;
        let p = frame_to_projection(&random_tight(d, m, seed).unwrap()).unwrap();
        let q = DiagonalProjection::new((0..m).map(|i| mask >> i & 1 == 1).collect());
        let x = pqp(&p, &q).unwrap();
        prop_assert!(x.min_eigenvalue() >= -1e-12);
        prop_assert!(x.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn two_partition_sums_to_frame_operator(d in 1usize..4, extra in 0usize..9, seed in 0u64..1000) {
        let frame = random_tight(d, d + extra, seed).unwrap();
        let split = two_partition(&frame, &SolverConfig::exhaustive()).unwrap();
        let total = &frame.subset_sum(split.partition.block(0)) + &frame.subset_sum(split.partition.block(1));
        prop_assert!((&total - &HermitianMatrix::identity(d)).norm() <= 1e-9);
        prop_assert!(split.meets_bound);
    }

    #[test]
    fn r_partition_blocks_cover(seed in 0u64..1000, m in 3usize..9) {
        let frame = random_tight(2, m, seed).unwrap();
        let out = r_partition(&frame, &[0.5, 0.3, 0.2], &SolverConfig::default()).unwrap();
        let mut seen: Vec<usize> = out.partition.blocks().concat();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn lifted_blocks_are_scaled_block_sums(seed in 0u64..1000, labels in proptest::collection::vec(0usize..3, 6)) {
        let frame = random_tight(2, 6, seed).unwrap();
        let weights = [0.5, 0.25, 0.25];
        let op = lift_assignment(&frame, &weights, &labels).unwrap().frame_operator();
        for (j, t) in weights.iter().enumerate() {
            let block: Vec<usize> = (0..6).filter(|&i| labels[i] == j).collect();
            let expected = frame.subset_sum(&block).scale(1.0 / t);
            for a in 0..2 {
                for b in 0..2 {
                    prop_assert!((op.entry(2 * j + a, 2 * j + b) - expected.entry(a, b)).norm() <= 1e-12);
                }
            }
            for k in (0..3).filter(|&k| k != j) {
                prop_assert!(op.entry(2 * j, 2 * k).norm() == 0.0);
            }
        }
        let expectation = lifted_expectation(&frame, &weights).unwrap();
        prop_assert!((&expectation - &HermitianMatrix::identity(6)).norm() <= 1e-9);
    }

    #[test]
    fn buckets_round_within_one_step(values in proptest::collection::vec(0.0f64..=1.0, 1..20), eps in 1e-12f64..1.0) {
        let t = CoefficientVector::new(values.clone()).unwrap();
        let plan = bucket_coefficients(&t, eps).unwrap();
        let n = plan.n as f64;
        prop_assert!(((eps.powf(-0.125)) - n).abs() <= 0.5 + 1e-12 || plan.n == 1);
        for (ti, ri) in values.iter().zip(&plan.rounded) {
            prop_assert!((ti - ri).abs() <= 1.0 / n + 1e-15);
            prop_assert!((0.0..=1.0).contains(ri));
        }
    }

    #[test]
    fn pipelines_respect_oracle_and_bounds(d in 2usize..4, m in 5usize..11, seed in 0u64..500, t in 0.0f64..=1.0) {
        let frame = random_sub_tight(d, m, seed).unwrap();
        let cfg = SolverConfig::exhaustive();
        let s = scalar_target_subset(&frame, t, &cfg).unwrap().result;
        prop_assert!(s.meets_bound().unwrap());
        let oracle = best_subset_oracle(&frame, &s.target).unwrap();
        prop_assert!(s.error >= oracle.error - 1e-12);

        let coeffs = CoefficientVector::new((0..m).map(|i| ((i as f64 + 1.0) * t).fract()).collect()).unwrap();
        let c = convex_combination_subset(&frame, &coeffs, &cfg).unwrap().result;
        prop_assert!(c.meets_bound().unwrap());
        let oracle = best_subset_oracle(&frame, &c.target).unwrap();
        prop_assert!(c.error >= oracle.error - 1e-12);
    }
}

#[test]
fn solvers_are_deterministic() {
    let frame = random_tight(3, 14, 11).unwrap();
    let a = two_partition(&frame, &SolverConfig::exhaustive()).unwrap();
    let b = two_partition(&frame, &SolverConfig::exhaustive()).unwrap();
    assert_eq!(a.partition, b.partition);
    assert_eq!(a.norms, b.norms);
    let a = two_partition(&frame, &SolverConfig::local(4)).unwrap();
    let b = two_partition(&frame, &SolverConfig::local(4)).unwrap();
    assert_eq!(a.partition, b.partition);
}

#[test]
fn exhaustive_split_beats_local_search() {
    for seed in 0..10 {
        let frame = random_tight(2, 12, seed).unwrap();
        let exact = two_partition(&frame, &SolverConfig::exhaustive()).unwrap();
        let local = two_partition(&frame, &SolverConfig::local(seed)).unwrap();
        assert!(local.max_norm() >= exact.max_norm() - 1e-12);
        let from_labels = IndexPartition::from_labels(&local.partition.labels(), 2).unwrap();
        assert_eq!(from_labels, local.partition);
    }
}
