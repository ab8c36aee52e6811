//! Exhaustive engines.
//!
//! Both engines split the search space into a fixed set of shards (by the
//! choices made for the first few indices), solve the shards in parallel and
//! merge them in shard order. Since the shard layout does not depend on the
//! thread count, serial and parallel runs pick the same answer.

use rayon::prelude::*;

use super::{mask_lex_less, RECOMPUTE_EVERY, TIE_TOL};
use crate::linalg::{raw_max_eigenvalue, CMatrix, CVector, C64};

const TARGET_SHARDS: usize = 16;

#[derive(Clone, Copy, Debug)]
pub(crate) struct SubsetOutcome {
    pub mask: u64,
    pub value: f64,
    pub nodes: u64,
}

fn subset_better(value: f64, mask: u64, best: &SubsetOutcome) -> bool {
    if value < best.value - TIE_TOL {
        return true;
    }
    if value > best.value + TIE_TOL {
        return false;
    }
    let (ca, cb) = (mask.count_ones(), best.mask.count_ones());
    if ca != cb {
        return ca < cb;
    }
    mask_lex_less(mask, best.mask)
}

fn sum_of_mask(vectors: &[CVector], mask: u64, d: usize) -> CMatrix {
    let mut acc = CMatrix::zeros(d, d);
    for (i, u) in vectors.iter().enumerate() {
        if mask >> i & 1 == 1 {
            acc.gerc(C64::new(1.0, 0.0), u, u, C64::new(1.0, 0.0));
        }
    }
    acc
}

/// Minimizes `objective(sum_{i in S} u_i u_i*)` over all subsets `S`.
///
/// Ties (within [`TIE_TOL`]) go to the smaller subset, then to the
/// lexicographically smaller one.
pub(crate) fn min_over_subsets<F>(vectors: &[CVector], d: usize, objective: F) -> SubsetOutcome
where
    F: Fn(&CMatrix) -> f64 + Sync,
{
    let m = vectors.len();
    assert!(m < 64, "subset enumeration needs m < 64");
    let k = m.min(TARGET_SHARDS.trailing_zeros() as usize);
    let free = m - k;

    let shards: Vec<SubsetOutcome> = (0..1u64 << k)
        .into_par_iter()
        .map(|prefix| {
            let mut mask = prefix;
            let mut sum = sum_of_mask(vectors, mask, d);
            let mut best = SubsetOutcome { mask, value: objective(&sum), nodes: 1 };
            let mut updates = 0u64;
            for step in 1..1u64 << free {
                let bit = k + step.trailing_zeros() as usize;
                let u = &vectors[bit];
                mask ^= 1 << bit;
                let sign = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
                updates += 1;
                if updates.is_multiple_of(RECOMPUTE_EVERY) {
                    sum = sum_of_mask(vectors, mask, d);
                } else {
                    sum.gerc(C64::new(sign, 0.0), u, u, C64::new(1.0, 0.0));
                }
                let value = objective(&sum);
                if subset_better(value, mask, &best) {
                    best.mask = mask;
                    best.value = value;
                }
                best.nodes += 1;
            }
            best
        })
        .collect();

    let nodes = shards.iter().map(|s| s.nodes).sum();
    let mut best = shards[0];
    for s in &shards[1..] {
        if subset_better(s.value, s.mask, &best) {
            best = *s;
        }
    }
    best.nodes = nodes;
    best
}

#[derive(Clone, Debug)]
pub(crate) struct PartitionOutcome {
    pub labels: Vec<usize>,
    pub value: f64,
    pub nodes: u64,
}

fn partition_better(value: f64, labels: &[usize], best: &Option<PartitionOutcome>) -> bool {
    let Some(best) = best else { return true };
    if value < best.value - TIE_TOL {
        return true;
    }
    if value > best.value + TIE_TOL {
        return false;
    }
    let card = |l: &[usize]| l.iter().filter(|&&j| j == 0).count();
    (card(labels), labels) < (card(&best.labels), best.labels.as_slice())
}

/// Minimizes `max_j scale_j * ||sum_{i in S_j} u_i u_i*||` over all
/// labelings of `0..m` into `scales.len()` blocks, by depth-first
/// branch and bound. Block norms only grow as indices are added, so any
/// branch whose partial value already exceeds the best by more than
/// [`TIE_TOL`] is cut.
///
/// With `pin_first`, index 0 is forced into block 0 (used to quotient out
/// the block swap symmetry). Ties go to the smaller block 0, then to the
/// lexicographically smaller labeling.
pub(crate) fn min_max_partition(vectors: &[CVector], d: usize, scales: &[f64], pin_first: bool) -> PartitionOutcome {
    let m = vectors.len();
    let r = scales.len();
    let start = usize::from(pin_first && m > 0);
    let mut depth = 0;
    while depth < m - start && r.pow(depth as u32) < TARGET_SHARDS {
        depth += 1;
    }
    let shard_count = r.pow(depth as u32);

    let shards: Vec<Option<PartitionOutcome>> = (0..shard_count)
        .into_par_iter()
        .map(|shard| {
            let mut labels = vec![0usize; m];
            let mut code = shard;
            for pos in (start..start + depth).rev() {
                labels[pos] = code % r;
                code /= r;
            }
            let mut state = Dfs {
                vectors,
                scales,
                sums: vec![CMatrix::zeros(d, d); r],
                norms: vec![0.0; r],
                labels,
                best: None,
                nodes: 0,
            };
            for (u, &j) in vectors.iter().zip(&state.labels).take(start + depth) {
                state.sums[j].gerc(C64::new(1.0, 0.0), u, u, C64::new(1.0, 0.0));
            }
            for ((norm, sum), c) in state.norms.iter_mut().zip(&state.sums).zip(scales) {
                *norm = raw_max_eigenvalue(sum) * c;
            }
            state.descend(start + depth);
            state.best.map(|mut b| {
                b.nodes = state.nodes;
                b
            })
        })
        .collect();

    let nodes = shards.iter().flatten().map(|s| s.nodes).sum();
    let mut best: Option<PartitionOutcome> = None;
    for s in shards.into_iter().flatten() {
        if partition_better(s.value, &s.labels, &best) {
            best = Some(s);
        }
    }
    let mut best = best.expect("at least one shard yields a leaf");
    best.nodes = nodes;
    best
}

struct Dfs<'a> {
    vectors: &'a [CVector],
    scales: &'a [f64],
    sums: Vec<CMatrix>,
    norms: Vec<f64>,
    labels: Vec<usize>,
    best: Option<PartitionOutcome>,
    nodes: u64,
}

impl Dfs<'_> {
    fn partial(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }

    fn descend(&mut self, pos: usize) {
        self.nodes += 1;
        if pos == self.vectors.len() {
            let value = self.partial();
            if partition_better(value, &self.labels, &self.best) {
                self.best = Some(PartitionOutcome { labels: self.labels.clone(), value, nodes: 0 });
            }
            return;
        }
        if let Some(best) = &self.best {
            if self.partial() > best.value + TIE_TOL {
                return;
            }
        }
        let u = &self.vectors[pos];
        for j in 0..self.scales.len() {
            let saved_sum = self.sums[j].clone();
            let saved_norm = self.norms[j];
            self.sums[j].gerc(C64::new(1.0, 0.0), u, u, C64::new(1.0, 0.0));
            self.norms[j] = raw_max_eigenvalue(&self.sums[j]) * self.scales[j];
            self.labels[pos] = j;
            self.descend(pos + 1);
            self.sums[j] = saved_sum;
            self.norms[j] = saved_norm;
        }
        self.labels[pos] = 0;
    }
}
