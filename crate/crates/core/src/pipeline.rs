//! The reduction chain from partitions of tight frames to arbitrary
//! coefficient targets.
//!
//! 1. [`scalar_target_subset`]: for a sub-tight family with frame operator
//!    `B`, whiten the part of the spectrum at or above `sqrt(eps)` into a
//!    tight frame, split it two ways with weights `(t, 1 - t)`, and keep the
//!    first block. The result approximates `tB`.
//! 2. [`convex_combination_subset`]: round each coefficient to a multiple of
//!    `1/n` with `n` the nearest integer to `eps^{-1/8}`, solve step 1 per
//!    bucket and take the union. The result approximates `sum t_i u_i u_i*`.
//! 3. [`compact_truncation`]: run step 2 on dyadic blocks with shrinking
//!    `eps` and tabulate how fast the error tail decays.
//!
//! The constants in [`certified_scalar_bound`] add up the four block
//! estimates of step 1 explicitly: the whitened block contributes
//! `2 sqrt(2) eps^{1/4} + 2 sqrt(eps)` (the two-way split deviation plus the
//! distance between `t` and its recentred `t'`), the off-diagonal pair
//! `eps^{1/4}`, and the low-spectrum corner `sqrt(eps)` each for `D` and `tB`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frames::{build_frame, FrameSystem, TIGHT_TOL};
use crate::linalg::{in_interval, psd_leq, CMatrix, CVector, HermitianMatrix, C64};
use crate::solvers::{r_partition, Provenance, SelectionResult, SolverConfig, SolverKind};

/// Coefficients `t_i` in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    t: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = t.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidInput(format!("coefficient {i} is {v}, outside [0, 1]")));
        }
        Ok(Self { t })
    }

    pub fn constant(m: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }
}

/// The whitened system built for one scalar solve.
#[derive(Clone, Debug)]
pub struct ScalingContext {
    /// Projector onto the spectral subspace of `B` for `[sqrt(eps), inf)`.
    pub projector: HermitianMatrix,
    /// `B^{-1/2}` on that subspace, zero off it.
    pub whitening: HermitianMatrix,
    /// `v_i = C u_i`.
    pub scaled_vectors: Vec<CVector>,
    /// `max ||v_i||^2`.
    pub eps_v: f64,
    pub rank: usize,
}

impl ScalingContext {
    /// `sum v_i v_i*`.
    pub fn scaled_frame_operator(&self) -> HermitianMatrix {
        let d = self.projector.dim();
        let mut acc = HermitianMatrix::zeros(d);
        for v in &self.scaled_vectors {
            acc.add_outer(v);
        }
        acc
    }

    /// `(||P D (I - P)||, ||(I - P) D (I - P)||)` for a subset sum `D`.
    pub fn block_estimates(&self, achieved: &HermitianMatrix) -> (f64, f64) {
        let p = self.projector.as_matrix();
        let q = CMatrix::identity(p.nrows(), p.ncols()) - p;
        let d = achieved.as_matrix();
        let off = (p * d * &q).singular_values().max();
        let corner = HermitianMatrix::from_raw(&q * d * &q).norm();
        (off, corner)
    }
}

#[derive(Clone, Debug)]
pub struct ScalarSelection {
    pub result: SelectionResult,
    pub context: ScalingContext,
    /// Recentred level `t'` of the two-way split on the whitened system, when
    /// a split was needed.
    pub t_prime: Option<f64>,
}

/// `(2 sqrt(2) + 1) eps^{1/4} + 4 sqrt(eps)`.
pub fn certified_scalar_bound(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok((2.0 * std::f64::consts::SQRT_2 + 1.0) * eps.powf(0.25) + 4.0 * eps.sqrt())
}

/// `n eps-bound + 1/n` with `n` the bucket count for `eps`.
pub fn certified_combination_bound(eps: f64) -> Result<f64> {
    let n = bucket_count(eps)?;
    Ok(n as f64 * certified_scalar_bound(eps)? + 1.0 / n as f64)
}

/// `max(1, round(eps^{-1/8}))`.
pub fn bucket_count(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok((eps.powf(-0.125).round() as usize).max(1))
}

/// Epsilon as fed to the bound formulas; families at `eps = 0` are handled
/// before any bound is needed.
fn bound_eps(eps: f64) -> f64 {
    eps.min(1.0)
}

pub fn scaling_context(frame: &FrameSystem) -> Result<ScalingContext> {
    let d = frame.d();
    let eps = frame.epsilon();
    if eps == 0.0 {
        return Ok(ScalingContext {
            projector: HermitianMatrix::zeros(d),
            whitening: HermitianMatrix::zeros(d),
            scaled_vectors: vec![CVector::zeros(d); frame.m()],
            eps_v: 0.0,
            rank: 0,
        });
    }
    let cut = eps.sqrt();
    let eig = frame.frame_operator().eigh();
    let keep = |l: f64| in_interval(l, cut, f64::INFINITY);
    let projector = eig.reassemble(keep, |_| 1.0);
    let whitening = eig.reassemble(keep, |l| 1.0 / l.sqrt());
    let c = whitening.as_matrix();
    let scaled_vectors: Vec<CVector> = frame.vectors().iter().map(|u| c * u).collect();
    let eps_v = scaled_vectors.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    let rank = eig.eigenvalues.iter().filter(|&&l| keep(l)).count();
    Ok(ScalingContext { projector, whitening, scaled_vectors, eps_v, rank })
}

/// Selects `S` with `sum_{i in S} u_i u_i*` close to `tB`.
pub fn scalar_target_subset(frame: &FrameSystem, t: f64, cfg: &SolverConfig) -> Result<ScalarSelection> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("t must lie in [0, 1], got {t}")));
    }
    cfg.validate()?;
    let m = frame.m();
    let eps = frame.epsilon();
    let context = scaling_context(frame)?;
    let target = frame.frame_operator().scale(t);
    let bound = if eps > 0.0 { certified_scalar_bound(bound_eps(eps))? } else { 0.0 };
    let provenance = |seed, iterations| Provenance { solver: SolverKind::Pipeline, seed, iterations };

    if eps == 0.0 || t == 0.0 || context.rank == 0 {
        let result = SelectionResult::evaluate(frame, Vec::new(), target, Some(bound), provenance(None, 0));
        return Ok(ScalarSelection { result, context, t_prime: None });
    }
    if t == 1.0 {
        let result = SelectionResult::evaluate(frame, (0..m).collect(), target, Some(bound), provenance(None, 0));
        return Ok(ScalarSelection { result, context, t_prime: None });
    }

    let compressed = compressed_frame(&context)?;
    let split = r_partition(&compressed, &[t, 1.0 - t], cfg)?;
    let reps = 2.0 * compressed.epsilon();
    let t_prime = t + (t - 0.5) * (2.0 * reps.sqrt() + reps);
    let result = SelectionResult::evaluate(
        frame,
        split.partition.block(0).to_vec(),
        target,
        Some(bound),
        provenance(split.provenance.seed, split.provenance.iterations),
    );
    Ok(ScalarSelection { result, context, t_prime: Some(t_prime) })
}

/// The whitened vectors in coordinates of the retained eigenbasis, which
/// form a tight frame of dimension `rank`.
fn compressed_frame(context: &ScalingContext) -> Result<FrameSystem> {
    let eig = context.projector.eigh();
    let (basis, _) = eig.columns_where(|l| l > 0.5);
    let adjoint = basis.adjoint();
    let vectors = context.scaled_vectors.iter().map(|v| &adjoint * v).collect();
    let compressed = build_frame(vectors, TIGHT_TOL)?;
    if !compressed.is_tight() {
        return Err(Error::NotTight { deviation: compressed.tight_deviation() });
    }
    Ok(compressed)
}

/// Rounded coefficients and the index buckets they induce.
#[derive(Clone, Debug)]
pub struct BucketPlan {
    pub n: usize,
    /// `levels[i] = k` with `t'_i = k / n`.
    pub levels: Vec<usize>,
    /// `buckets[k]` holds the indices at level `k`, for `k` in `0..=n`.
    /// Level 0 takes no part in selection.
    pub buckets: Vec<Vec<usize>>,
    pub rounded: Vec<f64>,
}

/// Rounds each `t_i` half-up to the nearest multiple of `1/n`.
pub fn bucket_coefficients(t: &CoefficientVector, eps: f64) -> Result<BucketPlan> {
    let n = bucket_count(eps)?;
    let nf = n as f64;
    let levels: Vec<usize> = t.values().iter().map(|&ti| ((nf * ti + 0.5).floor().clamp(0.0, nf)) as usize).collect();
    let mut buckets = vec![Vec::new(); n + 1];
    for (i, &k) in levels.iter().enumerate() {
        buckets[k].push(i);
    }
    let rounded = levels.iter().map(|&k| k as f64 / nf).collect();
    Ok(BucketPlan { n, levels, buckets, rounded })
}

#[derive(Clone, Debug)]
pub struct BucketOutcome {
    pub level: usize,
    pub indices: Vec<usize>,
    /// Chosen subset of `indices`.
    pub chosen: Vec<usize>,
    /// `||sum_{chosen} u_i u_i* - (k/n) sum_{indices} u_i u_i*||`.
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct CombinationSelection {
    pub result: SelectionResult,
    pub plan: BucketPlan,
    pub buckets: Vec<BucketOutcome>,
}

/// Selects `S` with `sum_{i in S} u_i u_i*` close to `sum t_i u_i u_i*`.
pub fn convex_combination_subset(
    frame: &FrameSystem,
    t: &CoefficientVector,
    cfg: &SolverConfig,
) -> Result<CombinationSelection> {
    if t.len() != frame.m() {
        return Err(Error::DimensionMismatch { expected: frame.m(), found: t.len() });
    }
    cfg.validate()?;
    let eps = frame.epsilon();
    let plan_eps = if eps > 0.0 { bound_eps(eps) } else { 1.0 };
    let plan = bucket_coefficients(t, plan_eps)?;
    let n = plan.n;

    let buckets: Vec<BucketOutcome> = (1..=n)
        .into_par_iter()
        .filter(|&k| !plan.buckets[k].is_empty())
        .map(|k| -> Result<BucketOutcome> {
            let indices = plan.buckets[k].clone();
            let sub = frame.sub_frame(&indices)?;
            let level = k as f64 / n as f64;
            let solved = scalar_target_subset(&sub, if k == n { 1.0 } else { level }, cfg)?;
            let chosen = solved.result.subset.iter().map(|&j| indices[j]).collect();
            Ok(BucketOutcome { level: k, indices, chosen, error: solved.result.error })
        })
        .collect::<Result<_>>()?;

    let subset: Vec<usize> = buckets.iter().flat_map(|b| b.chosen.iter().copied()).collect();
    let iterations = 0;
    let target = frame.weighted_sum(t.values());
    let bound = if eps > 0.0 { certified_combination_bound(plan_eps)? } else { 0.0 };
    let result = SelectionResult::evaluate(
        frame,
        subset,
        target,
        Some(bound),
        Provenance { solver: SolverKind::Pipeline, seed: Some(cfg.local_search.seed), iterations },
    );
    Ok(CombinationSelection { result, plan, buckets })
}

/// `delta_N = sum_{n > N} 2^{-n/8}` in closed form.
pub fn tail_bound(n: usize) -> f64 {
    let ratio = 2f64.powf(-0.125);
    ratio.powi(n as i32 + 1) / (1.0 - ratio)
}

#[derive(Clone, Debug)]
pub struct TruncationBlock {
    pub index: usize,
    pub epsilon: f64,
    pub chosen: Vec<usize>,
    pub error: f64,
    /// Bound at the block's own epsilon.
    pub bound: f64,
    /// Bound at the block's budget `2^{-n}`.
    pub budget_bound: f64,
    pub within_bound: bool,
    pub within_budget_bound: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct TailRow {
    pub level: usize,
    /// `delta_N`.
    pub delta: f64,
    /// `||sum_{n > N} (D_n - T_n)||`.
    pub remainder: f64,
}

#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub blocks: Vec<TruncationBlock>,
    pub tails: Vec<TailRow>,
}

/// Runs the coefficient pipeline on dyadic blocks (block `n` must have
/// `eps_n <= 2^{-n}`) and tabulates the error tail for `N = 0..=n_max`.
pub fn compact_truncation(
    blocks: &[FrameSystem],
    coefficients: &[CoefficientVector],
    n_max: usize,
    cfg: &SolverConfig,
) -> Result<TruncationReport> {
    if blocks.is_empty() {
        return Err(Error::InvalidInput("need at least one block".into()));
    }
    if blocks.len() != coefficients.len() {
        return Err(Error::DimensionMismatch { expected: blocks.len(), found: coefficients.len() });
    }
    let d = blocks[0].d();
    let mut combined = HermitianMatrix::zeros(d);
    for (n, block) in blocks.iter().enumerate() {
        if block.d() != d {
            return Err(Error::DimensionMismatch { expected: d, found: block.d() });
        }
        let budget = 2f64.powi(-(n as i32));
        if block.epsilon() > budget + 1e-12 {
            return Err(Error::BlockBudget { block: n, epsilon: block.epsilon(), budget });
        }
        combined = &combined + block.frame_operator();
    }
    if !psd_leq(&combined, &HermitianMatrix::identity(d), 1e-9)? {
        return Err(Error::NotSubTight {
            min_eigenvalue: (&HermitianMatrix::identity(d) - &combined).min_eigenvalue(),
        });
    }

    let mut differences = Vec::with_capacity(blocks.len());
    let mut rows = Vec::with_capacity(blocks.len());
    for (n, (block, t)) in blocks.iter().zip(coefficients).enumerate() {
        let solved = convex_combination_subset(block, t, cfg)?;
        let r = &solved.result;
        let budget_bound = certified_combination_bound(2f64.powi(-(n as i32)))?;
        let bound = r.certified_bound.unwrap_or(0.0);
        rows.push(TruncationBlock {
            index: n,
            epsilon: block.epsilon(),
            chosen: r.subset.clone(),
            error: r.error,
            bound,
            budget_bound,
            within_bound: r.error <= bound,
            within_budget_bound: r.error <= budget_bound,
        });
        differences.push(&r.achieved - &r.target);
    }

    let tails = (0..=n_max)
        .map(|level| {
            let mut rest = HermitianMatrix::zeros(d);
            for diff in differences.iter().skip(level + 1) {
                rest = &rest + diff;
            }
            TailRow { level, delta: tail_bound(level), remainder: rest.norm() }
        })
        .collect();
    Ok(TruncationReport { blocks: rows, tails })
}

/// Scales every vector by `sqrt(factor)`.
pub fn scale_frame(frame: &FrameSystem, factor: f64) -> Result<FrameSystem> {
    let s = C64::new(factor.sqrt(), 0.0);
    build_frame(frame.vectors().iter().map(|u| u * s).collect(), frame.tolerance())
}
