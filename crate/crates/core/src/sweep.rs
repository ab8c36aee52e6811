//! Ladders of instances with shrinking epsilon, and a log-log fit of the
//! achieved error against epsilon.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::frames::FrameSystem;
use crate::generate::{diagonal_counterexample, random_tight, rng_for};
use crate::pipeline::{convex_combination_subset, scalar_target_subset, CoefficientVector};
use crate::solvers::{best_subset_oracle_with_limit, two_partition, SolverConfig, Strategy};

/// Where each rung's frame comes from. A rung value is `m` for random tight
/// frames and `M` for the counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    RandomTight { d: usize },
    Counterexample,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepTarget {
    /// Two-way split; the error is `||D - B/2||` for the first block.
    Half,
    /// Scalar pipeline at level `t`.
    Scalar(f64),
    /// Coefficient pipeline with coefficients drawn uniformly per seed.
    Coefficients,
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    pub family: Family,
    pub target: SweepTarget,
    pub ladder: Vec<usize>,
    pub seeds: Vec<u64>,
    pub cfg: SolverConfig,
    /// Also run the exhaustive subset oracle where `m` allows.
    pub oracle: bool,
    /// Record wall time per row; off gives byte-identical output.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub seed: u64,
    pub d: usize,
    pub m: usize,
    pub achieved: f64,
    pub bound: f64,
    pub oracle: Option<f64>,
    pub ms: u64,
    /// Ladder position.
    pub rung: usize,
}

/// Least-squares slope of `ln(error)` against `ln(eps)` with a 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub fit: Option<ExponentFit>,
}

pub const CSV_HEADER: [&str; 8] = ["eps", "seed", "d", "m", "achieved", "bound", "oracle", "ms"];

/// Coefficients for the `Coefficients` target: uniform on `[0, 1]`, drawn
/// from a stream keyed by the seed.
pub fn sweep_coefficients(m: usize, seed: u64) -> Result<CoefficientVector> {
    let mut rng = rng_for(seed ^ 0xc0ef_f1c1_e475_0000);
    CoefficientVector::new((0..m).map(|_| rng.random::<f64>()).collect())
}

fn instance(family: Family, rung: usize, seed: u64) -> Result<FrameSystem> {
    match family {
        Family::RandomTight { d } => random_tight(d, rung, seed),
        Family::Counterexample => diagonal_counterexample(rung),
    }
}

/// Runs every `(rung, seed)` pair; rows come back in ladder order, then seed
/// order.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepReport> {
    plan.cfg.validate()?;
    if let SweepTarget::Scalar(t) = plan.target {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("t must lie in [0, 1], got {t}")));
        }
    }
    let jobs: Vec<(usize, usize, u64)> =
        plan.ladder.iter().enumerate().flat_map(|(k, &rung)| plan.seeds.iter().map(move |&s| (k, rung, s))).collect();
    let rows: Vec<SweepRow> =
        jobs.into_par_iter().map(|(k, rung, seed)| run_row(plan, k, rung, seed)).collect::<Result<_>>()?;
    let fit = fit_exponent(&rows);
    Ok(SweepReport { rows, fit })
}

fn run_row(plan: &SweepPlan, rung_index: usize, rung: usize, seed: u64) -> Result<SweepRow> {
    let frame = instance(plan.family, rung, seed)?;
    let mut cfg = plan.cfg;
    cfg.local_search.seed = seed;
    let start = Instant::now();
    let eps = frame.epsilon();
    let (achieved, bound, target) = match plan.target {
        SweepTarget::Half => {
            let split = two_partition(&frame, &cfg)?;
            let target = frame.frame_operator().scale(0.5);
            let achieved = (&frame.subset_sum(split.partition.block(0)) - &target).norm();
            (achieved, (2.0 * eps).sqrt() + eps, target)
        }
        SweepTarget::Scalar(t) => {
            let r = scalar_target_subset(&frame, t, &cfg)?.result;
            (r.error, r.certified_bound.unwrap_or(0.0), r.target)
        }
        SweepTarget::Coefficients => {
            let t = sweep_coefficients(frame.m(), seed)?;
            let r = convex_combination_subset(&frame, &t, &cfg)?.result;
            (r.error, r.certified_bound.unwrap_or(0.0), r.target)
        }
    };
    let ms = if plan.timing { start.elapsed().as_millis() as u64 } else { 0 };
    let oracle = if plan.oracle && frame.m() <= plan.cfg.exhaustive_limit {
        Some(best_subset_oracle_with_limit(&frame, &target, plan.cfg.exhaustive_limit)?.error)
    } else {
        None
    };
    Ok(SweepRow { eps, seed, d: frame.d(), m: frame.m(), achieved, bound, oracle, ms, rung: rung_index })
}

/// Under an exhaustive strategy every row must meet its bound.
pub fn check_bounds(rows: &[SweepRow], strategy: Strategy) -> Result<()> {
    if strategy != Strategy::Exhaustive {
        return Ok(());
    }
    match rows.iter().find(|r| r.achieved > r.bound) {
        Some(bad) => Err(Error::BoundViolation { error: bad.achieved, bound: bad.bound }),
        None => Ok(()),
    }
}

/// Fits over rows with positive error; `None` with fewer than three points
/// or no spread in epsilon.
pub fn fit_exponent(rows: &[SweepRow]) -> Option<ExponentFit> {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.achieved > 0.0 && r.eps > 0.0).map(|r| (r.eps.ln(), r.achieved.ln())).collect();
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-12 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, nf - 2.0).ok()?.inverse_cdf(0.975);
    Some(ExponentFit { slope, intercept, ci_low: slope - q * se, ci_high: slope + q * se, points: n })
}

/// Median achieved error per rung, in ladder order.
pub fn rung_medians(rows: &[SweepRow]) -> Vec<f64> {
    let rungs = rows.iter().map(|r| r.rung + 1).max().unwrap_or(0);
    (0..rungs)
        .filter_map(|k| {
            let mut v: Vec<f64> = rows.iter().filter(|r| r.rung == k).map(|r| r.achieved).collect();
            if v.is_empty() {
                return None;
            }
            v.sort_by(f64::total_cmp);
            let h = v.len() / 2;
            Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
        })
        .collect()
}

/// Median realized epsilon per rung, in ladder order.
pub fn rung_eps_medians(rows: &[SweepRow]) -> Vec<f64> {
    let shifted: Vec<SweepRow> = rows.iter().map(|r| SweepRow { achieved: r.eps, ..r.clone() }).collect();
    rung_medians(&shifted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eps: f64, achieved: f64, rung: usize) -> SweepRow {
        SweepRow { eps, seed: 0, d: 2, m: 4, achieved, bound: 1.0, oracle: None, ms: 0, rung }
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let rows: Vec<_> = [0.5, 0.1, 0.01, 0.001].iter().map(|&e: &f64| row(e, 3.0 * e.powf(0.25), 0)).collect();
        let fit = fit_exponent(&rows).unwrap();
        assert!((fit.slope - 0.25).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!((fit.ci_high - fit.ci_low).abs() < 1e-9);
    }

    #[test]
    fn fit_interval_matches_t_table() {
        // ln(eps) = 0, 1, 2, 3 and ln(error) = 0.1, 0.9, 2.1, 2.9: slope 0.96,
        // sse 0.032, sxx 5, t(0.975, 2 dof) = 4.302652729696142.
        let ys: [f64; 4] = [0.1, 0.9, 2.1, 2.9];
        let rows: Vec<_> = ys.iter().enumerate().map(|(i, y)| row((i as f64).exp(), y.exp(), 0)).collect();
        let fit = fit_exponent(&rows).unwrap();
        assert!((fit.slope - 0.96).abs() < 1e-12);
        let half_width = 4.302652729696142 * (0.032f64 / 2.0 / 5.0).sqrt();
        assert!((fit.ci_high - fit.slope - half_width).abs() < 1e-9);
        assert!((fit.slope - fit.ci_low - half_width).abs() < 1e-9);
    }

    #[test]
    fn fit_needs_points() {
        assert!(fit_exponent(&[]).is_none());
        assert!(fit_exponent(&[row(0.1, 0.0, 0), row(0.2, 0.0, 0), row(0.3, 0.0, 0)]).is_none());
        assert!(fit_exponent(&[row(0.1, 1.0, 0), row(0.1, 2.0, 0), row(0.1, 3.0, 0)]).is_none());
    }

    #[test]
    fn bound_check_only_under_exhaustive() {
        let rows = vec![row(0.1, 2.0, 0)];
        assert!(matches!(check_bounds(&rows, Strategy::Exhaustive), Err(Error::BoundViolation { .. })));
        assert!(check_bounds(&rows, Strategy::Auto).is_ok());
    }

    #[test]
    fn medians_per_rung() {
        let rows = vec![row(0.1, 3.0, 0), row(0.1, 1.0, 0), row(0.1, 2.0, 0), row(0.05, 4.0, 1), row(0.05, 2.0, 1)];
        assert_eq!(rung_medians(&rows), vec![2.0, 3.0]);
    }

    #[test]
    fn empty_ladder_gives_no_rows() {
        let plan = SweepPlan {
            family: Family::RandomTight { d: 2 },
            target: SweepTarget::Half,
            ladder: vec![],
            seeds: vec![0, 1],
            cfg: SolverConfig::exhaustive(),
            oracle: true,
            timing: false,
        };
        let report = run_sweep(&plan).unwrap();
        assert!(report.rows.is_empty() && report.fit.is_none());
    }

    #[test]
    fn counterexample_ladder_is_exact() {
        let plan = SweepPlan {
            family: Family::Counterexample,
            target: SweepTarget::Half,
            ladder: vec![2, 4, 8, 16],
            seeds: vec![0],
            cfg: SolverConfig::default(),
            oracle: false,
            timing: false,
        };
        let report = run_sweep(&plan).unwrap();
        assert_eq!(report.rows.len(), 4);
        for r in &report.rows {
            assert!(r.achieved < 1e-12, "M = {}: {}", r.m / 2, r.achieved);
        }
    }

    #[test]
    fn random_tight_scalar_rows_within_bound() {
        let plan = SweepPlan {
            family: Family::RandomTight { d: 2 },
            target: SweepTarget::Scalar(0.3),
            ladder: vec![8, 12, 16],
            seeds: vec![0, 1, 2],
            cfg: SolverConfig::exhaustive(),
            oracle: true,
            timing: false,
        };
        let report = run_sweep(&plan).unwrap();
        check_bounds(&report.rows, Strategy::Exhaustive).unwrap();
        for r in &report.rows {
            assert!(r.achieved <= r.bound);
            assert!(r.achieved >= r.oracle.unwrap() - 1e-12);
        }
        let again = run_sweep(&plan).unwrap();
        assert_eq!(report.rows, again.rows);
    }

    #[test]
    fn forced_exhaustive_over_limit_fails() {
        let mut cfg = SolverConfig::exhaustive();
        cfg.exhaustive_limit = 10;
        let plan = SweepPlan {
            family: Family::RandomTight { d: 2 },
            target: SweepTarget::Half,
            ladder: vec![12],
            seeds: vec![0],
            cfg,
            oracle: false,
            timing: false,
        };
        assert!(matches!(run_sweep(&plan), Err(Error::TooLarge { .. })));
    }
}
