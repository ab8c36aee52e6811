//! Frame systems and the frame/projection dictionary.
//!
//! Gram convention: `P(i, j) = <u_j, u_i> = u_i* u_j`, with the inner product
//! conjugate-linear in its second argument. With `U = [u_1 .. u_m]` (d x m)
//! this is `P = U* U`, and `P e_j = U* u_j` is the image of the j-th basis
//! vector.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, HermitianMatrix, C64};

/// Threshold on `||B - I||` below which a family counts as tight.
pub const TIGHT_TOL: f64 = 1e-9;

/// Idempotence threshold for projection matrices.
pub const PROJECTION_TOL: f64 = 1e-9;

/// Eigenvalues of `I - B` at or below this are dropped by completion.
const COMPLETION_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tightness {
    Tight,
    SubTight,
}

/// A finite family `u_1 .. u_m` in `C^d` with `sum u_i u_i* <= I`.
#[derive(Clone, Debug)]
pub struct FrameSystem {
    d: usize,
    vectors: Vec<CVector>,
    epsilon: f64,
    frame_operator: HermitianMatrix,
    tightness: Tightness,
    /// `||B - I||`.
    deviation: f64,
    /// Smallest eigenvalue of `I - B`.
    slack: f64,
    tol: f64,
}

impl FrameSystem {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &CVector {
        &self.vectors[i]
    }

    /// `max ||u_i||^2`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `B = sum u_i u_i*`.
    pub fn frame_operator(&self) -> &HermitianMatrix {
        &self.frame_operator
    }

    pub fn tightness(&self) -> Tightness {
        self.tightness
    }

    pub fn is_tight(&self) -> bool {
        self.tightness == Tightness::Tight
    }

    /// `||B - I||` as measured at construction.
    pub fn tight_deviation(&self) -> f64 {
        self.deviation
    }

    /// Smallest eigenvalue of `I - B` as measured at construction.
    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `sum_{i in S} u_i u_i*`.
    pub fn subset_sum(&self, subset: &[usize]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.d);
        for &i in subset {
            acc.add_outer(&self.vectors[i]);
        }
        acc
    }

    /// `sum_i c_i u_i u_i*`.
    pub fn weighted_sum(&self, coefficients: &[f64]) -> HermitianMatrix {
        let mut acc = CMatrix::zeros(self.d, self.d);
        for (u, &c) in self.vectors.iter().zip(coefficients) {
            acc.gerc(C64::new(c, 0.0), u, u, C64::new(1.0, 0.0));
        }
        HermitianMatrix::from_raw(acc)
    }

    /// The family restricted to `indices`, in the given order.
    pub fn sub_frame(&self, indices: &[usize]) -> Result<FrameSystem> {
        let vectors = indices.iter().map(|&i| self.vectors[i].clone()).collect();
        build_frame(vectors, self.tol)
    }

    /// `d x m` synthesis matrix with the vectors as columns.
    pub fn synthesis(&self) -> CMatrix {
        let mut u = CMatrix::zeros(self.d, self.m());
        for (j, v) in self.vectors.iter().enumerate() {
            u.set_column(j, v);
        }
        u
    }
}

/// Validates a family and classifies it as tight or sub-tight.
///
/// Families whose `I - B` has an eigenvalue below `-tol` are rejected.
pub fn build_frame(vectors: Vec<CVector>, tol: f64) -> Result<FrameSystem> {
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidInput("frame needs at least one vector".into()));
    };
    let d = first.len();
    if d == 0 {
        return Err(Error::InvalidInput("ambient dimension must be positive".into()));
    }
    if let Some(bad) = vectors.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
    }
    if vectors.iter().flat_map(|v| v.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("vectors have non-finite entries".into()));
    }

    let epsilon = vectors.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
    let mut acc = CMatrix::zeros(d, d);
    for u in &vectors {
        acc.gerc(C64::new(1.0, 0.0), u, u, C64::new(1.0, 0.0));
    }
    let frame_operator = HermitianMatrix::from_raw(acc);
    let excess = &HermitianMatrix::identity(d) - &frame_operator;
    let slack = excess.min_eigenvalue();
    if slack < -tol {
        return Err(Error::NotSubTight { min_eigenvalue: slack });
    }
    let deviation = excess.norm();
    let tightness = if deviation <= TIGHT_TOL { Tightness::Tight } else { Tightness::SubTight };
    Ok(FrameSystem { d, vectors, epsilon, frame_operator, tightness, deviation, slack, tol })
}

/// Extends a sub-tight family to a tight frame by appending rank-one pieces
/// of `I - B`.
///
/// Each eigenpair `(λ, w)` of `I - B` with `λ > 1e-12` becomes
/// `K = ceil(λ / budget)` copies of `sqrt(λ / K) w`, so every appended vector
/// has squared norm at most `budget`. The input vectors come first, unchanged.
pub fn complete_to_tight(frame: &FrameSystem, eps_budget: f64) -> Result<FrameSystem> {
    if frame.is_tight() {
        return Ok(frame.clone());
    }
    if eps_budget.is_nan() || eps_budget <= 0.0 || eps_budget < frame.epsilon - 1e-12 {
        return Err(Error::BudgetTooSmall { budget: eps_budget, epsilon: frame.epsilon });
    }
    let excess = &HermitianMatrix::identity(frame.d) - &frame.frame_operator;
    let eig = excess.eigh();
    let mut vectors = frame.vectors.clone();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= COMPLETION_FLOOR {
            continue;
        }
        let copies = (lambda / eps_budget - 1e-12).ceil().max(1.0) as usize;
        let piece = eig.eigenvectors.column(k) * C64::new((lambda / copies as f64).sqrt(), 0.0);
        vectors.extend(std::iter::repeat_n(piece, copies));
    }
    build_frame(vectors, frame.tol)
}

/// An `m x m` orthogonal projection with its largest diagonal entry.
#[derive(Clone, Debug)]
pub struct ProjectionSystem {
    p: HermitianMatrix,
    diag_bound: f64,
}

impl ProjectionSystem {
    pub fn new(p: HermitianMatrix) -> Result<Self> {
        let square = HermitianMatrix::from_raw(p.as_matrix() * p.as_matrix());
        let defect = (&square - &p).norm();
        if defect > PROJECTION_TOL {
            return Err(Error::NotProjection { defect });
        }
        let diag_bound = p.real_diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { p, diag_bound })
    }

    pub fn m(&self) -> usize {
        self.p.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.p
    }

    /// Largest diagonal entry `max_i P(i, i)`.
    pub fn diag_bound(&self) -> f64 {
        self.diag_bound
    }

    pub fn rank(&self) -> usize {
        self.p.trace().round().max(0.0) as usize
    }
}

/// Gram matrix of a tight frame, a rank-`d` projection in `C^{m x m}`.
pub fn frame_to_projection(frame: &FrameSystem) -> Result<ProjectionSystem> {
    if !frame.is_tight() {
        return Err(Error::NotTight { deviation: frame.deviation });
    }
    let u = frame.synthesis();
    let gram = HermitianMatrix::from_raw(u.adjoint() * u);
    ProjectionSystem::new(gram)
}

/// Factors `P = W W*` with `W` an `m x d` isometry and returns the rows of
/// `W`, conjugated, as a tight frame in `C^d`.
pub fn projection_to_frame(ps: &ProjectionSystem) -> Result<FrameSystem> {
    let trace = ps.p.trace();
    if (trace - trace.round()).abs() > 1e-6 {
        return Err(Error::NonIntegralTrace { trace });
    }
    let eig = ps.p.eigh();
    let (w, _) = eig.columns_where(|l| l > 0.5);
    let d = w.ncols();
    if d == 0 {
        return Err(Error::InvalidInput("projection has rank zero".into()));
    }
    if d != trace.round() as usize {
        return Err(Error::InvalidInput(format!("rank {d} disagrees with trace {trace}")));
    }
    let vectors = (0..ps.m()).map(|i| w.row(i).adjoint()).collect();
    build_frame(vectors, TIGHT_TOL)
}
