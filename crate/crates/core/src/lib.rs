//! Frames, projections and the partition solvers that certify spectral
//! splitting bounds on them.

pub mod error;
pub mod frames;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod projection;
pub mod solvers;
pub mod sweep;

pub use error::{Error, Result};
pub use frames::{
    build_frame, complete_to_tight, frame_to_projection, projection_to_frame, FrameSystem, ProjectionSystem, Tightness,
};
pub use linalg::{
    inv_sqrt_on_range, operator_norm, psd_leq, spectral_projector, CMatrix, CVector, HermitianMatrix, C64,
};
pub use pipeline::CoefficientVector;
pub use projection::{DiagonalMatrix, DiagonalProjection};
pub use solvers::{IndexPartition, SelectionResult, SolverConfig, Strategy};
