//! Trajectory-restricted convergence analysis for proximal gradient methods.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see
//! [`Scalar`]); the aliases at the bottom fix it to `f64`.

pub mod analytics;
pub mod constants;
pub mod error;
pub mod linalg;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, EnsembleKind, EnsembleSpec};
pub use scalar::Scalar;

pub type Matrix = DenseMatrix<f64>;
pub type Vector = Vec<f64>;
pub type Problem = problem::CompositeProblem<f64>;
pub type Reg = problem::Regularizer<f64>;
pub type Polyhedron = problem::PolyhedralSystem<f64>;
pub type Config = solver::SolverConfig<f64>;
pub type Run = solver::Trajectory<f64>;
pub type Report = constants::ConstantsReport<f64>;
pub type Hoffman = constants::HoffmanEstimate<f64>;
pub type RegionF64 = constants::Region<f64>;
pub type RestrictionF64 = constants::Restriction<f64>;
pub type OptimalityData = analytics::LassoOptimalityData<f64>;
