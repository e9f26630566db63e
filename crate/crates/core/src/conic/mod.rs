//! Block-diagonal conic programs over nonnegative orthants and complex
//! Hermitian PSD cones, and the interior-point solver behind every
//! optimization in this crate.

pub mod dump;
mod problem;
mod solver;

pub use problem::{Block, BlockKind, BlockValue, Coefficient, ConicProblem, Constraint, Sense, Term};
pub use solver::{solve, ConicSolution, Residuals, SolverOptions, Status};
