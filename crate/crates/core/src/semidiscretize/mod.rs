//! Finite difference semidiscretization of
//! `u_t = d11 u_xx + 2 d12 u_xy + d22 u_yy + c1 u_x + c2 u_y` on the unit
//! square with Dirichlet data `u(x, y, t) = exp(-r t) b(x, y)`.
//!
//! The result is a split linear system `U' = (A0 + A1 + A2) U + g0 + g1 + g2`
//! where `A0` holds the mixed derivative and `A1`, `A2` act along x- and
//! y-lines respectively.

mod operator;
mod problem;
pub(crate) mod system;

pub use operator::{assemble, LineFactor, SplitOperator2D};
pub use problem::{initial_vector, model_initial, Coefficients, Evaluator, Grid2D, ProblemSpec};
pub use system::{DenseSplit, ShiftedSolve, SplitSystem};
