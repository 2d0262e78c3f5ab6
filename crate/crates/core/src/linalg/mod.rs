//! Real linear algebra under the scaled inner product `(v, w) = v.w / m`.
//!
//! Banded matrices carry the one-dimensional directional operators and their
//! shifted solves; dense matrices are only used at verification scale.

mod banded;
mod dense;
mod expm;
mod vector;

pub use banded::{banded_solve, BandedLu, BandedMatrix};
pub use dense::{dense_power_norm, DenseLu, DenseMatrix, DENSE_CAP_DEFAULT};
pub use expm::expm;
pub use vector::{scaled_inner, scaled_norm, ScaledVector};
