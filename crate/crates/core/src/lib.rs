pub mod analysis;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod scalar;
pub mod schemes;
pub mod semidiscretize;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ScaledVector64 = linalg::ScaledVector<f64>;
pub type ScaledVector32 = linalg::ScaledVector<f32>;
pub type BandedMatrix64 = linalg::BandedMatrix<f64>;
pub type BandedMatrix32 = linalg::BandedMatrix<f32>;
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type DenseMatrix32 = linalg::DenseMatrix<f32>;
pub type ProblemSpec64 = semidiscretize::ProblemSpec<f64>;
pub type ProblemSpec32 = semidiscretize::ProblemSpec<f32>;
pub type SplitOperator64 = semidiscretize::SplitOperator2D<f64>;
pub type SplitOperator32 = semidiscretize::SplitOperator2D<f32>;
pub type DenseSplit64 = semidiscretize::DenseSplit<f64>;
pub type SchemeConfig64 = schemes::SchemeConfig<f64>;
pub type SymbolTriple64 = analysis::SymbolTriple<f64>;
