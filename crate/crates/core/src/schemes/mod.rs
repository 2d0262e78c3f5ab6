//! ADI time steppers for split linear systems `U' = sum_j (A_j U + g_j(t))`.
//!
//! The modified Craig-Sneyd (MCS) scheme treats the mixed part `A0`
//! explicitly and each direction `A1..Ak` implicitly in two sweeps; `theta =
//! 1/2` gives the Craig-Sneyd scheme. The Hundsdorfer-Verwer (HV) scheme is
//! provided as a reference integrator.

mod config;
mod hv;
mod mcs;

pub use config::{integrate, SchemeConfig, SchemeKind};
pub use hv::{hv_step, HvStepper};
pub use mcs::{mcs_step, perturbed_mcs_step, McsStepper, PerturbationSet, StageTrace};

/// `theta = 1/2 + sqrt(3)/6`, the HV parameter used for reference solutions.
pub fn hv_reference_theta<T: crate::Scalar>() -> T {
    T::lit(0.5) + T::lit(3.0).sqrt() / T::lit(6.0)
}
