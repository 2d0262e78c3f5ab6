use crate::error::Result;
use crate::linalg::{DenseMatrix, ScaledVector};
use crate::scalar::Scalar;
use crate::schemes::{McsStepper, PerturbationSet};
use crate::semidiscretize::DenseSplit;

use super::stability::{local_error_vector, stability_matrix};

/// Builds the stability matrix from scaled parts and `theta`.
pub type StabilityBuilder<T> = dyn Fn(&[DenseMatrix<T>], T) -> Result<DenseMatrix<T>>;

/// Outcome of one check of `e_n = R e_{n-1} + d_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionCheck<T> {
    /// `U*_n - U_n` from the two stepper runs.
    pub stepped: ScaledVector<T>,
    /// `R e_{n-1} + d_n` from dense algebra.
    pub predicted: ScaledVector<T>,
    pub relative_residual: T,
}

/// Steps `exact_prev` with the perturbations and `approx_prev` without, and
/// compares the difference against the dense recursion.
///
/// `builder` defaults to [`stability_matrix`] through [`check_recursion`];
/// passing a different one lets tests confirm the check can fail.
#[allow(clippy::too_many_arguments)]
pub fn check_recursion_with<T: Scalar>(
    system: &DenseSplit<T>,
    theta: T,
    dt: T,
    t_prev: T,
    exact_prev: &ScaledVector<T>,
    approx_prev: &ScaledVector<T>,
    perturbations: &PerturbationSet<T>,
    builder: &StabilityBuilder<T>,
) -> Result<RecursionCheck<T>> {
    let stepper = McsStepper::new(system, theta, dt)?;
    let (perturbed, _) = stepper.step_perturbed(t_prev, exact_prev, perturbations)?;
    let plain = stepper.step(t_prev, approx_prev)?;
    let stepped = perturbed.sub(&plain);

    let z = system.scaled_parts(dt);
    let r = builder(&z, theta)?;
    let e_prev = exact_prev.sub(approx_prev);
    let d = local_error_vector(&z, theta, perturbations)?;
    let predicted = r.matvec(&e_prev)?.add(&d);

    let scale = stepped.max_abs().max(predicted.max_abs()).max(T::min_positive_value());
    let relative_residual = stepped.sub(&predicted).max_abs() / scale;
    Ok(RecursionCheck {
        stepped,
        predicted,
        relative_residual,
    })
}

pub fn check_recursion<T: Scalar>(
    system: &DenseSplit<T>,
    theta: T,
    dt: T,
    t_prev: T,
    exact_prev: &ScaledVector<T>,
    approx_prev: &ScaledVector<T>,
    perturbations: &PerturbationSet<T>,
) -> Result<RecursionCheck<T>> {
    check_recursion_with(
        system,
        theta,
        dt,
        t_prev,
        exact_prev,
        approx_prev,
        perturbations,
        &stability_matrix::<T>,
    )
}
