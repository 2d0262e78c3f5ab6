use crate::error::{Error, Result};
use crate::linalg::{expm, DenseMatrix, ScaledVector, DENSE_CAP_DEFAULT};
use crate::scalar::Scalar;
use crate::schemes::McsStepper;
use crate::semidiscretize::{DenseSplit, SplitSystem};

/// Exact solution of `U' = A U + exp(-r t) g` through the augmented system
///
/// ```text
/// d/dt [U; s] = [A g; 0 -r] [U; s],   s(t) = exp(-r t)
/// ```
///
/// whose flow is a single matrix exponential.
#[derive(Clone, Debug)]
pub struct ExponentialReference<T> {
    augmented: DenseMatrix<T>,
    dim: usize,
}

impl<T: Scalar> ExponentialReference<T> {
    pub fn new(system: &DenseSplit<T>) -> Result<Self> {
        let n = system.dim();
        if n > DENSE_CAP_DEFAULT {
            return Err(Error::DenseCapExceeded {
                requested: n,
                cap: DENSE_CAP_DEFAULT,
            });
        }
        let a = system.full_matrix();
        let g = system.total_source_base();
        let r = system.decay();
        let augmented = DenseMatrix::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => g[i],
            (false, false) => -r,
            (false, true) => T::zero(),
        });
        Ok(Self { augmented, dim: n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flow over an interval of length `dt`, as an `(n+1) x (n+1)` matrix.
    pub fn propagator(&self, dt: T) -> Result<DenseMatrix<T>> {
        expm(&self.augmented.scale(dt))
    }

    /// `U(t_from + dt)` from `U(t_from)`.
    pub fn advance(&self, t_from: T, u: &ScaledVector<T>, dt: T) -> Result<ScaledVector<T>> {
        Ok(self.apply(&self.propagator(dt)?, t_from, u))
    }

    /// `U(t)` from `U(0) = u0`.
    pub fn solution_at(&self, u0: &ScaledVector<T>, t: T) -> Result<ScaledVector<T>> {
        self.advance(T::zero(), u0, t)
    }

    /// Applies a propagator to `[u; exp(-r t_from)]` and drops the last entry.
    pub fn apply(&self, propagator: &DenseMatrix<T>, t_from: T, u: &ScaledVector<T>) -> ScaledVector<T> {
        let n = self.dim;
        let r = -self.augmented[(n, n)];
        let mut w: Vec<T> = u.as_slice().to_vec();
        w.push((-r * t_from).exp());
        let mut out = vec![T::zero(); n + 1];
        propagator.mul_slice(&w, &mut out);
        out.truncate(n);
        ScaledVector::from_vec(out)
    }
}

/// Local errors `U(t0 + dt) - MCS(U(t0))` measured for a sequence of steps.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalErrorProbe<T> {
    /// `(dt, ||d||_2)` pairs in the order given.
    pub samples: Vec<(T, T)>,
}

impl<T: Scalar> LocalErrorProbe<T> {
    /// Slope of `log ||d||` against `log dt` between neighbouring samples.
    pub fn orders(&self) -> Vec<T> {
        self.samples
            .windows(2)
            .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
            .collect()
    }
}

/// Starts from the exact `U(t0)` and takes one MCS step of each size in `steps`.
pub fn probe_local_error<T: Scalar>(
    system: &DenseSplit<T>,
    theta: T,
    u0: &ScaledVector<T>,
    t0: T,
    steps: &[T],
) -> Result<LocalErrorProbe<T>> {
    let reference = ExponentialReference::new(system)?;
    let start = reference.solution_at(u0, t0)?;
    let samples = steps
        .iter()
        .map(|&dt| {
            let exact = reference.advance(t0, &start, dt)?;
            let stepped = McsStepper::new(system, theta, dt)?.step(t0, &start)?;
            Ok((dt, exact.sub(&stepped).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalErrorProbe { samples })
}
