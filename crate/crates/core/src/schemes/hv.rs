use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::scalar::Scalar;
use crate::semidiscretize::system::check_dim;
use crate::semidiscretize::{ShiftedSolve, SplitSystem};

/// Hundsdorfer-Verwer stepper:
///
/// ```text
/// Y_0  = U + dt F(t_prev, U)
/// Y_j  = Y_{j-1} + th dt (F_j(t_n, Y_j) - F_j(t_prev, U))       j = 1..=k
/// Y~_0 = Y_0 + dt/2 (F(t_n, Y_k) - F(t_prev, U))
/// Y~_j = Y~_{j-1} + th dt (F_j(t_n, Y~_j) - F_j(t_n, Y_k))      j = 1..=k
/// ```
pub struct HvStepper<'a, T: Scalar, S: SplitSystem<T>> {
    op: &'a S,
    theta: T,
    dt: T,
    factors: Vec<S::Factor>,
}

impl<'a, T: Scalar, S: SplitSystem<T>> HvStepper<'a, T, S> {
    pub fn new(op: &'a S, theta: T, dt: T) -> Result<Self> {
        if !(theta > T::zero()) {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let factors = (1..=op.directions())
            .map(|j| op.factor_shifted(j, theta * dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            op,
            theta,
            dt,
            factors,
        })
    }

    pub fn step(&self, t_prev: T, u: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        let op = self.op;
        let m = op.dim();
        let k = op.directions();
        check_dim(m, u.len())?;
        let dt = self.dt;
        let td = self.theta * dt;
        let t_n = t_prev + dt;

        let mut f_prev: Vec<Vec<T>> = Vec::with_capacity(k + 1);
        let mut f_prev_sum = vec![T::zero(); m];
        for j in 0..=k {
            let mut f = vec![T::zero(); m];
            op.apply_part(j, u.as_slice(), &mut f);
            op.add_source(j, t_prev, T::one(), &mut f);
            for (s, &x) in f_prev_sum.iter_mut().zip(&f) {
                *s += x;
            }
            f_prev.push(f);
        }

        let y0: Vec<T> = u
            .iter()
            .zip(&f_prev_sum)
            .map(|(&ui, &fi)| ui + dt * fi)
            .collect();
        let mut y = y0.clone();
        for j in 1..=k {
            for (yi, &fi) in y.iter_mut().zip(&f_prev[j]) {
                *yi -= td * fi;
            }
            op.add_source(j, t_n, td, &mut y);
            self.factors[j - 1].solve_in_place(&mut y);
        }
        let yk = y;

        let mut a_yk: Vec<Vec<T>> = Vec::with_capacity(k + 1);
        let mut f_new_sum = vec![T::zero(); m];
        for j in 0..=k {
            let mut f = vec![T::zero(); m];
            op.apply_part(j, &yk, &mut f);
            for (s, &x) in f_new_sum.iter_mut().zip(&f) {
                *s += x;
            }
            op.add_source(j, t_n, T::one(), &mut f_new_sum);
            a_yk.push(f);
        }

        let half = T::lit(0.5) * dt;
        let mut y: Vec<T> = y0
            .iter()
            .zip(f_new_sum.iter().zip(&f_prev_sum))
            .map(|(&y, (&fnew, &fold))| y + half * (fnew - fold))
            .collect();
        // The sources at t_n cancel in F_j(t_n, Y~_j) - F_j(t_n, Y_k).
        for j in 1..=k {
            for (yi, &ai) in y.iter_mut().zip(&a_yk[j]) {
                *yi -= td * ai;
            }
            self.factors[j - 1].solve_in_place(&mut y);
        }
        Ok(ScaledVector::from_vec(y))
    }
}

/// One HV step from `(t_prev, U)` to `t_prev + dt`.
pub fn hv_step<T: Scalar, S: SplitSystem<T>>(
    op: &S,
    theta: T,
    dt: T,
    t_prev: T,
    u: &ScaledVector<T>,
) -> Result<ScaledVector<T>> {
    HvStepper::new(op, theta, dt)?.step(t_prev, u)
}
