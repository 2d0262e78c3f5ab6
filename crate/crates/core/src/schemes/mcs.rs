use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::scalar::Scalar;
use crate::semidiscretize::system::check_dim;
use crate::semidiscretize::{ShiftedSolve, SplitSystem};

/// Perturbation vectors added to the MCS stages: `rho[j]` to `Y_j`,
/// `rho_hat0` to `Y^_0`, `rho_tilde[j]` to `Y~_j`, for `j = 0..=k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSet<T> {
    pub rho: Vec<ScaledVector<T>>,
    pub rho_hat0: ScaledVector<T>,
    pub rho_tilde: Vec<ScaledVector<T>>,
}

impl<T: Scalar> PerturbationSet<T> {
    pub fn zeros(m: usize, k: usize) -> Self {
        Self {
            rho: vec![ScaledVector::zeros(m); k + 1],
            rho_hat0: ScaledVector::zeros(m),
            rho_tilde: vec![ScaledVector::zeros(m); k + 1],
        }
    }

    pub fn from_fn(m: usize, k: usize, mut f: impl FnMut() -> T) -> Self {
        let mut vec = || ScaledVector::from_fn(m, |_| f());
        Self {
            rho: (0..=k).map(|_| vec()).collect(),
            rho_hat0: vec(),
            rho_tilde: (0..=k).map(|_| vec()).collect(),
        }
    }

    pub fn validate(&self, m: usize, k: usize) -> Result<()> {
        if self.rho.len() != k + 1 || self.rho_tilde.len() != k + 1 {
            return Err(Error::Dimension {
                expected: k + 1,
                found: self.rho.len().min(self.rho_tilde.len()),
            });
        }
        for v in self.rho.iter().chain(&self.rho_tilde).chain([&self.rho_hat0]) {
            check_dim(m, v.len())?;
        }
        Ok(())
    }
}

/// Intermediate stage values of one MCS step.
#[derive(Clone, Debug, PartialEq)]
pub struct StageTrace<T> {
    /// `Y_0 ..= Y_k`
    pub y: Vec<ScaledVector<T>>,
    pub y_hat0: ScaledVector<T>,
    /// `Y~_0 ..= Y~_k`
    pub y_tilde: Vec<ScaledVector<T>>,
}

/// MCS stepper with the `k` shifted directional operators factorized once.
pub struct McsStepper<'a, T: Scalar, S: SplitSystem<T>> {
    op: &'a S,
    theta: T,
    dt: T,
    factors: Vec<S::Factor>,
}

impl<'a, T: Scalar, S: SplitSystem<T>> McsStepper<'a, T, S> {
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

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn step(&self, t_prev: T, u: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        self.run(t_prev, u, None, None)
    }

    pub fn step_perturbed(
        &self,
        t_prev: T,
        u: &ScaledVector<T>,
        perturbations: &PerturbationSet<T>,
    ) -> Result<(ScaledVector<T>, StageTrace<T>)> {
        perturbations.validate(self.op.dim(), self.op.directions())?;
        let mut trace = StageTrace {
            y: Vec::new(),
            y_hat0: ScaledVector::from_vec(Vec::new()),
            y_tilde: Vec::new(),
        };
        let out = self.run(t_prev, u, Some(perturbations), Some(&mut trace))?;
        Ok((out, trace))
    }

    /// All stages of one step. Stage arithmetic, in order:
    ///
    /// ```text
    /// f_j    = A_j U + g_j(t_prev)                      j = 0..=k
    /// Y_0    = U + dt * sum_j f_j
    /// Y_j    : (I - th dt A_j) Y_j = Y_{j-1} - th dt f_j + th dt g_j(t_n)
    /// Y^_0   = Y_0 + th dt (A_0 Y_k + g_0(t_n) - f_0)
    /// Y~_0   = Y^_0 + (1/2 - th) dt (F(t_n, Y_k) - sum_j f_j)
    /// Y~_j   : (I - th dt A_j) Y~_j = Y~_{j-1} - th dt f_j + th dt g_j(t_n)
    /// ```
    ///
    /// Each perturbation is added last, just before the implicit solve of its
    /// stage, so an all-zero set reproduces the unperturbed step exactly.
    fn run(
        &self,
        t_prev: T,
        u: &ScaledVector<T>,
        pert: Option<&PerturbationSet<T>>,
        mut trace: Option<&mut StageTrace<T>>,
    ) -> Result<ScaledVector<T>> {
        let op = self.op;
        let m = op.dim();
        let k = op.directions();
        check_dim(m, u.len())?;
        let dt = self.dt;
        let td = self.theta * dt;
        let t_n = t_prev + dt;
        let us = u.as_slice();

        let mut f_prev: Vec<Vec<T>> = Vec::with_capacity(k + 1);
        let mut f_prev_sum = vec![T::zero(); m];
        for j in 0..=k {
            let mut f = vec![T::zero(); m];
            op.apply_part(j, us, &mut f);
            op.add_source(j, t_prev, T::one(), &mut f);
            for (s, &x) in f_prev_sum.iter_mut().zip(&f) {
                *s += x;
            }
            f_prev.push(f);
        }

        let add_pert = |y: &mut [T], p: Option<&ScaledVector<T>>| {
            if let Some(p) = p {
                for (a, &b) in y.iter_mut().zip(p.iter()) {
                    *a += b;
                }
            }
        };

        let mut y0: Vec<T> = us
            .iter()
            .zip(&f_prev_sum)
            .map(|(&ui, &fi)| ui + dt * fi)
            .collect();
        add_pert(&mut y0, pert.map(|p| &p.rho[0]));
        if let Some(tr) = trace.as_deref_mut() {
            tr.y.push(ScaledVector::from_vec(y0.clone()));
        }

        let sweep = |start: &[T],
                     stage: Option<&[ScaledVector<T>]>,
                     trace: &mut Option<&mut StageTrace<T>>,
                     tilde: bool| {
            let mut y = start.to_vec();
            for j in 1..=k {
                for (yi, &fi) in y.iter_mut().zip(&f_prev[j]) {
                    *yi -= td * fi;
                }
                op.add_source(j, t_n, td, &mut y);
                add_pert(&mut y, stage.map(|r| &r[j]));
                self.factors[j - 1].solve_in_place(&mut y);
                if let Some(tr) = trace.as_deref_mut() {
                    let v = ScaledVector::from_vec(y.clone());
                    if tilde {
                        tr.y_tilde.push(v);
                    } else {
                        tr.y.push(v);
                    }
                }
            }
            y
        };

        let yk = sweep(&y0, pert.map(|p| p.rho.as_slice()), &mut trace, false);

        // F_0(t_n, Y_k) and F(t_n, Y_k)
        let mut f_new = vec![T::zero(); m];
        let mut f_new_sum = vec![T::zero(); m];
        for j in 0..=k {
            op.apply_part(j, &yk, &mut f_new);
            op.add_source(j, t_n, T::one(), &mut f_new);
            for (s, &x) in f_new_sum.iter_mut().zip(&f_new) {
                *s += x;
            }
            if j == 0 {
                // y_hat0 needs only the mixed part; finish it here.
                for ((y, &fnew), &fold) in y0.iter_mut().zip(&f_new).zip(&f_prev[0]) {
                    *y += td * (fnew - fold);
                }
            }
        }
        let mut y_hat0 = y0;
        add_pert(&mut y_hat0, pert.map(|p| &p.rho_hat0));
        if let Some(tr) = trace.as_deref_mut() {
            tr.y_hat0 = ScaledVector::from_vec(y_hat0.clone());
        }

        let half_minus = T::lit(0.5) - self.theta;
        let mut y_tilde0: Vec<T> = y_hat0
            .iter()
            .zip(f_new_sum.iter().zip(&f_prev_sum))
            .map(|(&y, (&fnew, &fold))| y + half_minus * dt * (fnew - fold))
            .collect();
        add_pert(&mut y_tilde0, pert.map(|p| &p.rho_tilde[0]));
        if let Some(tr) = trace.as_deref_mut() {
            tr.y_tilde.push(ScaledVector::from_vec(y_tilde0.clone()));
        }

        let out = sweep(&y_tilde0, pert.map(|p| p.rho_tilde.as_slice()), &mut trace, true);
        Ok(ScaledVector::from_vec(out))
    }
}

/// One MCS step from `(t_prev, U)` to `t_prev + dt`.
pub fn mcs_step<T: Scalar, S: SplitSystem<T>>(
    op: &S,
    theta: T,
    dt: T,
    t_prev: T,
    u: &ScaledVector<T>,
) -> Result<ScaledVector<T>> {
    McsStepper::new(op, theta, dt)?.step(t_prev, u)
}

/// One step of the perturbed MCS scheme, returning `U*_n` and its stages.
pub fn perturbed_mcs_step<T: Scalar, S: SplitSystem<T>>(
    op: &S,
    theta: T,
    dt: T,
    t_prev: T,
    u_star: &ScaledVector<T>,
    perturbations: &PerturbationSet<T>,
) -> Result<(ScaledVector<T>, StageTrace<T>)> {
    McsStepper::new(op, theta, dt)?.step_perturbed(t_prev, u_star, perturbations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::semidiscretize::{assemble, Coefficients, DenseSplit, Grid2D, ProblemSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model_op(m: usize) -> crate::semidiscretize::SplitOperator2D<f64> {
        assemble(&ProblemSpec::model(), &Grid2D::square(m).unwrap()).unwrap()
    }

    #[test]
    fn zero_operator_leaves_state_unchanged() {
        let p = ProblemSpec::<f64>::new(Coefficients::zero(), 0.05, 2.0).unwrap();
        let op = assemble(&p, &Grid2D::square(4).unwrap()).unwrap();
        let u = ScaledVector::from_fn(16, |i| (i as f64).sqrt());
        for theta in [0.25, 0.5, 1.0] {
            assert_eq!(mcs_step(&op, theta, 0.1, 0.0, &u).unwrap(), u);
        }
    }

    #[test]
    fn without_mixed_term_the_mixed_stage_is_a_no_op() {
        let mut c = Coefficients::<f64>::model();
        c.d12 = 0.0;
        let op = assemble(&ProblemSpec::new(c, 0.05, 2.0).unwrap(), &Grid2D::square(5).unwrap())
            .unwrap();
        let u = ScaledVector::from_fn(25, |i| (i as f64 * 0.3).sin());
        let pert = PerturbationSet::zeros(25, 2);
        let (_, trace) = perturbed_mcs_step(&op, 0.3, 0.05, 0.0, &u, &pert).unwrap();
        assert_eq!(trace.y_hat0, trace.y[0]);
        assert_eq!(trace.y.len(), 3);
        assert_eq!(trace.y_tilde.len(), 3);
    }

    #[test]
    fn zero_perturbations_reproduce_the_plain_step_bitwise() {
        let op = model_op(6);
        let u = ScaledVector::from_fn(36, |i| (i as f64 * 0.77).cos());
        for theta in [0.25, 1.0 / 3.0, 0.5, 1.0] {
            let plain = mcs_step(&op, theta, 1.0 / 16.0, 0.25, &u).unwrap();
            let (pert, _) =
                perturbed_mcs_step(&op, theta, 1.0 / 16.0, 0.25, &u, &PerturbationSet::zeros(36, 2))
                    .unwrap();
            assert_eq!(plain, pert);
        }
    }

    #[test]
    fn final_stage_perturbation_alone_solves_the_last_shifted_system() {
        let op = model_op(5);
        let (theta, dt) = (0.4, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = ScaledVector::from_fn(25, |_| rng.random_range(-1.0..1.0));
        let mut pert = PerturbationSet::zeros(25, 2);
        pert.rho_tilde[2] = ScaledVector::from_fn(25, |_| rng.random_range(-1.0..1.0));
        let plain = mcs_step(&op, theta, dt, 0.0, &u).unwrap();
        let (star, _) = perturbed_mcs_step(&op, theta, dt, 0.0, &u, &pert).unwrap();
        let e = star.sub(&plain);
        // (I - theta dt A2) e = rho_tilde_2
        let mut a2e = vec![0.0; 25];
        op.apply_part(2, e.as_slice(), &mut a2e);
        let lhs = ScaledVector::from_fn(25, |i| e[i] - theta * dt * a2e[i]);
        assert!(lhs.relative_distance(&pert.rho_tilde[2]) < 1e-12);
    }

    #[test]
    fn dense_and_banded_systems_step_identically() {
        let op = model_op(5);
        let dense = op.to_dense().unwrap();
        let u = ScaledVector::from_fn(25, |i| 1.0 + (i as f64 * 0.2).sin());
        let a = mcs_step(&op, 1.0 / 3.0, 0.1, 0.5, &u).unwrap();
        let b = mcs_step(&dense, 1.0 / 3.0, 0.1, 0.5, &u).unwrap();
        assert!(a.relative_distance(&b) < 1e-13);
    }

    #[test]
    fn scalar_problem_with_one_direction() {
        // k = 1, A0 = 0: R(z) = 1 + z/p + (1/2 - th) z^2 / p^2, p = 1 - th z.
        let lambda = -3.0;
        let (theta, dt): (f64, f64) = (0.25, 0.5);
        let sys = DenseSplit::homogeneous(vec![
            DenseMatrix::zeros(1, 1),
            DenseMatrix::diagonal(&[lambda]),
        ])
        .unwrap();
        let out = mcs_step(&sys, theta, dt, 0.0, &ScaledVector::from_vec(vec![1.0])).unwrap();
        let z = dt * lambda;
        let p = 1.0 - theta * z;
        let want = 1.0 + z / p + (0.5 - theta) * z * z / (p * p);
        assert!((out[0] - want).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let op = model_op(4);
        let u = ScaledVector::zeros(16);
        assert!(mcs_step(&op, 0.0, 0.1, 0.0, &u).is_err());
        assert!(mcs_step(&op, 0.5, -0.1, 0.0, &u).is_err());
        assert!(mcs_step(&op, 0.5, 0.1, 0.0, &ScaledVector::zeros(15)).is_err());
        let bad = PerturbationSet::zeros(15, 2);
        assert!(perturbed_mcs_step(&op, 0.5, 0.1, 0.0, &u, &bad).is_err());
    }
}
