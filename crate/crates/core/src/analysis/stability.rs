use crate::error::{Error, Result};
use crate::linalg::{dense_power_norm, DenseLu, DenseMatrix, ScaledVector, DENSE_CAP_DEFAULT};
use crate::scalar::Scalar;
use crate::schemes::{McsStepper, PerturbationSet};
use crate::semidiscretize::SplitSystem;

fn check_parts<T: Scalar>(z: &[DenseMatrix<T>]) -> Result<usize> {
    if z.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need Z_0 and at least one directional part, got {} matrices",
            z.len()
        )));
    }
    let n = z[0].rows();
    for m in z {
        if !m.is_square() {
            return Err(Error::Dimension {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if m.rows() != n {
            return Err(Error::Dimension {
                expected: n,
                found: m.rows(),
            });
        }
    }
    Ok(n)
}

/// Factorizations of `Q_j = I - th Z_j` for `j = 1..=k`.
struct QFactors<T> {
    lus: Vec<DenseLu<T>>,
}

impl<T: Scalar> QFactors<T> {
    fn new(z: &[DenseMatrix<T>], theta: T) -> Result<Self> {
        let n = z[0].rows();
        let lus = (1..z.len())
            .map(|j| {
                DenseMatrix::identity(n)
                    .add_scaled(-theta, &z[j])?
                    .lu()
                    .map_err(|_| Error::SingularShift { direction: j })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lus })
    }

    /// `Q_k^-1 ... Q_j^-1 v`
    fn tail_solve(&self, j: usize, v: &mut [T]) {
        for lu in &self.lus[j - 1..] {
            lu.solve_in_place(v);
        }
    }

    /// `P^-1 v` with `P = Q_1 ... Q_k`.
    fn p_solve(&self, v: &mut [T]) {
        self.tail_solve(1, v);
    }

    fn p_solve_matrix(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.lus.iter().try_fold(b.clone(), |acc, lu| lu.solve_matrix(&acc))
    }
}

/// `W = th Z_0 + (1/2 - th) Z` with `Z = Z_0 + ... + Z_k`.
fn mixing_matrix<T: Scalar>(z: &[DenseMatrix<T>], theta: T) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let mut total = z[0].clone();
    for part in &z[1..] {
        total = total.add(part)?;
    }
    let w = z[0].scale(theta).add_scaled(T::lit(0.5) - theta, &total)?;
    Ok((total, w))
}

/// Stability matrix of one MCS step on the homogeneous problem,
/// `R = I + P^-1 Z + P^-1 W P^-1 Z`, from the scaled parts `Z_j = dt A_j`
/// (index 0 is the mixed part).
pub fn stability_matrix<T: Scalar>(z: &[DenseMatrix<T>], theta: T) -> Result<DenseMatrix<T>> {
    let n = check_parts(z)?;
    let q = QFactors::new(z, theta)?;
    let (total, w) = mixing_matrix(z, theta)?;
    let pz = q.p_solve_matrix(&total)?;
    let inner = q.p_solve_matrix(&w.matmul(&pz)?)?;
    DenseMatrix::identity(n).add(&pz)?.add(&inner)
}

/// Local error `d_n` produced by a set of stage perturbations:
///
/// ```text
/// s   = P^-1 rho_0 + sum_j Q_k^-1 ... Q_j^-1 rho_j
/// d_n = P^-1 W s + P^-1 (rho_0 + rho^_0 + rho~_0) + sum_j Q_k^-1 ... Q_j^-1 rho~_j
/// ```
pub fn local_error_vector<T: Scalar>(
    z: &[DenseMatrix<T>],
    theta: T,
    perturbations: &PerturbationSet<T>,
) -> Result<ScaledVector<T>> {
    let n = check_parts(z)?;
    let k = z.len() - 1;
    perturbations.validate(n, k)?;
    let q = QFactors::new(z, theta)?;
    let (_, w) = mixing_matrix(z, theta)?;

    let chained = |first: &ScaledVector<T>, rest: &[ScaledVector<T>]| {
        let mut acc = first.as_slice().to_vec();
        q.p_solve(&mut acc);
        for j in 1..=k {
            let mut v = rest[j].as_slice().to_vec();
            q.tail_solve(j, &mut v);
            acc.iter_mut().zip(&v).for_each(|(a, &b)| *a += b);
        }
        acc
    };

    let s = chained(&perturbations.rho[0], &perturbations.rho);
    let mut ws = vec![T::zero(); n];
    w.mul_slice(&s, &mut ws);
    q.p_solve(&mut ws);

    let explicit_sum = perturbations.rho[0]
        .add(&perturbations.rho_hat0)
        .add(&perturbations.rho_tilde[0]);
    let tail = chained(&explicit_sum, &perturbations.rho_tilde);

    Ok(ScaledVector::from_vec(
        ws.iter().zip(&tail).map(|(&a, &b)| a + b).collect(),
    ))
}

/// Empirical stability measurement: `||R^n||_2` at `n = 1, 2, 4, ..., n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport<T> {
    pub theta: T,
    pub dt: T,
    pub m1: usize,
    pub m2: usize,
    /// `(n, ||R^n||_2)` pairs in increasing `n`.
    pub norms: Vec<(usize, T)>,
    pub max_norm: T,
}

impl<T: Scalar> StabilityReport<T> {
    /// Ratio of the last sampled norm to the smallest norm seen beyond `n = 1`.
    pub fn growth(&self) -> T {
        let tail = self.norms.iter().skip(1).map(|&(_, v)| v);
        let min = tail.clone().fold(T::infinity(), T::min);
        match self.norms.last() {
            Some(&(_, last)) if min > T::zero() => last / min,
            _ => T::one(),
        }
    }
}

/// Repeated squaring of `R`, recording the spectral norm at each power of two.
pub fn measure_stability<T: Scalar>(
    z: &[DenseMatrix<T>],
    theta: T,
    dt: T,
    (m1, m2): (usize, usize),
    n_max: usize,
) -> Result<StabilityReport<T>> {
    let n = check_parts(z)?;
    if n > DENSE_CAP_DEFAULT {
        return Err(Error::DenseCapExceeded {
            requested: n,
            cap: DENSE_CAP_DEFAULT,
        });
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let r = stability_matrix(z, theta)?;
    let mut norms = Vec::new();
    let mut power = r;
    let mut e = 1;
    loop {
        norms.push((e, dense_power_norm(&power, 1)?));
        if e * 2 > n_max {
            break;
        }
        power = power.matmul(&power)?;
        e *= 2;
    }
    let max_norm = norms.iter().map(|&(_, v)| v).fold(T::zero(), T::max);
    Ok(StabilityReport {
        theta,
        dt,
        m1,
        m2,
        norms,
        max_norm,
    })
}

/// Matrix-free lower bounds `||R^n v|| / ||v||` for one start vector `v`,
/// at `n = 1, 2, 4, ..., n_max`.
///
/// `R v` is taken as `step(v) - step(0)`, so the source terms of `op` drop out.
/// Suited to meshes beyond the dense cap; every reported value is at most the
/// true `||R^n||_2`.
pub fn estimate_growth<T: Scalar, S: SplitSystem<T>>(
    op: &S,
    theta: T,
    dt: T,
    (m1, m2): (usize, usize),
    n_max: usize,
    start: &ScaledVector<T>,
) -> Result<StabilityReport<T>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let stepper = McsStepper::new(op, theta, dt)?;
    let offset = stepper.step(T::zero(), &ScaledVector::zeros(op.dim()))?;
    let v0 = start.norm();
    if !(v0 > T::zero()) {
        return Err(Error::InvalidParameter("start vector must be non-zero".into()));
    }
    let mut v = start.scale(T::one() / v0);
    // Running log of ||R^n v||, renormalizing each step to avoid overflow.
    let mut log_norm = T::zero();
    let mut norms = Vec::new();
    let mut next = 1;
    for n in 1..=n_max {
        v = stepper.step(T::zero(), &v)?.sub(&offset);
        let nv = v.norm();
        if !(nv > T::zero()) || !nv.is_finite() {
            norms.push((n, if nv.is_finite() { T::zero() } else { T::infinity() }));
            break;
        }
        log_norm += nv.ln();
        v = v.scale(T::one() / nv);
        if n == next {
            norms.push((n, log_norm.exp()));
            next *= 2;
        }
    }
    let max_norm = norms.iter().map(|&(_, v)| v).fold(T::zero(), T::max);
    Ok(StabilityReport {
        theta,
        dt,
        m1,
        m2,
        norms,
        max_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DenseMatrix<f64> {
        DenseMatrix::diagonal(&[v])
    }

    #[test]
    fn zero_operators_give_identity() {
        let z = vec![DenseMatrix::<f64>::zeros(3, 3); 3];
        assert_eq!(stability_matrix(&z, 0.5).unwrap(), DenseMatrix::identity(3));
        let rep = measure_stability(&z, 0.5, 0.1, (3, 1), 16).unwrap();
        assert_eq!(rep.norms.iter().map(|p| p.0).collect::<Vec<_>>(), vec![1, 2, 4, 8, 16]);
        assert!(rep.norms.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn scalar_hand_evaluation() {
        // z0 = z2 = 0, z1 = -1: p = 1 + th, R = 1 - 1/p + (1/2 - th)/p^2.
        for (theta, want) in [(0.5, 1.0 / 3.0), (0.25, 0.36)] {
            let z = vec![scalar(0.0), scalar(-1.0), scalar(0.0)];
            let r = stability_matrix(&z, theta).unwrap();
            assert!((r[(0, 0)] - want).abs() < 1e-15, "{theta}: {}", r[(0, 0)]);
        }
        // Full scalar form with all three symbols.
        let (z0, z1, z2, th) = (0.3, -2.0, -0.7, 0.4);
        let p = (1.0 - th * z1) * (1.0 - th * z2);
        let zt = z0 + z1 + z2;
        let want = 1.0 + zt / p + (th * z0 + (0.5 - th) * zt) * zt / (p * p);
        let r = stability_matrix(&[scalar(z0), scalar(z1), scalar(z2)], th).unwrap();
        assert!((r[(0, 0)] - want).abs() < 1e-14);
    }

    #[test]
    fn singular_shift_names_direction() {
        let z = vec![scalar(0.0), scalar(-1.0), scalar(2.0)];
        assert_eq!(
            stability_matrix(&z, 0.5).unwrap_err(),
            Error::SingularShift { direction: 2 }
        );
    }

    #[test]
    fn local_error_single_component_cases() {
        let z = vec![scalar(0.2), scalar(-1.0), scalar(-3.0)];
        let theta = 0.5;
        let one = ScaledVector::from_vec(vec![1.0]);
        let (q1, q2) = (1.0 + theta, 1.0 + 3.0 * theta);

        let mut p = PerturbationSet::zeros(1, 2);
        assert_eq!(local_error_vector(&z, theta, &p).unwrap()[0], 0.0);

        // Only rho~_k: the Q-product reduces to Q_k^-1.
        p.rho_tilde[2] = one.clone();
        let d = local_error_vector(&z, theta, &p).unwrap()[0];
        assert!((d - 1.0 / q2).abs() < 1e-15);

        // Only rho^_0: P^-1 rho^_0.
        let mut p = PerturbationSet::zeros(1, 2);
        p.rho_hat0 = one.clone();
        let d = local_error_vector(&z, theta, &p).unwrap()[0];
        assert!((d - 1.0 / (q1 * q2)).abs() < 1e-15);

        // Only rho_1: P^-1 W P^-1 rho_1 with the scalar W.
        let mut p = PerturbationSet::zeros(1, 2);
        p.rho[1] = one;
        let w = theta * 0.2 + (0.5 - theta) * (0.2 - 4.0);
        let d = local_error_vector(&z, theta, &p).unwrap()[0];
        assert!((d - w / (q1 * q2 * q1 * q2)).abs() < 1e-15);
    }

    #[test]
    fn growth_estimate_matches_dense_power_for_scalar() {
        // R = 1 - 1/p + (1/2 - th)/p^2 with p = 1 + th for z1 = -1.
        let z = vec![scalar(0.0), scalar(-1.0), scalar(0.0)];
        let sys = crate::semidiscretize::DenseSplit::homogeneous(z).unwrap();
        let rep = estimate_growth(&sys, 0.25, 1.0, (1, 1), 8, &ScaledVector::from_vec(vec![2.0])).unwrap();
        for &(n, v) in &rep.norms {
            assert!((v - 0.36f64.powi(n as i32)).abs() < 1e-14);
        }
        assert_eq!(rep.norms.len(), 4);
    }

    #[test]
    fn rejects_mismatched_parts() {
        let z = vec![DenseMatrix::<f64>::zeros(3, 3), DenseMatrix::zeros(2, 2)];
        assert!(stability_matrix(&z, 0.5).is_err());
        assert!(stability_matrix(&z[..1], 0.5).is_err());
    }
}
