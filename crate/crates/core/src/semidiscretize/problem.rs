use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::scalar::Scalar;

/// Spatial function `(x, y) -> value`.
pub type Evaluator<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// PDE coefficients together with the correlation bound `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients<T> {
    pub d11: T,
    pub d12: T,
    pub d22: T,
    pub c1: T,
    pub c2: T,
    pub gamma: T,
}

impl<T: Scalar> Coefficients<T> {
    /// The one-parameter family `d11 = d, d12 = -2 gamma d, d22 = 4 d`.
    pub fn family(d: T, gamma: T, c1: T, c2: T) -> Self {
        Self {
            d11: d,
            d12: -T::lit(2.0) * gamma * d,
            d22: T::lit(4.0) * d,
            c1,
            c2,
            gamma,
        }
    }

    /// `d = 0.025`, `gamma = 0.7`, `c1 = -2`, `c2 = -3`.
    pub fn model() -> Self {
        Self::family(T::lit(0.025), T::lit(0.7), T::lit(-2.0), T::lit(-3.0))
    }

    pub fn zero() -> Self {
        Self {
            d11: T::zero(),
            d12: T::zero(),
            d22: T::zero(),
            c1: T::zero(),
            c2: T::zero(),
            gamma: T::zero(),
        }
    }

    /// Checks `d11, d22 >= 0`, `gamma in [0, 1]` and
    /// `|d12| <= gamma sqrt(d11 d22)`; the last comparison allows a relative
    /// rounding slack of 1e-12 since the family above sits on the boundary.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.d11, self.d12, self.d22, self.c1, self.c2, self.gamma]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        if self.d11 < T::zero() || self.d22 < T::zero() {
            return Err(Error::InvalidParameter(
                "diffusion coefficients d11, d22 must be non-negative".into(),
            ));
        }
        if self.gamma < T::zero() || self.gamma > T::one() {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} outside [0, 1]",
                self.gamma
            )));
        }
        let bound = self.gamma * (self.d11 * self.d22).sqrt();
        if self.d12.abs() > bound * (T::one() + T::lit(1e-12)) {
            return Err(Error::Coefficients {
                d12_abs: self.d12.abs().to_f64().unwrap(),
                bound: bound.to_f64().unwrap(),
            });
        }
        Ok(())
    }
}

/// Model problem on `(0, 1)^2`.
///
/// Boundary values are `exp(-r t) * boundary(x, y)`; by default `boundary`
/// is the initial function, which makes the data continuous at `t = 0`.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    coefficients: Coefficients<T>,
    decay: T,
    final_time: T,
    initial: Evaluator<T>,
    boundary: Evaluator<T>,
}

impl<T: Scalar> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("coefficients", &self.coefficients)
            .field("decay", &self.decay)
            .field("final_time", &self.final_time)
            .finish_non_exhaustive()
    }
}

/// `exp(-4 (sin^2(pi x) + cos^2(pi y)))`
pub fn model_initial<T: Scalar>(x: T, y: T) -> T {
    let pi = T::PI();
    let s = (pi * x).sin();
    let c = (pi * y).cos();
    (-T::lit(4.0) * (s * s + c * c)).exp()
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn new(coefficients: Coefficients<T>, decay: T, final_time: T) -> Result<Self> {
        coefficients.validate()?;
        if !(final_time > T::zero()) || !final_time.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if !decay.is_finite() {
            return Err(Error::InvalidParameter("non-finite decay rate".into()));
        }
        let initial: Evaluator<T> = Arc::new(model_initial::<T>);
        Ok(Self {
            coefficients,
            decay,
            final_time,
            boundary: initial.clone(),
            initial,
        })
    }

    /// The benchmark problem: model coefficients, `r = 0.05`, `T = 2`.
    pub fn model() -> Self {
        Self::new(Coefficients::model(), T::lit(0.05), T::lit(2.0))
            .expect("model coefficients are admissible")
    }

    /// Replaces both the initial function and the boundary profile.
    pub fn with_initial(mut self, f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        let f: Evaluator<T> = Arc::new(f);
        self.boundary = f.clone();
        self.initial = f;
        self
    }

    pub fn with_boundary_profile(mut self, f: impl Fn(T, T) -> T + Send + Sync + 'static) -> Self {
        self.boundary = Arc::new(f);
        self
    }

    pub fn coefficients(&self) -> &Coefficients<T> {
        &self.coefficients
    }

    pub fn decay(&self) -> T {
        self.decay
    }

    pub fn final_time(&self) -> T {
        self.final_time
    }

    pub fn initial(&self, x: T, y: T) -> T {
        (self.initial)(x, y)
    }

    /// Spatial boundary profile, the Dirichlet value at `t = 0`.
    pub fn boundary_profile(&self, x: T, y: T) -> T {
        (self.boundary)(x, y)
    }

    pub fn boundary_value(&self, x: T, y: T, t: T) -> T {
        (-self.decay * t).exp() * (self.boundary)(x, y)
    }
}

/// Uniform grid of `m1 x m2` interior points, ordered x-fastest:
/// unknown `(i, j)` sits at `i + m1 * j`, at `x = (i + 1) dx`, `y = (j + 1) dy`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid2D {
    m1: usize,
    m2: usize,
}

impl Grid2D {
    pub fn new(m1: usize, m2: usize) -> Result<Self> {
        if m1 < 3 || m2 < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 interior points per direction, got {m1} x {m2}"
            )));
        }
        Ok(Self { m1, m2 })
    }

    pub fn square(m: usize) -> Result<Self> {
        Self::new(m, m)
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.m2
    }

    pub fn len(&self) -> usize {
        self.m1 * self.m2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx<T: Scalar>(&self) -> T {
        T::one() / T::from_usize(self.m1 + 1).unwrap()
    }

    pub fn dy<T: Scalar>(&self) -> T {
        T::one() / T::from_usize(self.m2 + 1).unwrap()
    }

    /// x-coordinate of column `i`; `i = -1` and `i = m1` are the boundaries.
    pub fn x<T: Scalar>(&self, i: isize) -> T {
        T::from_isize(i + 1).unwrap() * self.dx::<T>()
    }

    pub fn y<T: Scalar>(&self, j: isize) -> T {
        T::from_isize(j + 1).unwrap() * self.dy::<T>()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.m1 * j
    }
}

/// Samples the initial function at the interior nodes.
pub fn initial_vector<T: Scalar>(problem: &ProblemSpec<T>, grid: &Grid2D) -> ScaledVector<T> {
    let mut v = ScaledVector::zeros(grid.len());
    for j in 0..grid.m2() {
        let y = grid.y::<T>(j as isize);
        for i in 0..grid.m1() {
            v[grid.index(i, j)] = problem.initial(grid.x(i as isize), y);
        }
    }
    v
}
