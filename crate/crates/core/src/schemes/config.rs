use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::scalar::Scalar;
use crate::schemes::{HvStepper, McsStepper};
use crate::semidiscretize::system::check_dim;
use crate::semidiscretize::SplitSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Mcs,
    /// MCS with `theta = 1/2`.
    Cs,
    Hv,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Mcs => "MCS",
            SchemeKind::Cs => "CS",
            SchemeKind::Hv => "HV",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mcs" => Ok(SchemeKind::Mcs),
            "cs" => Ok(SchemeKind::Cs),
            "hv" => Ok(SchemeKind::Hv),
            other => Err(Error::InvalidParameter(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig<T> {
    kind: SchemeKind,
    theta: T,
    dt: T,
    steps: usize,
}

impl<T: Scalar> SchemeConfig<T> {
    pub fn new(kind: SchemeKind, theta: T, dt: T, steps: usize) -> Result<Self> {
        if !(theta > T::zero()) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be positive, got {theta}")));
        }
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if kind == SchemeKind::Cs && theta != T::lit(0.5) {
            return Err(Error::InvalidParameter(format!(
                "the CS scheme fixes theta = 1/2, got {theta}"
            )));
        }
        Ok(Self {
            kind,
            theta,
            dt,
            steps,
        })
    }

    pub fn mcs(theta: T, dt: T, steps: usize) -> Result<Self> {
        Self::new(SchemeKind::Mcs, theta, dt, steps)
    }

    pub fn cs(dt: T, steps: usize) -> Result<Self> {
        Self::new(SchemeKind::Cs, T::lit(0.5), dt, steps)
    }

    pub fn hv(theta: T, dt: T, steps: usize) -> Result<Self> {
        Self::new(SchemeKind::Hv, theta, dt, steps)
    }

    /// `steps` uniform steps covering `[0, horizon]`.
    pub fn covering(kind: SchemeKind, theta: T, horizon: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("need at least one step to cover an interval".into()));
        }
        Self::new(kind, theta, horizon / T::from_usize(steps).unwrap(), steps)
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

/// Applies `config.steps()` steps from `t = 0` and returns `U_N`.
pub fn integrate<T: Scalar, S: SplitSystem<T>>(
    config: &SchemeConfig<T>,
    op: &S,
    u0: &ScaledVector<T>,
) -> Result<ScaledVector<T>> {
    check_dim(op.dim(), u0.len())?;
    let n = T::from_usize(config.steps).unwrap();
    let horizon = op.horizon();
    if n * config.dt > horizon * (T::one() + T::lit(1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "{} steps of size {} exceed the final time {}",
            config.steps, config.dt, horizon
        )));
    }
    if config.steps == 0 {
        return Ok(u0.clone());
    }
    let time = |i: usize| T::from_usize(i).unwrap() * config.dt;
    let mut u = u0.clone();
    match config.kind {
        SchemeKind::Mcs | SchemeKind::Cs => {
            let stepper = McsStepper::new(op, config.theta, config.dt)?;
            for i in 0..config.steps {
                u = stepper.step(time(i), &u)?;
            }
        }
        SchemeKind::Hv => {
            let stepper = HvStepper::new(op, config.theta, config.dt)?;
            for i in 0..config.steps {
                u = stepper.step(time(i), &u)?;
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semidiscretize::{assemble, initial_vector, Grid2D, ProblemSpec};

    #[test]
    fn zero_steps_return_initial_state() {
        let p = ProblemSpec::<f64>::model();
        let g = Grid2D::square(5).unwrap();
        let op = assemble(&p, &g).unwrap();
        let u0 = initial_vector(&p, &g);
        let cfg = SchemeConfig::mcs(0.5, 0.1, 0).unwrap();
        assert_eq!(integrate(&cfg, &op, &u0).unwrap(), u0);
    }

    #[test]
    fn cs_is_mcs_with_theta_one_half() {
        let p = ProblemSpec::<f64>::model();
        let g = Grid2D::square(8).unwrap();
        let op = assemble(&p, &g).unwrap();
        let u0 = initial_vector(&p, &g);
        let a = integrate(&SchemeConfig::cs(0.1, 20).unwrap(), &op, &u0).unwrap();
        let b = integrate(&SchemeConfig::mcs(0.5, 0.1, 20).unwrap(), &op, &u0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cs_rejects_other_theta() {
        assert!(SchemeConfig::new(SchemeKind::Cs, 0.4f64, 0.1, 3).is_err());
        assert!(SchemeConfig::new(SchemeKind::Mcs, -0.4f64, 0.1, 3).is_err());
    }

    #[test]
    fn steps_beyond_final_time_are_rejected() {
        let p = ProblemSpec::<f64>::model();
        let g = Grid2D::square(4).unwrap();
        let op = assemble(&p, &g).unwrap();
        let u0 = initial_vector(&p, &g);
        let cfg = SchemeConfig::mcs(0.5, 0.1, 21).unwrap();
        assert!(integrate(&cfg, &op, &u0).is_err());
        let cfg = SchemeConfig::covering(SchemeKind::Mcs, 0.5, 2.0, 7).unwrap();
        assert!(integrate(&cfg, &op, &u0).is_ok());
    }

    #[test]
    fn scheme_names_round_trip() {
        for k in [SchemeKind::Mcs, SchemeKind::Cs, SchemeKind::Hv] {
            assert_eq!(k.to_string().parse::<SchemeKind>().unwrap(), k);
        }
        assert!("douglas".parse::<SchemeKind>().is_err());
    }
}
