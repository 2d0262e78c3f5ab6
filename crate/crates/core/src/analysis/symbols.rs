use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Fourier symbols `(z0, z1, z2)` of the mixed and directional parts, with
/// `Re z1 <= 0`, `Re z2 <= 0` and `|z0| <= 2 gamma sqrt(Re z1 Re z2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolTriple<T> {
    z0: Complex<T>,
    z1: Complex<T>,
    z2: Complex<T>,
    gamma: T,
}

/// `2 gamma sqrt(Re z1 Re z2)`, the admissible radius for `z0`.
pub fn mixed_radius<T: Scalar>(z1: Complex<T>, z2: Complex<T>, gamma: T) -> T {
    T::lit(2.0) * gamma * (z1.re * z2.re).sqrt()
}

impl<T: Scalar> SymbolTriple<T> {
    pub fn new(z0: Complex<T>, z1: Complex<T>, z2: Complex<T>, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::SymbolDomain(format!("gamma = {gamma} outside [0, 1]")));
        }
        if !(z1.re <= T::zero() && z2.re <= T::zero()) {
            return Err(Error::SymbolDomain(format!(
                "directional symbols need Re <= 0, got {z1} and {z2}"
            )));
        }
        let radius = mixed_radius(z1, z2, gamma);
        if !(z0.norm() <= radius) {
            return Err(Error::SymbolDomain(format!(
                "|z0| = {} exceeds 2*gamma*sqrt(Re z1 Re z2) = {radius}",
                z0.norm()
            )));
        }
        Ok(Self { z0, z1, z2, gamma })
    }

    pub fn z0(&self) -> Complex<T> {
        self.z0
    }

    pub fn z1(&self) -> Complex<T> {
        self.z1
    }

    pub fn z2(&self) -> Complex<T> {
        self.z2
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `p = (1 - theta z1)(1 - theta z2)`
    pub fn p(&self, theta: T) -> Complex<T> {
        let one = Complex::new(T::one(), T::zero());
        (one - self.z1 * theta) * (one - self.z2 * theta)
    }

    /// Re-evaluates the admissibility predicate on the stored values.
    pub fn is_admissible(&self) -> bool {
        Self::new(self.z0, self.z1, self.z2, self.gamma).is_ok()
    }
}

/// Magnitude range sampled for `|z1|` and `|z2|`.
pub const SYMBOL_MAGNITUDE_RANGE: (f64, f64) = (1e-3, 1e6);

fn sample_directional<T: Scalar>(rng: &mut ChaCha8Rng) -> Complex<T> {
    let (lo, hi) = SYMBOL_MAGNITUDE_RANGE;
    let rho = 10f64.powf(rng.random_range(lo.log10()..=hi.log10()));
    // A share of exact edge cases: the imaginary axis and the negative real axis.
    match rng.random_range(0..20u32) {
        0 => Complex::new(T::zero(), T::lit(if rng.random_bool(0.5) { rho } else { -rho })),
        1 => Complex::new(T::lit(-rho), T::zero()),
        _ => {
            let phi = rng.random_range(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2);
            Complex::new(T::lit(-rho * phi.cos().abs()), T::lit(rho * phi.sin()))
        }
    }
}

fn sample_one<T: Scalar>(rng: &mut ChaCha8Rng, gamma: T) -> SymbolTriple<T> {
    let z1 = sample_directional::<T>(rng);
    let z2 = sample_directional::<T>(rng);
    let radius = mixed_radius(z1, z2, gamma);
    // Boundary of the disc is where the bounds are attained, so it gets extra weight.
    let s = if rng.random_bool(0.1) {
        1.0
    } else {
        rng.random_range(0.0..=1.0)
    };
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let mut z0 = Complex::from_polar(radius * T::lit(s), T::lit(phase));
    let shrink = T::one() - T::lit(4.0) * T::epsilon();
    while z0.norm() > radius {
        z0 = z0 * shrink;
    }
    SymbolTriple::new(z0, z1, z2, gamma).expect("construction keeps the triple admissible")
}

/// Deterministic sample of admissible triples for the given `gamma`.
pub fn sample_symbols<T: Scalar>(gamma: T, count: usize, seed: u64) -> Result<Vec<SymbolTriple<T>>> {
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::SymbolDomain(format!("gamma = {gamma} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| sample_one(&mut rng, gamma)).collect())
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::BoundDomain(format!("theta must be positive, got {theta}")))
    }
}

/// `|1 + z0/(2p) + (1/2 - theta)(z1 + z2)/p|`
pub fn first_term_value<T: Scalar>(theta: T, s: &SymbolTriple<T>) -> Result<T> {
    check_theta(theta)?;
    let p = s.p(theta);
    if p.norm() == T::zero() {
        return Err(Error::SymbolDomain(format!("p vanishes for {s:?}")));
    }
    let half = T::lit(0.5);
    let one = Complex::new(T::one(), T::zero());
    Ok((one + s.z0 * half / p + (s.z1 + s.z2) * (half - theta) / p).norm())
}

/// Upper bound on [`first_term_value`] over all admissible triples.
pub fn theorem22_bound<T: Scalar>(theta: T) -> Result<T> {
    check_theta(theta)?;
    let inv = T::lit(0.5) / theta;
    Ok(if theta < T::one() / T::lit(6.0) {
        inv - T::lit(1.5)
    } else if theta <= T::one() {
        T::lit(1.5)
    } else {
        T::lit(2.0) - inv
    })
}

/// `|p + z0/2 + (1/2 - theta)(z1 + z2)|`
pub fn second_term_value<T: Scalar>(theta: T, s: &SymbolTriple<T>) -> Result<T> {
    check_theta(theta)?;
    let half = T::lit(0.5);
    Ok((s.p(theta) + s.z0 * half + (s.z1 + s.z2) * (half - theta)).norm())
}

/// Lower bound on [`second_term_value`], or `None` where no branch applies.
pub fn theorem24_lower_bound<T: Scalar>(theta: T, gamma: T) -> Result<Option<T>> {
    if !(theta >= T::lit(0.25)) || !theta.is_finite() {
        return Err(Error::BoundDomain(format!("theta = {theta} is below 1/4")));
    }
    if !(gamma >= T::zero() && gamma <= T::one()) {
        return Err(Error::BoundDomain(format!("gamma = {gamma} outside [0, 1]")));
    }
    if theta >= T::lit(0.5) {
        return Ok(Some(T::one()));
    }
    let two_theta = T::lit(2.0) * theta;
    let th2 = theta * theta;
    if gamma < two_theta {
        return Ok(Some((theta - T::lit(0.25)) / th2));
    }
    let upper = (T::lit(6.0) * theta - T::one()).min(T::one());
    if gamma <= upper {
        let a = theta - (T::one() + gamma) / T::lit(6.0);
        let b = theta - (T::one() + gamma) / T::lit(2.0);
        return Ok(Some(-T::lit(3.0) * a * b / th2));
    }
    Ok(None)
}
