use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `f(x, y) = sqrt(1 + x^2) sqrt(1 + y^2) - delta (x + y)`
pub fn lemma_f<T: Scalar>(delta: T, x: T, y: T) -> T {
    (T::one() + x * x).sqrt() * (T::one() + y * y).sqrt() - delta * (x + y)
}

fn check_delta<T: Scalar>(delta: T) -> Result<()> {
    if delta >= T::zero() && delta <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("delta = {delta} outside [0, 1]")))
    }
}

/// Closed-form minimum of [`lemma_f`] over the closed first quadrant, `1 - delta^2`.
pub fn lemma_f_min<T: Scalar>(delta: T) -> Result<T> {
    check_delta(delta)?;
    Ok(T::one() - delta * delta)
}

/// Smallest grid value of [`lemma_f`] and where it occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMinimum<T> {
    pub value: T,
    pub x: T,
    pub y: T,
}

/// Brute-force minimum over the uniform `(grid_n + 1)^2` grid on `[0, x_max]^2`.
/// Ties keep the first point in row-major order.
pub fn lemma_f_min_oracle<T: Scalar>(delta: T, grid_n: usize, x_max: T) -> Result<GridMinimum<T>> {
    check_delta(delta)?;
    if grid_n == 0 || !(x_max > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "grid needs grid_n >= 1 and x_max > 0, got {grid_n} and {x_max}"
        )));
    }
    let h = x_max / T::from_usize(grid_n).unwrap();
    let coords: Vec<T> = (0..=grid_n).map(|i| T::from_usize(i).unwrap() * h).collect();
    let roots: Vec<T> = coords.iter().map(|&c| (T::one() + c * c).sqrt()).collect();
    let mut best = GridMinimum {
        value: T::infinity(),
        x: T::zero(),
        y: T::zero(),
    };
    for (&x, &rx) in coords.iter().zip(&roots) {
        for (&y, &ry) in coords.iter().zip(&roots) {
            let v = rx * ry - delta * (x + y);
            if v < best.value {
                best = GridMinimum { value: v, x, y };
            }
        }
    }
    Ok(best)
}
