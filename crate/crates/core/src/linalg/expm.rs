//! Matrix exponential by scaling and squaring with a degree-13 Pade
//! approximant (Higham, 2005).

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate
/// to double precision.
const THETA13: f64 = 5.371_920_351_148_152;

pub fn expm<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.rows(),
            found: a.cols(),
        });
    }
    let n = a.rows();
    let norm = a.norm_one().to_f64().unwrap_or(f64::INFINITY);
    if !norm.is_finite() {
        return Err(Error::InvalidParameter("matrix exponential of non-finite matrix".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(T::lit(2f64.powi(-squarings)));

    let b = |i: usize| T::lit(PADE13[i]);
    let id = DenseMatrix::identity(n);
    let a2 = a.matmul(&a)?;
    let a4 = a2.matmul(&a2)?;
    let a6 = a4.matmul(&a2)?;

    let inner_u = a6
        .scale(b(13))
        .add_scaled(b(11), &a4)?
        .add_scaled(b(9), &a2)?;
    let u = a6
        .matmul(&inner_u)?
        .add_scaled(b(7), &a6)?
        .add_scaled(b(5), &a4)?
        .add_scaled(b(3), &a2)?
        .add_scaled(b(1), &id)?;
    let u = a.matmul(&u)?;

    let inner_v = a6
        .scale(b(12))
        .add_scaled(b(10), &a4)?
        .add_scaled(b(8), &a2)?;
    let v = a6
        .matmul(&inner_v)?
        .add_scaled(b(6), &a6)?
        .add_scaled(b(4), &a4)?
        .add_scaled(b(2), &a2)?
        .add_scaled(b(0), &id)?;

    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    let mut r = q.lu()?.solve_matrix(&p)?;
    for _ in 0..squarings {
        r = r.matmul(&r)?;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_identity() {
        let e = expm(&DenseMatrix::<f64>::zeros(4, 4)).unwrap();
        assert!(e.sub(&DenseMatrix::identity(4)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix_exponentiates_entrywise() {
        let d = [-300.0f64, -1.0, 0.5, 2.0];
        let e = expm(&DenseMatrix::diagonal(&d)).unwrap();
        for (i, &x) in d.iter().enumerate() {
            let want = x.exp();
            assert!((e[(i, i)] - want).abs() <= 1e-13 * want.max(1e-300), "{i}");
        }
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, w], [-w, 0]]) is a rotation by angle w.
        let w = 10.0f64;
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, w, -w, 0.0]).unwrap();
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - w.cos()).abs() < 1e-12);
        assert!((e[(0, 1)] - w.sin()).abs() < 1e-12);
        assert!((e[(1, 0)] + w.sin()).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_jordan_block() {
        // exp of a 3x3 shifted Jordan block with eigenvalue -2.
        let a = DenseMatrix::from_row_major(3, 3, vec![-2.0f64, 1.0, 0.0, 0.0, -2.0, 1.0, 0.0, 0.0, -2.0])
            .unwrap();
        let e = expm(&a).unwrap();
        let c = (-2.0f64).exp();
        let want = [[c, c, c / 2.0], [0.0, c, c], [0.0, 0.0, c]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e[(i, j)] - want[i][j]).abs() < 1e-15);
            }
        }
    }
}
