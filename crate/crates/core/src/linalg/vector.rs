use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Grid function with the naturally scaled inner product `(v, w) = v.w / m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledVector<T> {
    data: Vec<T>,
}

impl<T: Scalar> ScaledVector<T> {
    pub fn from_vec(data: Vec<T>) -> Self {
        Self { data }
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            data: vec![T::zero(); m],
        }
    }

    pub fn from_fn(m: usize, f: impl FnMut(usize) -> T) -> Self {
        Self {
            data: (0..m).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        scaled_inner(self, other)
    }

    pub fn norm(&self) -> T {
        scaled_norm(self)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (s, &xi) in self.data.iter_mut().zip(&x.data) {
            *s += a * xi;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, a: T) -> Self {
        Self::from_vec(self.data.iter().map(|&x| a * x).collect())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// `||self - other|| / max(||other||, tiny)` in the scaled norm.
    pub fn relative_distance(&self, other: &Self) -> T {
        let d = self.sub(other).norm();
        let n = other.norm();
        if n > T::zero() {
            d / n
        } else {
            d
        }
    }
}

impl<T> Index<usize> for ScaledVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for ScaledVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

/// `(1/m) * sum v_i w_i`.
pub fn scaled_inner<T: Scalar>(v: &ScaledVector<T>, w: &ScaledVector<T>) -> Result<T> {
    if v.len() != w.len() {
        return Err(Error::Dimension {
            expected: v.len(),
            found: w.len(),
        });
    }
    if v.is_empty() {
        return Err(Error::InvalidParameter("scaled inner product of empty vectors".into()));
    }
    let s = v
        .iter()
        .zip(w.iter())
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    Ok(s / T::from_usize(v.len()).unwrap())
}

pub fn scaled_norm<T: Scalar>(v: &ScaledVector<T>) -> T {
    if v.is_empty() {
        return T::zero();
    }
    let s = v.iter().fold(T::zero(), |acc, &a| acc + a * a);
    (s / T::from_usize(v.len()).unwrap()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_vector_has_unit_inner_product() {
        for m in [1, 2, 17, 1000] {
            let v = ScaledVector::from_vec(vec![1.0f64; m]);
            assert_eq!(scaled_inner(&v, &v).unwrap(), 1.0);
        }
    }

    #[test]
    fn three_four_example() {
        let v = ScaledVector::from_vec(vec![3.0f64, 4.0]);
        assert_eq!(scaled_inner(&v, &v).unwrap(), 12.5);
        assert_eq!(scaled_norm(&v), 12.5f64.sqrt());
    }

    #[test]
    fn orthogonal_vectors() {
        let v = ScaledVector::from_vec(vec![1.0f64, 1.0]);
        let w = ScaledVector::from_vec(vec![1.0f64, -1.0]);
        assert_eq!(scaled_inner(&v, &w).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let v = ScaledVector::from_vec(vec![1.0f64, 1.0]);
        let w = ScaledVector::from_vec(vec![1.0f64]);
        assert_eq!(
            scaled_inner(&v, &w),
            Err(Error::Dimension {
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn works_in_single_precision() {
        let v = ScaledVector::from_vec(vec![3.0f32, 4.0]);
        assert_eq!(scaled_norm(&v), 12.5f32.sqrt());
    }

    proptest! {
        #[test]
        fn norm_is_scale_invariant_under_replication(xs in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            // Repeating a vector leaves its scaled norm unchanged.
            let v = ScaledVector::from_vec(xs.clone());
            let mut doubled = xs.clone();
            doubled.extend_from_slice(&xs);
            let w = ScaledVector::from_vec(doubled);
            prop_assert!((scaled_norm(&v) - scaled_norm(&w)).abs() <= 1e-12 * (1.0 + scaled_norm(&v)));
        }
    }
}
