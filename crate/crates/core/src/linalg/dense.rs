use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::linalg::ScaledVector;
use crate::scalar::Scalar;

/// Largest unknown count accepted by the dense verification paths.
pub const DENSE_CAP_DEFAULT: usize = 2500;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        T::gemm(
            self.rows,
            self.cols,
            other.cols,
            &self.data,
            &other.data,
            &mut out.data,
        );
        Ok(out)
    }

    pub fn mul_slice(&self, x: &[T], y: &mut [T]) {
        debug_assert!(x.len() == self.cols && y.len() == self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }

    pub fn matvec(&self, x: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        if x.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: x.len(),
            });
        }
        let mut y = ScaledVector::zeros(self.rows);
        self.mul_slice(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `y = A^T x`
    fn mul_transpose_slice(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        for (i, &xi) in x.iter().enumerate() {
            for (yj, &a) in y.iter_mut().zip(self.row(i)) {
                *yj += a * xi;
            }
        }
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| a * x).collect(),
        }
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: T, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| x + a * y)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(T::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-T::one(), other)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        let mut sums = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for (s, &a) in sums.iter_mut().zip(self.row(i)) {
                *s += a.abs();
            }
        }
        sums.into_iter().fold(T::zero(), T::max)
    }

    pub fn lu(&self) -> Result<DenseLu<T>> {
        DenseLu::new(self)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.solve_matrix(&Self::identity(self.rows))
    }

    /// `A^n` by binary powering.
    pub fn power(&self, mut n: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Dimension {
                expected: self.rows,
                found: self.cols,
            });
        }
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut first = true;
        while n > 0 {
            if n & 1 == 1 {
                result = if first { base.clone() } else { result.matmul(&base)? };
                first = false;
            }
            n >>= 1;
            if n > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(result)
    }

    /// Largest singular value, by power iteration on `A^T A`.
    ///
    /// Returns `+inf` for a matrix with non-finite entries.
    pub fn spectral_norm(&self) -> T {
        if !self.is_finite() {
            return T::infinity();
        }
        let n = self.cols;
        if n == 0 || self.rows == 0 {
            return T::zero();
        }
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        // Normalize first so repeated products cannot overflow.
        let a = self.scale(T::one() / scale);
        let mut v: Vec<T> = (0..n)
            .map(|i| T::one() + T::lit(0.5) * T::lit(i as f64 * 0.618_033_988_75 + 0.3).sin())
            .collect();
        let mut av = vec![T::zero(); self.rows];
        let mut w = vec![T::zero(); n];
        normalize(&mut v);
        let mut lambda = T::zero();
        let tol = T::lit(POWER_TOL);
        for _ in 0..POWER_MAX_ITER {
            a.mul_slice(&v, &mut av);
            a.mul_transpose_slice(&av, &mut w);
            let next = l2(&w);
            if next == T::zero() {
                // v landed in the null space of A; any other direction works.
                break;
            }
            w.iter_mut().for_each(|x| *x /= next);
            std::mem::swap(&mut v, &mut w);
            let done = (next - lambda).abs() <= tol * next;
            lambda = next;
            if done {
                break;
            }
        }
        lambda.sqrt() * scale
    }
}

fn l2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let n = l2(v);
    v.iter_mut().for_each(|x| *x /= n);
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Dense LU factorization with row partial pivoting.
#[derive(Clone, Debug)]
pub struct DenseLu<T> {
    n: usize,
    lu: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension {
                expected: a.rows,
                found: a.cols,
            });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut pivots = vec![0; n];
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return Err(Error::Singular { column: k });
            }
            pivots[k] = p;
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
            }
            let pivot = lu[k * n + k];
            let (top, bottom) = lu.split_at_mut((k + 1) * n);
            let urow = &top[k * n + k + 1..(k + 1) * n];
            for r in 0..n - k - 1 {
                let row = &mut bottom[r * n..(r + 1) * n];
                let m = row[k] / pivot;
                row[k] = m;
                if m != T::zero() {
                    for (x, &u) in row[k + 1..].iter_mut().zip(urow) {
                        *x -= m * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, pivots })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let s = row.iter().zip(&b[..i]).fold(T::zero(), |acc, (&l, &x)| acc + l * x);
            b[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let s = row[i + 1..]
                .iter()
                .zip(&b[i + 1..])
                .fold(T::zero(), |acc, (&u, &x)| acc + u * x);
            b[i] = (b[i] - s) / row[i];
        }
    }

    pub fn solve(&self, b: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        if b.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if b.rows != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                found: b.rows,
            });
        }
        let bt = b.transpose();
        let mut xt = bt.clone();
        for j in 0..b.cols {
            self.solve_in_place(&mut xt.data[j * self.n..(j + 1) * self.n]);
        }
        Ok(xt.transpose())
    }
}

/// Spectral norm of `R^n`.
///
/// The `1/m` scaling of the inner product cancels in induced matrix norms, so
/// this is the ordinary largest singular value.
pub fn dense_power_norm<T: Scalar>(r: &DenseMatrix<T>, n: usize) -> Result<T> {
    Ok(r.power(n)?.spectral_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(a: &DenseMatrix<f64>) -> Vec<f64> {
        let n = a.rows();
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[i][j] * m[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if m[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let tau = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let t = if tau == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (mkp, mkq) = (m[k][p], m[k][q]);
                        m[k][p] = c * mkp - s * mkq;
                        m[k][q] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let (mpk, mqk) = (m[p][k], m[q][k]);
                        m[p][k] = c * mpk - s * mqk;
                        m[q][k] = s * mpk + c * mqk;
                    }
                }
            }
        }
        (0..n).map(|i| m[i][i]).collect()
    }

    #[test]
    fn identity_power_norm_is_one() {
        let id = DenseMatrix::<f64>::identity(6);
        for n in [1, 2, 7, 64] {
            assert!((dense_power_norm(&id, n).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_power_norm() {
        let d = DenseMatrix::diagonal(&[0.5f64, 0.25]);
        assert!((dense_power_norm(&d, 3).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn random_power_norm_matches_explicit_product_and_jacobi() {
        let r = random(10, 42).scale(0.4);
        let mut explicit = DenseMatrix::identity(10);
        for _ in 0..7 {
            explicit = explicit.matmul(&r).unwrap();
        }
        let gram = explicit.transpose().matmul(&explicit).unwrap();
        let sigma_max = jacobi_eigenvalues(&gram)
            .into_iter()
            .fold(f64::MIN, f64::max)
            .sqrt();
        let got = dense_power_norm(&r, 7).unwrap();
        assert!(
            (got - sigma_max).abs() <= 1e-10 * sigma_max,
            "{got} vs {sigma_max}"
        );
    }

    #[test]
    fn lu_solve_and_inverse() {
        let a = random(12, 3);
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv).unwrap();
        assert!(prod.sub(&DenseMatrix::identity(12)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn singular_dense_matrix_is_reported() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0f64, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(a.lu(), Err(Error::Singular { .. })));
    }

    #[test]
    fn power_matches_repeated_multiplication() {
        let a = random(5, 9).scale(0.5);
        let mut p = DenseMatrix::identity(5);
        for n in 0..10 {
            assert!(a.power(n).unwrap().sub(&p).unwrap().max_abs() < 1e-13);
            p = p.matmul(&a).unwrap();
        }
    }
}
