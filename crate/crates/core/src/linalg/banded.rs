use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, ScaledVector};
use crate::scalar::Scalar;

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Row `i` stores columns `i - lower ..= i + upper`; everything outside the
/// band is structurally zero and cannot be written.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedMatrix<T> {
    size: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandedMatrix<T> {
    pub fn zeros(size: usize, lower: usize, upper: usize) -> Self {
        assert!(size > 0, "banded matrix needs at least one row");
        Self {
            size,
            lower,
            upper,
            data: vec![T::zero(); size * (lower + upper + 1)],
        }
    }

    pub fn identity(size: usize, lower: usize, upper: usize) -> Self {
        let mut m = Self::zeros(size, lower, upper);
        let w = m.width();
        for i in 0..size {
            m.data[i * w + lower] = T::one();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    #[inline]
    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.size && j < self.size && j + self.lower >= i && j <= i + self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[i * self.width() + j + self.lower - i]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::InvalidParameter(format!(
                "entry ({i}, {j}) lies outside the ({}, {}) band",
                self.lower, self.upper
            )));
        }
        let w = self.width();
        self.data[i * w + j + self.lower - i] = value;
        Ok(())
    }

    /// Row `i` as `(first column, band entries)`, clipped to the matrix.
    #[inline]
    fn row(&self, i: usize) -> (usize, &[T]) {
        let w = self.width();
        let start = i.saturating_sub(self.lower);
        let skip = start + self.lower - i;
        let end = (i + self.upper + 1).min(self.size);
        (start, &self.data[i * w + skip..i * w + skip + (end - start)])
    }

    /// `y = A x` on raw slices.
    pub fn mul_slice(&self, x: &[T], y: &mut [T]) {
        debug_assert!(x.len() == self.size && y.len() == self.size);
        for (i, yi) in y.iter_mut().enumerate() {
            let (start, band) = self.row(i);
            *yi = band
                .iter()
                .zip(&x[start..])
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }

    /// `y = A x` for `batch` interleaved vectors; entry `(row r, vector b)`
    /// lives at `r * batch + b`.
    pub fn mul_batch(&self, x: &[T], y: &mut [T], batch: usize) {
        debug_assert!(x.len() == self.size * batch && y.len() == self.size * batch);
        for i in 0..self.size {
            let (start, band) = self.row(i);
            let yi = &mut y[i * batch..(i + 1) * batch];
            yi.iter_mut().for_each(|v| *v = T::zero());
            for (off, &a) in band.iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                let xr = &x[(start + off) * batch..(start + off + 1) * batch];
                for (v, &xv) in yi.iter_mut().zip(xr) {
                    *v += a * xv;
                }
            }
        }
    }

    pub fn apply(&self, x: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        if x.len() != self.size {
            return Err(Error::Dimension {
                expected: self.size,
                found: x.len(),
            });
        }
        let mut y = ScaledVector::zeros(self.size);
        self.mul_slice(x.as_slice(), y.as_mut_slice());
        Ok(y)
    }

    /// `alpha * I + beta * A` with the same band layout.
    pub fn shifted(&self, alpha: T, beta: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= beta);
        let w = out.width();
        for i in 0..self.size {
            out.data[i * w + self.lower] += alpha;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    pub fn factor(&self) -> Result<BandedLu<T>> {
        BandedLu::new(self)
    }
}

/// LU factorization with partial pivoting restricted to the band.
///
/// Row exchanges widen the upper bandwidth of `U` to `lower + upper`.
#[derive(Clone, Debug)]
pub struct BandedLu<T> {
    size: usize,
    lower: usize,
    /// Upper bandwidth of `U`.
    u_band: usize,
    /// Row `k` holds `U[k, k ..= k + u_band]`.
    u: Vec<T>,
    /// Row `k` holds the multipliers for rows `k+1 ..= k+lower`.
    l: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    pub fn new(a: &BandedMatrix<T>) -> Result<Self> {
        let n = a.size;
        let kl = a.lower;
        let u_band = a.lower + a.upper;
        // Working window of row r: absolute columns r - kl ..= r + kl + ku.
        let w = 2 * kl + a.upper + 1;
        let mut work = vec![T::zero(); n * w];
        let at = |r: usize, c: usize| r * w + c + kl - r;
        for i in 0..n {
            let (start, band) = a.row(i);
            for (off, &v) in band.iter().enumerate() {
                work[at(i, start + off)] = v;
            }
        }

        let mut l = vec![T::zero(); n * kl];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let col_end = (k + u_band).min(n - 1);
            let mut p = k;
            let mut best = work[at(k, k)].abs();
            for r in k + 1..=last {
                let v = work[at(r, k)].abs();
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
                for c in k..=col_end {
                    work.swap(at(k, c), at(p, c));
                }
            }
            let pivot = work[at(k, k)];
            for r in k + 1..=last {
                let m = work[at(r, k)] / pivot;
                l[k * kl + (r - k - 1)] = m;
                work[at(r, k)] = T::zero();
                if m != T::zero() {
                    for c in k + 1..=col_end {
                        let ukc = work[at(k, c)];
                        work[at(r, c)] -= m * ukc;
                    }
                }
            }
        }

        let uw = u_band + 1;
        let mut u = vec![T::zero(); n * uw];
        for k in 0..n {
            for c in k..=(k + u_band).min(n - 1) {
                u[k * uw + c - k] = work[at(k, c)];
            }
        }
        Ok(Self {
            size: n,
            lower: kl,
            u_band,
            u,
            l,
            pivots,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [T]) {
        debug_assert_eq!(b.len(), self.size);
        let n = self.size;
        let kl = self.lower;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            for r in k + 1..=last {
                b[r] -= self.l[k * kl + (r - k - 1)] * bk;
            }
        }
        let uw = self.u_band + 1;
        for k in (0..n).rev() {
            let row = &self.u[k * uw..(k + 1) * uw];
            let end = (k + self.u_band).min(n - 1);
            let mut s = b[k];
            for c in k + 1..=end {
                s -= row[c - k] * b[c];
            }
            b[k] = s / row[0];
        }
    }

    /// Solves for `batch` interleaved right-hand sides at once; entry
    /// `(row r, system b)` lives at `r * batch + b`.
    pub fn solve_batch(&self, data: &mut [T], batch: usize) {
        debug_assert_eq!(data.len(), self.size * batch);
        let n = self.size;
        let kl = self.lower;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                let (lo, hi) = data.split_at_mut(p * batch);
                lo[k * batch..(k + 1) * batch].swap_with_slice(&mut hi[..batch]);
            }
            let last = (k + kl).min(n - 1);
            for r in k + 1..=last {
                let m = self.l[k * kl + (r - k - 1)];
                if m == T::zero() {
                    continue;
                }
                let (lo, hi) = data.split_at_mut(r * batch);
                let src = &lo[k * batch..(k + 1) * batch];
                for (d, &s) in hi[..batch].iter_mut().zip(src) {
                    *d -= m * s;
                }
            }
        }
        let uw = self.u_band + 1;
        for k in (0..n).rev() {
            let row = &self.u[k * uw..(k + 1) * uw];
            let end = (k + self.u_band).min(n - 1);
            let (lo, hi) = data.split_at_mut((k + 1) * batch);
            let target = &mut lo[k * batch..];
            for c in k + 1..=end {
                let coef = row[c - k];
                if coef == T::zero() {
                    continue;
                }
                let src = &hi[(c - k - 1) * batch..(c - k) * batch];
                for (d, &s) in target.iter_mut().zip(src) {
                    *d -= coef * s;
                }
            }
            let inv = T::one() / row[0];
            target.iter_mut().for_each(|d| *d *= inv);
        }
    }

    pub fn solve(&self, b: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        if b.len() != self.size {
            return Err(Error::Dimension {
                expected: self.size,
                found: b.len(),
            });
        }
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        Ok(x)
    }
}

/// Solves `M x = b` for a banded `M`.
pub fn banded_solve<T: Scalar>(m: &BandedMatrix<T>, b: &ScaledVector<T>) -> Result<ScaledVector<T>> {
    m.factor()?.solve(b)
}
