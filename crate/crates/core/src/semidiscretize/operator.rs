use crate::error::{Error, Result};
use crate::linalg::{BandedLu, BandedMatrix, DenseMatrix, ScaledVector, DENSE_CAP_DEFAULT};
use crate::scalar::Scalar;
use crate::semidiscretize::system::{check_dim, DenseSplit, ShiftedSolve, SplitSystem};
use crate::semidiscretize::{Grid2D, ProblemSpec};

/// Assembled split operator for the 2D model problem.
///
/// The coefficients are constant, so every x-line shares one banded matrix
/// and every y-line shares another. Sources are `g_j(t) = exp(-r t) * base_j`.
#[derive(Clone, Debug)]
pub struct SplitOperator2D<T> {
    grid: Grid2D,
    /// Weight of the four-point cross stencil, `2 d12 / (4 dx dy)`.
    mixed_weight: T,
    line_x: BandedMatrix<T>,
    line_y: BandedMatrix<T>,
    sources: [ScaledVector<T>; 3],
    decay: T,
    final_time: T,
}

/// Second-order line operator `d u'' + c u'` on `n` interior points of width `h`.
///
/// Central differences everywhere except the last row, where the convection
/// term uses the one-sided `(3 u_i - 4 u_{i-1} + u_{i-2}) / (2h)`. Returns the
/// matrix and the weights multiplying the left/right boundary values.
fn line_operator<T: Scalar>(n: usize, h: T, diffusion: T, convection: T) -> (BandedMatrix<T>, T, T) {
    let mut a = BandedMatrix::zeros(n, 2, 1);
    let two = T::lit(2.0);
    let dd = diffusion / (h * h);
    let cc = convection / (two * h);
    for i in 0..n {
        let last = i == n - 1;
        let mut diag = -two * dd;
        let mut lower = dd;
        let mut upper = dd;
        if last {
            diag += T::lit(3.0) * cc;
            lower -= T::lit(4.0) * cc;
            a.set(i, i - 2, cc).expect("in band");
        } else {
            lower -= cc;
            upper += cc;
        }
        a.set(i, i, diag).expect("in band");
        if i > 0 {
            a.set(i, i - 1, lower).expect("in band");
        }
        if !last {
            a.set(i, i + 1, upper).expect("in band");
        }
    }
    (a, dd - cc, dd)
}

/// Builds the split semidiscrete system for `problem` on `grid`.
pub fn assemble<T: Scalar>(problem: &ProblemSpec<T>, grid: &Grid2D) -> Result<SplitOperator2D<T>> {
    problem.coefficients().validate()?;
    let c = problem.coefficients();
    let (m1, m2) = (grid.m1(), grid.m2());
    let dx = grid.dx::<T>();
    let dy = grid.dy::<T>();
    let (line_x, left_x, right_x) = line_operator(m1, dx, c.d11, c.c1);
    let (line_y, left_y, right_y) = line_operator(m2, dy, c.d22, c.c2);
    let mixed_weight = T::lit(2.0) * c.d12 / (T::lit(4.0) * dx * dy);

    let b = |i: isize, j: isize| problem.boundary_profile(grid.x(i), grid.y(j));
    let interior = |i: isize, j: isize| i >= 0 && j >= 0 && (i as usize) < m1 && (j as usize) < m2;

    let m = grid.len();
    let mut g0 = ScaledVector::zeros(m);
    let mut g1 = ScaledVector::zeros(m);
    let mut g2 = ScaledVector::zeros(m);
    for j in 0..m2 {
        for i in 0..m1 {
            let k = grid.index(i, j);
            let (ii, jj) = (i as isize, j as isize);
            if i == 0 {
                g1[k] += left_x * b(-1, jj);
            }
            if i == m1 - 1 {
                g1[k] += right_x * b(m1 as isize, jj);
            }
            if j == 0 {
                g2[k] += left_y * b(ii, -1);
            }
            if j == m2 - 1 {
                g2[k] += right_y * b(ii, m2 as isize);
            }
            if mixed_weight != T::zero() {
                for (di, dj, sign) in [(1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                    let (ni, nj) = (ii + di, jj + dj);
                    if !interior(ni, nj) {
                        g0[k] += T::lit(sign) * mixed_weight * b(ni, nj);
                    }
                }
            }
        }
    }

    Ok(SplitOperator2D {
        grid: *grid,
        mixed_weight,
        line_x,
        line_y,
        sources: [g0, g1, g2],
        decay: problem.decay(),
        final_time: problem.final_time(),
    })
}

impl<T: Scalar> SplitOperator2D<T> {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Banded operator shared by all lines of direction `1` (x) or `2` (y).
    pub fn line_matrix(&self, direction: usize) -> &BandedMatrix<T> {
        match direction {
            1 => &self.line_x,
            2 => &self.line_y,
            _ => panic!("direction must be 1 or 2, got {direction}"),
        }
    }

    pub fn source_base(&self, j: usize) -> &ScaledVector<T> {
        &self.sources[j]
    }

    pub fn decay(&self) -> T {
        self.decay
    }

    pub fn final_time(&self) -> T {
        self.final_time
    }

    fn apply_mixed(&self, v: &[T], out: &mut [T]) {
        let (m1, m2) = (self.grid.m1(), self.grid.m2());
        let w = self.mixed_weight;
        if w == T::zero() {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        let at = |i: usize, j: usize| v[i + m1 * j];
        for j in 0..m2 {
            for i in 0..m1 {
                let mut s = T::zero();
                if i + 1 < m1 {
                    if j + 1 < m2 {
                        s += at(i + 1, j + 1);
                    }
                    if j > 0 {
                        s -= at(i + 1, j - 1);
                    }
                }
                if i > 0 {
                    if j + 1 < m2 {
                        s -= at(i - 1, j + 1);
                    }
                    if j > 0 {
                        s += at(i - 1, j - 1);
                    }
                }
                out[i + m1 * j] = w * s;
            }
        }
    }

    /// Expands the operator into explicit `m x m` matrices.
    pub fn to_dense(&self) -> Result<DenseSplit<T>> {
        self.to_dense_capped(DENSE_CAP_DEFAULT)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DenseSplit<T>> {
        let m = self.dim();
        if m > cap {
            return Err(Error::DenseCapExceeded { requested: m, cap });
        }
        let mut parts = Vec::with_capacity(3);
        let mut unit = vec![T::zero(); m];
        let mut col = vec![T::zero(); m];
        for j in 0..3 {
            let mut a = DenseMatrix::zeros(m, m);
            for c in 0..m {
                unit[c] = T::one();
                self.apply_part(j, &unit, &mut col);
                unit[c] = T::zero();
                for (r, &x) in col.iter().enumerate() {
                    if x != T::zero() {
                        a[(r, c)] = x;
                    }
                }
            }
            parts.push(a);
        }
        DenseSplit::new(parts, self.sources.to_vec(), self.decay)
    }

    /// `(A0 + A1 + A2) v + g(t)`.
    pub fn apply_full(&self, t: T, v: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        SplitSystem::apply_full(self, t, v)
    }
}

/// Factorized `I - shift * A_j` for one direction, applied line by line.
#[derive(Clone, Debug)]
pub struct LineFactor<T> {
    lu: BandedLu<T>,
    direction: usize,
    m1: usize,
}

impl<T: Scalar> ShiftedSolve<T> for LineFactor<T> {
    fn solve_in_place(&self, rhs: &mut [T]) {
        match self.direction {
            1 => rhs
                .chunks_exact_mut(self.m1)
                .for_each(|line| self.lu.solve_in_place(line)),
            // x-fastest ordering interleaves the y-lines with stride m1.
            _ => self.lu.solve_batch(rhs, self.m1),
        }
    }
}

impl<T: Scalar> SplitSystem<T> for SplitOperator2D<T> {
    type Factor = LineFactor<T>;

    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn directions(&self) -> usize {
        2
    }

    fn apply_part(&self, j: usize, v: &[T], out: &mut [T]) {
        debug_assert!(v.len() == self.dim() && out.len() == self.dim());
        let m1 = self.grid.m1();
        match j {
            0 => self.apply_mixed(v, out),
            1 => {
                for (vi, oi) in v.chunks_exact(m1).zip(out.chunks_exact_mut(m1)) {
                    self.line_x.mul_slice(vi, oi);
                }
            }
            2 => self.line_y.mul_batch(v, out, m1),
            _ => panic!("part index {j} out of range"),
        }
    }

    fn add_source(&self, j: usize, t: T, scale: T, out: &mut [T]) {
        let c = scale * (-self.decay * t).exp();
        for (o, &g) in out.iter_mut().zip(self.sources[j].iter()) {
            *o += c * g;
        }
    }

    fn factor_shifted(&self, j: usize, shift: T) -> Result<Self::Factor> {
        let q = self.line_matrix(j).shifted(T::one(), -shift);
        let lu = q.factor().map_err(|_| Error::SingularShift { direction: j })?;
        Ok(LineFactor {
            lu,
            direction: j,
            m1: self.grid.m1(),
        })
    }

    fn horizon(&self) -> T {
        self.final_time
    }

    fn apply_full(&self, t: T, v: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        check_dim(self.dim(), v.len())?;
        let m = self.dim();
        let mut out = ScaledVector::zeros(m);
        let mut part = vec![T::zero(); m];
        for j in 0..3 {
            self.apply_part(j, v.as_slice(), &mut part);
            for (o, &p) in out.as_mut_slice().iter_mut().zip(&part) {
                *o += p;
            }
            self.add_source(j, t, T::one(), out.as_mut_slice());
        }
        Ok(out)
    }
}
