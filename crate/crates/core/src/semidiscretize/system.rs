use crate::error::{Error, Result};
use crate::linalg::{DenseLu, DenseMatrix, ScaledVector};
use crate::scalar::Scalar;

/// Solver for `(I - shift * A_j) x = b`, factorized once.
pub trait ShiftedSolve<T> {
    fn solve_in_place(&self, rhs: &mut [T]);
}

/// Linear semidiscrete system `F(t, v) = sum_j (A_j v + g_j(t))`, split into a
/// mixed-derivative part `j = 0` and `k` directional parts `j = 1..=k`.
pub trait SplitSystem<T: Scalar>: Sync {
    type Factor: ShiftedSolve<T> + Send + Sync;

    /// Number of unknowns `m`.
    fn dim(&self) -> usize;

    /// Number of implicit directions `k`.
    fn directions(&self) -> usize;

    /// `out = A_j v`.
    fn apply_part(&self, j: usize, v: &[T], out: &mut [T]);

    /// `out += scale * g_j(t)`.
    fn add_source(&self, j: usize, t: T, scale: T, out: &mut [T]);

    /// Factorizes `I - shift * A_j` for `1 <= j <= k`.
    fn factor_shifted(&self, j: usize, shift: T) -> Result<Self::Factor>;

    /// Final time of the underlying problem, if any.
    fn horizon(&self) -> T {
        T::infinity()
    }

    /// `F_j(t, v) = A_j v + g_j(t)`.
    fn eval_part(&self, j: usize, t: T, v: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        check_dim(self.dim(), v.len())?;
        let mut out = ScaledVector::zeros(self.dim());
        self.apply_part(j, v.as_slice(), out.as_mut_slice());
        self.add_source(j, t, T::one(), out.as_mut_slice());
        Ok(out)
    }

    /// `F(t, v) = A v + g(t)`.
    fn apply_full(&self, t: T, v: &ScaledVector<T>) -> Result<ScaledVector<T>> {
        check_dim(self.dim(), v.len())?;
        let m = self.dim();
        let mut out = ScaledVector::zeros(m);
        let mut part = vec![T::zero(); m];
        for j in 0..=self.directions() {
            self.apply_part(j, v.as_slice(), &mut part);
            for (o, &p) in out.as_mut_slice().iter_mut().zip(&part) {
                *o += p;
            }
            self.add_source(j, t, T::one(), out.as_mut_slice());
        }
        Ok(out)
    }

    /// `g_j(t)` as a vector.
    fn source(&self, j: usize, t: T) -> ScaledVector<T> {
        let mut out = ScaledVector::zeros(self.dim());
        self.add_source(j, t, T::one(), out.as_mut_slice());
        out
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// Split system held as explicit dense matrices, with sources
/// `g_j(t) = exp(-decay t) * base_j`.
#[derive(Clone, Debug)]
pub struct DenseSplit<T> {
    parts: Vec<DenseMatrix<T>>,
    sources: Vec<ScaledVector<T>>,
    decay: T,
}

impl<T: Scalar> DenseSplit<T> {
    /// `parts[0]` is the mixed part, `parts[1..]` the directions.
    pub fn new(parts: Vec<DenseMatrix<T>>, sources: Vec<ScaledVector<T>>, decay: T) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::InvalidParameter(
                "need a mixed part and at least one direction".into(),
            ));
        }
        if sources.len() != parts.len() {
            return Err(Error::Dimension {
                expected: parts.len(),
                found: sources.len(),
            });
        }
        let m = parts[0].rows();
        for p in &parts {
            if p.rows() != m || p.cols() != m {
                return Err(Error::Dimension {
                    expected: m,
                    found: if p.rows() != m { p.rows() } else { p.cols() },
                });
            }
        }
        for s in &sources {
            check_dim(m, s.len())?;
        }
        Ok(Self {
            parts,
            sources,
            decay,
        })
    }

    /// Homogeneous system (`g = 0`).
    pub fn homogeneous(parts: Vec<DenseMatrix<T>>) -> Result<Self> {
        let m = parts.first().map_or(0, |p| p.rows());
        let sources = vec![ScaledVector::zeros(m); parts.len()];
        Self::new(parts, sources, T::zero())
    }

    pub fn parts(&self) -> &[DenseMatrix<T>] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> &DenseMatrix<T> {
        &self.parts[j]
    }

    pub fn source_bases(&self) -> &[ScaledVector<T>] {
        &self.sources
    }

    pub fn decay(&self) -> T {
        self.decay
    }

    /// `A = A0 + A1 + ... + Ak`.
    pub fn full_matrix(&self) -> DenseMatrix<T> {
        let mut a = self.parts[0].clone();
        for p in &self.parts[1..] {
            a = a.add(p).expect("parts share a size");
        }
        a
    }

    /// Sum of the source bases, `g(t) = exp(-decay t) * total`.
    pub fn total_source_base(&self) -> ScaledVector<T> {
        let mut g = ScaledVector::zeros(self.dim());
        for s in &self.sources {
            g.axpy(T::one(), s);
        }
        g
    }

    /// `Z_j = dt A_j` for every part.
    pub fn scaled_parts(&self, dt: T) -> Vec<DenseMatrix<T>> {
        self.parts.iter().map(|p| p.scale(dt)).collect()
    }
}

pub struct DenseFactor<T>(DenseLu<T>);

impl<T: Scalar> ShiftedSolve<T> for DenseFactor<T> {
    fn solve_in_place(&self, rhs: &mut [T]) {
        self.0.solve_in_place(rhs);
    }
}

impl<T: Scalar> SplitSystem<T> for DenseSplit<T> {
    type Factor = DenseFactor<T>;

    fn dim(&self) -> usize {
        self.parts[0].rows()
    }

    fn directions(&self) -> usize {
        self.parts.len() - 1
    }

    fn apply_part(&self, j: usize, v: &[T], out: &mut [T]) {
        self.parts[j].mul_slice(v, out);
    }

    fn add_source(&self, j: usize, t: T, scale: T, out: &mut [T]) {
        let c = scale * (-self.decay * t).exp();
        for (o, &g) in out.iter_mut().zip(self.sources[j].iter()) {
            *o += c * g;
        }
    }

    fn factor_shifted(&self, j: usize, shift: T) -> Result<Self::Factor> {
        let q = DenseMatrix::identity(self.dim()).add_scaled(-shift, &self.parts[j])?;
        q.lu()
            .map(DenseFactor)
            .map_err(|_| Error::SingularShift { direction: j })
    }
}
