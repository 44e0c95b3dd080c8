use nalgebra::DMatrix;
use num_complex::Complex64;

use super::STRUCT_TOL;
use crate::error::{Error, Result};

/// What a [`LinearOp`] is promised to be. Checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Unitary,
    /// A measurement (Kraus) operator; no structural constraint on its own.
    Kraus,
    /// Hermitian with non-negative spectrum, e.g. a POVM element.
    Positive,
}

/// Dense square operator on a `2^k`-dimensional sub-register.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOp {
    matrix: DMatrix<Complex64>,
    kind: OpKind,
}

impl LinearOp {
    pub fn new(kind: OpKind, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.ncols() });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadLength(dim));
        }
        if let Some(i) = matrix.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let op = Self { matrix, kind };
        match kind {
            OpKind::Unitary => {
                let dev = op.unitarity_deviation();
                if dev > STRUCT_TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
            OpKind::Positive => {
                let dev = op.hermiticity_deviation().max(-op.min_eigenvalue());
                if dev > STRUCT_TOL {
                    return Err(Error::NotPositive(dev));
                }
            }
            OpKind::Kraus => {}
        }
        Ok(op)
    }

    /// Row-major construction from real entries.
    pub fn from_real(kind: OpKind, dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(kind, DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&e| Complex64::new(e, 0.0))))
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), kind: OpKind::Unitary }
    }

    /// Permutation matrix sending basis state `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let dim = perm.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = Complex64::new(1.0, 0.0);
        }
        Self { matrix: m, kind: OpKind::Unitary }
    }

    pub fn diagonal(kind: OpKind, diag: &[Complex64]) -> Result<Self> {
        Self::new(kind, DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> OpKind {
        self.kind
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> LinearOp {
        Self { matrix: self.matrix.adjoint(), kind: self.kind }
    }

    /// Operator product `self * rhs` (apply `rhs` first). Unitary only when both are.
    pub fn compose(&self, rhs: &LinearOp) -> LinearOp {
        let kind =
            if self.kind == OpKind::Unitary && rhs.kind == OpKind::Unitary { OpKind::Unitary } else { OpKind::Kraus };
        Self { matrix: &self.matrix * &rhs.matrix, kind }
    }

    /// `self ⊗ rhs`, with `self` on the most significant qubits.
    pub fn kron(&self, rhs: &LinearOp) -> LinearOp {
        let kind = if self.kind == rhs.kind { self.kind } else { OpKind::Kraus };
        Self { matrix: self.matrix.kronecker(&rhs.matrix), kind }
    }

    pub fn scaled(&self, factor: Complex64) -> LinearOp {
        let kind = if self.kind == OpKind::Unitary && (factor.norm() - 1.0).abs() < 1e-15 {
            OpKind::Unitary
        } else {
            OpKind::Kraus
        };
        Self { matrix: &self.matrix * factor, kind }
    }

    /// `M^dag M`.
    pub fn effect(&self) -> DMatrix<Complex64> {
        self.matrix.adjoint() * &self.matrix
    }

    /// max |U^dag U - I|.
    pub fn unitarity_deviation(&self) -> f64 {
        max_abs(&(self.effect() - DMatrix::<Complex64>::identity(self.dim(), self.dim())))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest entry-wise deviation between two operators.
    pub fn distance(&self, other: &LinearOp) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    hermitian_part(m).symmetric_eigenvalues().iter().copied().collect()
}

/// Unique positive square root of a positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-10, 1e-14)` are treated as zero.
pub fn psd_sqrt(m: &DMatrix<Complex64>) -> Result<LinearOp> {
    let eig = hermitian_part(m).symmetric_eigen();
    let lowest = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < -STRUCT_TOL {
        return Err(Error::NotPositive(-lowest));
    }
    let roots = eig.eigenvalues.map(|l| Complex64::new(if l < 1e-14 { 0.0 } else { l.sqrt() }, 0.0));
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.adjoint();
    LinearOp::new(OpKind::Kraus, root)
}
