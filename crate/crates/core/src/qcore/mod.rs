//! Dense complex linear algebra over small qubit registers.
//!
//! Registers never exceed four qubits here (`a1`, `a2`, `b` and the ancilla
//! `B`), so everything is a plain dense vector or matrix.

mod measurement;
mod op;
mod state;

pub use measurement::{Branch, Label, MeasurementModel, OutcomeSample};
pub use op::{hermitian_eigenvalues, psd_sqrt, LinearOp, OpKind};
pub use state::{fidelity, PureState};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type Amplitude = Complex64;

/// Normalization tolerance for stored states.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for structural checks: unitarity, completeness, positivity.
pub const STRUCT_TOL: f64 = 1e-10;
/// Norm below which a branch is treated as absent.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;

/// Pauli operators with `sigma_z = |1><1| - |0><0|`.
pub mod paulis {
    use super::{LinearOp, OpKind};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    pub fn x() -> LinearOp {
        LinearOp::from_real(OpKind::Unitary, 2, &[0.0, 1.0, 1.0, 0.0]).expect("unitary")
    }

    pub fn z() -> LinearOp {
        LinearOp::from_real(OpKind::Unitary, 2, &[-1.0, 0.0, 0.0, 1.0]).expect("unitary")
    }

    /// `sigma_y = -i sigma_z sigma_x`.
    pub fn y() -> LinearOp {
        let i = Complex64::new(0.0, 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), i, -i, Complex64::new(0.0, 0.0)]);
        LinearOp::new(OpKind::Unitary, m).expect("unitary")
    }

    /// `exp(i angle sigma_y) = [[cos, -sin], [sin, cos]]` under this convention.
    pub fn exp_i_y(angle: f64) -> LinearOp {
        let (s, c) = angle.sin_cos();
        LinearOp::from_real(OpKind::Unitary, 2, &[c, -s, s, c]).expect("unitary")
    }

    /// `exp(i angle sigma_x)`.
    pub fn exp_i_x(angle: f64) -> LinearOp {
        let (s, c) = angle.sin_cos();
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(c, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, s), Complex64::new(c, 0.0)],
        );
        LinearOp::new(OpKind::Unitary, m).expect("unitary")
    }
}

/// Haar-random state: independent unit normals per real component, normalized.
pub fn random_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PureState {
    loop {
        let amps = (0..1usize << num_qubits)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if let Ok(s) = PureState::normalize(amps) {
            return s;
        }
    }
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> LinearOp {
    let dim = 1usize << num_qubits;
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the column phases so the distribution is Haar
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    LinearOp::new(OpKind::Unitary, q * phases).expect("QR factor is unitary")
}
