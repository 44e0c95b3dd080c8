use num_complex::Complex64;

use super::op::LinearOp;
use super::{Amplitude, NORM_TOL};
use crate::error::{Error, Result};

/// A state vector over an `n`-qubit register.
///
/// Qubit 0 is the most significant bit of the basis index, so `|q0 q1 ... q(n-1)>`
/// sits at index `sum q_k 2^(n-1-k)`.
///
/// States built with [`PureState::new`] are normalized. Branches produced by
/// applying a Kraus operator are carried unnormalized (see
/// [`PureState::is_normalized`]) until [`PureState::renormalized`] is called.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<Amplitude>,
    normalized: bool,
}

fn check_amps(amps: &[Amplitude]) -> Result<usize> {
    let len = amps.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::BadLength(len));
    }
    if let Some(i) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(len.trailing_zeros() as usize)
}

impl PureState {
    /// Builds a normalized state; fails if `sum |a_i|^2` is off by more than 1e-12.
    pub fn new(amps: Vec<Amplitude>) -> Result<Self> {
        let num_qubits = check_amps(&amps)?;
        let n2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { num_qubits, amps, normalized: true })
    }

    /// Builds a state flagged as unnormalized (a measurement branch).
    pub fn unnormalized(amps: Vec<Amplitude>) -> Result<Self> {
        let num_qubits = check_amps(&amps)?;
        Ok(Self { num_qubits, amps, normalized: false })
    }

    /// Scales arbitrary nonzero amplitudes to unit norm.
    pub fn normalize(amps: Vec<Amplitude>) -> Result<Self> {
        Self::unnormalized(amps)?.renormalized()
    }

    /// Convenience constructor from real amplitudes, normalizing them.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalize(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis state `|index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if num_qubits == 0 || index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps, normalized: true })
    }

    /// Single-qubit state `cos(polar/2)|0> + e^{i azimuth} sin(polar/2)|1>`.
    pub fn from_bloch(polar: f64, azimuth: f64) -> Result<Self> {
        let (s, c) = (polar / 2.0).sin_cos();
        Self::new(vec![Complex64::new(c, 0.0), Complex64::from_polar(s, azimuth)])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns the branch rescaled to unit norm, or `ZeroBranch` if its norm
    /// is below 1e-14.
    pub fn renormalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < super::ZERO_BRANCH_TOL {
            return Err(Error::ZeroBranch(norm));
        }
        let amps = self.amps.iter().map(|a| a / norm).collect();
        Ok(Self { num_qubits: self.num_qubits, amps, normalized: true })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Amplitude> {
        self.same_dim(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Kronecker product; `self` occupies the most significant qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
            normalized: self.normalized && other.normalized,
        }
    }

    /// Applies `op` to the ordered sub-register `targets` (first target is the
    /// most significant bit of the operator's index), identity elsewhere.
    ///
    /// The result keeps the normalization flag only for unitary operators.
    pub fn apply(&self, op: &LinearOp, targets: &[usize]) -> Result<PureState> {
        let n = self.num_qubits;
        let expected = 1usize << targets.len();
        if op.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: op.dim() });
        }
        for (i, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(Error::TargetOutOfRange { target: t, num_qubits: n });
            }
            if targets[..i].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }

        // bit masks of the targets inside the full index, ordered like `targets`
        let masks: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
        let sub_index = |full: usize| masks.iter().fold(0usize, |acc, &m| (acc << 1) | usize::from(full & m != 0));
        let with_sub = |full: usize, sub: usize| {
            let k = masks.len();
            masks.iter().enumerate().fold(
                full,
                |acc, (j, &m)| {
                    if sub >> (k - 1 - j) & 1 == 1 {
                        acc | m
                    } else {
                        acc & !m
                    }
                },
            )
        };

        let m = op.matrix();
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, slot) in out.iter_mut().enumerate() {
            let row = sub_index(i);
            *slot = (0..expected).map(|col| m[(row, col)] * self.amps[with_sub(i, col)]).sum();
        }
        Ok(PureState {
            num_qubits: n,
            amps: out,
            normalized: self.normalized && op.kind() == super::op::OpKind::Unitary,
        })
    }

    /// State of `qubit` when the register factorizes across that qubit.
    ///
    /// Fails with `NotProduct` if the reduced state of `qubit` is mixed beyond
    /// 1e-10 (Schmidt rank above one).
    pub fn extract_qubit(&self, qubit: usize) -> Result<PureState> {
        let n = self.num_qubits;
        if qubit >= n {
            return Err(Error::TargetOutOfRange { target: qubit, num_qubits: n });
        }
        let mask = 1usize << (n - 1 - qubit);
        // reduced density matrix of `qubit`
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in (0..self.dim()).filter(|i| i & mask == 0) {
            let pair = [self.amps[i], self.amps[i | mask]];
            for r in 0..2 {
                for c in 0..2 {
                    rho[r][c] += pair[r] * pair[c].conj();
                }
            }
        }
        let trace = rho[0][0].re + rho[1][1].re;
        if trace < super::ZERO_BRANCH_TOL * super::ZERO_BRANCH_TOL {
            return Err(Error::ZeroBranch(trace.sqrt()));
        }
        let det = (rho[0][0] * rho[1][1] - rho[0][1] * rho[1][0]).re / (trace * trace);
        if det.abs() > 1e-10 {
            return Err(Error::NotProduct(qubit));
        }
        // the larger diagonal entry picks a column that carries the pure state
        let col = if rho[0][0].re >= rho[1][1].re { 0 } else { 1 };
        PureState::normalize(vec![rho[0][col], rho[1][col]])
    }

    fn same_dim(&self, other: &PureState) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// `|<a|b>|^2`, insensitive to global phase.
pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}
