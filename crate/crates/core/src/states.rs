//! The state families of concealed teleportation.
//!
//! The channel `cos(θ/2)|00> + sin(θ/2)|11>` is shared between the
//! transmitter's qubit `a2` and the receiver's qubit `b`. The transmitter
//! expands `a1 ⊗ a2` on the four non-orthogonal states
//!
//! ```text
//! |φ±> = (cos^x(θ/2)|00> ± sin^y(θ/2)|11>) / √n
//! |ψ±> = (sin^y(θ/2)|01> ± cos^x(θ/2)|10>) / √n,   n = cos^2x(θ/2) + sin^2y(θ/2)
//! ```
//!
//! which leaves the receiver holding, up to a Pauli, one of two distorted
//! copies of `|ψ>` ([`outcome_states`]). The secret exponents `(x, y)` decide
//! how the channel amplitudes are split between the two sides.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigenvalues, paulis, PureState, NORM_TOL, ZERO_BRANCH_TOL};

/// Smallest admissible Gram eigenvalue of the four basis states.
pub const GRAM_TOL: f64 = 1e-12;

/// Names of the four basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisLabel {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 4] =
        [BasisLabel::PsiPlus, BasisLabel::PsiMinus, BasisLabel::PhiPlus, BasisLabel::PhiMinus];

    /// True for the `ψ±` pair (support `{|01>, |10>}`).
    pub fn is_psi(self) -> bool {
        matches!(self, BasisLabel::PsiPlus | BasisLabel::PsiMinus)
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisLabel::PsiPlus => "psi+",
            BasisLabel::PsiMinus => "psi-",
            BasisLabel::PhiPlus => "phi+",
            BasisLabel::PhiMinus => "phi-",
        })
    }
}

/// Channel angle, secret exponents and the state to teleport.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolParams {
    theta: f64,
    x: f64,
    y: f64,
    psi: PureState,
}

impl ProtocolParams {
    pub fn new(theta: f64, x: f64, y: f64, psi: PureState) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        check_key("x", x)?;
        check_key("y", y)?;
        if psi.num_qubits() != 1 {
            return Err(Error::DimensionMismatch { expected: 2, found: psi.dim() });
        }
        let n2 = psi.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { theta, x, y, psi })
    }

    /// Same channel and state under a different `(x, y)` key.
    pub fn with_key(&self, x: f64, y: f64) -> Result<Self> {
        Self::new(self.theta, x, y, self.psi.clone())
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn psi(&self) -> &PureState {
        &self.psi
    }

    /// `|<0|ψ>|^2`.
    pub fn weight0(&self) -> f64 {
        self.psi.amp(0).norm_sqr()
    }

    /// `|<1|ψ>|^2`.
    pub fn weight1(&self) -> f64 {
        self.psi.amp(1).norm_sqr()
    }

    pub fn weights(&self) -> ChannelSplit {
        ChannelSplit::new(self.theta, self.x, self.y)
    }
}

fn check_key(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::KeyOutOfRange { name, value });
    }
    Ok(())
}

/// `base^exp` with `0^0 = 1`.
pub fn pow0(base: f64, exp: f64) -> f64 {
    if exp == 0.0 {
        1.0
    } else {
        base.powf(exp)
    }
}

/// How the channel amplitudes `cos(θ/2)`, `sin(θ/2)` split between the
/// transmitter's basis and the receiver's outcome state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSplit {
    pub cos_half: f64,
    pub sin_half: f64,
    /// `cos^x(θ/2)`, kept by the transmitter.
    pub basis_cos: f64,
    /// `sin^y(θ/2)`, kept by the transmitter.
    pub basis_sin: f64,
    /// `cos^(1-x)(θ/2)`, left on the receiver's qubit.
    pub rest_cos: f64,
    /// `sin^(1-y)(θ/2)`, left on the receiver's qubit.
    pub rest_sin: f64,
}

impl ChannelSplit {
    /// Like [`ChannelSplit::new`], rejecting an angle or key outside its range.
    pub fn checked(theta: f64, x: f64, y: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        check_key("x", x)?;
        check_key("y", y)?;
        Ok(Self::new(theta, x, y))
    }

    pub fn new(theta: f64, x: f64, y: f64) -> Self {
        let (sin_half, cos_half) = (theta / 2.0).sin_cos();
        Self {
            cos_half,
            sin_half,
            basis_cos: pow0(cos_half, x),
            basis_sin: pow0(sin_half, y),
            rest_cos: pow0(cos_half, 1.0 - x),
            rest_sin: pow0(sin_half, 1.0 - y),
        }
    }

    /// `cos^2x(θ/2) + sin^2y(θ/2)`.
    pub fn basis_norm_sqr(&self) -> f64 {
        self.basis_cos.powi(2) + self.basis_sin.powi(2)
    }
}

/// `cos(θ/2)|00> + sin(θ/2)|11>`.
pub fn channel_state(theta: f64) -> Result<PureState> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let (s, c) = (theta / 2.0).sin_cos();
    PureState::from_real(&[c, 0.0, 0.0, s])
}

/// The four `(x, y)`-dependent states on `a1 ⊗ a2` and their in-pair overlaps.
#[derive(Debug, Clone)]
pub struct GeneralBasis {
    pub psi_plus: PureState,
    pub psi_minus: PureState,
    pub phi_plus: PureState,
    pub phi_minus: PureState,
    /// `<ψ-|ψ+>`.
    pub overlap_psi: f64,
    /// `<φ-|φ+>`.
    pub overlap_phi: f64,
}

impl GeneralBasis {
    pub fn state(&self, label: BasisLabel) -> &PureState {
        match label {
            BasisLabel::PsiPlus => &self.psi_plus,
            BasisLabel::PsiMinus => &self.psi_minus,
            BasisLabel::PhiPlus => &self.phi_plus,
            BasisLabel::PhiMinus => &self.phi_minus,
        }
    }

    /// Gram matrix of the four states, ordered as [`BasisLabel::ALL`].
    pub fn gram(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(4, 4, |i, j| {
            self.state(BasisLabel::ALL[i]).inner(self.state(BasisLabel::ALL[j])).expect("same dim")
        })
    }

    /// Smallest Gram eigenvalue; zero when the states are linearly dependent.
    pub fn min_gram_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.gram()).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// Builds the four basis states; `DegenerateBasis` when they are linearly
/// dependent (only at `θ = 0` with `y > 0`).
pub fn general_basis(params: &ProtocolParams) -> Result<GeneralBasis> {
    basis_for(params.theta, params.x, params.y)
}

pub(crate) fn basis_for(theta: f64, x: f64, y: f64) -> Result<GeneralBasis> {
    let w = ChannelSplit::new(theta, x, y);
    let (a, b) = (w.basis_cos, w.basis_sin);
    let psi_plus = PureState::from_real(&[0.0, b, a, 0.0])?;
    let psi_minus = PureState::from_real(&[0.0, b, -a, 0.0])?;
    let phi_plus = PureState::from_real(&[a, 0.0, 0.0, b])?;
    let phi_minus = PureState::from_real(&[a, 0.0, 0.0, -b])?;
    let overlap_psi = psi_minus.inner(&psi_plus)?.re;
    let overlap_phi = phi_minus.inner(&phi_plus)?.re;
    let basis = GeneralBasis { psi_plus, psi_minus, phi_plus, phi_minus, overlap_psi, overlap_phi };
    let lowest = basis.min_gram_eigenvalue();
    if lowest < GRAM_TOL {
        return Err(Error::DegenerateBasis(lowest));
    }
    Ok(basis)
}

/// Unnormalized `(<0|ψ> sin^(1-y), <1|ψ> cos^(1-x))`.
pub(crate) fn check_amps(params: &ProtocolParams) -> [Complex64; 2] {
    let w = params.weights();
    [params.psi.amp(0) * w.rest_sin, params.psi.amp(1) * w.rest_cos]
}

/// Unnormalized `(<0|ψ> cos^(1-x), <1|ψ> sin^(1-y))`.
pub(crate) fn hat_amps(params: &ProtocolParams) -> [Complex64; 2] {
    let w = params.weights();
    [params.psi.amp(0) * w.rest_cos, params.psi.amp(1) * w.rest_sin]
}

/// The receiver's states after a `ψ±` (check) or `φ±` (hat) identification,
/// before the Pauli correction.
pub fn outcome_states(params: &ProtocolParams) -> Result<(PureState, PureState)> {
    let check = PureState::normalize(check_amps(params).to_vec())?;
    let hat = PureState::normalize(hat_amps(params).to_vec())?;
    Ok((check, hat))
}

/// Branch probability `p` of the `ψ±` pair and the normalizations `μ`, `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoefficients {
    pub p: f64,
    pub mu: f64,
    pub nu: f64,
}

/// `p = |<0|ψ>|^2 sin^2(θ/2) + |<1|ψ>|^2 cos^2(θ/2)`.
pub fn branch_probability(params: &ProtocolParams) -> f64 {
    let w = params.weights();
    params.weight0() * w.sin_half.powi(2) + params.weight1() * w.cos_half.powi(2)
}

pub fn expansion_coefficients(params: &ProtocolParams) -> Result<ExpansionCoefficients> {
    let w = params.weights();
    let n = w.basis_norm_sqr();
    let p = branch_probability(params);
    let check_norm = norm_sqr(&check_amps(params));
    let hat_norm = norm_sqr(&hat_amps(params));
    for d in [check_norm, hat_norm] {
        if d.sqrt() < ZERO_BRANCH_TOL {
            return Err(Error::ZeroBranch(d.sqrt()));
        }
    }
    Ok(ExpansionCoefficients { p, mu: 4.0 * p / n / check_norm, nu: 4.0 * (1.0 - p) / n / hat_norm })
}

fn norm_sqr(v: &[Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Largest amplitude deviation between `|ψ> ⊗ |channel>` built directly and
/// the four-term expansion over the general basis.
pub fn verify_expansion(params: &ProtocolParams) -> Result<f64> {
    let lhs = params.psi.tensor(&channel_state(params.theta)?);
    let basis = general_basis(params)?;
    let w = params.weights();
    let n = w.basis_norm_sqr();
    let p = branch_probability(params);

    let (x, z) = (paulis::x(), paulis::z());
    let xz = x.compose(&z);
    let mut rhs = vec![Complex64::new(0.0, 0.0); 8];
    let mut add = |coef: f64, a: &PureState, b: &PureState| {
        for (slot, amp) in rhs.iter_mut().zip(a.tensor(b).amps()) {
            *slot += coef * amp;
        }
    };

    // a branch whose outcome state vanishes carries zero weight
    let check = check_amps(params);
    if norm_sqr(&check).sqrt() >= ZERO_BRANCH_TOL {
        let mu = 4.0 * p / n / norm_sqr(&check);
        let coef = (p / mu).sqrt();
        let state = PureState::normalize(check.to_vec())?;
        add(coef, &basis.psi_plus, &state.apply(&x, &[0])?);
        add(-coef, &basis.psi_minus, &state.apply(&xz, &[0])?);
    }
    let hat = hat_amps(params);
    if norm_sqr(&hat).sqrt() >= ZERO_BRANCH_TOL {
        let nu = 4.0 * (1.0 - p) / n / norm_sqr(&hat);
        let coef = ((1.0 - p) / nu).sqrt();
        let state = PureState::normalize(hat.to_vec())?;
        add(coef, &basis.phi_plus, &state);
        add(-coef, &basis.phi_minus, &state.apply(&z, &[0])?);
    }

    Ok(lhs.amps().iter().zip(&rhs).map(|(l, r)| (l - r).norm()).fold(0.0, f64::max))
}
