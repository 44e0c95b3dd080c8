//! Unambiguous discrimination of the four basis states on `a1 ⊗ a2`.
//!
//! The `ψ±` pair lives in `span{|01>, |10>}` and the `φ±` pair in
//! `span{|00>, |11>}`, so the measurement splits into two independent
//! two-state problems. Inside each subspace the conclusive element for `|s+>`
//! is `w |d+><d+|` with `|d+>` the unit vector orthogonal to `|s->`, and
//! `w = 1 / (1 + |<s-|s+>|)`, the largest weight that keeps the
//! inconclusive element positive. A conclusive click then happens with
//! probability `1 - |<s-|s+>|` on either input and never names the wrong state.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{psd_sqrt, Label, LinearOp, MeasurementModel, OpKind, PureState};
use crate::states::{basis_for, BasisLabel, GeneralBasis, ProtocolParams, GRAM_TOL};

/// Builds the five-outcome Kraus model (four conclusive labels plus
/// `Inconclusive`) on the 4-dimensional `a1 ⊗ a2` space.
///
/// All Kraus operators are the positive square roots of their effects.
pub fn build_uqsd(basis: &GeneralBasis) -> Result<MeasurementModel> {
    let lowest = basis.min_gram_eigenvalue();
    if lowest < GRAM_TOL {
        return Err(Error::DegenerateBasis(lowest));
    }

    let mut outcomes = Vec::with_capacity(5);
    let mut conclusive_sum = DMatrix::<Complex64>::zeros(4, 4);
    for (plus, minus, plus_label, minus_label) in [
        (&basis.psi_plus, &basis.psi_minus, BasisLabel::PsiPlus, BasisLabel::PsiMinus),
        (&basis.phi_plus, &basis.phi_minus, BasisLabel::PhiPlus, BasisLabel::PhiMinus),
    ] {
        let overlap = minus.inner(plus)?;
        let weight = 1.0 / (1.0 + overlap.norm());
        for (target, other, label) in [(plus, minus, plus_label), (minus, plus, minus_label)] {
            let dual = orthogonal_within_pair(target, other)?;
            let projector = outer(&dual);
            conclusive_sum += &projector * Complex64::new(weight, 0.0);
            // sqrt(w P) = sqrt(w) P for a projector P
            let kraus = LinearOp::new(OpKind::Kraus, projector * Complex64::new(weight.sqrt(), 0.0))?;
            outcomes.push((Label::Basis(label), kraus));
        }
    }
    let inconclusive = DMatrix::<Complex64>::identity(4, 4) - conclusive_sum;
    outcomes.push((Label::Inconclusive, psd_sqrt(&inconclusive)?));
    MeasurementModel::new(outcomes)
}

/// Unit vector orthogonal to `other` inside the span of `target` and `other`.
fn orthogonal_within_pair(target: &PureState, other: &PureState) -> Result<PureState> {
    let overlap = other.inner(target)?;
    let amps = target.amps().iter().zip(other.amps()).map(|(t, o)| t - overlap * o).collect();
    PureState::normalize(amps)
}

fn outer(v: &PureState) -> DMatrix<Complex64> {
    let col = nalgebra::DVector::from_column_slice(v.amps());
    &col * col.adjoint()
}

/// Conclusive probability `1 - |cos^2x - sin^2y| / (cos^2x + sin^2y)` (half-angle
/// functions), the value a single pair member is identified with.
pub fn discrimination_success_prob(params: &ProtocolParams) -> Result<f64> {
    // only to surface DegenerateBasis on the same footing as build_uqsd
    basis_for(params.theta(), params.x(), params.y())?;
    let w = params.weights();
    let (c2x, s2y) = (w.basis_cos.powi(2), w.basis_sin.powi(2));
    Ok(1.0 - (c2x - s2y).abs() / (c2x + s2y))
}
