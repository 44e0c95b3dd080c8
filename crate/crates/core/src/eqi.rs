//! Extraction of quantum information on the receiver's qubit.
//!
//! After the Pauli correction the receiver holds `(<0|ψ> w0, <1|ψ> w1)` up to
//! normalization, with weights `(w0, w1)` fixed by the key:
//! `(sin^(1-y), cos^(1-x))` on a `ψ±` click and `(cos^(1-x), sin^(1-y))` on a
//! `φ±` click (all at `θ/2`). Attenuating the larger weight down to the
//! smaller one restores `|ψ>`:
//!
//! ```text
//! M_succ = min(w0, w1) diag(1/w0, 1/w1),   M_fail = sqrt(I - M_succ^dag M_succ)
//! ```
//!
//! The same filter can be run unitarily with an ancilla `B`: a controlled
//! `exp(i σ_y arccos r)`, `r = min/max`, controlled by the larger-weight basis
//! state of `b`, followed by reading `B` in `|0>` ([`ancilla_gate`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{paulis, Label, LinearOp, MeasurementModel, OpKind, PureState, ZERO_BRANCH_TOL};
use crate::states::{check_amps, hat_amps, ChannelSplit, ProtocolParams};

/// Which outcome state the extraction is tuned for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionKind {
    /// After a `ψ±` identification.
    Check,
    /// After a `φ±` identification.
    Hat,
}

/// `(w0, w1)`: the factors the key leaves on `|0>` and `|1>` of the receiver's qubit.
pub fn filter_weights(kind: ExtractionKind, split: &ChannelSplit) -> (f64, f64) {
    match kind {
        ExtractionKind::Check => (split.rest_sin, split.rest_cos),
        ExtractionKind::Hat => (split.rest_cos, split.rest_sin),
    }
}

fn checked_weights(kind: ExtractionKind, split: &ChannelSplit) -> Result<(f64, f64)> {
    let (w0, w1) = filter_weights(kind, split);
    let smallest = w0.min(w1);
    if smallest < ZERO_BRANCH_TOL {
        return Err(Error::ZeroWeight(smallest));
    }
    Ok((w0, w1))
}

/// Two-outcome Kraus model `{Succeed, Fail}` on qubit `b`, built from the key
/// held in `params`.
pub fn build_extraction(kind: ExtractionKind, params: &ProtocolParams) -> Result<MeasurementModel> {
    extraction_model(kind, &params.weights())
}

/// [`build_extraction`] from the channel angle and key alone.
pub fn extraction_model(kind: ExtractionKind, split: &ChannelSplit) -> Result<MeasurementModel> {
    let (w0, w1) = checked_weights(kind, split)?;
    let m = w0.min(w1);
    let (d0, d1) = (m / w0, m / w1);
    let re = |v: f64| Complex64::new(v, 0.0);
    let succ = LinearOp::diagonal(OpKind::Kraus, &[re(d0), re(d1)])?;
    let fail =
        LinearOp::diagonal(OpKind::Kraus, &[re((1.0 - d0 * d0).max(0.0).sqrt()), re((1.0 - d1 * d1).max(0.0).sqrt())])?;
    MeasurementModel::new(vec![(Label::Succeed, succ), (Label::Fail, fail)])
}

/// `min{sin^2(1-y), cos^2(1-x)}` over the kind's outcome-state norm.
pub fn extraction_success_prob(kind: ExtractionKind, params: &ProtocolParams) -> Result<f64> {
    let w = params.weights();
    let m = w.rest_sin.powi(2).min(w.rest_cos.powi(2));
    if m.sqrt() < ZERO_BRANCH_TOL {
        return Err(Error::ZeroWeight(m.sqrt()));
    }
    let (a0, a1) = (params.weight0(), params.weight1());
    let denom = match kind {
        ExtractionKind::Check => a0 * w.rest_sin.powi(2) + a1 * w.rest_cos.powi(2),
        ExtractionKind::Hat => a0 * w.rest_cos.powi(2) + a1 * w.rest_sin.powi(2),
    };
    if denom.sqrt() < ZERO_BRANCH_TOL {
        return Err(Error::ZeroBranch(denom.sqrt()));
    }
    Ok(m / denom)
}

/// The outcome state this kind is meant for (`|ψ̌>` or `|ψ̂>`).
pub fn target_state(kind: ExtractionKind, params: &ProtocolParams) -> Result<PureState> {
    let amps = match kind {
        ExtractionKind::Check => check_amps(params),
        ExtractionKind::Hat => hat_amps(params),
    };
    PureState::normalize(amps.to_vec())
}

/// Rotation angle `arccos(min/max)` of the ancilla gate, clamped against
/// round-off above 1.
pub fn ancilla_angle(kind: ExtractionKind, split: &ChannelSplit) -> Result<f64> {
    let (w0, w1) = checked_weights(kind, split)?;
    let r = w0.min(w1) / w0.max(w1);
    let r = if r > 1.0 && r < 1.0 + 1e-12 { 1.0 } else { r };
    Ok(r.clamp(0.0, 1.0).acos())
}

/// Controlled rotation on `(b, B)`: identity when `b` sits on the smaller-weight
/// basis state, `exp(i σ_y arccos r)` on `B` otherwise. Ties use `|1>` as control.
pub fn ancilla_gate(kind: ExtractionKind, split: &ChannelSplit) -> Result<LinearOp> {
    let (w0, w1) = checked_weights(kind, split)?;
    let angle = ancilla_angle(kind, split)?;
    let control = if w0 > w1 { 0 } else { 1 };
    Ok(controlled(control, &paulis::exp_i_y(angle)))
}

/// `|c><c| ⊗ U + |1-c><1-c| ⊗ I` on two qubits.
pub fn controlled(control: usize, u: &LinearOp) -> LinearOp {
    let mut m = nalgebra::DMatrix::<Complex64>::identity(4, 4);
    let off = 2 * control;
    for r in 0..2 {
        for c in 0..2 {
            m[(off + r, off + c)] = u.matrix()[(r, c)];
        }
    }
    LinearOp::new(OpKind::Unitary, m).expect("controlled unitary")
}

/// Result of the ancilla-assisted extraction on one input.
#[derive(Debug, Clone)]
pub struct AncillaOutcome {
    pub success_prob: f64,
    /// `b` after reading `|0>_B`, renormalized.
    pub success_state: Option<PureState>,
    pub fail_prob: f64,
    /// `b` after reading `|1>_B`, renormalized.
    pub fail_state: Option<PureState>,
}

/// Runs the unitary form: append `|0>_B`, apply [`ancilla_gate`], read `B`.
pub fn extract_via_ancilla(kind: ExtractionKind, params: &ProtocolParams, b: &PureState) -> Result<AncillaOutcome> {
    let gate = ancilla_gate(kind, &params.weights())?;
    let joint = b.tensor(&PureState::basis(1, 0)?).apply(&gate, &[0, 1])?;
    let read = MeasurementModel::computational(1);
    let mut out = AncillaOutcome { success_prob: 0.0, success_state: None, fail_prob: 0.0, fail_state: None };
    for branch in read.branches(&joint, &[1])? {
        let state = branch.state.renormalized().ok().map(|s| s.extract_qubit(0)).transpose()?;
        match branch.label {
            Label::Index(0) => (out.success_prob, out.success_state) = (branch.probability, state),
            _ => (out.fail_prob, out.fail_state) = (branch.probability, state),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity, random_state};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn ref_psi() -> PureState {
        PureState::from_real(&[1.0, 2f64.sqrt()]).unwrap()
    }

    fn params(theta: f64, x: f64, y: f64, psi: PureState) -> ProtocolParams {
        ProtocolParams::new(theta, x, y, psi).unwrap()
    }

    fn succ_branch(kind: ExtractionKind, pr: &ProtocolParams) -> PureState {
        let m = build_extraction(kind, pr).unwrap();
        target_state(kind, pr).unwrap().apply(m.operator(Label::Succeed).unwrap(), &[0]).unwrap()
    }

    #[test]
    fn unit_exponents_need_no_filtering() {
        let pr = params(0.8, 1.0, 1.0, ref_psi());
        for kind in [ExtractionKind::Check, ExtractionKind::Hat] {
            let m = build_extraction(kind, &pr).unwrap();
            assert!(m.operator(Label::Succeed).unwrap().distance(&LinearOp::identity(2)) < 1e-15);
            assert_eq!(extraction_success_prob(kind, &pr).unwrap(), 1.0);
        }
    }

    #[test]
    fn bell_channel_split_extracts_with_sin_squared() {
        // x = y = 0: the branch-weighted extraction totals sin^2(θ/2) per branch
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for theta in [0.4, 0.9, 1.3] {
            let psi = random_state(1, &mut rng);
            let pr = params(theta, 0.0, 0.0, psi.clone());
            let p = crate::states::branch_probability(&pr);
            let s2 = (theta / 2.0f64).sin().powi(2);
            let check = extraction_success_prob(ExtractionKind::Check, &pr).unwrap();
            let hat = extraction_success_prob(ExtractionKind::Hat, &pr).unwrap();
            assert!((p * check - s2).abs() < 1e-12);
            assert!(((1.0 - p) * hat - s2).abs() < 1e-12);
            assert!((p * check + (1.0 - p) * hat - 2.0 * s2).abs() < 1e-12);
        }
    }

    #[test]
    fn ref_point_success_probabilities() {
        let pr = params(FRAC_PI_2, 0.0, 1.0, ref_psi());
        let check = extraction_success_prob(ExtractionKind::Check, &pr).unwrap();
        let hat = extraction_success_prob(ExtractionKind::Hat, &pr).unwrap();
        assert!((check - 0.75).abs() < 1e-12);
        assert!((hat - 0.6).abs() < 1e-12);
        assert!((succ_branch(ExtractionKind::Check, &pr).norm_sqr() - 0.75).abs() < 1e-12);
        assert!((succ_branch(ExtractionKind::Hat, &pr).norm_sqr() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn collapsed_weight_is_rejected() {
        let pr = params(0.0, 0.5, 0.0, ref_psi());
        assert!(matches!(build_extraction(ExtractionKind::Check, &pr), Err(Error::ZeroWeight(_))));
    }

    #[test]
    fn maximally_entangled_off_diagonal_is_probabilistic() {
        let pr = params(FRAC_PI_2, 0.2, 0.8, ref_psi());
        for kind in [ExtractionKind::Check, ExtractionKind::Hat] {
            assert!(extraction_success_prob(kind, &pr).unwrap() < 1.0 - 1e-6);
        }
    }

    #[test]
    fn control_u_on_bell_channel_leaves_ten() {
        // θ = π/2, x = y = 0: r = tan(π/4) = 1, angle 0
        let pr = params(FRAC_PI_2, 0.0, 0.0, ref_psi());
        let gate = ancilla_gate(ExtractionKind::Check, &pr.weights()).unwrap();
        let out = PureState::basis(2, 0b10).unwrap().apply(&gate, &[0, 1]).unwrap();
        assert!((out.amp(0b10) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        // arccos is ill-conditioned at 1, so the residual angle is ~sqrt(eps)
        assert!(out.amp(0b11).norm() < 1e-7);
    }

    #[test]
    fn control_u_reproduces_applied_gate_expansion() {
        // χ|ψ̌>|0> = sin(θ/2)/√p |ψ>|0> + <1|ψ> √cosθ / √p |1>|1>
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for theta in [0.3, 0.9, 1.4] {
            let psi = random_state(1, &mut rng);
            let pr = params(theta, 0.0, 0.0, psi.clone());
            let p = crate::states::branch_probability(&pr);
            let gate = ancilla_gate(ExtractionKind::Check, &pr.weights()).unwrap();
            let check = target_state(ExtractionKind::Check, &pr).unwrap();
            let got = check.tensor(&PureState::basis(1, 0).unwrap()).apply(&gate, &[0, 1]).unwrap();
            let s = (theta / 2.0).sin();
            let mut want = vec![Complex64::new(0.0, 0.0); 4];
            want[0b00] = psi.amp(0) * s / p.sqrt();
            want[0b10] = psi.amp(1) * s / p.sqrt();
            want[0b11] = psi.amp(1) * theta.cos().sqrt() / p.sqrt();
            for (g, w) in got.amps().iter().zip(&want) {
                assert!((g - w).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hat_gate_is_sigma_x_conjugate_of_check_gate() {
        // (e^{iσxπ/2} ⊗ I) χ (e^{-iσxπ/2} ⊗ I) with χ the x = y = 0 check gate
        for theta in [0.2, 1.0, FRAC_PI_2] {
            let pr = params(theta, 0.0, 0.0, ref_psi());
            let chi = controlled(1, &paulis::exp_i_y((theta / 2.0).tan().min(1.0).acos()));
            let id = LinearOp::identity(2);
            let conj =
                paulis::exp_i_x(FRAC_PI_2).kron(&id).compose(&chi).compose(&paulis::exp_i_x(-FRAC_PI_2).kron(&id));
            let hat = ancilla_gate(ExtractionKind::Hat, &pr.weights()).unwrap();
            assert!(conj.distance(&hat) < 1e-12, "theta = {theta}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn extraction_invariants(seed in any::<u64>(), theta in 1e-3..=FRAC_PI_2, x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(1, &mut rng);
            let pr = params(theta, x, y, psi.clone());
            for kind in [ExtractionKind::Check, ExtractionKind::Hat] {
                let m = build_extraction(kind, &pr).unwrap();
                prop_assert!(m.completeness_deviation().unwrap() <= 1e-10);
                prop_assert!(m.min_effect_eigenvalue() >= -1e-10);

                let branch = succ_branch(kind, &pr);
                let want = extraction_success_prob(kind, &pr).unwrap();
                prop_assert!((branch.norm_sqr() - want).abs() <= 1e-10);
                let f = fidelity(&branch.renormalized().unwrap(), &psi).unwrap();
                prop_assert!((f - 1.0).abs() <= 1e-10);

                // unitary ancilla form agrees with the Kraus form
                let input = target_state(kind, &pr).unwrap();
                let anc = extract_via_ancilla(kind, &pr, &input).unwrap();
                prop_assert!((anc.success_prob - want).abs() <= 1e-10);
                if let Some(s) = anc.success_state {
                    prop_assert!((fidelity(&s, &psi).unwrap() - 1.0).abs() <= 1e-10);
                }
                let fail = input.apply(m.operator(Label::Fail).unwrap(), &[0]).unwrap();
                prop_assert!((anc.fail_prob - fail.norm_sqr()).abs() <= 1e-10);
                if let (Some(a), Ok(k)) = (anc.fail_state, fail.renormalized()) {
                    prop_assert!((fidelity(&a, &k).unwrap() - 1.0).abs() <= 1e-10);
                }
            }
        }
    }
}
