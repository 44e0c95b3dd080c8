//! One run of concealed teleportation, and Monte Carlo ensembles of runs.
//!
//! The two parties are separate values. [`Transmitter`] owns the true key and
//! the discrimination measurement; [`Receiver`] owns only the channel angle
//! and its own key. The only thing passed between them is a
//! [`ClassicalMessage`] together with the receiver's qubit.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eqi::{extraction_model, ExtractionKind};
use crate::error::{Error, Result};
use crate::qcore::{fidelity, paulis, Label, LinearOp, MeasurementModel, PureState};
use crate::states::{basis_for, channel_state, BasisLabel, ChannelSplit, ProtocolParams};
use crate::uqsd::build_uqsd;

/// What the transmitter announces: either which basis state it identified, or
/// that the discrimination was inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalMessage {
    Inconclusive,
    Conclusive(BasisLabel),
}

impl ClassicalMessage {
    pub fn is_conclusive(self) -> bool {
        matches!(self, ClassicalMessage::Conclusive(_))
    }

    pub fn outcome(self) -> Option<BasisLabel> {
        match self {
            ClassicalMessage::Conclusive(l) => Some(l),
            ClassicalMessage::Inconclusive => None,
        }
    }
}

/// Pauli the receiver applies to undo the factor attached to each basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Identity,
    X,
    /// `σ_z σ_x`: `σ_x` first, then `σ_z`.
    ZX,
    Z,
}

impl Correction {
    pub fn for_outcome(label: BasisLabel) -> Self {
        match label {
            BasisLabel::PsiPlus => Correction::X,
            BasisLabel::PsiMinus => Correction::ZX,
            BasisLabel::PhiPlus => Correction::Identity,
            BasisLabel::PhiMinus => Correction::Z,
        }
    }

    pub fn operator(self) -> LinearOp {
        match self {
            Correction::Identity => LinearOp::identity(2),
            Correction::X => paulis::x(),
            Correction::ZX => paulis::z().compose(&paulis::x()),
            Correction::Z => paulis::z(),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::Identity => "I",
            Correction::X => "X",
            Correction::ZX => "ZX",
            Correction::Z => "Z",
        })
    }
}

/// Register layout of a run: `a1 = 0`, `a2 = 1`, `b = 2`.
const TRANSMITTER_QUBITS: [usize; 2] = [0, 1];
const RECEIVER_QUBIT: usize = 2;

/// The sending side: prepares the register and discriminates `a1 ⊗ a2`.
#[derive(Debug, Clone)]
pub struct Transmitter {
    theta: f64,
    uqsd: MeasurementModel,
}

/// What the transmitter's measurement leaves behind.
#[derive(Debug, Clone)]
pub struct TransmitterOutcome {
    pub message: ClassicalMessage,
    pub branch_prob: f64,
    /// Renormalized three-qubit register after the measurement.
    pub register: PureState,
}

impl Transmitter {
    pub fn new(theta: f64, x: f64, y: f64) -> Result<Self> {
        ChannelSplit::checked(theta, x, y)?;
        let uqsd = build_uqsd(&basis_for(theta, x, y)?)?;
        Ok(Self { theta, uqsd })
    }

    /// `|ψ>_a1 ⊗ |channel>_a2,b`.
    pub fn prepare(&self, psi: &PureState) -> Result<PureState> {
        Ok(psi.tensor(&channel_state(self.theta)?))
    }

    pub fn measure<R: Rng + ?Sized>(&self, register: &PureState, rng: &mut R) -> Result<TransmitterOutcome> {
        let sample = self.uqsd.sample(register, &TRANSMITTER_QUBITS, rng)?;
        let message = match sample.label {
            Label::Basis(l) => ClassicalMessage::Conclusive(l),
            _ => ClassicalMessage::Inconclusive,
        };
        Ok(TransmitterOutcome { message, branch_prob: sample.probability, register: sample.post_state })
    }

    pub fn measurement(&self) -> &MeasurementModel {
        &self.uqsd
    }
}

/// The receiving side: knows the channel angle and its own `(x, y)` key.
#[derive(Debug, Clone)]
pub struct Receiver {
    check: MeasurementModel,
    hat: MeasurementModel,
}

/// The receiver's half of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverOutcome {
    pub correction: Correction,
    pub eqi_success: bool,
    pub eqi_branch_prob: f64,
    /// The receiver's qubit after extraction, renormalized.
    pub final_state: PureState,
}

impl Receiver {
    pub fn new(theta: f64, x: f64, y: f64) -> Result<Self> {
        let split = ChannelSplit::checked(theta, x, y)?;
        Ok(Self {
            check: extraction_model(ExtractionKind::Check, &split)?,
            hat: extraction_model(ExtractionKind::Hat, &split)?,
        })
    }

    /// Corrects and filters the qubit `b` named by a conclusive `outcome`.
    pub fn complete<R: Rng + ?Sized>(
        &self,
        outcome: BasisLabel,
        b: &PureState,
        rng: &mut R,
    ) -> Result<ReceiverOutcome> {
        let correction = Correction::for_outcome(outcome);
        let corrected = b.apply(&correction.operator(), &[0])?;
        let model = if outcome.is_psi() { &self.check } else { &self.hat };
        let sample = model.sample(&corrected, &[0], rng)?;
        Ok(ReceiverOutcome {
            correction,
            eqi_success: sample.label == Label::Succeed,
            eqi_branch_prob: sample.probability,
            final_state: sample.post_state,
        })
    }
}

/// Full record of one run.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub params: ProtocolParams,
    /// `(x, y)` the receiver used; equal to the true key in an honest run.
    pub receiver_key: (f64, f64),
    pub uqsd_outcome: ClassicalMessage,
    pub uqsd_branch_prob: f64,
    /// The receiver's qubit as handed over after a conclusive click.
    pub received_state: Option<PureState>,
    pub correction_applied: Option<Correction>,
    pub eqi_attempted: bool,
    pub eqi_success: bool,
    /// Probability of the extraction outcome, conditioned on the discrimination outcome.
    pub eqi_branch_prob: Option<f64>,
    pub final_state: Option<PureState>,
    /// `|<ψ|final>|^2` whenever extraction was attempted.
    pub final_fidelity: Option<f64>,
    pub overall_success: bool,
}

impl Transcript {
    /// Joint probability of the recorded path.
    pub fn path_probability(&self) -> f64 {
        self.uqsd_branch_prob * self.eqi_branch_prob.unwrap_or(1.0)
    }
}

/// One honest run: the receiver uses the true key.
pub fn run<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> Result<Transcript> {
    run_with_receiver_key(params, params.x(), params.y(), rng)
}

/// One run in which the receiver extracts with `(receiver_x, receiver_y)`.
pub fn run_with_receiver_key<R: Rng + ?Sized>(
    params: &ProtocolParams,
    receiver_x: f64,
    receiver_y: f64,
    rng: &mut R,
) -> Result<Transcript> {
    let parties = Parties::new(params, receiver_x, receiver_y)?;
    parties.run(params, rng)
}

struct Parties {
    transmitter: Transmitter,
    receiver: Receiver,
    receiver_key: (f64, f64),
}

impl Parties {
    fn new(params: &ProtocolParams, receiver_x: f64, receiver_y: f64) -> Result<Self> {
        Ok(Self {
            transmitter: Transmitter::new(params.theta(), params.x(), params.y())?,
            receiver: Receiver::new(params.theta(), receiver_x, receiver_y)?,
            receiver_key: (receiver_x, receiver_y),
        })
    }

    fn run<R: Rng + ?Sized>(&self, params: &ProtocolParams, rng: &mut R) -> Result<Transcript> {
        let register = self.transmitter.prepare(params.psi())?;
        let sent = self.transmitter.measure(&register, rng)?;
        let mut transcript = Transcript {
            params: params.clone(),
            receiver_key: self.receiver_key,
            uqsd_outcome: sent.message,
            uqsd_branch_prob: sent.branch_prob,
            received_state: None,
            correction_applied: None,
            eqi_attempted: false,
            eqi_success: false,
            eqi_branch_prob: None,
            final_state: None,
            final_fidelity: None,
            overall_success: false,
        };
        let Some(outcome) = sent.message.outcome() else {
            return Ok(transcript);
        };

        // a conclusive Kraus operator is rank one on a1 ⊗ a2, so b factors out
        let b = sent.register.extract_qubit(RECEIVER_QUBIT)?;
        let done = self.receiver.complete(outcome, &b, rng)?;
        transcript.received_state = Some(b);
        transcript.correction_applied = Some(done.correction);
        transcript.eqi_attempted = true;
        transcript.eqi_success = done.eqi_success;
        transcript.eqi_branch_prob = Some(done.eqi_branch_prob);
        transcript.final_fidelity = Some(fidelity(&done.final_state, params.psi())?);
        transcript.final_state = Some(done.final_state);
        transcript.overall_success = done.eqi_success;
        Ok(transcript)
    }
}

/// Random source for run `index` of an ensemble seeded with `seed`.
///
/// Each run gets its own ChaCha stream, so results do not depend on how runs
/// are scheduled across threads.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Summary statistics of many independent runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub shots: u64,
    pub successes: u64,
    pub estimate: f64,
    /// Binomial standard error `sqrt(p(1-p)/shots)`.
    pub stderr: f64,
    /// Mean fidelity over success-flagged runs.
    pub success_fidelity_mean: Option<f64>,
    /// Standard error of that mean.
    pub success_fidelity_stderr: Option<f64>,
    pub success_fidelity_min: Option<f64>,
}

/// Runs `shots` independent protocol instances with the given receiver key.
pub fn simulate(params: &ProtocolParams, receiver_key: (f64, f64), shots: u64, seed: u64) -> Result<Ensemble> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    let parties = Parties::new(params, receiver_key.0, receiver_key.1)?;
    let outcomes: Vec<Option<f64>> = (0..shots)
        .into_par_iter()
        .map(|i| {
            let t = parties.run(params, &mut run_rng(seed, i))?;
            Ok(t.overall_success.then(|| t.final_fidelity.unwrap_or(0.0)))
        })
        .collect::<Result<_>>()?;

    let fids: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let successes = fids.len() as u64;
    let estimate = successes as f64 / shots as f64;
    let stderr = (estimate * (1.0 - estimate) / shots as f64).sqrt();
    let (mean, err, min) = if fids.is_empty() {
        (None, None, None)
    } else {
        let n = fids.len() as f64;
        let mean = fids.iter().sum::<f64>() / n;
        let var = if fids.len() > 1 { fids.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (Some(mean), Some((var / n).sqrt()), Some(fids.iter().copied().fold(f64::INFINITY, f64::min)))
    };
    Ok(Ensemble {
        shots,
        successes,
        estimate,
        stderr,
        success_fidelity_mean: mean,
        success_fidelity_stderr: err,
        success_fidelity_min: min,
    })
}

/// Monte Carlo success fraction of honest runs with its binomial standard error.
pub fn estimate_success(params: &ProtocolParams, shots: u64, seed: u64) -> Result<(f64, f64)> {
    let e = simulate(params, (params.x(), params.y()), shots, seed)?;
    Ok((e.estimate, e.stderr))
}
