use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::op::{max_abs, LinearOp, OpKind};
use super::state::PureState;
use super::STRUCT_TOL;
use crate::error::{Error, Result};
use crate::states::BasisLabel;

/// Outcome identifiers used by the protocol's measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    /// Conclusive identification of one of the four basis states.
    Basis(BasisLabel),
    Inconclusive,
    Succeed,
    Fail,
    /// Computational-basis outcome of a projective measurement.
    Index(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Basis(b) => write!(f, "{b}"),
            Label::Inconclusive => f.write_str("inconclusive"),
            Label::Succeed => f.write_str("succeed"),
            Label::Fail => f.write_str("fail"),
            Label::Index(i) => write!(f, "{i}"),
        }
    }
}

/// A generalized measurement given by labeled Kraus operators `M_k`.
///
/// Complete (`sum M_k^dag M_k = I`) and with positive effects, both within 1e-10.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    outcomes: Vec<(Label, LinearOp)>,
}

/// One sampled outcome with its Born probability and renormalized post-state.
#[derive(Debug, Clone)]
pub struct OutcomeSample {
    pub label: Label,
    pub probability: f64,
    pub post_state: PureState,
}

/// An unnormalized branch `M_k |s>`.
#[derive(Debug, Clone)]
pub struct Branch {
    pub label: Label,
    pub probability: f64,
    pub state: PureState,
}

impl MeasurementModel {
    pub fn new(outcomes: Vec<(Label, LinearOp)>) -> Result<Self> {
        let model = Self { outcomes };
        let dev = model.completeness_deviation()?;
        if dev > STRUCT_TOL {
            return Err(Error::IncompleteMeasurement(dev));
        }
        for (_, op) in &model.outcomes {
            let effect = LinearOp::new(OpKind::Kraus, op.effect())?;
            let neg = effect.hermiticity_deviation().max(-effect.min_eigenvalue());
            if neg > STRUCT_TOL {
                return Err(Error::NotPositive(neg));
            }
        }
        Ok(model)
    }

    /// Projective measurement in the computational basis of `num_qubits` qubits.
    pub fn computational(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let outcomes = (0..dim)
            .map(|i| {
                let mut diag = vec![Complex64::new(0.0, 0.0); dim];
                diag[i] = Complex64::new(1.0, 0.0);
                (Label::Index(i), LinearOp::diagonal(OpKind::Kraus, &diag).expect("finite"))
            })
            .collect();
        Self { outcomes }
    }

    pub fn dim(&self) -> usize {
        self.outcomes.first().map_or(0, |(_, op)| op.dim())
    }

    pub fn outcomes(&self) -> &[(Label, LinearOp)] {
        &self.outcomes
    }

    pub fn operator(&self, label: Label) -> Option<&LinearOp> {
        self.outcomes.iter().find(|(l, _)| *l == label).map(|(_, op)| op)
    }

    /// max |sum M^dag M - I|.
    pub fn completeness_deviation(&self) -> Result<f64> {
        let dim = self.dim();
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for (_, op) in &self.outcomes {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.dim() });
            }
            sum += op.effect();
        }
        Ok(max_abs(&(sum - DMatrix::identity(dim, dim))))
    }

    /// Smallest eigenvalue over all effects `M^dag M`.
    pub fn min_effect_eigenvalue(&self) -> f64 {
        self.outcomes
            .iter()
            .flat_map(|(_, op)| super::op::hermitian_eigenvalues(&op.effect()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Every unnormalized branch `M_k |s>` with its probability `||M_k |s>||^2`.
    pub fn branches(&self, state: &PureState, targets: &[usize]) -> Result<Vec<Branch>> {
        self.outcomes
            .iter()
            .map(|(label, op)| {
                let out = state.apply(op, targets)?;
                Ok(Branch { label: *label, probability: out.norm_sqr(), state: out })
            })
            .collect()
    }

    /// Draws one outcome by the Born rule.
    pub fn sample<R: Rng + ?Sized>(&self, state: &PureState, targets: &[usize], rng: &mut R) -> Result<OutcomeSample> {
        let branches = self.branches(state, targets)?;
        let u: f64 = rng.random::<f64>() * branches.iter().map(|b| b.probability).sum::<f64>();
        let mut acc = 0.0;
        let mut chosen = None;
        for b in &branches {
            if b.probability <= 0.0 {
                continue;
            }
            acc += b.probability;
            chosen = Some(b);
            if u < acc {
                break;
            }
        }
        let b = chosen.ok_or(Error::ZeroBranch(0.0))?;
        Ok(OutcomeSample { label: b.label, probability: b.probability, post_state: b.state.renormalized()? })
    }
}
