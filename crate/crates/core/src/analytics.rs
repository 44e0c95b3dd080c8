//! Closed-form probabilities and an exact branch-enumeration oracle.
//!
//! [`report`] evaluates the published closed forms term by term.
//! [`oracle`] knows none of them: it applies every Kraus operator of both
//! measurements to the full three-qubit register and adds up branch norms.
//!
//! The two agree on the special lines `x = y = 0`, `x = y = 1` and, at
//! `θ = π/2`, on the diagonal `x = y`. Elsewhere they do not: the closed form
//! weights the `ψ±` pair's conclusive probability by `p`, whereas the pair's
//! actual conclusive probability is `(1 - |o|) · n · |ψ̌|^2 / 2` with `|ψ̌|^2`
//! the unnormalized outcome norm. [`realized_conclusive_prob`] and
//! [`realized_success_prob`] give the closed forms of what the simulated
//! protocol attains; the latter simplifies to
//! `2 min{cos^2x, sin^2y} min{cos^2(1-x), sin^2(1-y)}`, independent of `|ψ>`.

use rayon::prelude::*;

use crate::eqi::{extraction_model, extraction_success_prob, ExtractionKind};
use crate::error::{Error, Result};
use crate::qcore::{fidelity, paulis, Label, LinearOp, PureState, ZERO_BRANCH_TOL};
use crate::states::{branch_probability, channel_state, general_basis, BasisLabel, ChannelSplit, ProtocolParams};
use crate::uqsd::{build_uqsd, discrimination_success_prob};

/// Every closed-form probability for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityReport {
    /// `1 - cos θ`.
    pub p_s: f64,
    /// Weight of the `ψ±` pair.
    pub p: f64,
    /// Conclusive discrimination probability.
    pub p_uqsd: f64,
    pub p_eqi_check: f64,
    pub p_eqi_hat: f64,
    /// Total success probability.
    pub p_xy: f64,
}

pub fn report(params: &ProtocolParams) -> Result<ProbabilityReport> {
    let p_uqsd = discrimination_success_prob(params)?;
    Ok(ProbabilityReport {
        p_s: 1.0 - params.theta().cos(),
        p: branch_probability(params),
        p_uqsd,
        p_eqi_check: extraction_success_prob(ExtractionKind::Check, params)?,
        p_eqi_hat: extraction_success_prob(ExtractionKind::Hat, params)?,
        p_xy: total_success_closed_form(params)?,
    })
}

/// The expanded total-success expression: a `min·min` prefactor times a
/// two-term bracket.
pub fn total_success_closed_form(params: &ProtocolParams) -> Result<f64> {
    let w = params.weights();
    let (a0, a1) = (params.weight0(), params.weight1());
    let (c2, s2) = (w.cos_half.powi(2), w.sin_half.powi(2));
    let (c2x, s2y) = (w.basis_cos.powi(2), w.basis_sin.powi(2));
    let (c2rx, s2ry) = (w.rest_cos.powi(2), w.rest_sin.powi(2));

    let hat_denom = a0 * c2rx + a1 * s2ry;
    let check_denom = a0 * s2ry + a1 * c2rx;
    let smallest = hat_denom.min(check_denom);
    if smallest.sqrt() < ZERO_BRANCH_TOL {
        return Err(Error::ZeroBranch(smallest.sqrt()));
    }
    let prefactor = 2.0 * c2x.min(s2y) * c2rx.min(s2ry) / (c2x + s2y);
    let bracket = (a0 * c2 + a1 * s2) / hat_denom + (a0 * s2 + a1 * c2) / check_denom;
    Ok(prefactor * bracket)
}

/// The unexpanded form `p(1-|o|) p̌ + (1-p)(1-|o|) p̂`, built from the other
/// report fields. Equal to [`total_success_closed_form`] algebraically.
pub fn total_success_from_parts(params: &ProtocolParams) -> Result<f64> {
    let r = report(params)?;
    Ok(r.p * r.p_uqsd * r.p_eqi_check + (1.0 - r.p) * r.p_uqsd * r.p_eqi_hat)
}

/// Conclusive probability the discrimination measurement actually reaches on
/// `|ψ> ⊗ |channel>`: `(1 - |o|) n (|ψ̌|^2 + |ψ̂|^2) / 2`.
pub fn realized_conclusive_prob(params: &ProtocolParams) -> Result<f64> {
    let p_pair = discrimination_success_prob(params)?;
    let w = params.weights();
    let (a0, a1) = (params.weight0(), params.weight1());
    let (c2rx, s2ry) = (w.rest_cos.powi(2), w.rest_sin.powi(2));
    let outcome_norms = (a0 * s2ry + a1 * c2rx) + (a0 * c2rx + a1 * s2ry);
    Ok(p_pair * w.basis_norm_sqr() * outcome_norms / 2.0)
}

/// Total success probability the simulated protocol attains:
/// `2 min{cos^2x, sin^2y} min{cos^2(1-x), sin^2(1-y)}`.
pub fn realized_success_prob(params: &ProtocolParams) -> Result<f64> {
    // surfaces DegenerateBasis like the other entry points
    discrimination_success_prob(params)?;
    let w = params.weights();
    Ok(2.0 * w.basis_cos.powi(2).min(w.basis_sin.powi(2)) * w.rest_cos.powi(2).min(w.rest_sin.powi(2)))
}

/// One leaf of the branch tree.
#[derive(Debug, Clone)]
pub struct OraclePath {
    pub uqsd: Label,
    pub eqi: Option<Label>,
    /// Joint probability of the path.
    pub probability: f64,
    /// Fidelity of the receiver's qubit with `|ψ>` at the end of the path.
    pub fidelity: Option<f64>,
}

/// Exact totals from branch enumeration.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub paths: Vec<OraclePath>,
    pub conclusive_prob: f64,
    pub success_prob: f64,
    /// Probability-weighted mean fidelity over success paths.
    pub success_fidelity: Option<f64>,
}

// Local copy of the receiver's Pauli table so the oracle does not route
// through the protocol module.
fn undo_pauli(label: BasisLabel) -> LinearOp {
    match label {
        BasisLabel::PsiPlus => paulis::x(),
        BasisLabel::PsiMinus => paulis::z().compose(&paulis::x()),
        BasisLabel::PhiPlus => LinearOp::identity(2),
        BasisLabel::PhiMinus => paulis::z(),
    }
}

/// Enumerates every discrimination and extraction branch on the full register.
/// The transmitter uses the key in `params`; the receiver uses `receiver_key`.
pub fn oracle(params: &ProtocolParams, receiver_key: (f64, f64)) -> Result<OracleReport> {
    let register = params.psi().tensor(&channel_state(params.theta())?);
    let uqsd = build_uqsd(&general_basis(params)?)?;
    let split = ChannelSplit::checked(params.theta(), receiver_key.0, receiver_key.1)?;
    let check = extraction_model(ExtractionKind::Check, &split)?;
    let hat = extraction_model(ExtractionKind::Hat, &split)?;

    let mut paths = Vec::new();
    for branch in uqsd.branches(&register, &[0, 1])? {
        let Label::Basis(label) = branch.label else {
            paths.push(OraclePath { uqsd: branch.label, eqi: None, probability: branch.probability, fidelity: None });
            continue;
        };
        let corrected = branch.state.apply(&undo_pauli(label), &[2])?;
        let model = if label.is_psi() { &check } else { &hat };
        for leaf in model.branches(&corrected, &[2])? {
            let fid = match leaf.state.renormalized() {
                Ok(s) => Some(fidelity(&s.extract_qubit(2)?, params.psi())?),
                Err(_) => None,
            };
            paths.push(OraclePath {
                uqsd: branch.label,
                eqi: Some(leaf.label),
                probability: leaf.probability,
                fidelity: fid,
            });
        }
    }

    let conclusive_prob = paths.iter().filter(|p| p.eqi.is_some()).map(|p| p.probability).sum();
    let success: Vec<&OraclePath> = paths.iter().filter(|p| p.eqi == Some(Label::Succeed)).collect();
    let success_prob: f64 = success.iter().map(|p| p.probability).sum();
    let success_fidelity = (success_prob > 0.0)
        .then(|| success.iter().map(|p| p.probability * p.fidelity.unwrap_or(0.0)).sum::<f64>() / success_prob);
    Ok(OracleReport { paths, conclusive_prob, success_prob, success_fidelity })
}

/// Exact success probability of an honest run.
pub fn oracle_success_prob(params: &ProtocolParams) -> Result<f64> {
    Ok(oracle(params, (params.x(), params.y()))?.success_prob)
}

/// `p_xy` over the unit square. Row `i` is `y = i/(res-1)`, column `j` is
/// `x = j/(res-1)`, so row 0 is the bottom edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub resolution: usize,
    /// Row-major; `None` where the basis degenerates.
    pub values: Vec<Option<f64>>,
}

impl Grid {
    pub fn coord(&self, index: usize) -> f64 {
        index as f64 / (self.resolution - 1) as f64
    }

    /// Value at row `i` (y) and column `j` (x).
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.resolution + j]
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().flatten().copied().reduce(f64::min)
    }
}

pub fn heatmap_grid(theta: f64, psi: &PureState, resolution: usize) -> Result<Grid> {
    if resolution < 2 {
        return Err(Error::BadResolution(resolution));
    }
    // validate once so range errors are not mistaken for degenerate cells
    ProtocolParams::new(theta, 0.0, 0.0, psi.clone())?;
    let step = 1.0 / (resolution - 1) as f64;
    let values = (0..resolution * resolution)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / resolution, k % resolution);
            let params = ProtocolParams::new(theta, j as f64 * step, i as f64 * step, psi.clone())?;
            match report(&params) {
                Ok(r) => Ok(Some(r.p_xy)),
                Err(Error::DegenerateBasis(_) | Error::ZeroBranch(_) | Error::ZeroWeight(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid { resolution, values })
}
