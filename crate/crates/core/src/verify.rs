//! The self-check suite behind `cqi verify`.
//!
//! Every check reports a measured deviation next to its tolerance. Random
//! parameter tuples are drawn from a ChaCha stream seeded by
//! [`SuiteConfig::seed`].

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{self, heatmap_grid, oracle, report};
use crate::eqi::{build_extraction, extract_via_ancilla, target_state, ExtractionKind};
use crate::error::Result;
use crate::protocol::{run, run_rng, simulate};
use crate::qcore::{fidelity, random_state, random_unitary, Label, PureState};
use crate::states::{general_basis, verify_expansion, BasisLabel, ProtocolParams};
use crate::uqsd::{build_uqsd, discrimination_success_prob};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Multiplies every tolerance. Anything other than 1 is for exercising the harness.
    pub tolerance_scale: f64,
    /// Shots for the reference-point Monte Carlo check.
    pub shots: u64,
    /// Runs per setting for the fidelity and concealment checks.
    pub runs: u64,
    /// Random parameter tuples per property check.
    pub tuples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 2024, tolerance_scale: 1.0, shots: 100_000, runs: 10_000, tuples: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// What was measured: a deviation for tolerance checks, a value for bounds.
    pub measured: f64,
    pub tolerance: f64,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<32} measured={:e} tol={:e}", self.name, self.measured, self.tolerance)
    }
}

struct Suite {
    cfg: SuiteConfig,
    checks: Vec<Check>,
}

impl Suite {
    /// Passes when `deviation <= tolerance`; errors count as failures.
    fn within(&mut self, name: &'static str, tolerance: f64, deviation: Result<f64>) {
        let tolerance = tolerance * self.cfg.tolerance_scale;
        let measured = deviation.unwrap_or(f64::INFINITY);
        self.checks.push(Check { name, passed: measured <= tolerance, measured, tolerance });
    }

    /// Passes when `value < bound`.
    fn below(&mut self, name: &'static str, bound: f64, value: Result<f64>) {
        let measured = value.unwrap_or(f64::INFINITY);
        self.checks.push(Check { name, passed: measured < bound, measured, tolerance: bound });
    }
}

fn ref_psi() -> PureState {
    PureState::from_real(&[1.0, 2f64.sqrt()]).expect("normalizable")
}

fn ref_params() -> ProtocolParams {
    ProtocolParams::new(FRAC_PI_2, 0.0, 1.0, ref_psi()).expect("valid")
}

/// `count` random tuples with θ in (0, π/2], x and y in [0, 1] and Haar `|ψ>`.
pub fn random_tuples(seed: u64, count: usize) -> Vec<ProtocolParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let theta = FRAC_PI_2 * (1.0 - rng.random::<f64>());
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            ProtocolParams::new(theta, x, y, random_state(1, &mut rng)).expect("in range")
        })
        .collect()
}

fn max_over<T>(items: &[T], f: impl Fn(&T) -> Result<f64>) -> Result<f64> {
    items.iter().try_fold(0.0f64, |acc, t| Ok(acc.max(f(t)?)))
}

pub fn run_suite(cfg: &SuiteConfig) -> Vec<Check> {
    let mut s = Suite { cfg: *cfg, checks: Vec::new() };
    let tuples = random_tuples(cfg.seed, cfg.tuples);
    invariants(&mut s, &tuples);
    acceptance(&mut s, &tuples);
    s.checks
}

fn invariants(s: &mut Suite, tuples: &[ProtocolParams]) {
    let mut rng = ChaCha8Rng::seed_from_u64(s.cfg.seed ^ 0x5eed);
    let norm_dev = (0..tuples.len())
        .map(|k| {
            let state = random_state(4, &mut rng);
            let u = random_unitary(2, &mut rng);
            let targets = [k % 4, (k + 1 + k / 4 % 3) % 4];
            Ok((state.apply(&u, &targets)?.norm_sqr() - 1.0).abs())
        })
        .try_fold(0.0f64, |acc, d: Result<f64>| Ok(acc.max(d?)));
    s.within("qcore.unitary_norm", 1e-12, norm_dev);

    s.within(
        "states.overlap_closed_form",
        1e-12,
        max_over(tuples, |p| {
            let b = general_basis(p)?;
            let w = p.weights();
            let (a2, b2) = (w.basis_cos.powi(2), w.basis_sin.powi(2));
            let want = (a2 - b2) / (a2 + b2);
            Ok((b.overlap_phi - want).abs().max((b.overlap_psi + want).abs()))
        }),
    );

    s.within(
        "uqsd.per_state_success",
        1e-10,
        max_over(tuples, |p| {
            let b = general_basis(p)?;
            let m = build_uqsd(&b)?;
            let want = discrimination_success_prob(p)?;
            max_over(&BasisLabel::ALL, |&l| {
                let hit = b.state(l).apply(m.operator(Label::Basis(l)).expect("conclusive label"), &[0, 1])?.norm_sqr();
                Ok((hit - want).abs())
            })
        }),
    );

    s.within(
        "eqi.success_fidelity",
        1e-10,
        max_over(tuples, |p| {
            max_over(&[ExtractionKind::Check, ExtractionKind::Hat], |&kind| {
                let m = build_extraction(kind, p)?;
                let out = target_state(kind, p)?
                    .apply(m.operator(Label::Succeed).expect("success label"), &[0])?
                    .renormalized()?;
                Ok((1.0 - fidelity(&out, p.psi())?).abs())
            })
        }),
    );

    s.within(
        "eqi.ancilla_matches_kraus",
        1e-10,
        max_over(tuples, |p| {
            max_over(&[ExtractionKind::Check, ExtractionKind::Hat], |&kind| {
                let input = target_state(kind, p)?;
                let m = build_extraction(kind, p)?;
                let kraus = input.apply(m.operator(Label::Succeed).expect("success label"), &[0])?.norm_sqr();
                Ok((extract_via_ancilla(kind, p, &input)?.success_prob - kraus).abs())
            })
        }),
    );

    s.within(
        "analytics.p_xy_le_p_uqsd",
        1e-12,
        max_over(tuples, |p| {
            let r = report(p)?;
            Ok((r.p_xy - r.p_uqsd).max(0.0))
        }),
    );

    s.within(
        "analytics.p_s_identity",
        1e-12,
        max_over(tuples, |p| {
            let r = report(p)?;
            Ok((r.p_s - 2.0 * (p.theta() / 2.0).sin().powi(2)).abs())
        }),
    );

    let first = &tuples[0];
    s.within(
        "analytics.psi_independence",
        1e-15,
        report(first).and_then(|base| {
            max_over(&tuples[1..tuples.len().min(20)], |p| {
                let r = report(&ProtocolParams::new(first.theta(), first.x(), first.y(), p.psi().clone())?)?;
                Ok((r.p_s - base.p_s).abs().max((r.p_uqsd - base.p_uqsd).abs()))
            })
        }),
    );

    s.within(
        "analytics.oracle_vs_realized",
        1e-10,
        max_over(tuples, |p| {
            let o = oracle(p, (p.x(), p.y()))?;
            let dp = (o.success_prob - analytics::realized_success_prob(p)?).abs();
            let dc = (o.conclusive_prob - analytics::realized_conclusive_prob(p)?).abs();
            Ok(dp.max(dc))
        }),
    );

    let pr = ProtocolParams::new(1.1, 0.3, 0.6, ref_psi()).expect("valid");
    s.within(
        "protocol.mc_vs_oracle",
        1.0,
        (|| {
            let e = simulate(&pr, (pr.x(), pr.y()), s.cfg.runs, s.cfg.seed)?;
            let want = analytics::oracle_success_prob(&pr)?;
            let sigma = (want * (1.0 - want) / e.shots as f64).sqrt();
            // in units of 4σ
            Ok((e.estimate - want).abs() / (4.0 * sigma))
        })(),
    );
}

fn acceptance(s: &mut Suite, tuples: &[ProtocolParams]) {
    let reference = ref_params();
    s.within("1.reference_point_closed_form", 1e-12, report(&reference).map(|r| (r.p_xy - 0.45).abs()));
    s.within(
        "1.reference_point_monte_carlo",
        1.0,
        simulate(&reference, (0.0, 1.0), s.cfg.shots, s.cfg.seed).map(|e| {
            let sigma = (0.45 * 0.55 / e.shots as f64).sqrt();
            (e.estimate - 0.45).abs() / (4.0 * sigma)
        }),
    );

    s.within(
        "2.diagonal_is_one",
        1e-12,
        max_over(&(0..=10).collect::<Vec<_>>(), |&k| {
            let v = k as f64 / 10.0;
            Ok((report(&ProtocolParams::new(FRAC_PI_2, v, v, ref_psi())?)?.p_xy - 1.0).abs())
        }),
    );
    s.below(
        "2.off_diagonal_below_one",
        1.0 - 1e-6,
        ProtocolParams::new(FRAC_PI_2, 0.2, 0.8, ref_psi()).and_then(|p| report(&p)).map(|r| r.p_xy),
    );

    let thetas = [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2];
    s.within(
        "3.reduction_to_p_s",
        1e-12,
        max_over(&thetas, |&t| {
            max_over(&[0.0, 1.0], |&k| {
                Ok((report(&ProtocolParams::new(t, k, k, ref_psi())?)?.p_xy - (1.0 - t.cos())).abs())
            })
        }),
    );
    s.within(
        "4.uqsd_minimum",
        1e-12,
        max_over(&thetas, |&t| {
            let s2 = (t / 2.0).sin().powi(2);
            Ok((report(&ProtocolParams::new(t, 0.0, 1.0, ref_psi())?)?.p_uqsd - 2.0 * s2 / (1.0 + s2)).abs())
        }),
    );

    s.within(
        "5.closed_form_vs_oracle",
        1e-10,
        max_over(tuples, |p| Ok((report(p)?.p_xy - analytics::oracle_success_prob(p)?).abs())),
    );
    s.within("6.expansion_identity", 1e-10, max_over(tuples, verify_expansion));

    s.within(
        "7.measurement_soundness",
        1e-10,
        max_over(tuples, |p| {
            let b = general_basis(p)?;
            let m = build_uqsd(&b)?;
            let mut dev = m.completeness_deviation()?.max(-m.min_effect_eigenvalue());
            for kind in [ExtractionKind::Check, ExtractionKind::Hat] {
                let e = build_extraction(kind, p)?;
                dev = dev.max(e.completeness_deviation()?).max(-e.min_effect_eigenvalue());
            }
            for l in BasisLabel::ALL {
                for other in BasisLabel::ALL.into_iter().filter(|o| *o != l) {
                    let wrong = b
                        .state(other)
                        .apply(m.operator(Label::Basis(l)).expect("conclusive label"), &[0, 1])?
                        .norm_sqr();
                    dev = dev.max(wrong);
                }
            }
            Ok(dev)
        }),
    );

    let settings: Vec<ProtocolParams> = tuples.iter().take(5).cloned().collect();
    s.within(
        "8.conditional_fidelity",
        1e-10,
        max_over(&settings, |p| {
            let e = simulate(p, (p.x(), p.y()), s.cfg.runs, s.cfg.seed)?;
            Ok(e.success_fidelity_min.map_or(0.0, |f| 1.0 - f))
        }),
    );

    let wrong = oracle(&reference, (1.0, 0.0));
    s.below(
        "9.wrong_key_oracle_fidelity",
        1.0 - 1e-6,
        wrong.as_ref().map_err(Clone::clone).map(|o| o.success_fidelity.unwrap_or(0.0)),
    );
    s.within(
        "9.wrong_key_monte_carlo",
        1.0,
        (|| {
            let want = wrong.clone()?.success_fidelity.unwrap_or(0.0);
            let e = simulate(&reference, (1.0, 0.0), s.cfg.runs, s.cfg.seed)?;
            let mean = e.success_fidelity_mean.unwrap_or(0.0);
            let err = e.success_fidelity_stderr.unwrap_or(0.0);
            Ok((mean - want).abs() / (4.0 * err).max(f64::MIN_POSITIVE))
        })(),
    );

    s.within(
        "10.determinism",
        0.0,
        (|| {
            let a = (simulate(&reference, (0.0, 1.0), 1000, s.cfg.seed)?, heatmap_grid(FRAC_PI_2, &ref_psi(), 11)?);
            let b = (simulate(&reference, (0.0, 1.0), 1000, s.cfg.seed)?, heatmap_grid(FRAC_PI_2, &ref_psi(), 11)?);
            let t1 = run(&reference, &mut run_rng(s.cfg.seed, 3))?;
            let t2 = run(&reference, &mut run_rng(s.cfg.seed, 3))?;
            let same = a == b && t1.final_state == t2.final_state && t1.uqsd_outcome == t2.uqsd_outcome;
            Ok(if same { 0.0 } else { 1.0 })
        })(),
    );
}
