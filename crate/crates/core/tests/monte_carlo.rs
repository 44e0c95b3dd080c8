use std::f64::consts::FRAC_PI_2;

use cqi::analytics::{oracle, oracle_success_prob};
use cqi::protocol::{estimate_success, run, run_rng, run_with_receiver_key, simulate, ClassicalMessage};
use cqi::{Error, ProtocolParams, PureState};

fn settings() -> Vec<ProtocolParams> {
    vec![
        ProtocolParams::new(FRAC_PI_2, 0.0, 1.0, PureState::from_real(&[1.0, 2f64.sqrt()]).unwrap()).unwrap(),
        ProtocolParams::new(0.6, 0.0, 0.0, PureState::from_bloch(1.0, 0.0).unwrap()).unwrap(),
        ProtocolParams::new(1.2, 0.35, 0.8, PureState::from_bloch(2.2, -0.6).unwrap()).unwrap(),
        ProtocolParams::new(0.9, 1.0, 1.0, PureState::basis(1, 1).unwrap()).unwrap(),
    ]
}

#[test]
fn estimates_agree_with_oracle() {
    for (k, p) in settings().iter().enumerate() {
        let want = oracle_success_prob(p).unwrap();
        let (got, _) = estimate_success(p, 40_000, 100 + k as u64).unwrap();
        let sigma = (want * (1.0 - want) / 40_000.0).sqrt();
        assert!((got - want).abs() <= 4.0 * sigma, "setting {k}: {got} vs {want}");
    }
}

#[test]
fn path_frequencies_match_branch_probabilities() {
    let p = &settings()[2];
    let o = oracle(p, (p.x(), p.y())).unwrap();
    let shots = 30_000u64;
    let inconclusive = (0..shots)
        .filter(|&i| run(p, &mut run_rng(9, i)).unwrap().uqsd_outcome == ClassicalMessage::Inconclusive)
        .count() as f64
        / shots as f64;
    let want = 1.0 - o.conclusive_prob;
    assert!((inconclusive - want).abs() <= 4.0 * (want * (1.0 - want) / shots as f64).sqrt());
}

#[test]
fn transcripts_are_internally_consistent() {
    let p = &settings()[2];
    for i in 0..500 {
        let t = run(p, &mut run_rng(5, i)).unwrap();
        assert!(t.path_probability() > 0.0 && t.path_probability() <= 1.0);
        assert_eq!(t.eqi_attempted, t.uqsd_outcome.is_conclusive());
        assert_eq!(t.correction_applied.is_some(), t.eqi_attempted);
        assert_eq!(t.overall_success, t.eqi_success);
        if t.overall_success {
            assert!(t.final_fidelity.unwrap() > 1.0 - 1e-10);
        }
    }
}

#[test]
fn wrong_key_success_is_not_faithful() {
    let p = &settings()[0];
    let mut faithful = true;
    for i in 0..500 {
        let t = run_with_receiver_key(p, 1.0, 0.0, &mut run_rng(8, i)).unwrap();
        if t.overall_success && t.final_fidelity.unwrap() < 1.0 - 1e-6 {
            faithful = false;
        }
    }
    assert!(!faithful);
}

#[test]
fn ensembles_are_reproducible() {
    let p = &settings()[2];
    assert_eq!(simulate(p, (0.1, 0.2), 3_000, 77).unwrap(), simulate(p, (0.1, 0.2), 3_000, 77).unwrap());
    assert_eq!(estimate_success(p, 0, 1), Err(Error::NoShots));
}
