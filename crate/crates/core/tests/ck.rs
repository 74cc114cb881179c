use proptest::prelude::*;

use tauber::asymptotics::{ck_index_log, class_m_check_log, LimitVerdict};
use tauber::measure::geometric_grid;

fn samples(tau: f64, log_c: f64, factor: impl Fn(f64) -> f64, l_min: f64, l_max: f64, n: usize) -> Vec<(f64, f64)> {
    geometric_grid(l_min, l_max, n, false)
        .into_iter()
        .map(|l| (l, log_c + tau * l + factor(l)))
        .collect()
}

#[test]
fn perturbed_estimates_settle_by_1e12() {
    let l_top = 1e12f64.ln();
    for tau in [-2.0, 0.0, 1.0, 4.5] {
        let osc = samples(tau, 0.0, |l| (1.5 + 0.5 * l.sin()).ln(), 10f64.ln(), l_top, 32);
        let dec = samples(tau, 0.0, |l| (1.0 + 1.0 / l).ln(), 10f64.ln(), l_top, 32);
        for s in [osc, dec] {
            let idx = ck_index_log(&s).unwrap();
            assert!((idx.tau_final - tau).abs() < 0.05);
        }
    }
}

#[test]
fn oscillating_factor_needs_epsilon_above_its_log_slope() {
    // d/dℓ ln(1.5 + 0.5 sin ℓ) peaks at 1/(2√2) ≈ 0.354, so smaller ε leaves
    // the trajectories non-monotone.
    // Sampled densely in ℓ; a coarse grid can skip over the bumps.
    let s: Vec<(f64, f64)> = (0..400)
        .map(|i| 2.5 + 0.5 * i as f64)
        .map(|l| (l, l + (1.5 + 0.5 * l.sin()).ln()))
        .collect();
    let diag = class_m_check_log(&s, 1.0, &[0.1, 0.4]).unwrap();
    assert!(!diag.epsilon_checks[0].passed);
    assert!(diag.epsilon_checks[1].passed);
}

#[test]
fn verdicts_for_an_index_that_is_off() {
    let s = samples(2.0, 0.0, |_| 0.0, 10f64.ln(), 1e6f64.ln(), 16);
    let diag = class_m_check_log(&s, 3.0, &[0.5]).unwrap();
    let check = &diag.epsilon_checks[0];
    assert_eq!(check.upper_verdict, LimitVerdict::TendsToZero);
    assert_eq!(check.lower_verdict, LimitVerdict::TendsToZero);
    assert!(!diag.consistent);
}

proptest! {
    #[test]
    fn stable_index_implies_class_m(
        tau in -3.0f64..3.0,
        log_c in -5.0f64..5.0,
        epsilon in 0.1f64..1.0,
        decaying in any::<bool>(),
    ) {
        let s = if decaying {
            samples(tau, log_c, |l| (1.0 + 1.0 / l).ln(), 10f64.ln(), 200.0, 64)
        } else {
            samples(tau, log_c, |_| 0.0, 10f64.ln(), 200.0, 64)
        };
        let idx = ck_index_log(&s).unwrap();
        prop_assume!(idx.spread < 0.05);
        let diag = class_m_check_log(&s, tau, &[epsilon]).unwrap();
        prop_assert!(diag.consistent, "tau {tau}, eps {epsilon}: {:?}", diag.epsilon_checks[0].upper_verdict);
    }
}
