//! Mixing times of the projected Langevin algorithm
//! `X_{t+1} = Pi[X_t - eta grad f(X_t) + sqrt(2 eta) xi_t]` to its own
//! stationary distribution, in total variation.
//!
//! Both bounds pick a horizon `T*` at which two chains started anywhere in
//! the domain are at TV distance `gamma < 1`, then boost: after
//! `T* ceil(log_{1/gamma}(1/eps))` steps the distance is below `eps`.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::bounds::{dissipative_unchecked, DissipativeForm};
use crate::error::{
    require_nonnegative, require_positive, require_unit_interval, PabiError, Result,
};
use crate::numeric::{ceil_snapped, ge_snapped};

/// A precondition that was checked on the way to a mixing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingResult {
    pub t_mix: u64,
    /// Horizon at which the TV distance is below a constant.
    pub t_star: u64,
    /// Boosting rounds.
    pub rounds: u64,
    pub regime_checks: Vec<RegimeCheck>,
}

fn require_eps(eps: f64) -> Result<f64> {
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err(PabiError::invalid(
            "eps",
            format!("must lie in (0, 1), got {eps}"),
        ))
    }
}

/// Smallest `1/eta` for which `ceil(D^2/eta)` steps bring weakly smooth
/// chains within TV distance 1/2:
///
/// ```text
/// (M/2)^(2/(1+p)) [ (1-p)/(1+p) max{16 ln(D (M/2)^(1/(1+p)) e), 27} ]^((1-p)/(1+p))
/// ```
///
/// At `p = 1` the bracket is raised to the power zero and this is `M/2`.
pub fn theta_threshold(p: f64, smoothness: f64, diameter: f64) -> Result<f64> {
    require_unit_interval("p", p)?;
    require_positive("smoothness", smoothness)?;
    require_positive("diameter", diameter)?;
    let half_m = smoothness / 2.0;
    let log_term = 16.0 * (diameter * half_m.powf(1.0 / (1.0 + p)) * E).ln();
    let ratio = (1.0 - p) / (1.0 + p);
    Ok(half_m.powf(2.0 / (1.0 + p)) * (ratio * log_term.max(27.0)).powf(ratio))
}

/// Mixing time for a convex `(p, M)`-weakly smooth potential (a convex
/// `L`-Lipschitz one is `p = 0`, `M = 2L`):
/// `ceil(D^2/eta) * ceil(log2(1/eps))`.
///
/// Requires `1/eta >= theta_threshold(p, M, D)` and `eta <= D^2`.
pub fn mixing_time_weakly_smooth(
    diameter: f64,
    eta: f64,
    p: f64,
    smoothness: f64,
    eps: f64,
) -> Result<MixingResult> {
    require_positive("eta", eta)?;
    require_eps(eps)?;
    let theta = theta_threshold(p, smoothness, diameter)?;
    let inverse_step = 1.0 / eta;
    if !ge_snapped(inverse_step, theta) {
        return Err(PabiError::precondition(
            "stepsize_threshold",
            format!("1/eta = {inverse_step} is below the threshold {theta}"),
            Some(theta),
        ));
    }
    let d2 = diameter * diameter;
    if eta > d2 {
        return Err(PabiError::precondition(
            "stepsize_diameter",
            format!("eta = {eta} exceeds D^2 = {d2}"),
            Some(d2),
        ));
    }
    let t_star = ceil_snapped(d2 / eta).max(1);
    let rounds = boost_rounds(0.5, eps)?;
    Ok(MixingResult {
        t_mix: t_star * rounds,
        t_star,
        rounds,
        regime_checks: vec![
            RegimeCheck {
                name: "stepsize_threshold".into(),
                satisfied: true,
                detail: format!("1/eta = {inverse_step} >= {theta}"),
            },
            RegimeCheck {
                name: "stepsize_diameter".into(),
                satisfied: true,
                detail: format!("eta = {eta} <= D^2 = {d2}"),
            },
        ],
    })
}

/// Contraction factor `1 - 2 eta kappa + eta^2 beta^2`, checked to lie in
/// `(0, 1)`.
fn dissipative_contraction(eta: f64, lambda: f64, kappa: f64, beta: f64) -> Result<f64> {
    require_positive("eta", eta)?;
    require_positive("lambda", lambda)?;
    require_positive("kappa", kappa)?;
    require_positive("beta", beta)?;
    let c = 1.0 - 2.0 * eta * kappa + eta * eta * beta * beta;
    if c <= 0.0 {
        return Err(PabiError::invalid(
            "c",
            format!("1 - 2*eta*kappa + eta^2*beta^2 = {c} must be > 0"),
        ));
    }
    if c >= 1.0 {
        let window = 2.0 * kappa / (beta * beta);
        return Err(PabiError::precondition(
            "contraction",
            format!("c = {c} >= 1; the stepsize must satisfy eta < 2*kappa/beta^2 = {window}"),
            Some(window),
        ));
    }
    Ok(c)
}

/// `T* = ceil(log_{1/c}(1 + D^2 (1-c) / (4 eta)))`.
fn dissipative_horizon(diameter: f64, eta: f64, c: f64) -> u64 {
    let target = (diameter * diameter * (1.0 - c) / (4.0 * eta)).ln_1p();
    ceil_snapped(target / -c.ln()).max(1)
}

/// Mixing time for a `(lambda, kappa)`-strongly dissipative, `beta`-smooth
/// potential with `c = 1 - 2 eta kappa + eta^2 beta^2 < 1`:
///
/// ```text
/// ceil(log_{1/c}(1 + D^2 (1-c)/(4 eta))) * ceil(2e ln2 (e/(1-c))^(lambda/2) log2(1/eps))
/// ```
pub fn mixing_time_dissipative(
    diameter: f64,
    eta: f64,
    lambda: f64,
    kappa: f64,
    beta: f64,
    eps: f64,
) -> Result<MixingResult> {
    require_positive("diameter", diameter)?;
    require_eps(eps)?;
    let c = dissipative_contraction(eta, lambda, kappa, beta)?;
    let t_star = dissipative_horizon(diameter, eta, c);
    let rounds_real = 2.0 * E * LN_2 * (E / (1.0 - c)).powf(lambda / 2.0) * (1.0 / eps).log2();
    let rounds = ceil_snapped(rounds_real).max(1);
    Ok(MixingResult {
        t_mix: t_star * rounds,
        t_star,
        rounds,
        regime_checks: vec![RegimeCheck {
            name: "contraction".into(),
            satisfied: true,
            detail: format!("0 < c = {c} < 1"),
        }],
    })
}

/// The same mixing time obtained step by step: the logarithmic KL bound at
/// `T*` (noise variance `2 eta`, offset `2 eta lambda`), converted to TV
/// with the tighter of Pinsker and Bretagnolle-Huber, then boosted. Never
/// larger than [`mixing_time_dissipative`].
pub fn mixing_time_dissipative_composed(
    diameter: f64,
    eta: f64,
    lambda: f64,
    kappa: f64,
    beta: f64,
    eps: f64,
) -> Result<MixingResult> {
    require_positive("diameter", diameter)?;
    require_eps(eps)?;
    let c = dissipative_contraction(eta, lambda, kappa, beta)?;
    let t_star = dissipative_horizon(diameter, eta, c);
    let kl = dissipative_unchecked(
        1.0,
        diameter,
        c,
        2.0 * eta * lambda,
        2.0 * eta,
        t_star,
        DissipativeForm::LogUpper,
    )
    .value;
    let gamma = tv_upper_bound(kl)?;
    let rounds = boost_rounds(gamma, eps)?;
    Ok(MixingResult {
        t_mix: t_star * rounds,
        t_star,
        rounds,
        regime_checks: vec![RegimeCheck {
            name: "contraction".into(),
            satisfied: true,
            detail: format!("0 < c = {c} < 1; KL at T* = {kl}, TV <= {gamma}"),
        }],
    })
}

/// `min(1, sqrt(kl / 2))`.
pub fn pinsker_tv(kl: f64) -> Result<f64> {
    require_nonnegative("kl", kl)?;
    Ok((kl / 2.0).sqrt().min(1.0))
}

/// `sqrt(1 - exp(-kl))`, below one for every finite `kl`.
pub fn bretagnolle_huber_tv(kl: f64) -> Result<f64> {
    require_nonnegative("kl", kl)?;
    Ok((-(-kl).exp_m1()).sqrt())
}

/// The tighter of [`pinsker_tv`] and [`bretagnolle_huber_tv`].
pub fn tv_upper_bound(kl: f64) -> Result<f64> {
    Ok(pinsker_tv(kl)?.min(bretagnolle_huber_tv(kl)?))
}

/// Rounds needed to push a TV distance `gamma` below `eps` by
/// submultiplicativity: `max(1, ceil(ln(1/eps) / ln(1/gamma)))`.
pub fn boost_rounds(gamma: f64, eps: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(PabiError::invalid(
            "gamma",
            format!("must lie in [0, 1), got {gamma}"),
        ));
    }
    require_eps(eps)?;
    if gamma == 0.0 {
        return Ok(1);
    }
    Ok(ceil_snapped(eps.ln() / gamma.ln()).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn theta_examples() {
        assert_eq!(theta_threshold(1.0, 3.0, 2.0).unwrap(), 1.5);
        assert_eq!(theta_threshold(0.0, 2.0, 1.0).unwrap(), 27.0);
        // 16 ln(D L e) wins over 27 for a large domain
        let (l, d) = (1.5, 40.0);
        let expected = l * l * (16.0 * (d * l * E).ln()).max(27.0);
        assert!((theta_threshold(0.0, 2.0 * l, d).unwrap() - expected).abs() < 1e-12 * expected);
        assert!(theta_threshold(1.2, 2.0, 1.0).is_err());
    }

    #[test]
    fn theta_is_continuous_in_p() {
        for &(m, d) in &[(2.0, 1.0), (5.0, 3.0), (0.5, 10.0)] {
            let grid: Vec<f64> = (0..=2000).map(|k| k as f64 / 2000.0).collect();
            let values: Vec<f64> = grid
                .iter()
                .map(|&p| theta_threshold(p, m, d).unwrap())
                .collect();
            for w in values.windows(2) {
                assert!(
                    (w[1] - w[0]).abs() <= 0.02 * w[0].max(w[1]),
                    "jump {} -> {}",
                    w[0],
                    w[1]
                );
            }
            let near_one = theta_threshold(1.0 - 1e-9, m, d).unwrap();
            assert!((near_one - m / 2.0).abs() < 1e-6 * m);
        }
    }

    #[test]
    fn weakly_smooth_examples() {
        let r = mixing_time_weakly_smooth(1.0, 1.0 / 27.0, 0.0, 2.0, 0.5).unwrap();
        assert_eq!((r.t_star, r.rounds, r.t_mix), (27, 1, 27));
        assert!(r.regime_checks.iter().all(|c| c.satisfied));
        let r = mixing_time_weakly_smooth(1.0, 1.0 / 27.0, 0.0, 2.0, 0.25).unwrap();
        assert_eq!((r.rounds, r.t_mix), (2, 54));
        let r = mixing_time_weakly_smooth(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        assert_eq!(r.t_mix, 1);
    }

    #[test]
    fn weakly_smooth_reports_threshold() {
        match mixing_time_weakly_smooth(1.0, 0.37, 0.0, 2.0, 0.5) {
            Err(PabiError::Precondition {
                code: "stepsize_threshold",
                required_value: Some(theta),
                ..
            }) => assert_eq!(theta, 27.0),
            other => panic!("unexpected {other:?}"),
        }
        // theta is met but eta > D^2
        match mixing_time_weakly_smooth(0.1, 0.4, 1.0, 2.0, 0.5) {
            Err(PabiError::Precondition { code, .. }) => assert_eq!(code, "stepsize_diameter"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(mixing_time_weakly_smooth(1.0, 0.01, 0.0, 2.0, 1.0).is_err());
        assert!(mixing_time_weakly_smooth(1.0, 0.01, 0.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn dissipative_example() {
        let r = mixing_time_dissipative(1.0, 0.5, 0.1, 1.0, 1.0, 0.5).unwrap();
        assert_eq!((r.t_star, r.rounds, r.t_mix), (1, 5, 5));
        let rounds = 2.0 * E * LN_2 * (E / 0.75f64).powf(0.05);
        assert!((rounds - 4.0189).abs() < 1e-4);
    }

    #[test]
    fn dissipative_small_lambda_limit() {
        for &eps in &[0.5, 0.1, 0.01] {
            let r = mixing_time_dissipative(1.0, 0.5, 1e-12, 1.0, 1.0, eps).unwrap();
            let expected = (2.0 * E * LN_2 * (1.0 / eps).log2()).ceil() as u64;
            assert_eq!(r.rounds, expected);
        }
    }

    #[test]
    fn dissipative_rejects_bad_contraction() {
        // c = 1 - 0.2 + 0.25 > 1
        assert!(matches!(
            mixing_time_dissipative(1.0, 0.5, 0.1, 0.2, 1.0, 0.5),
            Err(PabiError::Precondition {
                code: "contraction",
                ..
            })
        ));
        assert!(matches!(
            mixing_time_dissipative(1.0, 1.0, 0.1, 1.0, 0.5, 0.5),
            Err(PabiError::InvalidParameter { name: "c", .. })
        ));
        assert!(mixing_time_dissipative(1.0, 0.5, 0.1, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tv_conversions() {
        assert_eq!(pinsker_tv(0.0).unwrap(), 0.0);
        assert_eq!(pinsker_tv(0.5).unwrap(), 0.5);
        assert_eq!(pinsker_tv(8.0).unwrap(), 1.0);
        assert_eq!(bretagnolle_huber_tv(0.0).unwrap(), 0.0);
        assert!((bretagnolle_huber_tv(LN_2).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(bretagnolle_huber_tv(30.0).unwrap() < 1.0);
        assert!(pinsker_tv(-1.0).is_err());
        assert!(bretagnolle_huber_tv(-1.0).is_err());
    }

    #[test]
    fn pinsker_bh_crossover() {
        // bisection on sqrt(kl/2) = sqrt(1 - e^-kl)
        let diff = |kl: f64| pinsker_tv(kl).unwrap() - bretagnolle_huber_tv(kl).unwrap();
        let (mut lo, mut hi) = (0.5, 3.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if diff(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 1.594).abs() < 1e-3, "crossover at {lo}");
        assert_eq!(tv_upper_bound(1.0).unwrap(), pinsker_tv(1.0).unwrap());
        assert_eq!(
            tv_upper_bound(2.0).unwrap(),
            bretagnolle_huber_tv(2.0).unwrap()
        );
    }

    #[test]
    fn boosting_examples() {
        assert_eq!(boost_rounds(0.5, 0.25).unwrap(), 2);
        assert_eq!(boost_rounds(0.9, 0.01).unwrap(), 44);
        assert_eq!(boost_rounds(0.0, 0.5).unwrap(), 1);
        assert_eq!(boost_rounds(0.5, 0.5).unwrap(), 1);
        assert!(boost_rounds(1.0, 0.5).is_err());
        for &eps in &[0.3, 0.01, 1e-6] {
            assert_eq!(
                boost_rounds(0.5, eps).unwrap(),
                (1.0 / eps).log2().ceil() as u64
            );
        }
    }

    proptest! {
        #[test]
        fn composed_never_exceeds_closed_form(
            d in 0.1f64..10.0,
            kappa in 0.1f64..5.0,
            beta_ratio in 1.0f64..3.0,
            eta_frac in 0.01f64..0.99,
            lambda in 0.001f64..3.0,
            eps in 1e-6f64..0.99,
        ) {
            let beta = kappa * beta_ratio;
            // c < 1 iff eta < 2 kappa / beta^2
            let eta = eta_frac * 2.0 * kappa / (beta * beta);
            let closed = mixing_time_dissipative(d, eta, lambda, kappa, beta, eps).unwrap();
            let composed = mixing_time_dissipative_composed(d, eta, lambda, kappa, beta, eps).unwrap();
            prop_assert_eq!(composed.t_star, closed.t_star);
            prop_assert!(composed.t_mix <= closed.t_mix, "{} > {}", composed.t_mix, closed.t_mix);
        }

        #[test]
        fn weakly_smooth_monotone(p in 0.0f64..1.0, m in 0.5f64..4.0, d in 0.5f64..3.0, k in 1.0f64..5.0, eps in 1e-4f64..0.9) {
            let theta = theta_threshold(p, m, d).unwrap();
            let eta = (1.0 / (theta * k)).min(d * d);
            let smaller = eta / 2.0;
            let a = mixing_time_weakly_smooth(d, eta, p, m, eps).unwrap();
            let b = mixing_time_weakly_smooth(d, smaller, p, m, eps).unwrap();
            prop_assert!(a.t_mix <= b.t_mix);
            let c = mixing_time_weakly_smooth(d, eta, p, m, eps / 3.0).unwrap();
            prop_assert!(c.t_mix >= a.t_mix);
        }

        #[test]
        fn dissipative_monotone_in_eps(eps in 1e-6f64..0.9, shrink in 0.01f64..1.0) {
            let a = mixing_time_dissipative(1.0, 0.5, 0.1, 1.0, 1.0, eps).unwrap();
            let b = mixing_time_dissipative(1.0, 0.5, 0.1, 1.0, 1.0, eps * shrink).unwrap();
            prop_assert!(b.t_mix >= a.t_mix);
        }
    }
}
