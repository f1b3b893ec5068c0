//! Rényi and KL divergence bounds between the last iterates of two
//! projected noisy iterations started at most `D` apart.

use serde::{Deserialize, Serialize};

use crate::error::{require_nonnegative, require_positive, PabiError, Result};
use crate::numeric::{harmonic, one_minus_pow};
use crate::shifts::IterationSpec;

/// Below this distance from one, a contraction factor is treated as one.
pub const NEAR_ONE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    /// Contribution of the initial distance `D`.
    pub diameter: f64,
    /// Contribution of the offsets `h_t`.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiBoundResult {
    pub alpha: f64,
    /// Upper bound on the order-`alpha` Rényi divergence, in nats.
    pub value: f64,
    pub breakdown: BoundBreakdown,
}

impl RenyiBoundResult {
    fn new(alpha: f64, diameter: f64, offset: f64) -> Self {
        let half = 0.5 * alpha;
        let breakdown = BoundBreakdown {
            diameter: half * diameter,
            offset: half * offset,
        };
        Self {
            alpha,
            value: breakdown.diameter + breakdown.offset,
            breakdown,
        }
    }
}

fn require_alpha(alpha: f64) -> Result<f64> {
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(alpha)
    } else {
        Err(PabiError::invalid(
            "alpha",
            format!("must be finite and >= 1, got {alpha}"),
        ))
    }
}

fn require_horizon(horizon: u64) -> Result<u64> {
    if horizon == 0 {
        Err(PabiError::invalid("T", "horizon must be at least 1"))
    } else {
        Ok(horizon)
    }
}

/// General bound for arbitrary per-step `(c_t, h_t, sigma_t)`:
///
/// ```text
/// (alpha/2) [ D^2 prod_k c_k / W_0 + sum_t h_t prod_{k>t} c_k / W_t ],
/// W_t = sum_{j>=t} sigma_j^2 prod_{l>j} c_l
/// ```
///
/// Each ratio `q_t = prod_{k>t} c_k / W_t` is obtained backwards from
/// `q_{T-1} = 1 / sigma_{T-1}^2` and `q_t = c_{t+1} q_{t+1} / (1 + sigma_t^2 c_{t+1} q_{t+1})`,
/// which never forms the raw products and so cannot overflow. `alpha = 1`
/// gives the KL bound.
pub fn renyi_bound_general(alpha: f64, spec: &IterationSpec) -> Result<RenyiBoundResult> {
    require_alpha(alpha)?;
    let sigmas = spec.sigmas();
    let moduli = spec.moduli();
    let t_max = spec.horizon();

    let mut q = 1.0 / (sigmas[t_max - 1] * sigmas[t_max - 1]);
    let mut offset = moduli[t_max - 1].h() * q;
    for t in (0..t_max - 1).rev() {
        let cq = moduli[t + 1].c() * q;
        q = cq / (1.0 + sigmas[t] * sigmas[t] * cq);
        offset += moduli[t].h() * q;
    }
    let d = spec.diameter();
    let diameter = moduli[0].c() * d * d * q;
    Ok(RenyiBoundResult::new(alpha, diameter, offset))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SqrtShiftForm {
    /// `h * H_T` with the harmonic number `H_T`.
    ExactHarmonic,
    /// `h * ln(T e)`.
    LogUpper,
}

/// Constant modulus `sqrt(delta^2 + h)` and constant noise:
/// `(alpha / 2 sigma^2) (D^2 / T + h * H_T)`, or with `ln(T e)` in place of
/// `H_T`.
pub fn renyi_bound_sqrt_shift(
    alpha: f64,
    diameter: f64,
    h: f64,
    sigma: f64,
    horizon: u64,
    form: SqrtShiftForm,
) -> Result<RenyiBoundResult> {
    require_alpha(alpha)?;
    require_positive("diameter", diameter)?;
    require_nonnegative("h", h)?;
    require_positive("sigma", sigma)?;
    require_horizon(horizon)?;
    Ok(sqrt_shift_unchecked(
        alpha,
        diameter,
        h,
        sigma * sigma,
        horizon,
        form,
    ))
}

fn sqrt_shift_unchecked(
    alpha: f64,
    diameter: f64,
    h: f64,
    variance: f64,
    horizon: u64,
    form: SqrtShiftForm,
) -> RenyiBoundResult {
    let t = horizon as f64;
    let growth = match form {
        SqrtShiftForm::ExactHarmonic => harmonic(horizon),
        SqrtShiftForm::LogUpper => t.ln() + 1.0,
    };
    RenyiBoundResult::new(
        alpha,
        diameter * diameter / (t * variance),
        h * growth / variance,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissipativeForm {
    /// `h * sum_{t<T} c^t / sum_{j<=t} c^j`.
    ExactSum,
    /// `h * ln(e (1 - c^T) / (1 - c))`.
    LogUpper,
}

/// `sum_{t=0}^{T-1} c^t / sum_{j=0}^{t} c^j = sum_t c^t (1-c) / (1-c^{t+1})`,
/// accumulated from the smallest terms.
pub fn contraction_offset_sum(c: f64, horizon: u64) -> f64 {
    let ln_c = c.ln();
    let one_minus_c = one_minus_pow(c, 1.0);
    (0..horizon)
        .rev()
        .map(|t| {
            let tf = t as f64;
            (tf * ln_c).exp() * one_minus_c / one_minus_pow(c, tf + 1.0)
        })
        .sum()
}

/// Constant contraction `0 < c < 1`, offset `h` and noise:
///
/// ```text
/// (alpha / 2 sigma^2) (D^2 c^T (1-c) / (1-c^T) + h * S)
/// ```
///
/// with `S` the exact series or its logarithmic upper estimate. Within
/// [`NEAR_ONE`] of `c = 1` the nonexpansive formulas are used instead.
pub fn renyi_bound_dissipative(
    alpha: f64,
    diameter: f64,
    c: f64,
    h: f64,
    sigma: f64,
    horizon: u64,
    form: DissipativeForm,
) -> Result<RenyiBoundResult> {
    require_alpha(alpha)?;
    require_positive("diameter", diameter)?;
    require_positive("c", c)?;
    if c >= 1.0 {
        return Err(PabiError::invalid(
            "c",
            format!("closed forms need 0 < c < 1, got {c}; use the general bound"),
        ));
    }
    require_nonnegative("h", h)?;
    require_positive("sigma", sigma)?;
    require_horizon(horizon)?;
    Ok(dissipative_unchecked(
        alpha,
        diameter,
        c,
        h,
        sigma * sigma,
        horizon,
        form,
    ))
}

pub(crate) fn dissipative_unchecked(
    alpha: f64,
    diameter: f64,
    c: f64,
    h: f64,
    variance: f64,
    horizon: u64,
    form: DissipativeForm,
) -> RenyiBoundResult {
    if 1.0 - c < NEAR_ONE {
        let form = match form {
            DissipativeForm::ExactSum => SqrtShiftForm::ExactHarmonic,
            DissipativeForm::LogUpper => SqrtShiftForm::LogUpper,
        };
        return sqrt_shift_unchecked(alpha, diameter, h, variance, horizon, form);
    }
    let t = horizon as f64;
    let one_minus_c = 1.0 - c;
    let one_minus_ct = one_minus_pow(c, t);
    let c_t = (t * c.ln()).exp();
    let diameter_term = diameter * diameter * c_t * one_minus_c / one_minus_ct;
    let growth = match form {
        DissipativeForm::ExactSum => contraction_offset_sum(c, horizon),
        DissipativeForm::LogUpper => (one_minus_ct / one_minus_c).ln() + 1.0,
    };
    RenyiBoundResult::new(alpha, diameter_term / variance, h * growth / variance)
}

/// KL bound for the projected Langevin algorithm (noise variance `2 eta`)
/// with modulus `sqrt(delta^2 + h)`: `D^2 / (4 eta T) + h ln(T e) / (4 eta)`.
pub fn kl_bound_pla(diameter: f64, eta: f64, h: f64, horizon: u64) -> Result<f64> {
    require_positive("diameter", diameter)?;
    require_positive("eta", eta)?;
    require_nonnegative("h", h)?;
    require_horizon(horizon)?;
    Ok(sqrt_shift_unchecked(
        1.0,
        diameter,
        h,
        2.0 * eta,
        horizon,
        SqrtShiftForm::LogUpper,
    )
    .value)
}
