//! Rényi-DP accounting for noisy SGD on a convex, `L`-Lipschitz,
//! `(p, M)`-weakly smooth loss over a domain of diameter `D`:
//!
//! ```text
//! X_{t+1} = Pi[X_t - (eta/b) sum_{i in B_t} grad f(X_t, z_i) + N(0, eta^2 sigma^2 I)]
//! ```
//!
//! with Poisson-sampled batches of expected size `b` out of `n` records.
//! The guarantee grows like plain composition for `T` steps and stops
//! growing after `2 Tbar + V` of them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, require_unit_interval, PabiError, Result};
use crate::moduli::weakly_smooth_offset;
use crate::numeric::{ceil_snapped, format_g17, linear_grid};

/// Bisection tolerance for [`alpha_star`].
pub const ALPHA_TOL: f64 = 1e-6;

/// Number of points used to confirm that the validity region is an interval.
const PREFIX_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacySpec {
    /// Dataset size.
    pub n: u64,
    /// Expected batch size.
    pub b: f64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub p: f64,
    pub eta: f64,
    /// Noise multiplier: the per-step noise is `N(0, eta^2 sigma^2 I)`.
    pub sigma: f64,
    pub alpha: f64,
    /// Number of iterations.
    pub t: u64,
    pub diameter: f64,
}

impl PrivacySpec {
    pub fn sampling_rate(&self) -> f64 {
        self.b / self.n as f64
    }

    /// Noise multiplier of the equivalent subsampled Gaussian mechanism,
    /// `b sigma / (2 sqrt 2 L)`.
    pub fn mechanism_sigma(&self) -> f64 {
        self.b * self.sigma / (2.0 * std::f64::consts::SQRT_2 * self.lipschitz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `T < 2 Tbar + V`: plain composition.
    Growing,
    /// `T >= 2 Tbar + V`: the bound no longer depends on `T`.
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonResult {
    /// `16 alpha L^2 / (n^2 sigma^2) * min{T, 2 Tbar + V}`.
    pub epsilon: f64,
    /// The three-term form: diameter, composition and smoothness terms
    /// evaluated at `Tbar`.
    pub epsilon_theorem: f64,
    pub regime: Regime,
    pub tbar: u64,
    pub v_term: f64,
    /// `2 Tbar + V`.
    pub cap_horizon: f64,
    pub alpha_star: f64,
}

/// `ceil(D n / (4 eta L))`.
pub fn tbar(diameter: f64, n: u64, eta: f64, lipschitz: f64) -> Result<u64> {
    require_positive("diameter", diameter)?;
    require_positive("eta", eta)?;
    require_positive("lipschitz", lipschitz)?;
    if n == 0 {
        return Err(PabiError::invalid("n", "dataset size must be positive"));
    }
    Ok(ceil_snapped(diameter * n as f64 / (4.0 * eta * lipschitz)).max(1))
}

fn check_subsampling(q: f64, sigma: f64) -> Result<()> {
    if !(q > 0.0 && q < 0.2) {
        return Err(PabiError::precondition(
            "sampling_rate",
            format!("sampling rate q = {q} must lie in (0, 1/5)"),
            Some(0.2),
        ));
    }
    if !(sigma >= 4.0) || !sigma.is_finite() {
        return Err(PabiError::precondition(
            "mechanism_noise",
            format!("subsampled Gaussian noise multiplier {sigma} must be >= 4"),
            Some(4.0),
        ));
    }
    Ok(())
}

/// Whether `alpha` satisfies both conditions of the `2 alpha q^2 / sigma^2`
/// bound on the subsampled Gaussian divergence, with
/// `m = ln(1 + 1/(q (alpha - 1)))`:
///
/// ```text
/// alpha <= m sigma^2 / 2 - ln(sigma^2)
/// alpha <= (m^2 sigma^2 / 2 - ln(5 sigma^2)) / (m + ln(q alpha) + 1/(2 sigma^2))
/// ```
///
/// The second denominator equals `ln(q alpha + alpha/(alpha-1)) + 1/(2 sigma^2) > 0`.
pub fn alpha_condition(q: f64, sigma: f64, alpha: f64) -> bool {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return false;
    }
    let s2 = sigma * sigma;
    let m = (1.0 / (q * (alpha - 1.0))).ln_1p();
    let first = alpha <= m * s2 / 2.0 - s2.ln();
    let denominator = m + (q * alpha).ln() + 1.0 / (2.0 * s2);
    let second = alpha <= (m * m * s2 / 2.0 - (5.0 * s2).ln()) / denominator;
    first && second
}

fn bisect_boundary(q: f64, sigma: f64, mut valid: f64, mut invalid: f64) -> f64 {
    while invalid - valid > ALPHA_TOL {
        let mid = 0.5 * (valid + invalid);
        if alpha_condition(q, sigma, mid) {
            valid = mid;
        } else {
            invalid = mid;
        }
    }
    valid
}

/// Largest `alpha` (to within [`ALPHA_TOL`], rounded down) such that every
/// order in `(1, alpha]` satisfies [`alpha_condition`].
///
/// The upper end is bracketed by doubling and refined by bisection; the
/// result is then rescanned on a grid and cut back to the first failure if
/// the valid set turns out not to be an interval.
pub fn alpha_star(q: f64, sigma: f64) -> Result<f64> {
    check_subsampling(q, sigma)?;
    let floor = 1.0 + ALPHA_TOL;
    if !alpha_condition(q, sigma, floor) {
        return Err(PabiError::precondition(
            "alpha_range",
            format!("no valid alpha range for q = {q}, sigma = {sigma}"),
            None,
        ));
    }
    let mut valid = floor;
    let mut candidate = 2.0;
    while alpha_condition(q, sigma, candidate) {
        valid = candidate;
        candidate *= 2.0;
        if candidate > 1e15 {
            return Err(PabiError::NotConverged(format!(
                "alpha condition still holds at {valid} for q = {q}, sigma = {sigma}"
            )));
        }
    }
    let mut upper = bisect_boundary(q, sigma, valid, candidate);
    loop {
        let grid = linear_grid(floor, upper, PREFIX_GRID);
        match grid.iter().position(|&a| !alpha_condition(q, sigma, a)) {
            None => return Ok(upper),
            Some(k) => upper = bisect_boundary(q, sigma, grid[k - 1], grid[k]),
        }
    }
}

/// `2 alpha q^2 / sigma^2`, the bound on the Rényi divergence of the
/// subsampled Gaussian mechanism. Only defined for `1 < alpha <= alpha_star(q, sigma)`.
pub fn s_alpha_bound(q: f64, sigma: f64, alpha: f64) -> Result<f64> {
    let limit = alpha_star(q, sigma)?;
    if !(alpha > 1.0 && alpha <= limit) {
        return Err(PabiError::precondition(
            "alpha_validity",
            format!("alpha = {alpha} is outside (1, {limit}]"),
            Some(limit),
        ));
    }
    Ok(2.0 * alpha * q * q / (sigma * sigma))
}

/// Extra horizon paid for non-smoothness,
/// `(2 Tbar / D * (eta M / 2)^(1/(1-p)))^2 (1-p)/(1+p) ln(Tbar e)`; zero at
/// `p = 1`.
pub fn v_term(diameter: f64, smoothness: f64, tbar: u64, eta: f64, p: f64) -> Result<f64> {
    require_positive("diameter", diameter)?;
    require_positive("smoothness", smoothness)?;
    require_positive("eta", eta)?;
    require_unit_interval("p", p)?;
    if tbar == 0 {
        return Err(PabiError::invalid("tbar", "must be at least 1"));
    }
    Ok(v_unchecked(diameter, smoothness, tbar, eta, p))
}

fn v_unchecked(diameter: f64, smoothness: f64, tbar: u64, eta: f64, p: f64) -> f64 {
    if p == 1.0 {
        return 0.0;
    }
    // (2 (eta M/2)^(1/(1-p)))^2 (1-p)/(1+p) is the weakly smooth offset h
    let t = tbar as f64;
    let scale = t / diameter;
    scale * scale * weakly_smooth_offset(eta, p, smoothness) * (t.ln() + 1.0)
}

/// Rényi-DP guarantee of noisy SGD after `T` steps.
///
/// Preconditions, each reported by name with its threshold: `T > Tbar`,
/// `sigma > 8 sqrt2 L / b`, `b/n < 1/5`, `1 < alpha <= alpha_star(b/n, b sigma / (2 sqrt2 L))`.
pub fn epsilon_nsgd(spec: &PrivacySpec) -> Result<EpsilonResult> {
    require_positive("b", spec.b)?;
    require_positive("lipschitz", spec.lipschitz)?;
    require_positive("smoothness", spec.smoothness)?;
    require_positive("eta", spec.eta)?;
    require_positive("sigma", spec.sigma)?;
    require_positive("diameter", spec.diameter)?;
    require_unit_interval("p", spec.p)?;
    if spec.b > spec.n as f64 {
        return Err(PabiError::invalid(
            "b",
            format!("batch size {} exceeds n = {}", spec.b, spec.n),
        ));
    }
    let tbar = tbar(spec.diameter, spec.n, spec.eta, spec.lipschitz)?;
    if spec.t <= tbar {
        return Err(PabiError::precondition(
            "horizon",
            format!("T = {} must exceed Tbar = {tbar}", spec.t),
            Some(tbar as f64 + 1.0),
        ));
    }
    let min_sigma = 8.0 * std::f64::consts::SQRT_2 * spec.lipschitz / spec.b;
    if spec.sigma <= min_sigma {
        return Err(PabiError::precondition(
            "noise_multiplier",
            format!(
                "sigma = {} must exceed 8 sqrt2 L / b = {min_sigma}",
                spec.sigma
            ),
            Some(min_sigma),
        ));
    }
    let q = spec.sampling_rate();
    if q >= 0.2 {
        return Err(PabiError::precondition(
            "sampling_rate",
            format!("b/n = {q} must be below 1/5"),
            Some(0.2),
        ));
    }
    if !(spec.alpha > 1.0) {
        return Err(PabiError::precondition(
            "alpha_validity",
            format!("alpha = {} must exceed 1", spec.alpha),
            Some(1.0),
        ));
    }
    let limit = alpha_star(q, spec.mechanism_sigma())?;
    if spec.alpha > limit {
        return Err(PabiError::precondition(
            "alpha_validity",
            format!("alpha = {} exceeds alpha* = {limit}", spec.alpha),
            Some(limit),
        ));
    }

    let n = spec.n as f64;
    let l2 = spec.lipschitz * spec.lipschitz;
    let s2 = spec.sigma * spec.sigma;
    let tb = tbar as f64;
    let v = v_unchecked(spec.diameter, spec.smoothness, tbar, spec.eta, spec.p);
    let cap_horizon = 2.0 * tb + v;

    let composition = 16.0 * l2 * tb / (n * n);
    let diameter_term = spec.diameter * spec.diameter / (spec.eta * spec.eta * tb);
    let smoothness_term = if spec.p == 1.0 {
        0.0
    } else {
        weakly_smooth_offset(spec.eta, spec.p, spec.smoothness) / (spec.eta * spec.eta)
            * (tb.ln() + 1.0)
    };
    let epsilon_theorem = spec.alpha / s2 * (composition + diameter_term + smoothness_term);

    let t = spec.t as f64;
    let (regime, horizon) = if t >= cap_horizon {
        (Regime::Capped, cap_horizon)
    } else {
        (Regime::Growing, t)
    };
    let epsilon = 16.0 * spec.alpha * l2 / (n * n * s2) * horizon;
    Ok(EpsilonResult {
        epsilon,
        epsilon_theorem,
        regime,
        tbar,
        v_term: v,
        cap_horizon,
        alpha_star: limit,
    })
}

/// Problem constants shared by every row of a privacy-curve sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub n: u64,
    pub lipschitz: f64,
    pub smoothness: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub p: f64,
    pub tbar: u64,
    pub v: f64,
    /// `2 Tbar + V`.
    pub bound: f64,
    pub ln_bound: f64,
}

pub const SWEEP_CSV_HEADER: &str = "eta,p,tbar,v,bound,ln_bound";

/// `2 Tbar + V` for every stepsize in `etas` (outer) and smoothness exponent
/// in `ps` (inner). Stepsizes must lie in `[1/n, n^(-1/5)]`.
pub fn privacy_curve_sweep(params: CurveParams, ps: &[f64], etas: &[f64]) -> Result<Vec<SweepRow>> {
    if etas.is_empty() {
        return Err(PabiError::invalid("eta_grid", "empty grid"));
    }
    if ps.is_empty() {
        return Err(PabiError::invalid("p", "no smoothness exponents given"));
    }
    if params.n == 0 {
        return Err(PabiError::invalid("n", "dataset size must be positive"));
    }
    require_positive("lipschitz", params.lipschitz)?;
    require_positive("smoothness", params.smoothness)?;
    require_positive("diameter", params.diameter)?;
    for &p in ps {
        require_unit_interval("p", p)?;
    }
    let n = params.n as f64;
    let (lo, hi) = (1.0 / n, n.powf(-0.2));
    for &eta in etas {
        if !(eta >= lo * (1.0 - 1e-12) && eta <= hi * (1.0 + 1e-12)) {
            return Err(PabiError::invalid(
                "eta_grid",
                format!("stepsize {eta} outside [1/n, n^(-1/5)] = [{lo}, {hi}]"),
            ));
        }
    }
    let rows: Vec<Vec<SweepRow>> = etas
        .par_iter()
        .map(|&eta| {
            let tb = tbar(params.diameter, params.n, eta, params.lipschitz)?;
            ps.iter()
                .map(|&p| {
                    let v = v_unchecked(params.diameter, params.smoothness, tb, eta, p);
                    let bound = 2.0 * tb as f64 + v;
                    Ok(SweepRow {
                        eta,
                        p,
                        tbar: tb,
                        v,
                        bound,
                        ln_bound: bound.ln(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// CSV with header [`SWEEP_CSV_HEADER`], one line per row, floats at 17
/// significant digits.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_g17(r.eta),
            format_g17(r.p),
            r.tbar,
            format_g17(r.v),
            format_g17(r.bound),
            format_g17(r.ln_bound)
        ));
    }
    out
}

/// The 100 evenly spaced stepsizes after `1/n` on `[1/n, n^(-1/5)]`
/// (a 101-point linear grid without its first point).
pub fn figure_eta_grid(n: u64) -> Vec<f64> {
    let n = n as f64;
    linear_grid(1.0 / n, n.powf(-0.2), 101).split_off(1)
}
