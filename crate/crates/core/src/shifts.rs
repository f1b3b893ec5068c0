//! The shifts optimization problem.
//!
//! Two trajectories of a projected noisy iteration start at most `D` apart.
//! Each step the gap `u_{t-1}` is pushed through the modulus `phi_{t-1}` and
//! then reduced by a shift `a_t = phi_{t-1}(u_{t-1}) - u_t`, paying
//! `a_t^2 / sigma_{t-1}^2` in divergence. The gap has to reach zero at `T`.
//! Minimizing the total cost
//!
//! ```text
//! E(u) = sum_{t=1}^{T} (phi_{t-1}(u_{t-1}) - u_t)^2 / sigma_{t-1}^2,   u_0 = D, u_T = 0
//! ```
//!
//! over the free interior levels `u_1..u_{T-1}` gives the tightest bound
//! the shift-reduction argument can produce. For quadratic moduli the
//! minimizer has a closed form ([`solve_closed_form`]); [`numeric_oracle`]
//! is an independent multi-start Newton search used to certify it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, PabiError, Result};
use crate::moduli::QuadraticModulus;

/// Diameter, per-step noise and per-step moduli of a projected noisy
/// iteration run for `T = sigmas.len()` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSpec {
    diameter: f64,
    sigmas: Vec<f64>,
    moduli: Vec<QuadraticModulus>,
}

impl IterationSpec {
    pub fn new(diameter: f64, sigmas: Vec<f64>, moduli: Vec<QuadraticModulus>) -> Result<Self> {
        require_positive("diameter", diameter)?;
        if sigmas.is_empty() {
            return Err(PabiError::invalid("T", "horizon must be at least 1"));
        }
        if moduli.len() != sigmas.len() {
            return Err(PabiError::LengthMismatch {
                name: "moduli",
                expected: sigmas.len(),
                actual: moduli.len(),
            });
        }
        for &sigma in &sigmas {
            require_positive("sigma", sigma)?;
        }
        Ok(Self {
            diameter,
            sigmas,
            moduli,
        })
    }

    /// Constant noise and modulus over `horizon` steps.
    pub fn constant(
        diameter: f64,
        horizon: usize,
        sigma: f64,
        modulus: QuadraticModulus,
    ) -> Result<Self> {
        Self::new(diameter, vec![sigma; horizon], vec![modulus; horizon])
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn horizon(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn moduli(&self) -> &[QuadraticModulus] {
        &self.moduli
    }

    /// `r_0 = D`, `r_t = phi_{t-1}(r_{t-1})` for `t = 0..T`: the largest gap
    /// reachable without shifting.
    pub fn reachable_radii(&self) -> Vec<f64> {
        let mut radii = Vec::with_capacity(self.horizon() + 1);
        let mut r = self.diameter;
        radii.push(r);
        for m in &self.moduli {
            r = m.apply(r);
            radii.push(r);
        }
        radii
    }

    fn full_levels(&self, u_inner: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.horizon() + 1);
        u.push(self.diameter);
        u.extend_from_slice(u_inner);
        u.push(0.0);
        u
    }

    fn objective_unchecked(&self, u_inner: &[f64]) -> f64 {
        let t_max = self.horizon();
        let mut prev = self.diameter;
        let mut total = 0.0;
        for t in 1..=t_max {
            let next = if t == t_max { 0.0 } else { u_inner[t - 1] };
            let gap = self.moduli[t - 1].apply(prev) - next;
            let s = self.sigmas[t - 1];
            total += gap * gap / (s * s);
            prev = next;
        }
        total
    }
}

/// Interpolation levels `u_0..u_T`, the shifts `a_1..a_T` they induce and
/// the objective `E(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSolution {
    pub u: Vec<f64>,
    pub a: Vec<f64>,
    pub objective: f64,
}

impl ShiftSolution {
    fn from_levels(spec: &IterationSpec, u: Vec<f64>) -> Self {
        let a: Vec<f64> = (1..u.len())
            .map(|t| spec.moduli[t - 1].apply(u[t - 1]) - u[t])
            .collect();
        let objective = a
            .iter()
            .zip(&spec.sigmas)
            .map(|(a_t, s)| a_t * a_t / (s * s))
            .sum();
        Self { u, a, objective }
    }

    pub fn interior(&self) -> &[f64] {
        &self.u[1..self.u.len() - 1]
    }
}

/// `E(u)` for the free interior levels `u_1..u_{T-1}`. No feasibility is
/// required; `E` is defined on all of `R^{T-1}`.
pub fn objective(spec: &IterationSpec, u_inner: &[f64]) -> Result<f64> {
    let expected = spec.horizon() - 1;
    if u_inner.len() != expected {
        return Err(PabiError::LengthMismatch {
            name: "u_inner",
            expected,
            actual: u_inner.len(),
        });
    }
    Ok(spec.objective_unchecked(u_inner))
}

/// Closed-form minimizer of `E`.
///
/// `u_t = (W_t / W_{t-1}) * phi_{t-1}(u_{t-1})` with
/// `W_t = sum_{k=t}^{T-1} sigma_k^2 prod_{l=k+1}^{T-1} c_l`. Only the ratios
/// matter, so the backward accumulation is renormalized at every step to
/// stay finite for long horizons.
pub fn solve_closed_form(spec: &IterationSpec) -> ShiftSolution {
    let t_max = spec.horizon();
    let sig2: Vec<f64> = spec.sigmas.iter().map(|s| s * s).collect();

    // ratio[t] = W_t / W_{t-1}, t = 1..T-1
    let mut ratio = vec![0.0; t_max];
    let mut suffix_prod = 1.0; // P_t = prod_{l=t+1}^{T-1} c_l (rescaled)
    let mut suffix_sum = sig2[t_max - 1]; // W_t (rescaled)
    for t in (1..t_max).rev() {
        suffix_prod *= spec.moduli[t].c();
        let previous = sig2[t - 1] * suffix_prod + suffix_sum;
        ratio[t] = suffix_sum / previous;
        suffix_prod /= previous;
        suffix_sum = 1.0;
    }

    let mut u = Vec::with_capacity(t_max + 1);
    u.push(spec.diameter);
    for t in 1..t_max {
        let reach = spec.moduli[t - 1].apply(u[t - 1]);
        u.push(ratio[t] * reach);
    }
    u.push(0.0);
    ShiftSolution::from_levels(spec, u)
}

/// Residuals of the first-order conditions
/// `(c_t s_{t-1}^2 + s_t^2) u_t - s_{t-1}^2 phi_t'(u_t) u_{t+1} = s_t^2 phi_{t-1}(u_{t-1})`
/// at `t = 1..T-1`, each divided by the largest term in its equation.
pub fn stationarity_residuals(spec: &IterationSpec, u: &[f64]) -> Result<Vec<f64>> {
    let t_max = spec.horizon();
    if u.len() != t_max + 1 {
        return Err(PabiError::LengthMismatch {
            name: "u",
            expected: t_max + 1,
            actual: u.len(),
        });
    }
    let sig2: Vec<f64> = spec.sigmas.iter().map(|s| s * s).collect();
    Ok((1..t_max)
        .map(|t| {
            let m = &spec.moduli[t];
            let lhs_a = (m.c() * sig2[t - 1] + sig2[t]) * u[t];
            let lhs_b = sig2[t - 1] * m.derivative(u[t]) * u[t + 1];
            let rhs = sig2[t] * spec.moduli[t - 1].apply(u[t - 1]);
            let scale = lhs_a
                .abs()
                .max(lhs_b.abs())
                .max(rhs.abs())
                .max(f64::MIN_POSITIVE);
            (lhs_a - lhs_b - rhs) / scale
        })
        .collect())
}

/// Outcome of [`feasibility_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<String>,
}

/// Tolerance on `phi_{t-1}(u_{t-1}) >= u_t` and `u_t >= 0`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Checks `u_0 = D`, `u_T = 0` (exactly) and `phi_{t-1}(u_{t-1}) >= u_t >= 0`.
pub fn feasibility_check(spec: &IterationSpec, u: &[f64]) -> Result<FeasibilityReport> {
    let t_max = spec.horizon();
    if u.len() != t_max + 1 {
        return Err(PabiError::LengthMismatch {
            name: "u",
            expected: t_max + 1,
            actual: u.len(),
        });
    }
    let mut violations = Vec::new();
    if u[0] != spec.diameter {
        violations.push(format!("u_0 = {} ≠ D = {}", u[0], spec.diameter));
    }
    if u[t_max] != 0.0 {
        violations.push(format!("u_T ≠ 0 (u_{t_max} = {})", u[t_max]));
    }
    for (t, &value) in u.iter().enumerate() {
        if value < -FEASIBILITY_TOL {
            violations.push(format!("u_{t} = {value} < 0"));
        }
    }
    for t in 1..=t_max {
        let reach = spec.moduli[t - 1].apply(u[t - 1]);
        if reach < u[t] - FEASIBILITY_TOL * u[t].abs().max(1.0) {
            violations.push(format!(
                "φ_{}(u_{}) = {} < u_{} = {}",
                t - 1,
                t - 1,
                reach,
                t,
                u[t]
            ));
        }
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

/// Settings for [`numeric_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub restarts: usize,
    /// Stationarity tolerance: a restart counts as converged once the
    /// projected gradient satisfies `|g|_inf <= tol * (1 + E)`.
    pub tol: f64,
    pub max_horizon: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            tol: 1e-9,
            max_horizon: 12,
            max_iterations: 300,
            seed: 0x5eed,
        }
    }
}

struct LocalResult {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Minimizes `E` over `u_inner >= 0` by multi-start damped Newton descent
/// with finite-difference derivatives. It never looks at the closed form.
///
/// Starting points are drawn from a 4-level grid over the box
/// `[0, r_1] x ... x [0, r_{T-1}]` of reachable radii (the first restart
/// is the box center). Restarts run in parallel; the reduction is a
/// min-by-objective with ties broken by restart index.
pub fn numeric_oracle(spec: &IterationSpec, options: OracleOptions) -> Result<ShiftSolution> {
    let t_max = spec.horizon();
    if t_max > options.max_horizon {
        return Err(PabiError::precondition(
            "oracle_horizon",
            format!(
                "horizon {t_max} exceeds the oracle limit {}",
                options.max_horizon
            ),
            Some(options.max_horizon as f64),
        ));
    }
    if options.restarts == 0 {
        return Err(PabiError::invalid("restarts", "must be positive"));
    }
    require_positive("tol", options.tol)?;
    if t_max == 1 {
        return Ok(ShiftSolution::from_levels(spec, spec.full_levels(&[])));
    }

    let radii = spec.reachable_radii();
    let box_upper = &radii[1..t_max];
    let results: Vec<LocalResult> = (0..options.restarts)
        .into_par_iter()
        .map(|restart| {
            let start = starting_point(box_upper, restart, options.seed);
            newton_descent(spec, start, options)
        })
        .collect();

    let best = results
        .iter()
        .enumerate()
        .filter(|(_, r)| r.converged)
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)));
    match best {
        Some((_, r)) => Ok(ShiftSolution::from_levels(spec, spec.full_levels(&r.x))),
        None => Err(PabiError::NotConverged(format!(
            "none of {} restarts reached the stationarity tolerance {} within {} iterations",
            options.restarts, options.tol, options.max_iterations
        ))),
    }
}

fn starting_point(box_upper: &[f64], restart: usize, seed: u64) -> Vec<f64> {
    if restart == 0 {
        return box_upper.iter().map(|r| 0.5 * r).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    box_upper
        .iter()
        .map(|r| {
            let level = rng.random_range(0..4u32) as f64;
            (level + 0.5) / 4.0 * r
        })
        .collect()
}

fn projected_gradient_norm(x: &[f64], grad: &[f64]) -> f64 {
    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| if xi <= 0.0 && gi > 0.0 { 0.0 } else { gi.abs() })
        .fold(0.0, f64::max)
}

fn fd_gradient(spec: &IterationSpec, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = 1e-6 * x[i].abs().max(1.0);
            probe[i] = x[i] + step;
            let up = spec.objective_unchecked(&probe);
            probe[i] = x[i] - step;
            let down = spec.objective_unchecked(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

fn fd_hessian(spec: &IterationSpec, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let mut probe = x.to_vec();
    let mut hess = vec![vec![0.0; n]; n];
    let centre = spec.objective_unchecked(x);
    for i in 0..n {
        let hi = steps[i];
        probe[i] = x[i] + hi;
        let up = spec.objective_unchecked(&probe);
        probe[i] = x[i] - hi;
        let down = spec.objective_unchecked(&probe);
        probe[i] = x[i];
        hess[i][i] = (up - 2.0 * centre + down) / (hi * hi);
        for j in (i + 1)..n {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                probe[i] = x[i] + si * hi;
                probe[j] = x[j] + sj * hj;
                let v = spec.objective_unchecked(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let value = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * hi * hj);
            hess[i][j] = value;
            hess[j][i] = value;
        }
    }
    hess
}

/// Solves `(H + shift I) d = rhs` by Cholesky; `None` if not positive definite.
fn cholesky_solve(hess: &[Vec<f64>], shift: f64, rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = hess[i][j] + if i == j { shift } else { 0.0 };
            sum -= (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][i] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    let mut d = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k][i] * d[k];
        }
        d[i] = sum / l[i][i];
    }
    Some(d)
}

fn newton_descent(spec: &IterationSpec, mut x: Vec<f64>, options: OracleOptions) -> LocalResult {
    let mut value = spec.objective_unchecked(&x);
    for _ in 0..options.max_iterations {
        let grad = fd_gradient(spec, &x);
        if projected_gradient_norm(&x, &grad) <= options.tol * (1.0 + value) {
            return LocalResult {
                x,
                value,
                converged: true,
            };
        }
        let hess = fd_hessian(spec, &x);
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let diag_scale = hess
            .iter()
            .enumerate()
            .map(|(i, row)| row[i].abs())
            .fold(1e-12, f64::max);
        let mut shift = 0.0;
        let direction = loop {
            if let Some(d) = cholesky_solve(&hess, shift, &neg_grad) {
                break d;
            }
            shift = if shift == 0.0 {
                1e-8 * diag_scale
            } else {
                shift * 10.0
            };
            if shift > 1e12 * diag_scale {
                break neg_grad.clone();
            }
        };

        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| (xi + step * di).max(0.0))
                .collect();
            let candidate_value = spec.objective_unchecked(&candidate);
            if candidate_value <= value + 1e-4 * step * slope.min(0.0) && candidate_value <= value {
                moved = candidate != x;
                x = candidate;
                value = candidate_value;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            // no descent possible at working precision; accept if the
            // gradient is within a looser finite-difference noise floor
            let converged = projected_gradient_norm(&x, &grad) <= 1e3 * options.tol * (1.0 + value);
            return LocalResult {
                x,
                value,
                converged,
            };
        }
    }
    let grad = fd_gradient(spec, &x);
    let converged = projected_gradient_norm(&x, &grad) <= options.tol * (1.0 + value);
    LocalResult {
        x,
        value,
        converged,
    }
}

/// Two points whose midpoint violates convexity of `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityViolation {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `E((v + w) / 2) - (E(v) + E(w)) / 2`
    pub gap: f64,
}

/// Scans pairs of points on a one-dimensional slice of `E` (coordinate
/// `free_index` of `base` swept over `[lo, hi]` in `steps` intervals) and
/// returns the pair with the largest midpoint-convexity gap, if positive.
pub fn midpoint_convexity_violation(
    spec: &IterationSpec,
    base: &[f64],
    free_index: usize,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<Option<ConvexityViolation>> {
    objective(spec, base)?;
    if free_index >= base.len() {
        return Err(PabiError::invalid(
            "free_index",
            format!("{free_index} out of range"),
        ));
    }
    if !(lo < hi) || steps < 2 {
        return Err(PabiError::invalid(
            "range",
            "need lo < hi and at least 2 steps",
        ));
    }
    let at = |value: f64| {
        let mut point = base.to_vec();
        point[free_index] = value;
        point
    };
    let grid: Vec<f64> = (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .collect();
    let values: Vec<f64> = grid
        .iter()
        .map(|&g| spec.objective_unchecked(&at(g)))
        .collect();
    let mut best: Option<ConvexityViolation> = None;
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let mid = spec.objective_unchecked(&at(0.5 * (grid[i] + grid[j])));
            let gap = mid - 0.5 * (values[i] + values[j]);
            if gap > 0.0 && best.as_ref().is_none_or(|b| gap > b.gap) {
                best = Some(ConvexityViolation {
                    v: at(grid[i]),
                    w: at(grid[j]),
                    gap,
                });
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modulus(c: f64, h: f64) -> QuadraticModulus {
        QuadraticModulus::new(c, h).unwrap()
    }

    fn figure_two_spec() -> IterationSpec {
        IterationSpec::new(1.0, vec![1.0, 0.1, 1.0], vec![modulus(1.0, 4.0); 3]).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn spec_validation() {
        assert!(IterationSpec::new(0.0, vec![1.0], vec![QuadraticModulus::identity()]).is_err());
        assert!(IterationSpec::new(1.0, vec![], vec![]).is_err());
        assert!(
            IterationSpec::new(1.0, vec![1.0, 0.0], vec![QuadraticModulus::identity(); 2]).is_err()
        );
        assert!(matches!(
            IterationSpec::new(1.0, vec![1.0, 1.0], vec![QuadraticModulus::identity()]),
            Err(PabiError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn objective_single_step() {
        let spec = IterationSpec::constant(1.0, 1, 1.0, QuadraticModulus::identity()).unwrap();
        assert_eq!(objective(&spec, &[]).unwrap(), 1.0);
    }

    #[test]
    fn objective_two_steps() {
        let spec = IterationSpec::constant(1.0, 2, 1.0, modulus(1.0, 4.0)).unwrap();
        let e = objective(&spec, &[5f64.sqrt()]).unwrap();
        assert!((e - 9.0).abs() < 1e-12);
    }

    #[test]
    fn objective_figure_two_point() {
        let spec = figure_two_spec();
        let e = objective(&spec, &[1.0, 3.0]).unwrap();
        let expected = (5f64.sqrt() - 1.0).powi(2) + ((5f64.sqrt() - 3.0) / 0.1).powi(2) + 13.0;
        assert!(rel(e, expected) < 1e-14);
        assert!((e - (1.528 + 58.36 + 13.0)).abs() < 1e-2);
    }

    #[test]
    fn objective_length_mismatch() {
        let spec = figure_two_spec();
        assert!(matches!(
            objective(&spec, &[1.0]),
            Err(PabiError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn closed_form_single_step() {
        let spec = IterationSpec::constant(2.0, 1, 0.5, modulus(1.0, 1.0)).unwrap();
        let sol = solve_closed_form(&spec);
        assert_eq!(sol.u, vec![2.0, 0.0]);
        assert_eq!(sol.a, vec![5f64.sqrt()]);
        assert!(rel(sol.objective, 5.0 / 0.25) < 1e-15);
    }

    #[test]
    fn closed_form_figure_two() {
        let sol = solve_closed_form(&figure_two_spec());
        let u1 = 1.01 / 2.01 * 5f64.sqrt();
        let u2 = (u1 * u1 + 4.0).sqrt() / 1.01;
        assert!(rel(sol.u[1], u1) < 1e-14);
        assert!(rel(sol.u[2], u2) < 1e-14);
        assert!((sol.u[1] - 1.12360).abs() < 1e-5);
        assert!((sol.u[2] - 2.27129).abs() < 1e-5);
    }

    #[test]
    fn closed_form_nonexpansive_uniform_shifts() {
        let d = 3.0;
        let t_max = 7;
        let spec = IterationSpec::constant(d, t_max, 0.8, QuadraticModulus::identity()).unwrap();
        let sol = solve_closed_form(&spec);
        for (t, &u) in sol.u.iter().enumerate() {
            let expected = d * (t_max - t) as f64 / t_max as f64;
            assert!((u - expected).abs() < 1e-14, "t = {t}");
        }
        for &a in &sol.a {
            assert!((a - d / t_max as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_is_feasible_and_stationary() {
        let spec = IterationSpec::new(
            2.5,
            vec![0.3, 1.2, 0.7, 2.0, 0.1, 0.9],
            vec![
                modulus(0.6, 1.0),
                modulus(1.4, 0.0),
                modulus(1.0, 2.0),
                modulus(0.8, 0.3),
                modulus(1.2, 1.5),
                modulus(0.9, 0.0),
            ],
        )
        .unwrap();
        let sol = solve_closed_form(&spec);
        let report = feasibility_check(&spec, &sol.u).unwrap();
        assert!(report.feasible, "{:?}", report.violations);
        assert!(sol.a.iter().all(|&a| a >= 0.0));
        for r in stationarity_residuals(&spec, &sol.u).unwrap() {
            assert!(r.abs() < 1e-10, "residual {r}");
        }
        let recomputed = objective(&spec, sol.interior()).unwrap();
        assert!(rel(recomputed, sol.objective) < 1e-12);
    }

    #[test]
    fn closed_form_survives_long_contractive_horizon() {
        let spec = IterationSpec::constant(1.0, 5000, 1.0, modulus(0.5, 0.1)).unwrap();
        let sol = solve_closed_form(&spec);
        assert!(sol.objective.is_finite());
        assert!(sol.u.iter().all(|u| u.is_finite()));
        assert!(feasibility_check(&spec, &sol.u).unwrap().feasible);
    }

    #[test]
    fn feasibility_violations() {
        let spec = IterationSpec::constant(1.0, 2, 1.0, QuadraticModulus::identity()).unwrap();
        let report = feasibility_check(&spec, &[1.0, 2.0, 0.0]).unwrap();
        assert!(!report.feasible);
        assert!(
            report
                .violations
                .iter()
                .any(|v| v == "φ_0(u_0) = 1 < u_1 = 2"),
            "{:?}",
            report.violations
        );

        let report = feasibility_check(&spec, &[1.0, 0.5, 0.1]).unwrap();
        assert!(!report.feasible);
        assert!(report.violations.iter().any(|v| v.starts_with("u_T ≠ 0")));

        assert!(feasibility_check(&spec, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn oracle_single_step_is_closed_form() {
        let spec = IterationSpec::constant(1.5, 1, 0.7, modulus(0.9, 0.4)).unwrap();
        let oracle = numeric_oracle(&spec, OracleOptions::default()).unwrap();
        assert_eq!(oracle, solve_closed_form(&spec));
    }

    #[test]
    fn oracle_figure_two() {
        let spec = figure_two_spec();
        let oracle = numeric_oracle(&spec, OracleOptions::default()).unwrap();
        let closed = solve_closed_form(&spec);
        assert!(rel(oracle.objective, closed.objective) < 1e-8);
    }

    #[test]
    fn oracle_rejects_large_horizon() {
        let spec = IterationSpec::constant(1.0, 13, 1.0, QuadraticModulus::identity()).unwrap();
        assert!(matches!(
            numeric_oracle(&spec, OracleOptions::default()),
            Err(PabiError::Precondition {
                code: "oracle_horizon",
                ..
            })
        ));
    }

    #[test]
    fn oracle_is_deterministic() {
        let spec = IterationSpec::new(
            1.0,
            vec![0.4, 1.1, 0.2, 1.7],
            vec![
                modulus(1.3, 0.5),
                modulus(0.7, 1.9),
                modulus(1.1, 0.0),
                modulus(0.5, 1.2),
            ],
        )
        .unwrap();
        let a = numeric_oracle(&spec, OracleOptions::default()).unwrap();
        let b = numeric_oracle(&spec, OracleOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn figure_two_slice_is_not_convex() {
        let spec = figure_two_spec();
        let witness = midpoint_convexity_violation(&spec, &[0.0, 3.0], 0, 0.0, 3.0, 60)
            .unwrap()
            .expect("violation expected");
        assert!(witness.gap > 0.01);
        let ev = objective(&spec, &witness.v).unwrap();
        let ew = objective(&spec, &witness.w).unwrap();
        let mid: Vec<f64> = witness
            .v
            .iter()
            .zip(&witness.w)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let em = objective(&spec, &mid).unwrap();
        assert!((em - 0.5 * (ev + ew) - witness.gap).abs() < 1e-9);
    }

    #[test]
    fn nonexpansive_slice_is_convex() {
        // h = 0, c = 1: every term is a convex quadratic
        let spec = IterationSpec::constant(1.0, 3, 1.0, QuadraticModulus::identity()).unwrap();
        let witness = midpoint_convexity_violation(&spec, &[0.0, 0.5], 0, 0.0, 3.0, 40).unwrap();
        assert!(witness.is_none_or(|w| w.gap < 1e-9));
    }
}
