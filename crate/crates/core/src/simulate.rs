//! Monte-Carlo simulation of projected Langevin chains and noisy SGD on
//! small test potentials, and histogram estimates of total variation.
//!
//! Every chain owns a ChaCha8 generator keyed by the run seed and
//! positioned on stream `chain_index`, so results do not depend on how
//! chains are scheduled across threads. Gaussian increments use the
//! ziggurat sampler of `rand_distr::StandardNormal`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{
    require_nonnegative, require_positive, require_unit_interval, PabiError, Result,
};
use crate::mixing::theta_threshold;
use crate::moduli::FunctionClass;
use crate::numeric::{ceil_snapped, format_g17, ge_snapped};

/// Built-in potentials, applied componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "potential", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `f(x) = L |x|_1`, subgradient `L sign(x)` with `sign(0) = 0`.
    AbsLipschitz {
        lipschitz: f64,
    },
    /// `f(x) = M/(1+p) sum |x_i|^(1+p)`, gradient `M sign(x_i) |x_i|^p`.
    PowerWeaklySmooth {
        p: f64,
        smoothness: f64,
    },
    /// `f(x) = beta/2 |x|^2`.
    QuadraticSmooth {
        beta: f64,
    },
    /// Gradient `(5 kappa/4) x_i + A sin(omega x_i)` with
    /// `A = sqrt(lambda kappa / d) / 2` in dimension `d`.
    DissipativeQuadratic {
        lambda: f64,
        kappa: f64,
        frequency: f64,
    },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Zero => {}
            Potential::AbsLipschitz { lipschitz } => {
                require_positive("lipschitz", lipschitz)?;
            }
            Potential::PowerWeaklySmooth { p, smoothness } => {
                require_unit_interval("p", p)?;
                require_positive("smoothness", smoothness)?;
            }
            Potential::QuadraticSmooth { beta } => {
                require_positive("beta", beta)?;
            }
            Potential::DissipativeQuadratic {
                lambda,
                kappa,
                frequency,
            } => {
                require_positive("lambda", lambda)?;
                require_positive("kappa", kappa)?;
                require_nonnegative("frequency", frequency)?;
            }
        }
        Ok(())
    }

    /// Writes a (sub)gradient at `x` into `out`. Deterministic in `x`.
    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let dim = x.len() as f64;
        for (g, &xi) in out.iter_mut().zip(x) {
            *g = match *self {
                Potential::Zero => 0.0,
                Potential::AbsLipschitz { lipschitz } => lipschitz * sign(xi),
                Potential::PowerWeaklySmooth { p, smoothness } => {
                    smoothness * sign(xi) * xi.abs().powf(p)
                }
                Potential::QuadraticSmooth { beta } => beta * xi,
                Potential::DissipativeQuadratic {
                    lambda,
                    kappa,
                    frequency,
                } => {
                    1.25 * kappa * xi
                        + dissipative_amplitude(lambda, kappa, dim) * (frequency * xi).sin()
                }
            };
        }
    }

    /// Regularity class the potential belongs to in dimension `dim`.
    ///
    /// `|sign(x)|x|^p - sign(y)|y|^p| <= 2^(1-p) |x-y|^p`, so the power
    /// potential is `(p, 2^(1-p) M)`-weakly smooth. For the dissipative
    /// potential, `(kappa/4) r^2 - 2 A sqrt(d) r + lambda >= 0` for all `r`
    /// exactly when `A <= sqrt(lambda kappa / d) / 2`, which gives
    /// `(lambda, kappa)`-dissipativity; its gradient is
    /// `(5 kappa/4 + A omega)`-Lipschitz.
    pub fn class(&self, dim: usize) -> Option<FunctionClass> {
        match *self {
            Potential::Zero => None,
            Potential::AbsLipschitz { lipschitz } => {
                Some(FunctionClass::ConvexLipschitz { lipschitz })
            }
            Potential::PowerWeaklySmooth { p, smoothness } => {
                Some(FunctionClass::ConvexWeaklySmooth {
                    p,
                    smoothness: 2f64.powf(1.0 - p) * smoothness,
                })
            }
            Potential::QuadraticSmooth { beta } => Some(FunctionClass::SmoothConvex { beta }),
            Potential::DissipativeQuadratic {
                lambda,
                kappa,
                frequency,
            } => Some(FunctionClass::StronglyDissipative {
                lambda,
                kappa,
                beta: 1.25 * kappa + dissipative_amplitude(lambda, kappa, dim as f64) * frequency,
            }),
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn dissipative_amplitude(lambda: f64, kappa: f64, dim: f64) -> f64 {
    (lambda * kappa / dim).sqrt() / 2.0
}

/// Centered convex domain of Euclidean diameter `diameter`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    /// Cube `[-s, s]^d` with `2 s sqrt(d) = diameter`.
    Box { diameter: f64 },
    /// Ball of radius `diameter / 2`.
    Ball { diameter: f64 },
}

impl Domain {
    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Box { diameter } | Domain::Ball { diameter } => diameter,
        }
    }

    fn half_side(&self, dim: usize) -> f64 {
        self.diameter() / (2.0 * (dim as f64).sqrt())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::Box { .. } => {
                let s = self.half_side(x.len());
                x.iter().all(|v| v.abs() <= s)
            }
            Domain::Ball { diameter } => norm(x) <= diameter / 2.0,
        }
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, x: &mut [f64]) {
        match *self {
            Domain::Box { .. } => {
                let s = self.half_side(x.len());
                for v in x.iter_mut() {
                    *v = v.clamp(-s, s);
                }
            }
            Domain::Ball { diameter } => {
                let r = diameter / 2.0;
                let len = norm(x);
                if len > r {
                    let scale = r / len;
                    for v in x.iter_mut() {
                        *v *= scale;
                    }
                }
            }
        }
    }

    /// The corner `(s, ..., s)` of a box, or the point `(r, 0, ...)` of a
    /// ball, times `sign`.
    pub fn extreme_point(&self, dim: usize, sign: f64) -> Vec<f64> {
        match *self {
            Domain::Box { .. } => vec![sign * self.half_side(dim); dim],
            Domain::Ball { diameter } => {
                let mut p = vec![0.0; dim];
                p[0] = sign * diameter / 2.0;
                p
            }
        }
    }

    fn sample_uniform(&self, dim: usize, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match *self {
            Domain::Box { .. } => {
                let s = self.half_side(dim);
                for v in out.iter_mut() {
                    *v = rng.random_range(-s..=s);
                }
            }
            Domain::Ball { diameter } => {
                let r = diameter / 2.0;
                loop {
                    for v in out.iter_mut() {
                        *v = rng.random_range(-r..=r);
                    }
                    if norm(out) <= r {
                        break;
                    }
                }
            }
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub dim: usize,
    pub domain: Domain,
    pub eta: f64,
    /// Per-step noise standard deviation: `sqrt(2 eta)` for Langevin,
    /// `eta * sigma` for noisy SGD.
    pub sigma: f64,
    pub horizon: u64,
    pub n_chains: usize,
    pub seed: u64,
}

impl ChainConfig {
    /// Projected Langevin settings, noise `sqrt(2 eta)`.
    pub fn langevin(
        dim: usize,
        domain: Domain,
        eta: f64,
        horizon: u64,
        n_chains: usize,
        seed: u64,
    ) -> Self {
        Self {
            dim,
            domain,
            eta,
            sigma: (2.0 * eta).sqrt(),
            horizon,
            n_chains,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(PabiError::invalid(
                "dim",
                format!("must be 1 or 2, got {}", self.dim),
            ));
        }
        require_positive("diameter", self.domain.diameter())?;
        require_positive("eta", self.eta)?;
        require_nonnegative("sigma", self.sigma)?;
        if self.n_chains == 0 {
            return Err(PabiError::invalid("n_chains", "must be positive"));
        }
        Ok(())
    }
}

/// Starting point of every chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Point(Vec<f64>),
    /// Uniform over the domain, drawn from the chain's own stream.
    Uniform,
}

/// Final iterates, one row per chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub dim: usize,
    /// Row-major, `n_chains * dim` values.
    pub data: Vec<f64>,
}

impl SampleMatrix {
    pub fn n_rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// CSV with header `chain,dim0[,dim1]` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("chain");
        for k in 0..self.dim {
            out.push_str(&format!(",dim{k}"));
        }
        out.push('\n');
        for (i, row) in self.rows().enumerate() {
            out.push_str(&i.to_string());
            for v in row {
                out.push(',');
                out.push_str(&format_g17(*v));
            }
            out.push('\n');
        }
        out
    }
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

fn check_init(config: &ChainConfig, init: &Init) -> Result<()> {
    if let Init::Point(x0) = init {
        if x0.len() != config.dim {
            return Err(PabiError::LengthMismatch {
                name: "init",
                expected: config.dim,
                actual: x0.len(),
            });
        }
        if !config.domain.contains(x0) {
            return Err(PabiError::invalid(
                "init",
                format!("{x0:?} lies outside the domain"),
            ));
        }
    }
    Ok(())
}

fn start(config: &ChainConfig, init: &Init, rng: &mut ChaCha8Rng, x: &mut [f64]) {
    match init {
        Init::Point(x0) => x.copy_from_slice(x0),
        Init::Uniform => config.domain.sample_uniform(config.dim, rng, x),
    }
    config.domain.project(x);
}

/// Runs `n_chains` independent copies of
/// `X_{t+1} = Pi[X_t - eta grad f(X_t) + sigma xi_t]` for `horizon` steps and
/// returns the final iterates.
pub fn run_chains(
    potential: &Potential,
    config: &ChainConfig,
    init: &Init,
) -> Result<SampleMatrix> {
    potential.validate()?;
    config.validate()?;
    check_init(config, init)?;
    let dim = config.dim;
    let mut data = vec![0.0; config.n_chains * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(chain, x)| {
        let mut rng = chain_rng(config.seed, chain);
        let mut grad = vec![0.0; dim];
        start(config, init, &mut rng, x);
        for _ in 0..config.horizon {
            potential.gradient(x, &mut grad);
            for (v, g) in x.iter_mut().zip(&grad) {
                let noise: f64 = rng.sample(StandardNormal);
                *v = *v - config.eta * g + config.sigma * noise;
            }
            config.domain.project(x);
        }
    });
    Ok(SampleMatrix { dim, data })
}

/// Records of one noisy SGD chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdTrace {
    /// `X_0, ..., X_T`.
    pub path: Vec<Vec<f64>>,
    /// Indices of the records sampled at each step.
    pub batches: Vec<Vec<usize>>,
}

fn check_dataset(dataset: &[Vec<f64>], dim: usize, batch_size: f64) -> Result<f64> {
    if dataset.is_empty() {
        return Err(PabiError::invalid(
            "dataset",
            "must contain at least one record",
        ));
    }
    if let Some(bad) = dataset.iter().find(|z| z.len() != dim) {
        return Err(PabiError::LengthMismatch {
            name: "dataset record",
            expected: dim,
            actual: bad.len(),
        });
    }
    let n = dataset.len() as f64;
    if !(batch_size > 0.0 && batch_size <= n) {
        return Err(PabiError::invalid(
            "b",
            format!("expected batch size must lie in (0, n = {n}], got {batch_size}"),
        ));
    }
    Ok(batch_size / n)
}

/// One noisy SGD step with Poisson sampling. Records with inclusion
/// probability one consume no random numbers, so a full batch reproduces
/// the noise stream of [`run_chains`].
#[allow(clippy::too_many_arguments)]
fn sgd_step(
    potential: &Potential,
    dataset: &[Vec<f64>],
    config: &ChainConfig,
    batch_size: f64,
    rate: f64,
    rng: &mut ChaCha8Rng,
    x: &mut [f64],
    scratch: &mut SgdScratch,
    mut record: Option<&mut Vec<usize>>,
) {
    scratch.sum.iter_mut().for_each(|v| *v = 0.0);
    for (i, z) in dataset.iter().enumerate() {
        let included = rate >= 1.0 || rng.random::<f64>() < rate;
        if !included {
            continue;
        }
        if let Some(batch) = record.as_deref_mut() {
            batch.push(i);
        }
        for ((d, &xi), &zi) in scratch.shifted.iter_mut().zip(x.iter()).zip(z) {
            *d = xi - zi;
        }
        potential.gradient(&scratch.shifted, &mut scratch.grad);
        for (s, g) in scratch.sum.iter_mut().zip(&scratch.grad) {
            *s += g;
        }
    }
    let step = config.eta / batch_size;
    for (v, s) in x.iter_mut().zip(&scratch.sum) {
        let noise: f64 = rng.sample(StandardNormal);
        *v = *v - step * s + config.sigma * noise;
    }
    config.domain.project(x);
}

struct SgdScratch {
    shifted: Vec<f64>,
    grad: Vec<f64>,
    sum: Vec<f64>,
}

impl SgdScratch {
    fn new(dim: usize) -> Self {
        Self {
            shifted: vec![0.0; dim],
            grad: vec![0.0; dim],
            sum: vec![0.0; dim],
        }
    }
}

/// Noisy SGD on the per-record loss `f(x - z_i)`: each step includes every
/// record independently with probability `b/n` and moves by
/// `-(eta/b) sum_{i in B_t} grad f(X_t - z_i)` plus noise; empty batches
/// contribute no gradient.
pub fn run_noisy_sgd(
    potential: &Potential,
    dataset: &[Vec<f64>],
    config: &ChainConfig,
    batch_size: f64,
    init: &Init,
) -> Result<SampleMatrix> {
    potential.validate()?;
    config.validate()?;
    check_init(config, init)?;
    let rate = check_dataset(dataset, config.dim, batch_size)?;
    let dim = config.dim;
    let mut data = vec![0.0; config.n_chains * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(chain, x)| {
        let mut rng = chain_rng(config.seed, chain);
        let mut scratch = SgdScratch::new(dim);
        start(config, init, &mut rng, x);
        for _ in 0..config.horizon {
            sgd_step(
                potential,
                dataset,
                config,
                batch_size,
                rate,
                &mut rng,
                x,
                &mut scratch,
                None,
            );
        }
    });
    Ok(SampleMatrix { dim, data })
}

/// Full path and sampled batches of chain `chain` of [`run_noisy_sgd`].
pub fn noisy_sgd_trajectory(
    potential: &Potential,
    dataset: &[Vec<f64>],
    config: &ChainConfig,
    batch_size: f64,
    init: &Init,
    chain: usize,
) -> Result<SgdTrace> {
    potential.validate()?;
    config.validate()?;
    check_init(config, init)?;
    let rate = check_dataset(dataset, config.dim, batch_size)?;
    let mut rng = chain_rng(config.seed, chain);
    let mut scratch = SgdScratch::new(config.dim);
    let mut x = vec![0.0; config.dim];
    start(config, init, &mut rng, &mut x);
    let mut path = vec![x.clone()];
    let mut batches = Vec::with_capacity(config.horizon as usize);
    for _ in 0..config.horizon {
        let mut batch = Vec::new();
        sgd_step(
            potential,
            dataset,
            config,
            batch_size,
            rate,
            &mut rng,
            &mut x,
            &mut scratch,
            Some(&mut batch),
        );
        path.push(x.clone());
        batches.push(batch);
    }
    Ok(SgdTrace { path, batches })
}

/// Minimum expected count per occupied histogram cell.
pub const MIN_CELL_COUNT: f64 = 20.0;

/// Failure probability allotted to each of the two samples.
const TV_DELTA: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub estimate: f64,
    /// 95% half-width.
    pub half_width: f64,
    /// Total number of histogram cells.
    pub cells: usize,
}

/// Histogram total variation `1/2 sum |p_i - q_i|` on a common grid of
/// `bins` cells per axis spanning both samples.
///
/// The half-width combines, for each sample, the multinomial L1 deviation
/// bound `P(|p_hat - p|_1 >= e) <= 2^k exp(-n e^2 / 2)` at level 0.025,
/// so the histogram TV lies within it with probability at least 0.95.
pub fn empirical_tv(a: &SampleMatrix, b: &SampleMatrix, bins: usize) -> Result<TvEstimate> {
    if a.dim != b.dim {
        return Err(PabiError::LengthMismatch {
            name: "dim",
            expected: a.dim,
            actual: b.dim,
        });
    }
    if !(1..=2).contains(&a.dim) {
        return Err(PabiError::invalid(
            "dim",
            "histograms support 1 or 2 dimensions",
        ));
    }
    if bins == 0 {
        return Err(PabiError::invalid("bins", "must be positive"));
    }
    let (na, nb) = (a.n_rows(), b.n_rows());
    if na == 0 || nb == 0 {
        return Err(PabiError::InsufficientSamples("empty sample set".into()));
    }
    let dim = a.dim;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for row in a.rows().chain(b.rows()) {
        for k in 0..dim {
            lo[k] = lo[k].min(row[k]);
            hi[k] = hi[k].max(row[k]);
        }
    }
    let cells = bins.pow(dim as u32);
    let cell_of = |row: &[f64]| {
        let mut index = 0;
        for k in 0..dim {
            let width = hi[k] - lo[k];
            let slot = if width > 0.0 {
                (((row[k] - lo[k]) / width) * bins as f64)
                    .floor()
                    .min(bins as f64 - 1.0) as usize
            } else {
                0
            };
            index = index * bins + slot;
        }
        index
    };
    let mut count_a = vec![0u64; cells];
    let mut count_b = vec![0u64; cells];
    a.rows().for_each(|r| count_a[cell_of(r)] += 1);
    b.rows().for_each(|r| count_b[cell_of(r)] += 1);

    for (name, counts, n) in [("first", &count_a, na), ("second", &count_b, nb)] {
        let occupied = counts.iter().filter(|&&c| c > 0).count().max(1);
        let per_cell = n as f64 / occupied as f64;
        if per_cell < MIN_CELL_COUNT {
            return Err(PabiError::InsufficientSamples(format!(
                "{name} sample: {n} points over {occupied} occupied cells gives {per_cell:.1} per cell, need {MIN_CELL_COUNT}"
            )));
        }
    }

    let estimate = 0.5
        * count_a
            .iter()
            .zip(&count_b)
            .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
            .sum::<f64>();
    let l1_deviation = |n: usize| {
        (2.0 * (cells as f64 * std::f64::consts::LN_2 + (1.0 / TV_DELTA).ln()) / n as f64).sqrt()
    };
    Ok(TvEstimate {
        estimate,
        half_width: 0.5 * (l1_deviation(na) + l1_deviation(nb)),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub potential: Potential,
    pub diameter: f64,
    pub eta: f64,
    pub horizon: u64,
    pub chains: usize,
    pub seed: u64,
    pub bins: usize,
    /// Stepsize threshold the potential's class requires of `1/eta`.
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: ValidationConfig,
    /// Theoretical TV bound at the horizon.
    pub bound: f64,
    pub estimate: Option<f64>,
    pub half_width: Option<f64>,
    /// `bound + half_width - estimate`.
    pub margin: Option<f64>,
    /// `None` when a precondition failed and nothing was simulated.
    pub pass: Option<bool>,
    pub precondition_violated: Option<String>,
}

/// Checks empirically that `ceil(D^2/eta)` Langevin steps bring two
/// chains started at opposite ends of `[-D/2, D/2]` within TV distance
/// 1/2. Only convex potentials (Lipschitz, weakly smooth, smooth) have
/// this guarantee.
pub fn validate_mixing_bound(
    potential: &Potential,
    diameter: f64,
    eta: f64,
    chains: usize,
    seed: u64,
    bins: usize,
) -> Result<ValidationReport> {
    potential.validate()?;
    require_positive("diameter", diameter)?;
    require_positive("eta", eta)?;
    let (p, smoothness) = match potential.class(1) {
        Some(FunctionClass::ConvexLipschitz { lipschitz }) => (0.0, 2.0 * lipschitz),
        Some(FunctionClass::ConvexWeaklySmooth { p, smoothness }) => (p, smoothness),
        Some(FunctionClass::SmoothConvex { beta }) => (1.0, beta),
        _ => {
            return Err(PabiError::invalid(
                "potential",
                "mixing validation needs a convex Lipschitz, weakly smooth or smooth potential",
            ))
        }
    };
    let theta = theta_threshold(p, smoothness, diameter)?;
    let horizon = ceil_snapped(diameter * diameter / eta).max(1);
    let config = ValidationConfig {
        potential: *potential,
        diameter,
        eta,
        horizon,
        chains,
        seed,
        bins,
        theta,
    };
    let violated = if !ge_snapped(1.0 / eta, theta) {
        Some(format!(
            "1/eta = {} is below the threshold {theta}",
            1.0 / eta
        ))
    } else if eta > diameter * diameter {
        Some(format!("eta = {eta} exceeds D^2 = {}", diameter * diameter))
    } else {
        None
    };
    if let Some(reason) = violated {
        return Ok(ValidationReport {
            config,
            bound: 0.5,
            estimate: None,
            half_width: None,
            margin: None,
            pass: None,
            precondition_violated: Some(reason),
        });
    }

    let domain = Domain::Box { diameter };
    let chain_config = ChainConfig::langevin(1, domain, eta, horizon, chains, seed);
    let low = run_chains(
        potential,
        &chain_config,
        &Init::Point(domain.extreme_point(1, -1.0)),
    )?;
    let other = ChainConfig {
        seed: seed ^ 0x9e37_79b9_7f4a_7c15,
        ..chain_config
    };
    let high = run_chains(
        potential,
        &other,
        &Init::Point(domain.extreme_point(1, 1.0)),
    )?;
    let tv = empirical_tv(&low, &high, bins)?;
    let margin = 0.5 + tv.half_width - tv.estimate;
    Ok(ValidationReport {
        config,
        bound: 0.5,
        estimate: Some(tv.estimate),
        half_width: Some(tv.half_width),
        margin: Some(margin),
        pass: Some(margin >= 0.0),
        precondition_violated: None,
    })
}
