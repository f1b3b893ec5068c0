use pabi_core::bounds::{
    renyi_bound_dissipative, renyi_bound_general, renyi_bound_sqrt_shift, DissipativeForm,
    RenyiBoundResult, SqrtShiftForm,
};
use pabi_core::mixing::{
    mixing_time_dissipative, mixing_time_dissipative_composed, mixing_time_weakly_smooth,
    theta_threshold, MixingResult,
};
use pabi_core::moduli::QuadraticModulus;
use pabi_core::numeric::{format_g17, ge_snapped, geometric_grid, linear_grid};
use pabi_core::privacy::{
    epsilon_nsgd, figure_eta_grid, privacy_curve_sweep, sweep_to_csv, CurveParams, PrivacySpec,
};
use pabi_core::shifts::{
    numeric_oracle, solve_closed_form, IterationSpec, OracleOptions, ShiftSolution,
};
use pabi_core::simulate::{
    run_chains, validate_mixing_bound, ChainConfig, Domain, Init, Potential,
};
use pabi_core::PabiError;
use serde_json::json;

use crate::args::*;
use crate::output::{record_csv, to_json};
use crate::CliError;

/// Longest horizon for which per-step parameter lists are materialized.
const MAX_STEPS: u64 = 10_000_000;

pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Bound(a) => bound(a),
        Command::Shifts(a) => shifts(a),
        Command::Mixing(MixingCommand::Theta(a)) => theta(a),
        Command::Mixing(MixingCommand::WeaklySmooth(a)) => {
            let r = mixing_time_weakly_smooth(a.diameter, a.eta, a.p, a.smoothness, a.eps)?;
            Ok(mixing_output(&r, a.out.format))
        }
        Command::Mixing(MixingCommand::Dissipative(a)) => {
            let r = if a.composed {
                mixing_time_dissipative_composed(
                    a.diameter, a.eta, a.lambda, a.kappa, a.beta, a.eps,
                )?
            } else {
                mixing_time_dissipative(a.diameter, a.eta, a.lambda, a.kappa, a.beta, a.eps)?
            };
            Ok(mixing_output(&r, a.out.format))
        }
        Command::Privacy(PrivacyCommand::Epsilon(a)) => epsilon(a),
        Command::Privacy(PrivacyCommand::Sweep(a)) | Command::Sweep(a) => sweep(a),
        Command::Simulate(SimulateCommand::Run(a)) => simulate_run(a),
        Command::Simulate(SimulateCommand::ValidateMixing(a)) => validate(a),
    }
}

fn scalar(value: f64) -> String {
    format!("{}\n", format_g17(value))
}

fn per_step(name: &'static str, values: &[f64], horizon: usize) -> Result<Vec<f64>, CliError> {
    match values.len() {
        1 => Ok(vec![values[0]; horizon]),
        n if n == horizon => Ok(values.to_vec()),
        n => Err(PabiError::LengthMismatch {
            name,
            expected: horizon,
            actual: n,
        }
        .into()),
    }
}

fn iteration_spec(
    diameter: f64,
    horizon: u64,
    sigma: &[f64],
    c: &[f64],
    h: &[f64],
) -> Result<IterationSpec, CliError> {
    if horizon > MAX_STEPS {
        return Err(CliError::usage(format!(
            "T = {horizon} exceeds {MAX_STEPS} steps for per-step parameters; use --form exact or --form log"
        )));
    }
    let t = horizon as usize;
    let sigmas = per_step("sigma", sigma, t)?;
    let cs = per_step("c", c, t)?;
    let hs = per_step("h", h, t)?;
    let moduli = cs
        .iter()
        .zip(&hs)
        .map(|(&c, &h)| QuadraticModulus::new(c, h))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IterationSpec::new(diameter, sigmas, moduli)?)
}

fn constant(name: &str, values: &[f64]) -> Result<f64, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::usage(format!(
            "--{name} must be a single value for the exact and log forms"
        ))),
    }
}

fn bound(a: &BoundArgs) -> Result<String, CliError> {
    let result: RenyiBoundResult = match a.form {
        BoundForm::General => {
            let spec = iteration_spec(a.diameter, a.horizon, &a.sigma, &a.c, &a.h)?;
            renyi_bound_general(a.alpha, &spec)?
        }
        BoundForm::Exact | BoundForm::Log => {
            let (sigma, c, h) = (
                constant("sigma", &a.sigma)?,
                constant("c", &a.c)?,
                constant("h", &a.h)?,
            );
            let exact = a.form == BoundForm::Exact;
            if c == 1.0 {
                let form = if exact {
                    SqrtShiftForm::ExactHarmonic
                } else {
                    SqrtShiftForm::LogUpper
                };
                renyi_bound_sqrt_shift(a.alpha, a.diameter, h, sigma, a.horizon, form)?
            } else {
                let form = if exact {
                    DissipativeForm::ExactSum
                } else {
                    DissipativeForm::LogUpper
                };
                renyi_bound_dissipative(a.alpha, a.diameter, c, h, sigma, a.horizon, form)?
            }
        }
    };
    Ok(match a.out.format {
        None => scalar(result.value),
        Some(Format::Json) => to_json(&result) + "\n",
        Some(Format::Csv) => record_csv(&json!({
            "alpha": result.alpha,
            "value": result.value,
            "diameter_term": result.breakdown.diameter,
            "offset_term": result.breakdown.offset,
        })),
    })
}

fn shifts(a: &ShiftsArgs) -> Result<String, CliError> {
    let spec = iteration_spec(a.diameter, a.horizon, &a.sigma, &a.c, &a.h)?;
    let solution: ShiftSolution = match a.method {
        ShiftMethod::Closed => solve_closed_form(&spec),
        ShiftMethod::Oracle => numeric_oracle(
            &spec,
            OracleOptions {
                restarts: a.restarts.max(1) as usize,
                seed: a.seed,
                ..OracleOptions::default()
            },
        )?,
    };
    Ok(match a.out.format {
        None | Some(Format::Json) => to_json(&solution) + "\n",
        Some(Format::Csv) => {
            let mut out = String::from("t,u,shift\n");
            for (t, u) in solution.u.iter().enumerate() {
                let shift = if t == 0 {
                    String::new()
                } else {
                    format_g17(solution.a[t - 1])
                };
                out.push_str(&format!("{t},{},{shift}\n", format_g17(*u)));
            }
            out
        }
    })
}

fn theta(a: &ThetaArgs) -> Result<String, CliError> {
    let value = theta_threshold(a.p, a.smoothness, a.diameter)?;
    Ok(match a.out.format {
        None => scalar(value),
        Some(Format::Json) => to_json(&json!({ "theta": value })) + "\n",
        Some(Format::Csv) => record_csv(&json!({ "theta": value })),
    })
}

fn mixing_output(r: &MixingResult, format: Option<Format>) -> String {
    match format {
        None | Some(Format::Json) => to_json(r) + "\n",
        Some(Format::Csv) => record_csv(r),
    }
}

fn epsilon(a: &EpsilonArgs) -> Result<String, CliError> {
    let spec = PrivacySpec {
        n: a.n,
        b: a.b,
        lipschitz: a.lipschitz,
        smoothness: a.smoothness,
        p: a.p,
        eta: a.eta,
        sigma: a.sigma,
        alpha: a.alpha,
        t: a.horizon,
        diameter: a.diameter,
    };
    let r = epsilon_nsgd(&spec)?;
    Ok(match a.out.format {
        None | Some(Format::Json) => to_json(&r) + "\n",
        Some(Format::Csv) => record_csv(&r),
    })
}

/// Parses `geometric:start,end,count`, `linear:start,end,count`,
/// `list:v1,v2,...` or `figure`.
pub fn eta_grid(text: &str, n: u64) -> Result<Vec<f64>, CliError> {
    if text == "figure" {
        return Ok(figure_eta_grid(n));
    }
    let bad = || CliError::usage(format!("unrecognized --eta-grid `{text}`"));
    let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
    let values = rest
        .split(',')
        .map(parse_f64)
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::usage)?;
    match kind {
        "list" => Ok(values),
        "geometric" | "linear" => {
            let [start, end, count] = values[..] else {
                return Err(bad());
            };
            let count = parse_count(&count.to_string()).map_err(CliError::usage)?;
            if count < 2 || !(start < end) {
                return Err(CliError::usage(format!(
                    "--eta-grid `{text}` needs start < end and at least 2 points"
                )));
            }
            if kind == "geometric" {
                if start <= 0.0 {
                    return Err(CliError::usage("a geometric grid needs a positive start"));
                }
                Ok(geometric_grid(start, end, count as usize))
            } else {
                Ok(linear_grid(start, end, count as usize))
            }
        }
        _ => Err(bad()),
    }
}

fn sweep(a: &SweepArgs) -> Result<String, CliError> {
    let etas = eta_grid(&a.eta_grid, a.n)?;
    let params = CurveParams {
        n: a.n,
        lipschitz: a.lipschitz,
        smoothness: a.smoothness,
        diameter: a.diameter,
    };
    let rows = privacy_curve_sweep(params, &a.p, &etas)?;
    Ok(match a.out.format {
        None | Some(Format::Csv) => sweep_to_csv(&rows),
        Some(Format::Json) => to_json(&rows) + "\n",
    })
}

fn potential(a: &PotentialArgs) -> Result<Potential, CliError> {
    fn need(value: Option<f64>, flag: &str, kind: &str) -> Result<f64, CliError> {
        value.ok_or_else(|| CliError::usage(format!("--potential {kind} needs --{flag}")))
    }
    let used: &[&str] = match a.potential {
        PotentialKind::Zero => &[],
        PotentialKind::Abs => &["L"],
        PotentialKind::Power => &["p", "M"],
        PotentialKind::Quadratic => &["beta"],
        PotentialKind::Dissipative => &["lambda", "kappa", "frequency"],
    };
    let given = [
        ("L", a.lipschitz),
        ("p", a.p),
        ("M", a.smoothness),
        ("beta", a.beta),
        ("lambda", a.lambda),
        ("kappa", a.kappa),
        ("frequency", a.frequency),
    ];
    if let Some((flag, _)) = given
        .iter()
        .find(|(flag, v)| v.is_some() && !used.contains(flag))
    {
        return Err(CliError::usage(format!(
            "--{flag} does not apply to this potential"
        )));
    }
    let potential = match a.potential {
        PotentialKind::Zero => Potential::Zero,
        PotentialKind::Abs => Potential::AbsLipschitz {
            lipschitz: need(a.lipschitz, "L", "abs")?,
        },
        PotentialKind::Power => Potential::PowerWeaklySmooth {
            p: need(a.p, "p", "power")?,
            smoothness: need(a.smoothness, "M", "power")?,
        },
        PotentialKind::Quadratic => Potential::QuadraticSmooth {
            beta: need(a.beta, "beta", "quadratic")?,
        },
        PotentialKind::Dissipative => Potential::DissipativeQuadratic {
            lambda: need(a.lambda, "lambda", "dissipative")?,
            kappa: need(a.kappa, "kappa", "dissipative")?,
            frequency: need(a.frequency, "frequency", "dissipative")?,
        },
    };
    potential.validate()?;
    Ok(potential)
}

fn simulate_run(a: &RunArgs) -> Result<String, CliError> {
    let potential = potential(&a.potential)?;
    let dim = a.dim as usize;
    let domain = match a.domain {
        DomainKind::Box => Domain::Box {
            diameter: a.diameter,
        },
        DomainKind::Ball => Domain::Ball {
            diameter: a.diameter,
        },
    };
    let mut config =
        ChainConfig::langevin(dim, domain, a.eta, a.horizon, a.chains as usize, a.seed);
    if let Some(noise) = a.noise {
        config.sigma = noise;
    }
    config.validate()?;
    let init = match a.init.as_str() {
        "low" => Init::Point(domain.extreme_point(dim, -1.0)),
        "high" => Init::Point(domain.extreme_point(dim, 1.0)),
        "uniform" => Init::Uniform,
        coords => Init::Point(
            coords
                .split(',')
                .map(parse_f64)
                .collect::<Result<Vec<_>, _>>()
                .map_err(CliError::usage)?,
        ),
    };
    let samples = run_chains(&potential, &config, &init)?;
    Ok(match a.out.format {
        None | Some(Format::Csv) => samples.to_csv(),
        Some(Format::Json) => to_json(&samples) + "\n",
    })
}

fn validate(a: &ValidateArgs) -> Result<String, CliError> {
    let potential = potential(&a.potential)?;
    let report = validate_mixing_bound(
        &potential,
        a.diameter,
        a.eta,
        a.chains as usize,
        a.seed,
        a.bins as usize,
    )?;
    if let Some(reason) = &report.precondition_violated {
        let theta = report.config.theta;
        let (code, required) = if !ge_snapped(1.0 / a.eta, theta) {
            ("stepsize_threshold", theta)
        } else {
            ("stepsize_diameter", a.diameter * a.diameter)
        };
        return Err(CliError::Precondition {
            code: code.into(),
            message: reason.clone(),
            required_value: Some(required),
        });
    }
    Ok(match a.out.format {
        None | Some(Format::Json) => to_json(&report) + "\n",
        Some(Format::Csv) => record_csv(&report),
    })
}
