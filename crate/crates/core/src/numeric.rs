//! Small floating-point helpers shared by the bound modules.

/// Relative distance under which a quotient is treated as the integer it
/// rounds to before taking a ceiling. `1.0 / (1.0 / 27.0)` is not always
/// exactly `27.0`, and the horizons are meant to follow the exact ceilings.
pub const CEIL_SNAP: f64 = 1e-12;

/// Ceiling of a nonnegative real, snapping values within [`CEIL_SNAP`]
/// (relative) of an integer onto that integer first.
pub fn ceil_snapped(x: f64) -> u64 {
    debug_assert!(x >= 0.0, "ceil_snapped on negative input {x}");
    let nearest = x.round();
    if (x - nearest).abs() <= CEIL_SNAP * nearest.abs().max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// `lhs >= rhs` up to a relative slack of [`CEIL_SNAP`].
pub fn ge_snapped(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - CEIL_SNAP * rhs.abs().max(lhs.abs())
}

/// T-th harmonic number, summed from the small terms up.
pub fn harmonic(t: u64) -> f64 {
    (1..=t).rev().map(|k| 1.0 / k as f64).sum()
}

/// `(1 - c^k)` for `0 < c`, accurate when `c` is close to one.
pub fn one_minus_pow(c: f64, k: f64) -> f64 {
    -(k * c.ln()).exp_m1()
}

/// `count` points from `start` to `end`, both included, evenly spaced in
/// log scale.
pub fn geometric_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let ratio = (end / start).ln();
            let last = (count - 1) as f64;
            (0..count)
                .map(|k| {
                    if k + 1 == count {
                        end
                    } else {
                        start * (ratio * k as f64 / last).exp()
                    }
                })
                .collect()
        }
    }
}

/// `count` evenly spaced points from `start` to `end`, both included.
pub fn linear_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (count - 1) as f64;
            (0..count)
                .map(|k| {
                    if k + 1 == count {
                        end
                    } else {
                        start + step * k as f64
                    }
                })
                .collect()
        }
    }
}

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros
/// stripped, exponent form below `1e-4` or from `1e17` on. Round-trips
/// every finite `f64`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent in {:e} output");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if !(-4..17).contains(&exponent) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (16 - exponent).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
