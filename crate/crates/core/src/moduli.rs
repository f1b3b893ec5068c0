//! Moduli of continuity of gradient maps `x -> x - eta * grad f(x)`.
//!
//! Every function class handled here admits a modulus of the form
//! `phi(delta) = sqrt(c * delta^2 + h)`. The pair `(c, h)` is all the shift
//! recursion and the divergence bounds need to know about the potential.

use serde::{Deserialize, Serialize};

use crate::error::{
    require_nonnegative, require_positive, require_unit_interval, PabiError, Result,
};

/// `phi(delta) = sqrt(c * delta^2 + h)` with `c > 0`, `h >= 0`.
///
/// `h > 0` makes the modulus discontinuous at the origin (a map can only
/// have `phi(0) = 0`); the shift recursion always uses the formula value,
/// so [`QuadraticModulus::evaluate`] returns `sqrt(h)` at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticModulus {
    c: f64,
    h: f64,
}

impl QuadraticModulus {
    pub fn new(c: f64, h: f64) -> Result<Self> {
        require_positive("c", c)?;
        require_nonnegative("h", h)?;
        Ok(Self { c, h })
    }

    /// Modulus of a nonexpansive map, `phi(delta) = delta`.
    pub fn identity() -> Self {
        Self { c: 1.0, h: 0.0 }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn evaluate(&self, delta: f64) -> Result<f64> {
        require_nonnegative("delta", delta)?;
        Ok(self.apply(delta))
    }

    /// Formula value without the domain check. The shift objective is
    /// defined on all of `R^{T-1}`, so negative arguments are allowed here.
    #[inline]
    pub fn apply(&self, delta: f64) -> f64 {
        (self.c * delta * delta + self.h).sqrt()
    }

    /// `d phi / d delta = c * delta / phi(delta)`; zero when `phi` vanishes.
    #[inline]
    pub fn derivative(&self, delta: f64) -> f64 {
        let value = self.apply(delta);
        if value == 0.0 {
            0.0
        } else {
            self.c * delta / value
        }
    }
}

/// Regularity assumption on the potential (or loss) `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FunctionClass {
    ConvexLipschitz {
        lipschitz: f64,
    },
    /// Convex with `p`-Hölder gradient of constant `smoothness` (`M`).
    ConvexWeaklySmooth {
        p: f64,
        smoothness: f64,
    },
    SmoothConvex {
        beta: f64,
    },
    /// `<grad f(x) - grad f(y), x - y> >= -lambda + kappa |x - y|^2`, and
    /// `beta`-smooth.
    StronglyDissipative {
        lambda: f64,
        kappa: f64,
        beta: f64,
    },
}

impl FunctionClass {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionClass::ConvexLipschitz { lipschitz } => {
                require_positive("lipschitz", lipschitz)?;
            }
            FunctionClass::ConvexWeaklySmooth { p, smoothness } => {
                require_unit_interval("p", p)?;
                require_positive("smoothness", smoothness)?;
            }
            FunctionClass::SmoothConvex { beta } => {
                require_positive("beta", beta)?;
            }
            FunctionClass::StronglyDissipative {
                lambda,
                kappa,
                beta,
            } => {
                require_positive("lambda", lambda)?;
                require_positive("kappa", kappa)?;
                require_positive("beta", beta)?;
            }
        }
        Ok(())
    }
}

/// Offset `h` of the weakly smooth modulus,
/// `(2 * sqrt((1-p)/(1+p)) * (eta * M / 2)^(1/(1-p)))^2`, for `p < 1`.
///
/// `eta^(1/(1-p)) * (M/2)^(1/(1-p))` is evaluated as one power so that the
/// `p -> 1` limit underflows to zero instead of producing `0 * inf`.
pub(crate) fn weakly_smooth_offset(eta: f64, p: f64, smoothness: f64) -> f64 {
    debug_assert!(p < 1.0);
    let exponent = 1.0 / (1.0 - p);
    let root = 2.0 * ((1.0 - p) / (1.0 + p)).sqrt() * (eta * (smoothness / 2.0)).powf(exponent);
    root * root
}

/// Derives `(c, h)` for the gradient map of a function class at stepsize
/// `eta`.
pub fn modulus_from_class(class: FunctionClass, eta: f64) -> Result<QuadraticModulus> {
    require_positive("eta", eta)?;
    class.validate()?;
    match class {
        FunctionClass::ConvexLipschitz { lipschitz } => {
            let root = 2.0 * (eta * lipschitz);
            QuadraticModulus::new(1.0, root * root)
        }
        FunctionClass::ConvexWeaklySmooth { p, smoothness } => {
            if p == 1.0 {
                // smooth limit: nonexpansive only for eta <= 2/M
                if eta > 2.0 / smoothness {
                    return Err(PabiError::precondition(
                        "stepsize_nonexpansive",
                        format!(
                            "p = 1 requires eta <= 2/M = {}, got {eta}",
                            2.0 / smoothness
                        ),
                        Some(2.0 / smoothness),
                    ));
                }
                Ok(QuadraticModulus::identity())
            } else {
                QuadraticModulus::new(1.0, weakly_smooth_offset(eta, p, smoothness))
            }
        }
        FunctionClass::SmoothConvex { beta } => {
            if eta > 2.0 / beta {
                return Err(PabiError::precondition(
                    "stepsize_nonexpansive",
                    format!(
                        "smooth convex class requires eta <= 2/beta = {}, got {eta}",
                        2.0 / beta
                    ),
                    Some(2.0 / beta),
                ));
            }
            Ok(QuadraticModulus::identity())
        }
        FunctionClass::StronglyDissipative {
            lambda,
            kappa,
            beta,
        } => {
            let c = 1.0 - 2.0 * eta * kappa + eta * eta * beta * beta;
            if c <= 0.0 {
                return Err(PabiError::invalid(
                    "c",
                    format!("1 - 2*eta*kappa + eta^2*beta^2 = {c} must be > 0"),
                ));
            }
            QuadraticModulus::new(c, 2.0 * eta * lambda)
        }
    }
}
