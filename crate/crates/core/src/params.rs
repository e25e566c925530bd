use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters `(d, c, alpha, omega)` of the focusing NLS with
/// inverse-square potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub d: u32,
    pub c: f64,
    pub alpha: f64,
    pub omega: f64,
}

/// Sharp Hardy constant `((d-2)/2)^2`.
pub fn hardy_constant(d: u32) -> f64 {
    let h = (d as f64 - 2.0) / 2.0;
    h * h
}

impl Params {
    /// Builds and validates a parameter set.
    pub fn new(d: u32, c: f64, alpha: f64, omega: f64) -> Result<Self> {
        let p = Params { d, c, alpha, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Params { d, c, alpha, omega } = *self;
        if d < 3 {
            return Err(Error::Parameter(format!("dimension d = {d} must satisfy d >= 3")));
        }
        if !(c.is_finite() && alpha.is_finite() && omega.is_finite()) {
            return Err(Error::Parameter("parameters must be finite".into()));
        }
        let lambda = hardy_constant(d);
        if c >= lambda {
            return Err(Error::Parameter(format!(
                "supercritical potential strength: c = {c} violates c < lambda(d) = {lambda}"
            )));
        }
        let lo = 4.0 / d as f64;
        let hi = 4.0 / (d as f64 - 2.0);
        if !(alpha > lo && alpha < hi) {
            return Err(Error::Parameter(format!(
                "exponent outside intercritical range: alpha = {alpha} violates {lo} < alpha < {hi}"
            )));
        }
        if omega <= 0.0 {
            return Err(Error::Parameter(format!("frequency omega = {omega} must be > 0")));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn lambda_d(&self) -> f64 {
        hardy_constant(self.d)
    }

    /// `nu^2 = lambda(d) - c`, positive for admissible `c`.
    pub fn nu_sq(&self) -> f64 {
        self.lambda_d() - self.c
    }

    /// Origin exponent `sigma = (d-2)/2 - sqrt(lambda(d) - c)`: profiles
    /// behave like `r^{-sigma}` near the origin.
    pub fn sigma(&self) -> f64 {
        (self.dim() - 2.0) / 2.0 - self.nu_sq().sqrt()
    }

    /// `d alpha / (2 (alpha + 2))`, the coefficient of the potential term in `Q`.
    pub fn q_coeff(&self) -> f64 {
        self.dim() * self.alpha / (2.0 * (self.alpha + 2.0))
    }
}
