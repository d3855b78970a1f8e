use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the coupled energy.
///
/// `b` weighs the gradient of the order parameter, `sigma` the surface
/// tension, `kappa` the bending rigidity and `lambda` the strength of the
/// composition/curvature coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub b: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub lambda: f64,
}

impl Params {
    /// Parameters for a regular run: all finite and non-negative, `b > 0`
    /// and `kappa > 0`.
    pub fn new(b: f64, sigma: f64, kappa: f64, lambda: f64) -> Result<Self> {
        let p = Params {
            b,
            sigma,
            kappa,
            lambda,
        };
        p.check_finite()?;
        if b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "b must be positive, got {b}; use Params::probe for b = 0"
            )));
        }
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa must be positive, got {kappa}; use Params::probe for kappa = 0"
            )));
        }
        Ok(p)
    }

    /// Parameters for a degenerate probe (`b = 0` or `kappa = 0` allowed).
    pub fn probe(b: f64, sigma: f64, kappa: f64, lambda: f64) -> Result<Self> {
        let p = Params {
            b,
            sigma,
            kappa,
            lambda,
        };
        p.check_finite()?;
        Ok(p)
    }

    fn check_finite(&self) -> Result<()> {
        for (name, v) in [
            ("b", self.b),
            ("sigma", self.sigma),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.b == 0.0 || self.kappa == 0.0
    }

    /// `-lambda^2 / (2 kappa)`, the universal lower bound on the energy.
    pub fn young_bound(&self) -> f64 {
        if self.lambda == 0.0 {
            0.0
        } else {
            -self.lambda * self.lambda / (2.0 * self.kappa)
        }
    }

    /// `max{b sigma, b kappa, (b sigma kappa)^{1/2}, b^{1/2} kappa}`, the
    /// quantity `lambda^2` is compared against when classifying regimes.
    pub fn regime_threshold(&self) -> f64 {
        let Params { b, sigma, kappa, .. } = *self;
        (b * sigma)
            .max(b * kappa)
            .max((b * sigma * kappa).sqrt())
            .max(b.sqrt() * kappa)
    }

    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut p = *self;
        match name {
            "b" => p.b = value,
            "sigma" => p.sigma = value,
            "kappa" => p.kappa = value,
            "lambda" => p.lambda = value,
            other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        }
        Ok(p)
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        match name {
            "b" => Ok(self.b),
            "sigma" => Ok(self.sigma),
            "kappa" => Ok(self.kappa),
            "lambda" => Ok(self.lambda),
            other => Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        }
    }
}
