//! Least-squares fits for scaling exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ slope · x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("a fit needs at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("fit input contains non-finite values".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Log-log slope of `|y|` against `x`.
///
/// With `signed` the ordinates may be all negative or all positive; without
/// it they must be positive.
pub fn fit_slope(xs: &[f64], ys: &[f64], signed: bool) -> Result<SlopeFit> {
    if xs.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if let Some(x) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::InvalidParameter(format!("abscissa {x} is not positive")));
    }
    if signed {
        let pos = ys.iter().all(|&y| y > 0.0);
        let neg = ys.iter().all(|&y| y < 0.0);
        if !(pos || neg) {
            return Err(Error::InvalidParameter("ordinates change sign".into()));
        }
    } else if let Some(y) = ys.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::InvalidParameter(format!("ordinate {y} is not positive")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    linear_fit(&lx, &ly)
}
