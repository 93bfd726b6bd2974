use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_pairs(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min {
        return Err(Error::InvalidArgument(format!(
            "need at least {min} paired values, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    Ok(())
}

fn centered_sums(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    (mx, my, sxx, syy, sxy)
}

/// Pearson product-moment correlation; `None` when either variable is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    check_pairs(x, y, 3)?;
    let (_, _, sxx, syy, sxy) = centered_sums(x, y);
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    /// Undefined when `y` is constant.
    pub r_squared: Option<f64>,
    pub n: usize,
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<Regression> {
    check_pairs(x, y, 2)?;
    let (mx, my, sxx, syy, sxy) = centered_sums(x, y);
    if sxx == 0.0 {
        return Err(Error::ConstantPredictor);
    }
    let slope = sxy / sxx;
    Ok(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared: (syy > 0.0).then(|| (sxy * sxy / (sxx * syy)).min(1.0)),
        n: x.len(),
    })
}
