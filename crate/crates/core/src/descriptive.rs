//! Descriptive estimators shared across the crate.
//!
//! Estimators are pinned: sample SD uses the `n - 1` denominator, quantiles
//! interpolate linearly between order statistics at index `q * (n - 1)`, and
//! skewness is the adjusted Fisher–Pearson coefficient.

use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn sample_sd(values: &[f64]) -> Result<f64> {
    match values.len() {
        0 => Err(Error::EmptySample),
        1 => Err(Error::SdUndefined),
        n => {
            let m = mean(values)?;
            let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
            Ok((ss / (n - 1) as f64).sqrt())
        }
    }
}

/// Adjusted Fisher–Pearson skewness `g1 * sqrt(n (n - 1)) / (n - 2)`.
///
/// `None` for fewer than three values or zero spread.
pub fn skewness(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let m = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= nf;
    m3 /= nf;
    if m2 <= 0.0 {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    Some(g1 * (nf * (nf - 1.0)).sqrt() / (nf - 2.0))
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySample);
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    quantile_sorted(&sorted(values), q)
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile(values, 0.5)
}

pub(crate) fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_median_is_midpoint() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
    }

    #[test]
    fn quantile_interpolates() {
        let v: Vec<f64> = (1..=10).map(|i| i as f64 * 10.0).collect();
        assert!((quantile(&v, 0.9).unwrap() - 91.0).abs() < 1e-12);
        assert_eq!(quantile(&v, 0.0).unwrap(), 10.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 100.0);
    }

    #[test]
    fn skewness_sign() {
        assert!(skewness(&[1.0, 1.0, 1.0, 10.0]).unwrap() > 0.0);
        assert!(skewness(&[1.0, 10.0, 10.0, 10.0]).unwrap() < 0.0);
        assert_eq!(skewness(&[1.0, 2.0]), None);
        assert_eq!(skewness(&[2.0, 2.0, 2.0]), None);
    }

    #[test]
    fn sd_errors() {
        assert!(matches!(sample_sd(&[]), Err(Error::EmptySample)));
        assert!(matches!(sample_sd(&[1.0]), Err(Error::SdUndefined)));
    }
}
