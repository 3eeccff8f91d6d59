//! Small descriptive-statistics helpers shared by the estimation and
//! simulation code.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("mean of an empty sample"));
    }
    Ok(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn sample_std(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: xs.len(),
        });
    }
    let mu = mean(xs)?;
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    Ok((ss / (xs.len() - 1) as f64).sqrt())
}

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics (`h = (n - 1) p`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptyInput("quantile of an empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("quantile level {p} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Sorts `xs` in place and returns the two requested quantiles.
pub fn quantile_pair(xs: &mut [f64], lo: f64, hi: f64) -> Result<(f64, f64)> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::domain("quantile input contains NaN"));
    }
    xs.sort_by(f64::total_cmp);
    Ok((quantile_sorted(xs, lo)?, quantile_sorted(xs, hi)?))
}

pub fn median(xs: &mut [f64]) -> Result<f64> {
    Ok(quantile_pair(xs, 0.5, 0.5)?.0)
}
