//! Descriptive statistics for the reporting tables.

use crate::error::{Result, StarError};

/// Six summary statistics plus bookkeeping of non-finite inputs.
///
/// Moments are computed over the finite samples only; `minimum`/`maximum`
/// still report infinities. Degenerate higher moments (constant data, or
/// fewer than 3 finite samples) come back as NaN sentinels rather than
/// errors so constant series can appear in tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub mean: f64,
    pub stdev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub minimum: f64,
    pub maximum: f64,
    /// Count of non-finite samples excluded from the moments.
    pub excluded: usize,
}

/// Sample mean, stdev (1/(n-1)), skewness `m3 / m2^{3/2}` and EXCESS kurtosis
/// `m4 / m2^2 - 3` with 1/n central moments.
pub fn descriptive_stats(samples: &[f64]) -> Result<DescriptiveStats> {
    let finite: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Err(StarError::TooFewSamples {
            need: 2,
            got: finite.len(),
        });
    }
    let excluded = samples.len() - finite.len();
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let m2 = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = finite.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = finite.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var_unbiased = finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stdev = var_unbiased.sqrt();

    let (skewness, kurtosis) = if m2 <= 0.0 || finite.len() < 3 {
        (f64::NAN, f64::NAN)
    } else {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    };

    let minimum = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let maximum = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(DescriptiveStats {
        mean,
        stdev,
        skewness,
        kurtosis,
        minimum,
        maximum,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.stdev, 1.0);
        assert!(s.skewness.abs() < 1e-12);
        assert_eq!(s.minimum, 1.0);
        assert_eq!(s.maximum, 3.0);
    }

    #[test]
    fn symmetric_three_point_kurtosis() {
        let s = descriptive_stats(&[-1.0, 0.0, 1.0]).unwrap();
        assert!((s.kurtosis - (-1.5)).abs() < 1e-12);
    }

    #[test]
    fn constant_series_gives_nan_sentinels() {
        let s = descriptive_stats(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(s.stdev, 0.0);
        assert!(s.skewness.is_nan());
        assert!(s.kurtosis.is_nan());
    }

    #[test]
    fn infinities_excluded_from_moments_but_reported() {
        let s = descriptive_stats(&[1.0, f64::INFINITY, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.excluded, 1);
        assert_eq!(s.maximum, f64::INFINITY);
        assert_eq!(s.minimum, 1.0);
    }

    #[test]
    fn too_few_finite_samples() {
        assert!(descriptive_stats(&[1.0]).is_err());
        assert!(descriptive_stats(&[1.0, f64::INFINITY]).is_err());
    }
}
