//! Detection-area distribution analysis: per-spot μ ± 3σ bounds with the
//! lower bound clamped at zero, outlier counts, and histogram binning for
//! external plotting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// μ ± 3σ normal range of one spot's detection areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaStats {
    pub spot_id: u32,
    pub mean: f64,
    pub std: f64,
    /// `max(0, μ − 3σ)`.
    pub lower: f64,
    /// `μ + 3σ`.
    pub upper: f64,
    /// Samples strictly outside `[lower, upper]`.
    pub outlier_count: usize,
    pub sample_count: usize,
}

/// Population μ/σ bounds for one spot's area samples; needs at least two
/// samples.
pub fn area_outlier_bounds(spot_id: u32, samples: &[f64]) -> Result<AreaStats> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "spot {spot_id}: need at least 2 area samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let lower = (mean - 3.0 * std).max(0.0);
    let upper = mean + 3.0 * std;
    let outlier_count = samples.iter().filter(|&&s| s < lower || s > upper).count();
    Ok(AreaStats {
        spot_id,
        mean,
        std,
        lower,
        upper,
        outlier_count,
        sample_count: samples.len(),
    })
}

/// One histogram bin: `[left, right)` except the last bin, which includes its
/// right edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; all-equal samples collapse to a
/// single bin.
pub fn histogram(samples: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples to bin".into()));
    }
    if bins == 0 {
        return Err(Error::Domain("bin count must be positive".into()));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(vec![HistogramBin {
            bin_left: min,
            bin_right: max,
            count: samples.len(),
        }]);
    }
    let width = (max - min) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            bin_left: min + i as f64 * width,
            bin_right: if i + 1 == bins {
                max
            } else {
                min + (i + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for &s in samples {
        let idx = (((s - min) / width) as usize).min(bins - 1);
        out[idx].count += 1;
    }
    Ok(out)
}

/// Parse an area log CSV: `spot_id,area_px` rows, optional header.
pub fn parse_area_log(text: &str) -> Result<BTreeMap<u32, Vec<f64>>> {
    let mut by_spot: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || (line_no == 1 && line.eq_ignore_ascii_case("spot_id,area_px")) {
            continue;
        }
        let (id_text, area_text) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: line_no,
            column: 1,
            message: "expected `spot_id,area_px`".into(),
        })?;
        let spot_id: u32 = id_text.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            column: 1,
            message: format!("bad spot id `{id_text}`"),
        })?;
        let area: f64 = area_text.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            column: 2,
            message: format!("bad area `{area_text}`"),
        })?;
        if !area.is_finite() || area < 0.0 {
            return Err(Error::Range(format!(
                "area {area} on line {line_no} must be non-negative"
            )));
        }
        by_spot.entry(spot_id).or_default().push(area);
    }
    Ok(by_spot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_samples_have_point_bounds() {
        let stats = area_outlier_bounds(1, &[5674.0, 5674.0, 5674.0]).unwrap();
        assert_eq!(stats.std, 0.0);
        assert_eq!(stats.lower, 5674.0);
        assert_eq!(stats.upper, 5674.0);
        assert_eq!(stats.outlier_count, 0);
    }

    #[test]
    fn single_large_sample_is_flagged() {
        let mut samples = vec![1000.0; 100];
        samples.push(10_000.0);
        let stats = area_outlier_bounds(4, &samples).unwrap();
        assert_eq!(stats.outlier_count, 1);
        assert!(stats.upper < 10_000.0);
        assert!(stats.lower <= 1000.0);
    }

    #[test]
    fn negative_lower_bound_clamps_to_zero() {
        // small mean, large spread
        let stats = area_outlier_bounds(2, &[1.0, 1.0, 1.0, 100.0]).unwrap();
        assert_eq!(stats.lower, 0.0);
        assert!(stats.upper > stats.lower);
        assert_eq!(stats.outlier_count, 0);
    }

    #[test]
    fn too_few_samples_is_insufficient_data() {
        assert!(matches!(
            area_outlier_bounds(1, &[42.0]).unwrap_err(),
            Error::InsufficientData(_)
        ));
    }

    #[test]
    fn bounds_match_direct_computation() {
        let samples = [120.0, 130.0, 110.0, 500.0, 125.0];
        let stats = area_outlier_bounds(7, &samples).unwrap();
        // independent arithmetic
        let mean = samples.iter().sum::<f64>() / 5.0;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 5.0;
        let sd = var.sqrt();
        assert!((stats.mean - mean).abs() < 1e-12);
        assert!((stats.std - sd).abs() < 1e-12);
        assert!((stats.upper - (mean + 3.0 * sd)).abs() < 1e-12);
        assert_eq!(stats.lower, (mean - 3.0 * sd).max(0.0));
        let expected_outliers = samples
            .iter()
            .filter(|&&s| s < stats.lower || s > stats.upper)
            .count();
        assert_eq!(stats.outlier_count, expected_outliers);
    }

    #[test]
    fn histogram_covers_range_and_counts_everything() {
        let samples = [1.0, 2.0, 3.0, 4.0, 5.0, 5.0];
        let bins = histogram(&samples, 4).unwrap();
        assert_eq!(bins.len(), 4);
        assert_eq!(bins[0].bin_left, 1.0);
        assert_eq!(bins[3].bin_right, 5.0);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), samples.len());
        // max lands in the last bin
        assert_eq!(bins[3].count, 3);
    }

    #[test]
    fn degenerate_histogram_is_a_single_bin() {
        let bins = histogram(&[7.0, 7.0], 10).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!(bins[0].count, 2);
    }

    #[test]
    fn area_log_parses_and_groups() {
        let text = "spot_id,area_px\n1,100.5\n2,200\n1,110\n";
        let by_spot = parse_area_log(text).unwrap();
        assert_eq!(by_spot[&1], vec![100.5, 110.0]);
        assert_eq!(by_spot[&2], vec![200.0]);
        assert!(parse_area_log("1;100\n").is_err());
        assert!(parse_area_log("1,-5\n").is_err());
    }
}
