//! Box-counting dimension: occupied boxes per scale and a least-squares
//! slope of `log N(delta)` against `log(1/delta)`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::fit::{check_decreasing, fit_log_log};
use crate::error::{Error, Result};
use crate::grid::GridSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Strictly decreasing box sides.
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub slope: f64,
    pub r_squared: f64,
    pub halfwidth: f64,
}

fn estimate(scales: Vec<f64>, counts: Vec<u64>) -> Result<DimensionEstimate> {
    let inv: Vec<f64> = scales.iter().map(|s| 1.0 / s).collect();
    let n: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = fit_log_log(&inv, &n, 2)?;
    Ok(DimensionEstimate {
        scales,
        counts,
        slope: fit.slope,
        r_squared: fit.r_squared,
        halfwidth: fit.halfwidth,
    })
}

/// Grid levels used by default for a set of the given depth: all but the
/// coarsest level and the two finest (where counts saturate).
pub fn default_grid_levels(depth: u32) -> RangeInclusive<u32> {
    1..=depth.saturating_sub(2)
}

/// `2^-lo, ..., 2^-hi`.
pub fn dyadic_scales(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

/// Exact box counts of a grid set at the grid's own levels: the occupied
/// `M^-k`-boxes are the depth-`k` ancestors.
pub fn box_dimension_grid(set: &GridSet, levels: RangeInclusive<u32>) -> Result<DimensionEstimate> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let levels: Vec<u32> = levels.collect();
    if levels.len() < 2 {
        return Err(Error::param("levels", "need at least 2 scales"));
    }
    if *levels.last().unwrap() > set.depth() {
        return Err(Error::param("levels", "finest level exceeds the set's depth"));
    }
    let scales = levels.iter().map(|&k| (set.base() as f64).powi(-(k as i32))).collect();
    let counts = levels
        .iter()
        .map(|&k| set.ancestor_count(k).map(|c| c as u64))
        .collect::<Result<Vec<_>>>()?;
    estimate(scales, counts)
}

/// Box counts of a point cloud with boxes `floor(p / delta)`.
pub fn box_dimension_points<const D: usize>(points: &[[f64; D]], scales: &[f64]) -> Result<DimensionEstimate> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    if scales.len() < 2 {
        return Err(Error::param("scales", "need at least 2 scales"));
    }
    check_decreasing("scales", scales)?;
    let counts = scales.iter().map(|&delta| occupied_boxes(points, delta)).collect();
    estimate(scales.to_vec(), counts)
}

pub(crate) fn occupied_boxes<const D: usize>(points: &[[f64; D]], delta: f64) -> u64 {
    let mut keys: Vec<[i64; D]> = points
        .iter()
        .map(|p| {
            let mut k = [0i64; D];
            for (slot, &x) in k.iter_mut().zip(p) {
                *slot = (x / delta).floor() as i64;
            }
            k
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// One-dimensional convenience wrapper.
pub fn box_dimension_1d(coords: &[f64], scales: &[f64]) -> Result<DimensionEstimate> {
    let pts: Vec<[f64; 1]> = coords.iter().map(|&c| [c]).collect();
    box_dimension_points(&pts, scales)
}
