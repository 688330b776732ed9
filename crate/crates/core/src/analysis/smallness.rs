//! How much of a direction family is nearly orthogonal to a probe `xi`:
//! `rho -> gamma({L : |xi . L| <= rho})`, and the worst probe over the
//! sphere.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{check_decreasing, ExponentProfile};
use crate::construct::ProjectionFamily;
use crate::error::{Error, Result};
use crate::geometry::{check_unit, Direction3, Point3};
use crate::sphere::{cap_points, fibonacci_hemisphere};

/// Candidate probes per refinement round.
pub const REFINE_POINTS: usize = 64;
/// Cap radius shrink factor between refinement rounds.
pub const REFINE_SHRINK: f64 = 4.0;

pub fn smallness_profile(family: &ProjectionFamily, xi: &Point3, rhos: &[f64]) -> Result<ExponentProfile> {
    check_unit(xi)?;
    check_decreasing("rho", rhos)?;
    Ok(profile_unchecked(family, xi, rhos))
}

fn profile_unchecked(family: &ProjectionFamily, xi: &Point3, rhos: &[f64]) -> ExponentProfile {
    let mut values = vec![0.0; rhos.len()];
    for (dir, w) in family.iter() {
        let t = dir.abs_dot(xi);
        // rhos decrease, so the hits form a prefix
        for (v, &rho) in values.iter_mut().zip(rhos) {
            if t <= rho {
                *v += w;
            } else {
                break;
            }
        }
    }
    ExponentProfile::new(rhos.to_vec(), values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub xi: Direction3,
    pub profile: ExponentProfile,
    pub slope: f64,
    /// Slope at every point of the initial hemisphere grid, in grid order;
    /// `None` where too few scales were positive to fit.
    pub grid_slopes: Vec<Option<f64>>,
    pub evaluated: usize,
}

/// Minimizes the fitted smallness slope over probes `xi`.
///
/// Starts from a quasi-uniform hemisphere grid (`|xi . L|` is even in `xi`),
/// then refines `refine_steps` times in caps around the current minimizer,
/// the first cap having the grid spacing as radius and each later one a
/// quarter of the previous. Probes whose profile cannot be fitted never
/// count as worst. Ties go to the earliest candidate.
pub fn worst_case_smallness(
    family: &ProjectionFamily,
    rhos: &[f64],
    grid_size: usize,
    refine_steps: usize,
) -> Result<WorstCase> {
    if grid_size < 100 {
        return Err(Error::param("grid_size", format!("need at least 100 probes, got {grid_size}")));
    }
    check_decreasing("rho", rhos)?;
    let grid = fibonacci_hemisphere(grid_size);
    let grid_slopes: Vec<Option<f64>> = grid
        .par_iter()
        .map(|xi| profile_unchecked(family, xi.as_array(), rhos).slope())
        .collect();
    let mut best: Option<(f64, Direction3)> = None;
    for (xi, s) in grid.iter().zip(&grid_slopes) {
        if let Some(s) = *s {
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, *xi));
            }
        }
    }
    let Some((mut best_slope, mut best_xi)) = best else {
        return Err(Error::InsufficientScales { usable: 0 });
    };
    let mut evaluated = grid.len();
    let mut radius = (2.0 * std::f64::consts::PI / grid_size as f64).sqrt();
    for _ in 0..refine_steps {
        let candidates = cap_points(&best_xi, radius, REFINE_POINTS);
        let slopes: Vec<Option<f64>> = candidates
            .par_iter()
            .map(|xi| profile_unchecked(family, xi.as_array(), rhos).slope())
            .collect();
        evaluated += candidates.len();
        for (xi, s) in candidates.iter().zip(&slopes) {
            if let Some(s) = *s {
                if s < best_slope {
                    best_slope = s;
                    best_xi = *xi;
                }
            }
        }
        radius /= REFINE_SHRINK;
    }
    let profile = profile_unchecked(family, best_xi.as_array(), rhos);
    Ok(WorstCase {
        xi: best_xi,
        slope: best_slope,
        profile,
        grid_slopes,
        evaluated,
    })
}
