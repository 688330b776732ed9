//! Tube-condition profiles: for each width `w`, the largest mass that any
//! tube of radius `w` captures, searched over a deterministic grid of
//! directions and offsets plus random tubes.
//!
//! For a fixed direction every grid offset is counted in one pass: each
//! point contributes to a contiguous run of offsets, recorded in a
//! difference array. Random tubes go through a quadtree of cell counts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{check_decreasing, ExponentProfile};
use crate::construct::NaturalMeasure;
use crate::error::{Error, Result};
use crate::geometry::{tube_contains, Point2, Tube2, TUBE_SLACK};
use crate::grid::GridSet;
use crate::seed::{RngSeed, STREAM_TUBES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeSearch {
    /// Multiplies the `ceil(pi / w)` angles and `ceil(2 / w)` offsets.
    pub grid_density: f64,
    pub num_random_tubes: usize,
    pub seed: RngSeed,
}

impl Default for TubeSearch {
    fn default() -> Self {
        TubeSearch {
            grid_density: 1.0,
            num_random_tubes: 10_000,
            seed: RngSeed(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeProfile {
    /// Width against the best mass found.
    pub profile: ExponentProfile,
    /// A maximizing tube for each width.
    pub best_tubes: Vec<Tube2>,
    /// `(angles, offsets)` of the deterministic grid at each width.
    pub grid_sizes: Vec<(usize, usize)>,
}

/// Mass of the tube by direct membership tests on cell centers.
pub fn tube_mass(mu: &NaturalMeasure, tube: &Tube2) -> f64 {
    let hits = mu
        .support()
        .centers()
        .filter(|c| tube_contains(&[c[0], c[1]], tube))
        .count();
    hits as f64 * mu.weight()
}

pub fn tube_exponent_profile(mu: &NaturalMeasure, widths: &[f64], search: &TubeSearch) -> Result<TubeProfile> {
    let set = mu.support();
    if set.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: set.dim(),
        });
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if widths.is_empty() {
        return Err(Error::param("widths", "need at least one width"));
    }
    check_decreasing("widths", widths)?;
    let side = set.cell_side();
    if let Some(w) = widths.iter().find(|&&w| !(w > side && w < 1.0)) {
        return Err(Error::param(
            "widths",
            format!("width {w} outside (M^-depth, 1) = ({side}, 1)"),
        ));
    }
    if !(search.grid_density > 0.0) || !search.grid_density.is_finite() {
        return Err(Error::param("grid_density", "must be positive"));
    }

    let points: Vec<Point2> = set.centers().map(|c| [c[0], c[1]]).collect();
    let center = bbox_center(set);
    let tree = MassTree::new(set);

    let mut values = Vec::with_capacity(widths.len());
    let mut best_tubes = Vec::with_capacity(widths.len());
    let mut grid_sizes = Vec::with_capacity(widths.len());
    for (wi, &w) in widths.iter().enumerate() {
        let (grid_count, grid_tube, sizes) = grid_search(&points, &center, w, search.grid_density);
        let (rand_count, rand_tube) = random_search(&tree, &center, w, search, wi as u64);
        let (count, tube) = if rand_count > grid_count {
            (rand_count, rand_tube.expect("positive count has a tube"))
        } else {
            (grid_count, grid_tube)
        };
        values.push(count as f64 * mu.weight());
        best_tubes.push(tube);
        grid_sizes.push(sizes);
    }
    Ok(TubeProfile {
        profile: ExponentProfile::new(widths.to_vec(), values),
        best_tubes,
        grid_sizes,
    })
}

fn bbox_center(set: &GridSet) -> Point2 {
    let (lo, hi) = set.index_bounds().expect("nonempty");
    let side = set.cell_side();
    [
        (lo[0] + hi[0] + 1) as f64 * side / 2.0,
        (lo[1] + hi[1] + 1) as f64 * side / 2.0,
    ]
}

/// Best count over `ceil(density pi / w)` angles by an odd number (at least
/// `ceil(density 2 / w)`) of offsets spanning `[-1, 1]` around the
/// bounding-box center, which is itself one of the offsets.
fn grid_search(points: &[Point2], center: &Point2, w: f64, density: f64) -> (u64, Tube2, (usize, usize)) {
    let n_angles = (density * std::f64::consts::PI / w).ceil() as usize;
    let mut n_offsets = (density * 2.0 / w).ceil() as usize;
    if n_offsets.is_multiple_of(2) {
        n_offsets += 1;
    }
    let step = 2.0 / n_offsets as f64;
    let mid = ((n_offsets - 1) / 2) as f64;

    let per_angle: Vec<(u64, usize)> = (0..n_angles)
        .into_par_iter()
        .map(|a| {
            let theta = std::f64::consts::PI * a as f64 / n_angles as f64;
            let normal = [-theta.sin(), theta.cos()];
            let c0 = normal[0] * center[0] + normal[1] * center[1];
            let mut diff = vec![0i64; n_offsets + 1];
            let last = (n_offsets - 1) as f64;
            for p in points {
                let t = normal[0] * p[0] + normal[1] * p[1] - c0;
                let lo = ((t - w - TUBE_SLACK) / step + mid).ceil().max(0.0);
                let hi = ((t + w + TUBE_SLACK) / step + mid).floor().min(last);
                if lo <= hi {
                    diff[lo as usize] += 1;
                    diff[hi as usize + 1] -= 1;
                }
            }
            let mut run = 0i64;
            let mut best = (0u64, 0usize);
            for (k, d) in diff[..n_offsets].iter().enumerate() {
                run += d;
                if run as u64 > best.0 {
                    best = (run as u64, k);
                }
            }
            best
        })
        .collect();

    let mut best = (0u64, 0usize, 0usize);
    for (a, &(count, k)) in per_angle.iter().enumerate() {
        if count > best.0 {
            best = (count, a, k);
        }
    }
    let theta = std::f64::consts::PI * best.1 as f64 / n_angles as f64;
    let normal = [-theta.sin(), theta.cos()];
    let c0 = normal[0] * center[0] + normal[1] * center[1];
    let tube = Tube2 {
        angle: theta,
        offset: c0 + (best.2 as f64 - mid) * step,
        width: w,
    };
    (best.0, tube, (n_angles, n_offsets))
}

fn random_search(
    tree: &MassTree,
    center: &Point2,
    w: f64,
    search: &TubeSearch,
    stream: u64,
) -> (u64, Option<Tube2>) {
    if search.num_random_tubes == 0 {
        return (0, None);
    }
    let mut rng = search.seed.rng(&[STREAM_TUBES, stream]);
    let tubes: Vec<Tube2> = (0..search.num_random_tubes)
        .map(|_| {
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let shift = rng.random_range(-1.0..=1.0);
            let normal = [-theta.sin(), theta.cos()];
            Tube2 {
                angle: theta,
                offset: normal[0] * center[0] + normal[1] * center[1] + shift,
                width: w,
            }
        })
        .collect();
    let counts: Vec<u64> = tubes.par_iter().map(|t| tree.tube_count(t)).collect();
    let mut best: (u64, Option<Tube2>) = (0, None);
    for (t, &c) in tubes.iter().zip(&counts) {
        if c > best.0 {
            best = (c, Some(*t));
        }
    }
    best
}

/// Cell counts of every ancestor level of a planar set.
pub struct MassTree {
    base: u64,
    depth: u32,
    levels: Vec<Vec<([u64; 2], u64)>>,
}

impl MassTree {
    pub fn new(set: &GridSet) -> Self {
        let base = set.base() as u64;
        let depth = set.depth();
        let mut levels = Vec::with_capacity(depth as usize + 1);
        let mut current: Vec<([u64; 2], u64)> = set.cells().iter().map(|c| ([c[0], c[1]], 1)).collect();
        levels.push(current.clone());
        for _ in 0..depth {
            let mut parents: Vec<([u64; 2], u64)> = current.iter().map(|(c, n)| ([c[0] / base, c[1] / base], *n)).collect();
            parents.sort_unstable_by_key(|p| p.0);
            let mut merged: Vec<([u64; 2], u64)> = Vec::with_capacity(parents.len());
            for (c, n) in parents {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += n,
                    _ => merged.push((c, n)),
                }
            }
            levels.push(merged.clone());
            current = merged;
        }
        levels.reverse();
        MassTree { base, depth, levels }
    }

    /// Number of cell centers inside the closed tube.
    pub fn tube_count(&self, tube: &Tube2) -> u64 {
        let normal = tube.normal();
        let leaf_side = (self.base as f64).powi(-(self.depth as i32));
        let q = Query {
            normal,
            l1: normal[0].abs() + normal[1].abs(),
            offset: tube.offset,
            reach: tube.width + TUBE_SLACK,
            leaf_side,
        };
        self.levels[0].iter().map(|&(idx, n)| self.visit(0, idx, n, &q)).sum()
    }

    fn visit(&self, level: u32, idx: [u64; 2], count: u64, q: &Query) -> u64 {
        let side = (self.base as f64).powi(-(level as i32));
        let c = [(idx[0] as f64 + 0.5) * side, (idx[1] as f64 + 0.5) * side];
        let dist = (q.normal[0] * c[0] + q.normal[1] * c[1] - q.offset).abs();
        // leaf centers sit at most (side - leaf_side) / 2 from c per axis
        let spread = 0.5 * (side - q.leaf_side) * q.l1;
        if dist + spread <= q.reach {
            return count;
        }
        if dist - spread > q.reach || level == self.depth {
            return 0;
        }
        let next = &self.levels[level as usize + 1];
        let mut total = 0;
        for a in 0..self.base {
            let row = idx[0] * self.base + a;
            let lo = [row, idx[1] * self.base];
            let hi = [row, idx[1] * self.base + self.base];
            let start = next.partition_point(|e| e.0 < lo);
            let end = next.partition_point(|e| e.0 < hi);
            for &(child, n) in &next[start..end] {
                total += self.visit(level + 1, child, n, q);
            }
        }
        total
    }
}

struct Query {
    normal: Point2,
    l1: f64,
    offset: f64,
    reach: f64,
    leaf_side: f64,
}
