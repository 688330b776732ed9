//! Finite-resolution sets, their natural measures, and the mapped family of
//! directions on the sphere.
//!
//! The random planar sets are exact-branching percolation: every surviving
//! cell keeps exactly `N` of its `M^d` children, chosen uniformly without
//! replacement. With `alpha = log N / log M` the natural measure puts mass
//! `M^(-alpha n) = N^(-n)` on each depth-`n` cell, so it is a probability
//! measure.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{cell_center, grid_extent, sphere_map_unchecked, validate_grid, Direction3, Point3, SpherePatch};
use crate::grid::{CellIndex, GridSet};
use crate::seed::{RngSeed, STREAM_CENTERS, STREAM_PERCOLATION};

/// Largest set the generators will materialize.
pub const MAX_CELLS: u64 = 1 << 24;

/// Spread `C_max / c_min` above which a regularity profile is flagged.
pub const REGULARITY_SPREAD_LIMIT: f64 = 32.0;

/// Exact-branching random Cantor set in `[0,1]^d`.
pub fn generate_percolation_set(dim: u8, base: u32, branching: u32, depth: u32, seed: RngSeed) -> Result<GridSet> {
    validate_grid(dim, base, depth)?;
    let children = (base as u64)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::param("base", "M^d overflows"))?;
    if branching == 0 || branching as u64 > children {
        return Err(Error::param(
            "branching",
            format!("N must satisfy 1 <= N <= M^d = {children}, got {branching}"),
        ));
    }
    if depth == 0 {
        return Err(Error::param("depth", "depth must be at least 1"));
    }
    grid_extent(base, depth)?;
    let total = (branching as u64).checked_pow(depth);
    if total.is_none_or(|t| t > MAX_CELLS) {
        return Err(Error::ResourceLimit(format!(
            "{branching}^{depth} cells exceeds the limit of {MAX_CELLS}"
        )));
    }

    let m = base as u64;
    let d = dim as usize;
    let mut current: Vec<CellIndex> = vec![[0; 3]];
    for level in 0..depth {
        let mut next: Vec<CellIndex> = current
            .par_iter()
            .flat_map_iter(|parent| {
                let mut rng = seed.rng(&[STREAM_PERCOLATION, level as u64, parent[0], parent[1], parent[2]]);
                let picks = index::sample(&mut rng, children as usize, branching as usize);
                let parent = *parent;
                picks.into_iter().map(move |child| {
                    let mut c = [0u64; 3];
                    let mut rest = child as u64;
                    for k in 0..d {
                        c[k] = parent[k] * m + rest % m;
                        rest /= m;
                    }
                    c
                })
            })
            .collect();
        next.sort_unstable();
        current = next;
    }
    Ok(GridSet::from_sorted_unchecked(dim, base, depth, current))
}

/// Cells whose base-`M` digits lie in `pattern` in every coordinate.
pub fn generate_cantor_product(dim: u8, base: u32, pattern: &[u32], depth: u32) -> Result<GridSet> {
    validate_grid(dim, base, depth)?;
    let mut digits: Vec<u64> = pattern.iter().map(|&p| p as u64).collect();
    digits.sort_unstable();
    digits.dedup();
    if digits.is_empty() {
        return Err(Error::param("pattern", "pattern must be nonempty"));
    }
    if let Some(&bad) = digits.iter().find(|&&p| p >= base as u64) {
        return Err(Error::param("pattern", format!("digit {bad} is not below M = {base}")));
    }
    let total = (digits.len() as u64).checked_pow(depth * dim as u32);
    if total.is_none_or(|t| t > MAX_CELLS) {
        return Err(Error::ResourceLimit("Cantor product too large".into()));
    }
    let mut axis: Vec<u64> = vec![0];
    for _ in 0..depth {
        axis = axis
            .iter()
            .flat_map(|&i| digits.iter().map(move |&p| i * base as u64 + p))
            .collect();
    }
    let axis = &axis;
    let cells: Vec<CellIndex> = match dim {
        1 => axis.iter().map(|&i| [i, 0, 0]).collect(),
        2 => axis.iter().flat_map(|&i| axis.iter().map(move |&j| [i, j, 0])).collect(),
        _ => axis
            .iter()
            .flat_map(|&i| axis.iter().flat_map(move |&j| axis.iter().map(move |&k| [i, j, k])))
            .collect(),
    };
    // axis is increasing, so the products come out lexicographically sorted
    Ok(GridSet::from_sorted_unchecked(dim, base, depth, cells))
}

/// Finite-depth surrogate for `H^alpha` restricted to a grid set: equal mass
/// `M^(-alpha n)` on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalMeasure {
    support: GridSet,
    alpha: f64,
    weight: f64,
}

impl NaturalMeasure {
    pub fn support(&self) -> &GridSet {
        &self.support
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Mass of one cell.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn total_mass(&self) -> f64 {
        self.support.len() as f64 * self.weight
    }

    /// Point masses at the cell centers.
    pub fn to_discrete(&self) -> DiscreteMeasure {
        DiscreteMeasure {
            dim: self.support.dim(),
            points: self.support.centers().collect(),
            masses: vec![self.weight; self.support.len()],
        }
    }
}

pub fn natural_measure(support: GridSet, alpha: f64) -> Result<NaturalMeasure> {
    let d = support.dim() as f64;
    if !(alpha > 0.0 && alpha <= d) {
        return Err(Error::param("alpha", format!("need 0 < alpha <= {d}, got {alpha}")));
    }
    let weight = (support.base() as f64).powf(-alpha * support.depth() as f64);
    Ok(NaturalMeasure {
        support,
        alpha,
        weight,
    })
}

/// Finitely many weighted points in R^d (d <= 3, unused coordinates zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub dim: u8,
    pub points: Vec<Point3>,
    pub masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(dim: u8, points: Vec<Point3>, masses: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::param("dim", "d must be 1, 2 or 3"));
        }
        if points.len() != masses.len() {
            return Err(Error::param("masses", "one mass per point required"));
        }
        if masses.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::param("masses", "masses must be positive and finite"));
        }
        Ok(DiscreteMeasure { dim, points, masses })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Extremes of `mu(B(x, r)) / r^alpha` over sampled support points and radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub alpha: f64,
    pub centers: usize,
    pub per_radius: Vec<RadiusRatios>,
    pub c_min: f64,
    pub c_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRatios {
    pub radius: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl RegularityProfile {
    pub fn spread(&self) -> f64 {
        self.c_max / self.c_min
    }

    pub fn is_regular(&self, max_spread: f64) -> bool {
        self.spread() <= max_spread
    }
}

/// Mass of the half-open max-norm ball `[x - r, x + r)^d` around the center
/// of support cell `i`, counting cells by their centers.
///
/// For `r` a multiple of the cell side and a ball inside the unit cube this
/// counts exactly `(2r / side)^d` cells of the full grid.
pub fn ball_mass(mu: &NaturalMeasure, i: usize, radius: f64) -> f64 {
    let set = mu.support();
    let side = set.cell_side();
    let x = cell_center(&set.cells()[i], set.dim(), side);
    let mut lo = [0i64; 3];
    let mut hi = [1i64; 3];
    for k in 0..set.dim() as usize {
        // centers c = (j + 1/2) side with x - r <= c < x + r
        lo[k] = ((x[k] - radius) / side - 0.5 - 1e-9).ceil() as i64;
        hi[k] = ((x[k] + radius) / side - 0.5 - 1e-9).ceil() as i64;
    }
    set.count_in_box(&lo, &hi) as f64 * mu.weight()
}

pub fn ahlfors_regularity_profile(
    mu: &NaturalMeasure,
    num_centers: usize,
    radii: &[f64],
    seed: RngSeed,
) -> Result<RegularityProfile> {
    let set = mu.support();
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if num_centers == 0 {
        return Err(Error::param("num_centers", "need at least one center"));
    }
    if radii.is_empty() {
        return Err(Error::param("radii", "need at least one radius"));
    }
    let side = set.cell_side();
    let diam = (set.dim() as f64).sqrt();
    for &r in radii {
        if !(r > side && r < diam) {
            return Err(Error::param(
                "radii",
                format!("radius {r} outside (M^-depth, sqrt d) = ({side}, {diam})"),
            ));
        }
    }
    let mut rng = seed.rng(&[STREAM_CENTERS]);
    let mut centers: Vec<usize> = index::sample(&mut rng, set.len(), num_centers.min(set.len())).into_vec();
    centers.sort_unstable();

    let per_radius: Vec<RadiusRatios> = radii
        .par_iter()
        .map(|&r| {
            let scale = r.powf(mu.alpha());
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for &i in &centers {
                let ratio = ball_mass(mu, i, r) / scale;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            RadiusRatios {
                radius: r,
                min_ratio: lo,
                max_ratio: hi,
            }
        })
        .collect();
    let c_min = per_radius.iter().map(|p| p.min_ratio).fold(f64::INFINITY, f64::min);
    let c_max = per_radius.iter().map(|p| p.max_ratio).fold(0.0, f64::max);
    Ok(RegularityProfile {
        alpha: mu.alpha(),
        centers: centers.len(),
        per_radius,
        c_min,
        c_max,
    })
}

/// Weighted finite family of directions, the stand-in for `(G, gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFamily {
    directions: Vec<Direction3>,
    weights: Vec<f64>,
    total_weight: f64,
}

impl ProjectionFamily {
    pub fn new(entries: Vec<(Direction3, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySet);
        }
        if entries.iter().any(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::param("weights", "weights must be positive and finite"));
        }
        let (directions, weights): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let total_weight = weights.iter().sum();
        Ok(ProjectionFamily {
            directions,
            weights,
            total_weight,
        })
    }

    /// Equal weights summing to one.
    pub fn equal_weights(directions: Vec<Direction3>) -> Result<Self> {
        let w = 1.0 / directions.len().max(1) as f64;
        ProjectionFamily::new(directions.into_iter().map(|d| (d, w)).collect())
    }

    /// `n` quasi-uniform directions on the whole sphere, total weight one.
    pub fn uniform_sphere(n: usize) -> Result<Self> {
        ProjectionFamily::equal_weights(crate::sphere::fibonacci_sphere(n))
    }

    /// `n` directions on the great circle orthogonal to `normal`.
    pub fn great_circle(normal: &Direction3, n: usize) -> Result<Self> {
        ProjectionFamily::equal_weights(crate::sphere::great_circle(normal, n))
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Direction3] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Direction3, f64)> {
        self.directions.iter().zip(self.weights.iter().copied())
    }
}

/// Lifts a planar set to the sphere: each cell center `u in [0,1]^2` goes to
/// `F(u/5 - (1/10, 1/10))`, carrying the natural weight `M^(-alpha n)`.
pub fn map_family_to_sphere(set: &GridSet, alpha: f64) -> Result<ProjectionFamily> {
    if set.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: set.dim(),
        });
    }
    let mu = natural_measure(set.clone(), alpha)?;
    let weight = mu.weight();
    let entries = set
        .centers()
        .map(|c| {
            let p = SpherePatch::from_unit_square(&[c[0], c[1]]);
            (sphere_map_unchecked(&p), weight)
        })
        .collect();
    ProjectionFamily::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn percolation_keep_all_is_full_grid() {
        for seed in [0, 1, 99] {
            let s = generate_percolation_set(2, 2, 4, 3, RngSeed(seed)).unwrap();
            assert_eq!(s, GridSet::full(2, 2, 3).unwrap());
            assert_eq!(s.len(), 64);
        }
    }

    #[test]
    fn percolation_has_exact_cardinality_and_is_deterministic() {
        let a = generate_percolation_set(2, 4, 8, 4, RngSeed(7)).unwrap();
        assert_eq!(a.len(), 4096);
        let b = generate_percolation_set(2, 4, 8, 4, RngSeed(7)).unwrap();
        assert_eq!(a, b);
        let c = generate_percolation_set(2, 4, 8, 4, RngSeed(8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn percolation_is_nested_across_depths() {
        let deep = generate_percolation_set(2, 4, 8, 5, RngSeed(3)).unwrap();
        for k in 1..5 {
            let shallow = generate_percolation_set(2, 4, 8, k, RngSeed(3)).unwrap();
            assert_eq!(deep.truncate(k).unwrap(), shallow);
        }
    }

    #[test]
    fn percolation_rejects_bad_parameters() {
        assert!(generate_percolation_set(2, 4, 17, 3, RngSeed(0)).is_err());
        assert!(generate_percolation_set(2, 4, 0, 3, RngSeed(0)).is_err());
        assert!(generate_percolation_set(2, 4, 8, 0, RngSeed(0)).is_err());
        assert!(matches!(
            generate_percolation_set(2, 4, 16, 20, RngSeed(0)),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn cantor_product_examples() {
        let s = generate_cantor_product(1, 3, &[0, 2], 2).unwrap();
        let idx: Vec<u64> = s.cells().iter().map(|c| c[0]).collect();
        assert_eq!(idx, vec![0, 2, 6, 8]);
        let corners = generate_cantor_product(3, 3, &[0, 2], 1).unwrap();
        assert_eq!(corners.len(), 8);
        assert!(corners.contains(&[2, 0, 2]));
        assert_eq!(generate_cantor_product(2, 3, &[0, 2], 2).unwrap().len(), 16);
        assert!(generate_cantor_product(1, 3, &[], 2).is_err());
        assert!(generate_cantor_product(1, 3, &[3], 2).is_err());
    }

    #[test]
    fn natural_measures_are_normalized() {
        let full = natural_measure(GridSet::full(2, 2, 5).unwrap(), 2.0).unwrap();
        assert_abs_diff_eq!(full.total_mass(), 1.0, epsilon = 1e-12);
        let perc = generate_percolation_set(2, 4, 8, 4, RngSeed(1)).unwrap();
        let mu = natural_measure(perc, 8f64.ln() / 4f64.ln()).unwrap();
        assert_abs_diff_eq!(mu.total_mass(), 1.0, epsilon = 1e-12);
        let cantor = generate_cantor_product(1, 3, &[0, 2], 7).unwrap();
        let mu = natural_measure(cantor, 2f64.ln() / 3f64.ln()).unwrap();
        assert_abs_diff_eq!(mu.total_mass(), 1.0, epsilon = 1e-12);
        assert!(natural_measure(GridSet::full(1, 2, 2).unwrap(), 1.5).is_err());
        assert!(natural_measure(GridSet::full(1, 2, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn full_square_ball_ratio_is_four_in_the_interior() {
        let mu = natural_measure(GridSet::full(2, 2, 6).unwrap(), 2.0).unwrap();
        for r in [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0] {
            for (i, c) in mu.support().cells().iter().enumerate() {
                let x = [(c[0] as f64 + 0.5) / 64.0, (c[1] as f64 + 0.5) / 64.0];
                if x.iter().all(|&v| v - r >= 0.0 && v + r <= 1.0) {
                    assert_abs_diff_eq!(ball_mass(&mu, i, r) / (r * r), 4.0, epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn single_cell_is_flagged_non_regular() {
        let set = GridSet::new(2, 2, 14, vec![[5000, 7000, 0]]).unwrap();
        let mu = natural_measure(set, 0.5).unwrap();
        let radii: Vec<f64> = (1..=13).map(|k| 2f64.powi(-k)).collect();
        let p = ahlfors_regularity_profile(&mu, 10, &radii, RngSeed(0)).unwrap();
        assert_eq!(p.centers, 1);
        // ratio = weight / r^0.5, so the spread is (r_max / r_min)^0.5 = 2^6
        assert_abs_diff_eq!(p.spread(), 64.0, epsilon = 1e-9);
        assert!(!p.is_regular(REGULARITY_SPREAD_LIMIT));
    }

    #[test]
    fn regularity_rejects_bad_radii() {
        let mu = natural_measure(GridSet::full(2, 2, 4).unwrap(), 2.0).unwrap();
        assert!(ahlfors_regularity_profile(&mu, 5, &[1.0 / 32.0], RngSeed(0)).is_err());
        assert!(ahlfors_regularity_profile(&mu, 5, &[2.0], RngSeed(0)).is_err());
        let empty = natural_measure(GridSet::empty(2, 2, 4).unwrap(), 1.0).unwrap();
        assert!(matches!(
            ahlfors_regularity_profile(&empty, 5, &[0.25], RngSeed(0)),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn mapped_family_examples() {
        let center = GridSet::new(2, 3, 1, vec![[1, 1, 0]]).unwrap();
        let fam = map_family_to_sphere(&center, 1.0).unwrap();
        assert_eq!(fam.len(), 1);
        let d = fam.directions()[0].as_array();
        assert!((d[0].powi(2) + d[1].powi(2) + (d[2] - 1.0).powi(2)).sqrt() < 1e-2);

        let perc = generate_percolation_set(2, 4, 8, 3, RngSeed(2)).unwrap();
        let alpha = 1.5;
        let fam = map_family_to_sphere(&perc, alpha).unwrap();
        let mu = natural_measure(perc.clone(), alpha).unwrap();
        assert_eq!(fam.len(), perc.len());
        assert_abs_diff_eq!(fam.total_weight(), mu.total_mass(), epsilon = 1e-12);
        assert!(map_family_to_sphere(&GridSet::full(3, 2, 1).unwrap(), 1.0).is_err());
    }
}
