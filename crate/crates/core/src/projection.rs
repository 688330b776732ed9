//! Projections of 3-D sets and measures onto lines `L_x`, and the sampled
//! Marstrand-type experiments over a direction family.
//!
//! Dimension mode checks that projected box dimension matches the set's
//! reference dimension for most directions (sets of dimension at most 1).
//! Measure mode checks that the length of the `delta`-neighbourhood of the
//! projection shows no decay as `delta` shrinks (sets of dimension above 1),
//! the computable stand-in for positive length.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::boxdim::{box_dimension_1d, occupied_boxes};
use crate::analysis::fit::{check_decreasing, ExponentProfile};
use crate::construct::{generate_cantor_product, NaturalMeasure, ProjectionFamily};
use crate::error::{Error, Result};
use crate::geometry::{Direction3, Point3};
use crate::grid::GridSet;
use crate::seed::{RngSeed, STREAM_DIRECTIONS};

/// Tolerance on `|projected dimension - reference|` in dimension mode.
pub const DIMENSION_TOLERANCE: f64 = 0.12;
/// Tolerance on the length-profile slope in measure mode.
pub const NO_DECAY_TOLERANCE: f64 = 0.1;
/// Fraction of sampled directions that must pass.
pub const PASS_THRESHOLD: f64 = 0.9;

/// A test set together with its analytic dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub label: String,
    pub set: GridSet,
    pub reference_dim: f64,
}

impl Fixture {
    /// `d log|pattern| / log M`, the similarity dimension of the product.
    pub fn cantor_product(dim: u8, base: u32, pattern: &[u32], depth: u32) -> Result<Self> {
        let set = generate_cantor_product(dim, base, pattern, depth)?;
        let mut p = pattern.to_vec();
        p.sort_unstable();
        p.dedup();
        Ok(Fixture {
            label: format!("cantor d={dim} M={base} pattern={p:?} depth={depth}"),
            reference_dim: dim as f64 * (p.len() as f64).ln() / (base as f64).ln(),
            set,
        })
    }

    /// Column of cells along coordinate axis `axis` through the middle of
    /// the unit cube.
    pub fn axis_segment(base: u32, depth: u32, axis: usize) -> Result<Self> {
        if axis > 2 {
            return Err(Error::param("axis", "axis must be 0, 1 or 2"));
        }
        let n = (base as u64).pow(depth);
        let mid = n / 2;
        let cells = (0..n)
            .map(|i| {
                let mut c = [mid; 3];
                c[axis] = i;
                c
            })
            .collect();
        Ok(Fixture {
            label: format!("segment axis={axis} M={base} depth={depth}"),
            set: GridSet::new(3, base, depth, cells)?,
            reference_dim: 1.0,
        })
    }

    pub fn single_cell(base: u32, depth: u32, index: [u64; 3]) -> Result<Self> {
        Ok(Fixture {
            label: format!("cell {index:?}"),
            set: GridSet::new(3, base, depth, vec![index])?,
            reference_dim: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedMeasure {
    pub delta: f64,
    /// Bin `k` of `masses` covers `[(first_bin + k) delta, (first_bin + k + 1) delta)`.
    pub first_bin: i64,
    pub masses: Vec<f64>,
}

impl BinnedMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// A set or measure pushed onto a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projected1D {
    pub direction: Direction3,
    /// `c . x` for every source point `c`.
    pub coords: Vec<f64>,
    /// Cell side of the source, the finest meaningful scale.
    pub resolution: f64,
    pub bins: Option<BinnedMeasure>,
}

pub fn project_points(points: &[Point3], line: &Direction3) -> Result<Projected1D> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(Projected1D {
        direction: *line,
        coords: points.iter().map(|p| line.dot(p)).collect(),
        resolution: 0.0,
        bins: None,
    })
}

/// Projects cell centers.
pub fn project_set(set: &GridSet, line: &Direction3) -> Result<Projected1D> {
    if set.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            actual: set.dim(),
        });
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(Projected1D {
        direction: *line,
        coords: set.centers().map(|c| line.dot(&c)).collect(),
        resolution: set.cell_side(),
        bins: None,
    })
}

/// Pushforward of `mu` binned into intervals of length `delta`.
pub fn project_measure(mu: &NaturalMeasure, line: &Direction3, delta: f64) -> Result<Projected1D> {
    let mut p = project_set(mu.support(), line)?;
    if !(delta >= p.resolution) || !delta.is_finite() {
        return Err(Error::param(
            "delta",
            format!("bin width {delta} is below the cell size {}", p.resolution),
        ));
    }
    let keys: Vec<i64> = p.coords.iter().map(|t| (t / delta).floor() as i64).collect();
    let first = *keys.iter().min().expect("nonempty");
    let last = *keys.iter().max().expect("nonempty");
    let mut masses = vec![0.0; (last - first + 1) as usize];
    for k in keys {
        masses[(k - first) as usize] += mu.weight();
    }
    p.bins = Some(BinnedMeasure {
        delta,
        first_bin: first,
        masses,
    });
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthProfile {
    /// `delta` against `(occupied delta-intervals) * delta`.
    pub profile: ExponentProfile,
    /// Smallest value over the scales.
    pub floor: f64,
    /// Fitted slope within `NO_DECAY_TOLERANCE` of zero.
    pub has_positive_floor: bool,
}

pub fn projected_length_profile(p: &Projected1D, deltas: &[f64]) -> Result<LengthProfile> {
    check_decreasing("delta", deltas)?;
    if deltas.len() < 3 {
        return Err(Error::param("delta", "need at least 3 scales"));
    }
    if let Some(d) = deltas.iter().find(|&&d| d < p.resolution) {
        return Err(Error::param("delta", format!("scale {d} is below the resolution {}", p.resolution)));
    }
    let pts: Vec<[f64; 1]> = p.coords.iter().map(|&c| [c]).collect();
    let values: Vec<f64> = deltas.iter().map(|&d| occupied_boxes(&pts, d) as f64 * d).collect();
    let floor = values.iter().copied().fold(f64::INFINITY, f64::min);
    let profile = ExponentProfile::new(deltas.to_vec(), values);
    let has_positive_floor = profile.slope().is_some_and(|s| s.abs() <= NO_DECAY_TOLERANCE);
    Ok(LengthProfile {
        profile,
        floor,
        has_positive_floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MmpMode {
    Dimension,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmpConfig {
    pub mode: MmpMode,
    pub num_dirs: usize,
    pub seed: RngSeed,
    pub dimension_tolerance: f64,
    pub slope_tolerance: f64,
    pub pass_threshold: f64,
    /// Box sides (dimension mode) or neighbourhood scales (measure mode);
    /// derived from the fixture when `None`.
    pub scales: Option<Vec<f64>>,
}

impl MmpConfig {
    pub fn new(mode: MmpMode, num_dirs: usize, seed: RngSeed) -> Self {
        MmpConfig {
            mode,
            num_dirs,
            seed,
            dimension_tolerance: DIMENSION_TOLERANCE,
            slope_tolerance: NO_DECAY_TOLERANCE,
            pass_threshold: PASS_THRESHOLD,
            scales: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    /// Position in the sampling order.
    pub rank: usize,
    pub family_index: usize,
    pub direction: Direction3,
    /// Projected box dimension, or the length-profile slope.
    pub estimate: f64,
    pub r_squared: f64,
    /// Measure mode only: smallest neighbourhood length.
    pub floor: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |p: f64| -> f64 {
            if v.is_empty() {
                return f64::NAN;
            }
            let x = p * (v.len() - 1) as f64;
            let (i, f) = (x.floor() as usize, x - x.floor());
            if i + 1 < v.len() {
                v[i] * (1.0 - f) + v[i + 1] * f
            } else {
                v[i]
            }
        };
        Quantiles {
            min: at(0.0),
            q10: at(0.1),
            median: at(0.5),
            q90: at(0.9),
            max: at(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmpReport {
    pub fixture: String,
    pub reference_dim: f64,
    pub config: MmpConfig,
    pub scales: Vec<f64>,
    pub records: Vec<DirectionRecord>,
    pub quantiles: Quantiles,
    pub pass_fraction: f64,
    pub meets_threshold: bool,
}

/// Default scales: dyadic `2^-j` from `2^-2` down to two levels above the
/// cell size in dimension mode; `2^-3 .. 2^-8` (capped at the cell size) in
/// measure mode.
pub fn default_mmp_scales(mode: MmpMode, set: &GridSet) -> Vec<f64> {
    let finest = (set.depth() as f64 * (set.base() as f64).log2()).floor() as i32;
    match mode {
        MmpMode::Dimension => (2..=finest - 2).map(|j| 2f64.powi(-j)).collect(),
        MmpMode::Measure => (3..=finest.min(8)).map(|j| 2f64.powi(-j)).collect(),
    }
}

pub fn mmp_experiment(family: &ProjectionFamily, fixture: &Fixture, config: &MmpConfig) -> Result<MmpReport> {
    match config.mode {
        MmpMode::Dimension if fixture.reference_dim > 1.0 => {
            return Err(Error::param(
                "mode",
                format!("dimension mode needs reference dimension <= 1, fixture has {}", fixture.reference_dim),
            ))
        }
        MmpMode::Measure if fixture.reference_dim <= 1.0 => {
            return Err(Error::param(
                "mode",
                format!("measure mode needs reference dimension > 1, fixture has {}", fixture.reference_dim),
            ))
        }
        _ => {}
    }
    if config.num_dirs == 0 || config.num_dirs > family.len() {
        return Err(Error::param(
            "num_dirs",
            format!("need 1 <= num_dirs <= family size {}, got {}", family.len(), config.num_dirs),
        ));
    }
    if fixture.set.is_empty() {
        return Err(Error::EmptySet);
    }
    let scales = match &config.scales {
        Some(s) => s.clone(),
        None => default_mmp_scales(config.mode, &fixture.set),
    };
    check_decreasing("scales", &scales)?;
    if scales.len() < 3 {
        return Err(Error::param("scales", "need at least 3 scales"));
    }

    let mut rng = config.seed.rng(&[STREAM_DIRECTIONS]);
    let weights = family.weights();
    let sampled = index::sample_weighted(&mut rng, family.len(), |i| weights[i], config.num_dirs)
        .map_err(|e| Error::param("weights", e.to_string()))?
        .into_vec();

    let records: Vec<DirectionRecord> = sampled
        .par_iter()
        .enumerate()
        .map(|(rank, &fi)| -> Result<DirectionRecord> {
            let dir = family.directions()[fi];
            let proj = project_set(&fixture.set, &dir)?;
            Ok(match config.mode {
                MmpMode::Dimension => {
                    let est = box_dimension_1d(&proj.coords, &scales)?;
                    DirectionRecord {
                        rank,
                        family_index: fi,
                        direction: dir,
                        estimate: est.slope,
                        r_squared: est.r_squared,
                        floor: None,
                        pass: (est.slope - fixture.reference_dim).abs() <= config.dimension_tolerance,
                    }
                }
                MmpMode::Measure => {
                    let lp = projected_length_profile(&proj, &scales)?;
                    let fit = lp.profile.require_fit()?;
                    DirectionRecord {
                        rank,
                        family_index: fi,
                        direction: dir,
                        estimate: fit.slope,
                        r_squared: fit.r_squared,
                        floor: Some(lp.floor),
                        pass: fit.slope.abs() <= config.slope_tolerance,
                    }
                }
            })
        })
        .collect::<Result<_>>()?;

    let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
    let pass_fraction = records.iter().filter(|r| r.pass).count() as f64 / records.len() as f64;
    Ok(MmpReport {
        fixture: fixture.label.clone(),
        reference_dim: fixture.reference_dim,
        config: config.clone(),
        scales,
        quantiles: Quantiles::of(&estimates),
        meets_threshold: pass_fraction >= config.pass_threshold,
        pass_fraction,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::boxdim::dyadic_scales;
    use crate::construct::natural_measure;
    use approx::assert_abs_diff_eq;

    #[test]
    fn project_two_points_on_the_diagonal() {
        let d = Direction3::from_vector([1.0, 1.0, 1.0]).unwrap();
        let p = project_points(&[[0.0; 3], [1.0; 3]], &d).unwrap();
        assert_abs_diff_eq!(p.coords[0], 0.0);
        assert_abs_diff_eq!(p.coords[1], 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn segment_projections() {
        let seg = Fixture::axis_segment(2, 10, 2).unwrap();
        let along = project_set(&seg.set, &Direction3::e3()).unwrap();
        let e = box_dimension_1d(&along.coords, &dyadic_scales(2, 8)).unwrap();
        assert_abs_diff_eq!(e.slope, 1.0, epsilon = 0.01);
        let across = project_set(&seg.set, &Direction3::e1()).unwrap();
        assert!(across.coords.iter().all(|&c| c == across.coords[0]));
        let e = box_dimension_1d(&across.coords, &dyadic_scales(2, 8)).unwrap();
        assert_eq!(e.slope, 0.0);
    }

    #[test]
    fn pushforward_conserves_mass() {
        let set = generate_cantor_product(3, 4, &[0, 3], 3).unwrap();
        let mu = natural_measure(set, 1.5).unwrap();
        let d = Direction3::from_vector([0.3, 0.4, 0.866]).unwrap();
        let p = project_measure(&mu, &d, 1.0 / 64.0).unwrap();
        assert_abs_diff_eq!(p.bins.unwrap().total(), mu.total_mass(), epsilon = 1e-12);
        assert!(project_measure(&mu, &d, 1.0 / 128.0).is_err());
    }

    #[test]
    fn two_cell_measure_gives_two_bins() {
        let set = GridSet::new(3, 2, 2, vec![[0, 0, 0], [0, 0, 3]]).unwrap();
        let mu = natural_measure(set, 1.0).unwrap();
        let p = project_measure(&mu, &Direction3::e3(), 0.25).unwrap();
        let bins = p.bins.unwrap();
        let nonzero: Vec<f64> = bins.masses.iter().copied().filter(|m| *m > 0.0).collect();
        assert_eq!(nonzero, vec![0.25, 0.25]);
    }

    #[test]
    fn full_cube_bins_are_uniform() {
        let mu = natural_measure(GridSet::full(3, 2, 6).unwrap(), 3.0).unwrap();
        let bins = project_measure(&mu, &Direction3::e3(), 1.0 / 16.0).unwrap().bins.unwrap();
        let interior = &bins.masses[1..bins.masses.len() - 1];
        let max = interior.iter().copied().fold(0.0, f64::max);
        let min = interior.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max / min <= 1.2);
    }

    #[test]
    fn length_profiles() {
        let point = project_points(&[[0.3, 0.3, 0.3]], &Direction3::e1()).unwrap();
        let lp = projected_length_profile(&point, &dyadic_scales(3, 8)).unwrap();
        for (d, v) in lp.profile.points() {
            assert_abs_diff_eq!(v, d);
        }
        assert!(!lp.has_positive_floor);

        let cube = GridSet::full(3, 2, 6).unwrap();
        let lp = projected_length_profile(&project_set(&cube, &Direction3::e3()).unwrap(), &dyadic_scales(1, 6)).unwrap();
        for v in &lp.profile.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        assert!(lp.has_positive_floor);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let g = ProjectionFamily::uniform_sphere(50).unwrap();
        let f = Fixture::cantor_product(3, 4, &[0, 3], 2).unwrap();
        assert!(mmp_experiment(&g, &f, &MmpConfig::new(MmpMode::Dimension, 10, RngSeed(0))).is_err());
        let s = Fixture::axis_segment(2, 6, 0).unwrap();
        assert!(mmp_experiment(&g, &s, &MmpConfig::new(MmpMode::Measure, 10, RngSeed(0))).is_err());
        assert!(mmp_experiment(&g, &s, &MmpConfig::new(MmpMode::Dimension, 51, RngSeed(0))).is_err());
    }

    #[test]
    fn single_point_passes_against_zero() {
        let g = ProjectionFamily::uniform_sphere(100).unwrap();
        let f = Fixture::single_cell(2, 8, [17, 99, 200]).unwrap();
        let r = mmp_experiment(&g, &f, &MmpConfig::new(MmpMode::Dimension, 40, RngSeed(1))).unwrap();
        assert!(r.records.iter().all(|x| x.estimate == 0.0));
        assert_eq!(r.pass_fraction, 1.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let q = Quantiles::of(&[4.0, 0.0, 2.0, 1.0, 3.0]);
        assert_eq!((q.min, q.median, q.max), (0.0, 2.0, 4.0));
        assert_abs_diff_eq!(q.q10, 0.4);
    }
}
