//! Exact low-level geometry: dyadic cells, planar tubes, unit directions in
//! R^3, and the map from the lifted planar patch onto the sphere.
//!
//! The patch is the square `[-1/10, 1/10]^2` lifted to height `1/2`; the map
//! `F(q) = q / |q|` sends it bi-Lipschitz onto a cap around the north pole,
//! and pulls great circles back to straight segments.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{RngSeed, STREAM_BILIPSCHITZ};

/// Half side of the planar patch.
pub const PATCH_HALF_SIDE: f64 = 0.1;
/// Height at which the patch is lifted before normalizing.
pub const PATCH_HEIGHT: f64 = 0.5;

/// Tolerance on `|v| = 1` for caller-supplied unit vectors.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Absolute slack used by closed-tube membership tests.
pub const TUBE_SLACK: f64 = 1e-12;

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

/// A cell of the M-adic grid of `[0,1]^d` at a given depth.
///
/// Unused trailing coordinates of `index` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub dim: u8,
    pub base: u32,
    pub depth: u32,
    pub index: [u64; 3],
}

impl Cell {
    pub fn new(dim: u8, base: u32, depth: u32, index: [u64; 3]) -> Result<Self> {
        validate_grid(dim, base, depth)?;
        let n = grid_extent(base, depth)?;
        for (k, &i) in index.iter().enumerate() {
            if k < dim as usize && i >= n {
                return Err(Error::param("index", format!("coordinate {i} >= {n}")));
            }
            if k >= dim as usize && i != 0 {
                return Err(Error::param("index", "unused coordinates must be zero"));
            }
        }
        Ok(Cell {
            dim,
            base,
            depth,
            index,
        })
    }

    /// Side length `M^-n`.
    pub fn side(&self) -> f64 {
        cell_side(self.base, self.depth)
    }

    pub fn center(&self) -> Point3 {
        cell_center(&self.index, self.dim, self.side())
    }
}

pub(crate) fn validate_grid(dim: u8, base: u32, _depth: u32) -> Result<()> {
    if !(1..=3).contains(&dim) {
        return Err(Error::param("dim", format!("d must be 1, 2 or 3, got {dim}")));
    }
    if base < 2 {
        return Err(Error::param("base", format!("M must be >= 2, got {base}")));
    }
    Ok(())
}

/// Number of cells per axis, `M^n`, if it fits in a u64.
pub(crate) fn grid_extent(base: u32, depth: u32) -> Result<u64> {
    (base as u64)
        .checked_pow(depth)
        .ok_or_else(|| Error::ResourceLimit(format!("{base}^{depth} cells per axis overflows u64")))
}

pub(crate) fn cell_side(base: u32, depth: u32) -> f64 {
    (base as f64).powi(-(depth as i32))
}

#[inline]
pub(crate) fn cell_center(index: &[u64; 3], dim: u8, side: f64) -> Point3 {
    let mut c = [0.0; 3];
    for k in 0..dim as usize {
        c[k] = (index[k] as f64 + 0.5) * side;
    }
    c
}

/// A unit vector in R^3 spanning the line `L_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction3([f64; 3]);

impl Direction3 {
    /// Accepts `v` with `| |v| - 1 | <= 1e-9` and renormalizes it once.
    pub fn new(v: Point3) -> Result<Self> {
        let n = norm3(&v);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Direction3([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Normalizes any nonzero finite vector.
    pub fn from_vector(v: Point3) -> Result<Self> {
        let n = norm3(&v);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Direction3([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub const fn e1() -> Self {
        Direction3([1.0, 0.0, 0.0])
    }

    pub const fn e2() -> Self {
        Direction3([0.0, 1.0, 0.0])
    }

    pub const fn e3() -> Self {
        Direction3([0.0, 0.0, 1.0])
    }

    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Direction3([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// `|x . v|` without a unit check on `v`.
    #[inline]
    pub fn abs_dot(&self, v: &Point3) -> f64 {
        dot3(&self.0, v).abs()
    }

    #[inline]
    pub fn dot(&self, v: &Point3) -> f64 {
        dot3(&self.0, v)
    }
}

impl TryFrom<[f64; 3]> for Direction3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Direction3::new(v)
    }
}

impl From<Direction3> for [f64; 3] {
    fn from(d: Direction3) -> Self {
        d.0
    }
}

#[inline]
pub(crate) fn dot3(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm3(v: &Point3) -> f64 {
    dot3(v, v).sqrt()
}

pub(crate) fn check_unit(v: &Point3) -> Result<()> {
    let n = norm3(v);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit { norm: n });
    }
    Ok(())
}

/// `|xi . x|` where `x` spans `line`.
///
/// This is simultaneously the length of the projection of `xi` onto the line
/// and the distance from `xi` to the orthogonal plane `line^perp`.
pub fn direction_dot(xi: &Point3, line: &Direction3) -> Result<f64> {
    check_unit(xi)?;
    Ok(line.abs_dot(xi).min(1.0))
}

/// The lifted square patch `[-1/10, 1/10]^2 + (0, 0, 1/2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpherePatch;

impl SpherePatch {
    pub fn contains(p: &Point2) -> bool {
        p[0].abs() <= PATCH_HALF_SIDE && p[1].abs() <= PATCH_HALF_SIDE
    }

    pub fn lift(p: &Point2) -> Point3 {
        [p[0], p[1], PATCH_HEIGHT]
    }

    /// Affine map from unit-square coordinates onto the patch, `u -> u/5 - 1/10`.
    pub fn from_unit_square(u: &Point2) -> Point2 {
        [u[0] / 5.0 - PATCH_HALF_SIDE, u[1] / 5.0 - PATCH_HALF_SIDE]
    }
}

/// `F(p) = q / |q|` with `q = (p1, p2, 1/2)`.
pub fn sphere_map(p: &Point2) -> Result<Direction3> {
    if !p[0].is_finite() || !p[1].is_finite() || !SpherePatch::contains(p) {
        return Err(Error::OutsidePatch { x: p[0], y: p[1] });
    }
    Ok(sphere_map_unchecked(p))
}

#[inline]
pub(crate) fn sphere_map_unchecked(p: &Point2) -> Direction3 {
    let q = SpherePatch::lift(p);
    let n = norm3(&q);
    Direction3([q[0] / n, q[1] / n, q[2] / n])
}

/// Ratio `|F(x) - F(y)| / |x - y|`, or `None` for a degenerate pair.
pub fn distortion_ratio(x: &Point2, y: &Point2) -> Option<f64> {
    let dx = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    if dx == 0.0 {
        return None;
    }
    let fx = sphere_map_unchecked(x);
    let fy = sphere_map_unchecked(y);
    let d = [
        fx.0[0] - fy.0[0],
        fx.0[1] - fy.0[1],
        fx.0[2] - fy.0[2],
    ];
    Some(norm3(&d) / dx)
}

/// Samples `num_pairs` uniform point pairs in the patch and returns the
/// extreme distortion ratios `(min, max)`. Coincident pairs are skipped.
pub fn bilipschitz_sample(num_pairs: usize, seed: RngSeed) -> Result<(f64, f64)> {
    if num_pairs < 2 {
        return Err(Error::param("num_pairs", "need at least 2 pairs"));
    }
    let mut rng = seed.rng(&[STREAM_BILIPSCHITZ]);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Point2 {
        [
            rng.random_range(-PATCH_HALF_SIDE..=PATCH_HALF_SIDE),
            rng.random_range(-PATCH_HALF_SIDE..=PATCH_HALF_SIDE),
        ]
    };
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for _ in 0..num_pairs {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        if let Some(r) = distortion_ratio(&x, &y) {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if !lo.is_finite() {
        return Err(Error::param("num_pairs", "every sampled pair was degenerate"));
    }
    Ok((lo, hi))
}

/// A closed segment in patch coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment2 {
    pub start: Point2,
    pub end: Point2,
}

impl Segment2 {
    pub fn length(&self) -> f64 {
        ((self.end[0] - self.start[0]).powi(2) + (self.end[1] - self.start[1]).powi(2)).sqrt()
    }

    pub fn point_at(&self, t: f64) -> Point2 {
        [
            self.start[0] + t * (self.end[0] - self.start[0]),
            self.start[1] + t * (self.end[1] - self.start[1]),
        ]
    }
}

/// Preimage under `F` of the great circle `W ∩ S^2`, `W = normal^perp`,
/// restricted to the patch: the segment `{ n1 x + n2 y = -n3/2 }` clipped to
/// `[-1/10, 1/10]^2`, or `None` when the circle misses the patch.
pub fn great_circle_preimage(normal: &Point3) -> Result<Option<Segment2>> {
    check_unit(normal)?;
    let (a, b) = (normal[0], normal[1]);
    let c = -normal[2] * PATCH_HEIGHT;
    let ab2 = a * a + b * b;
    if ab2 == 0.0 {
        return Ok(None);
    }
    let p0 = [a * c / ab2, b * c / ab2];
    let dir = [-b, a];
    // Liang-Barsky against the square.
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..2 {
        if dir[k] == 0.0 {
            if p0[k].abs() > PATCH_HALF_SIDE {
                return Ok(None);
            }
            continue;
        }
        let ta = (-PATCH_HALF_SIDE - p0[k]) / dir[k];
        let tb = (PATCH_HALF_SIDE - p0[k]) / dir[k];
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    if t0 > t1 {
        return Ok(None);
    }
    let clamp = |v: f64| v.clamp(-PATCH_HALF_SIDE, PATCH_HALF_SIDE);
    let at = |t: f64| [clamp(p0[0] + t * dir[0]), clamp(p0[1] + t * dir[1])];
    Ok(Some(Segment2 {
        start: at(t0),
        end: at(t1),
    }))
}

/// A planar tube: the closed `width`-neighbourhood of a line.
///
/// `width` is the neighbourhood radius, so the tube's total thickness is
/// `2 * width`. The line has direction `(cos angle, sin angle)` and consists
/// of the points `p` with `p . normal = offset`, `normal = (-sin, cos)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tube2 {
    pub angle: f64,
    pub offset: f64,
    pub width: f64,
}

impl Tube2 {
    pub fn new(angle: f64, offset: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::param("width", format!("must be positive, got {width}")));
        }
        if !angle.is_finite() || !offset.is_finite() {
            return Err(Error::param("angle", "angle and offset must be finite"));
        }
        // Bring the angle into [0, pi); a half turn flips the normal.
        let mut angle = angle.rem_euclid(2.0 * std::f64::consts::PI);
        let mut offset = offset;
        if angle >= std::f64::consts::PI {
            angle -= std::f64::consts::PI;
            offset = -offset;
        }
        Ok(Tube2 {
            angle,
            offset,
            width,
        })
    }

    /// Tube around the line through `a` and `b`.
    pub fn through(a: &Point2, b: &Point2, width: f64) -> Result<Self> {
        let dx = b[0] - a[0];
        let dy = b[1] - a[1];
        if dx == 0.0 && dy == 0.0 {
            return Err(Error::param("points", "the two points coincide"));
        }
        let angle = dy.atan2(dx);
        let normal = [-angle.sin(), angle.cos()];
        Tube2::new(angle, normal[0] * a[0] + normal[1] * a[1], width)
    }

    pub fn normal(&self) -> Point2 {
        [-self.angle.sin(), self.angle.cos()]
    }

    pub fn distance(&self, p: &Point2) -> f64 {
        let n = self.normal();
        (n[0] * p[0] + n[1] * p[1] - self.offset).abs()
    }
}

/// True iff the point-to-line distance is at most the tube width.
pub fn tube_contains(p: &Point2, tube: &Tube2) -> bool {
    tube.distance(p) <= tube.width + TUBE_SLACK
}
