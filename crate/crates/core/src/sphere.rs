//! Quasi-uniform point sets on the sphere (golden-angle spirals).

use crate::geometry::{Direction3, Point3};

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // pi * (3 - sqrt 5)

/// `n` points on S^2, each owning (close to) the same area.
pub fn fibonacci_sphere(n: usize) -> Vec<Direction3> {
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            spiral_point(z, i as f64 * GOLDEN_ANGLE)
        })
        .collect()
}

/// `n` points on the closed upper hemisphere `z > 0`.
pub fn fibonacci_hemisphere(n: usize) -> Vec<Direction3> {
    (0..n)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / n as f64;
            spiral_point(z, i as f64 * GOLDEN_ANGLE)
        })
        .collect()
}

/// `n` spiral points in the spherical cap of angular radius `radius`
/// around `center`, area-uniform in the cap's tangent disc.
pub fn cap_points(center: &Direction3, radius: f64, n: usize) -> Vec<Direction3> {
    let (u, v) = tangent_frame(center);
    let c = center.as_array();
    (0..n)
        .map(|i| {
            let beta = radius * ((i as f64 + 0.5) / n as f64).sqrt();
            let phi = i as f64 * GOLDEN_ANGLE;
            let (sb, cb) = beta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            let p = [
                cb * c[0] + sb * (cp * u[0] + sp * v[0]),
                cb * c[1] + sb * (cp * u[1] + sp * v[1]),
                cb * c[2] + sb * (cp * u[2] + sp * v[2]),
            ];
            Direction3::from_vector(p).expect("cap point is a unit vector")
        })
        .collect()
}

/// Unit vectors `u`, `v` completing `center` to an orthonormal frame.
pub fn tangent_frame(center: &Direction3) -> (Point3, Point3) {
    let c = center.as_array();
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = normalize(cross(c, &helper));
    let v = cross(c, &u);
    (u, v)
}

/// `n` equally spaced directions on the great circle orthogonal to `normal`.
pub fn great_circle(normal: &Direction3, n: usize) -> Vec<Direction3> {
    let (u, v) = tangent_frame(normal);
    (0..n)
        .map(|i| {
            let t = std::f64::consts::PI * 2.0 * i as f64 / n as f64;
            let (s, c) = t.sin_cos();
            Direction3::from_vector([
                c * u[0] + s * v[0],
                c * u[1] + s * v[1],
                c * u[2] + s * v[2],
            ])
            .expect("great-circle point is a unit vector")
        })
        .collect()
}

fn spiral_point(z: f64, phi: f64) -> Direction3 {
    let r = (1.0 - z * z).max(0.0).sqrt();
    Direction3::from_vector([r * phi.cos(), r * phi.sin(), z]).expect("spiral point is a unit vector")
}

pub(crate) fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
