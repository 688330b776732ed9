//! Riesz `s`-energies of discrete measures, computed directly as a double
//! sum and through the frequency side
//! `int |x|^(s-d) |mu^(x)|^2 dx`, `mu^(x) = int exp(-2 pi i <x, y>) dmu(y)`.
//!
//! The two agree up to a dimensional constant; what is compared is whether
//! they stay bounded or blow up as resolution grows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{DiscreteMeasure, NaturalMeasure};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::sphere::fibonacci_hemisphere;

/// Largest measure the quadratic double sum will accept.
pub const MAX_RIESZ_ATOMS: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelfPairs {
    /// Each atom interacts with itself at the floor distance.
    AtFloor,
    /// Diagonal terms are left out (reference mode for atomic measures).
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszOptions {
    /// Distances below this are replaced by it.
    pub floor: f64,
    pub self_pairs: SelfPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszEnergy {
    pub value: f64,
    /// A zero distance met a zero floor.
    pub diverged: bool,
}

/// Riesz energy of a natural measure: floor at the cell diameter
/// `sqrt(d) M^-n`, self-pairs included at the floor.
pub fn riesz_energy_natural(mu: &NaturalMeasure, s: f64) -> Result<RieszEnergy> {
    riesz_energy(
        &mu.to_discrete(),
        s,
        RieszOptions {
            floor: mu.support().cell_diameter(),
            self_pairs: SelfPairs::AtFloor,
        },
    )
}

/// `sum_{i,j} m_i m_j max(|x_i - x_j|, floor)^-s`.
pub fn riesz_energy(mu: &DiscreteMeasure, s: f64, opts: RieszOptions) -> Result<RieszEnergy> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::param("s", format!("need s > 0, got {s}")));
    }
    if !(opts.floor >= 0.0) || !opts.floor.is_finite() {
        return Err(Error::param("floor", "floor must be a finite nonnegative distance"));
    }
    if mu.len() > MAX_RIESZ_ATOMS {
        return Err(Error::ResourceLimit(format!(
            "{} atoms exceeds the double-sum limit {MAX_RIESZ_ATOMS}",
            mu.len()
        )));
    }
    let floor2 = opts.floor * opts.floor;
    let half = -0.5 * s;
    let kernel = |d2: f64| -> f64 {
        let d2 = d2.max(floor2);
        if d2 == 0.0 {
            f64::INFINITY
        } else {
            d2.powf(half)
        }
    };
    let pts = &mu.points;
    let ms = &mu.masses;
    let rows: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                acc += ms[j] * kernel(dist2(&pts[i], &pts[j]));
            }
            if opts.self_pairs == SelfPairs::AtFloor {
                acc += ms[i] * kernel(0.0);
            }
            ms[i] * acc
        })
        .collect();
    let value: f64 = rows.iter().sum();
    Ok(RieszEnergy {
        value,
        diverged: value.is_infinite(),
    })
}

#[inline]
fn dist2(a: &Point3, b: &Point3) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierOptions {
    /// Frequency cutoff `K`: the integral runs over `|x| <= K`.
    pub cutoff: f64,
    pub radial_samples: usize,
    /// Directions per radius for d >= 2; derived from `K` and the support
    /// extent when `None`.
    pub angular_samples: Option<usize>,
}

/// `int_{|x| <= K} |x|^(s-d) |mu^(x)|^2 dx` by radial midpoint quadrature in
/// `u = r^s` (which removes the singularity at the origin) times an angular
/// quadrature on the unit sphere.
pub fn energy_fourier_side(mu: &DiscreteMeasure, s: f64, opts: FourierOptions) -> Result<f64> {
    let d = mu.dim as f64;
    if !(s > 0.0 && s < d) {
        return Err(Error::param("s", format!("need 0 < s < d = {d}, got {s}")));
    }
    if !(opts.cutoff >= 1.0) || !opts.cutoff.is_finite() {
        return Err(Error::param("cutoff", "frequency cutoff must be at least 1"));
    }
    if opts.radial_samples == 0 {
        return Err(Error::param("radial_samples", "need at least one radial sample"));
    }
    if mu.is_empty() {
        return Err(Error::EmptySet);
    }
    let dirs = angular_rule(mu, opts);
    let u_max = opts.cutoff.powf(s);
    let du = u_max / opts.radial_samples as f64;
    let samples: Vec<f64> = (0..opts.radial_samples)
        .into_par_iter()
        .map(|k| {
            let r = ((k as f64 + 0.5) * du).powf(1.0 / s);
            dirs.iter()
                .map(|(dir, w)| {
                    let x = [r * dir[0], r * dir[1], r * dir[2]];
                    w * transform_sq(mu, &x)
                })
                .sum::<f64>()
        })
        .collect();
    Ok(samples.iter().sum::<f64>() * du / s)
}

/// `|mu^(x)|^2`.
pub fn transform_sq(mu: &DiscreteMeasure, x: &Point3) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let (mut re, mut im) = (0.0, 0.0);
    for (p, m) in mu.points.iter().zip(&mu.masses) {
        let phase = tau * (x[0] * p[0] + x[1] * p[1] + x[2] * p[2]);
        let (sn, cs) = phase.sin_cos();
        re += m * cs;
        im -= m * sn;
    }
    re * re + im * im
}

// Half-sphere directions with doubled weights: |mu^(-x)| = |mu^(x)|.
fn angular_rule(mu: &DiscreteMeasure, opts: FourierOptions) -> Vec<(Point3, f64)> {
    let extent = support_extent(mu).max(1e-3);
    match mu.dim {
        1 => vec![([1.0, 0.0, 0.0], 2.0)],
        2 => {
            let n = opts
                .angular_samples
                .unwrap_or_else(|| (2.0 * std::f64::consts::PI * opts.cutoff * extent).ceil() as usize + 8);
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                    ([t.cos(), t.sin(), 0.0], 2.0 * std::f64::consts::PI / n as f64)
                })
                .collect()
        }
        _ => {
            let n = opts
                .angular_samples
                .unwrap_or_else(|| ((2.0 * opts.cutoff * extent).powi(2)).ceil() as usize + 32);
            fibonacci_hemisphere(n)
                .into_iter()
                .map(|p| (*p.as_array(), 4.0 * std::f64::consts::PI / n as f64))
                .collect()
        }
    }
}

fn support_extent(mu: &DiscreteMeasure) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &mu.points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::new(1, vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn two_atoms_closed_form() {
        let e = riesz_energy(
            &two_atoms(),
            1.0,
            RieszOptions {
                floor: 1e-9,
                self_pairs: SelfPairs::Excluded,
            },
        )
        .unwrap();
        assert_eq!(e.value, 0.5);
        let with_self = riesz_energy(
            &two_atoms(),
            1.0,
            RieszOptions {
                floor: 0.01,
                self_pairs: SelfPairs::AtFloor,
            },
        )
        .unwrap();
        // 0.5 + 2 * 1/4 * 100
        assert_abs_diff_eq!(with_self.value, 50.5, epsilon = 1e-9);
    }

    #[test]
    fn zero_floor_with_self_pairs_diverges() {
        let e = riesz_energy(
            &two_atoms(),
            0.5,
            RieszOptions {
                floor: 0.0,
                self_pairs: SelfPairs::AtFloor,
            },
        )
        .unwrap();
        assert!(e.diverged);
    }

    #[test]
    fn rejects_bad_exponents() {
        let o = RieszOptions {
            floor: 0.1,
            self_pairs: SelfPairs::AtFloor,
        };
        assert!(riesz_energy(&two_atoms(), 0.0, o).is_err());
        let f = FourierOptions {
            cutoff: 4.0,
            radial_samples: 10,
            angular_samples: None,
        };
        assert!(energy_fourier_side(&two_atoms(), 1.0, f).is_err());
        assert!(energy_fourier_side(&two_atoms(), 0.5, FourierOptions { cutoff: 0.5, ..f }).is_err());
    }

    #[test]
    fn single_atom_fourier_side_is_exact() {
        // |mu^| = 1, so the integral is 2 K^s / s in one dimension.
        let atom = DiscreteMeasure::new(1, vec![[0.3, 0.0, 0.0]], vec![1.0]).unwrap();
        for k in [4.0, 8.0, 16.0] {
            let v = energy_fourier_side(
                &atom,
                0.5,
                FourierOptions {
                    cutoff: k,
                    radial_samples: 64,
                    angular_samples: None,
                },
            )
            .unwrap();
            assert_abs_diff_eq!(v, 2.0 * k.sqrt() / 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn transform_of_two_atoms_is_cosine() {
        let mu = two_atoms();
        for x in [0.0, 0.1, 0.37, 2.25] {
            assert_abs_diff_eq!(
                transform_sq(&mu, &[x, 0.0, 0.0]),
                (std::f64::consts::PI * x).cos().powi(2),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn planar_atom_uses_the_circle() {
        // |mu^| = 1 in d = 2: integral is 2 pi K^s / s.
        let atom = DiscreteMeasure::new(2, vec![[0.5, 0.5, 0.0]], vec![1.0]).unwrap();
        let v = energy_fourier_side(
            &atom,
            1.0,
            FourierOptions {
                cutoff: 3.0,
                radial_samples: 16,
                angular_samples: Some(12),
            },
        )
        .unwrap();
        assert_abs_diff_eq!(v, 2.0 * std::f64::consts::PI * 3.0, epsilon = 1e-9);
    }
}
