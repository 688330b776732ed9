//! Reference values recomputed here from first principles, independent of
//! the library's own code paths.

use approx::assert_abs_diff_eq;

use projlab::analysis::{
    box_dimension_grid, default_grid_levels, energy_fourier_side, riesz_energy_natural, tube_exponent_profile,
    FourierOptions, TubeSearch,
};
use projlab::construct::{ahlfors_regularity_profile, generate_cantor_product, natural_measure, DiscreteMeasure};
use projlab::geometry::{bilipschitz_sample, direction_dot, great_circle_preimage, sphere_map, tube_contains};
use projlab::grid::GridSet;
use projlab::projection::{project_measure, project_set, projected_length_profile, Fixture};
use projlab::{Direction3, RngSeed, Tube2};

fn lift(p: [f64; 2]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + 0.25).sqrt();
    [p[0] / n, p[1] / n, 0.5 / n]
}

/// Extremes of the distortion ratio over every pair of a 1/200-step grid.
fn grid_distortion_extremes() -> (f64, f64) {
    let pts: Vec<[f64; 2]> = (0..=40)
        .flat_map(|i| (0..=40).map(move |j| [-0.1 + i as f64 / 200.0, -0.1 + j as f64 / 200.0]))
        .collect();
    let lifted: Vec<[f64; 3]> = pts.iter().map(|&p| lift(p)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dp = ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt();
            let df = (0..3).map(|k| (lifted[i][k] - lifted[j][k]).powi(2)).sum::<f64>().sqrt();
            lo = lo.min(df / dp);
            hi = hi.max(df / dp);
        }
    }
    (lo, hi)
}

#[test]
fn distortion_extremes_match_the_exhaustive_grid() {
    let (glo, ghi) = grid_distortion_extremes();
    assert!(glo >= 1.0 && ghi <= 4.0, "grid extremes {glo} {ghi}");
    for seed in 0..5 {
        let (lo, hi) = bilipschitz_sample(20_000, RngSeed(seed)).unwrap();
        assert!(lo >= glo && hi <= ghi, "sample ({lo}, {hi}) vs grid ({glo}, {ghi})");
    }
}

#[test]
fn sphere_map_by_hand() {
    let n = (0.01f64 + 0.25).sqrt();
    let f = sphere_map(&[0.1, 0.0]).unwrap();
    assert_abs_diff_eq!(f.as_array()[0], 0.1 / n, epsilon = 1e-12);
    assert_abs_diff_eq!(f.as_array()[2], 0.5 / n, epsilon = 1e-12);
    assert_abs_diff_eq!(f.as_array()[0], 0.196116, epsilon = 1e-6);
    assert_abs_diff_eq!(f.as_array()[2], 0.980580, epsilon = 1e-6);
    // lowest point of the patch image is a corner
    let corner = sphere_map(&[0.1, -0.1]).unwrap();
    assert_abs_diff_eq!(corner.as_array()[2], 0.5 / 0.27f64.sqrt(), epsilon = 1e-12);
    assert!(corner.as_array()[2] >= 0.95);
}

#[test]
fn tilted_great_circle_misses_the_patch() {
    // nu . (x, y, 1/2) = 0 with nu ~ (1, 0, -1) forces x = 1/2
    let nu = [0.5f64.sqrt(), 0.0, -(0.5f64.sqrt())];
    assert_eq!(great_circle_preimage(&nu).unwrap(), None);
    let seg = great_circle_preimage(&[1.0, 0.0, 0.0]).unwrap().unwrap();
    assert_abs_diff_eq!(seg.length(), 0.2, epsilon = 1e-12);
    let l = sphere_map(&seg.point_at(0.3)).unwrap();
    assert!(direction_dot(&[1.0, 0.0, 0.0], &l).unwrap() <= 1e-12);
}

#[test]
fn diagonal_tube_uses_point_line_distance() {
    let tube = Tube2::through(&[0.0, 0.0], &[1.0, 1.0], 0.1).unwrap();
    let p = [0.0, 0.1];
    // |x - y| / sqrt 2
    assert_abs_diff_eq!(tube.distance(&p), 0.1 / 2f64.sqrt(), epsilon = 1e-12);
    assert!(tube_contains(&p, &tube));
}

fn ternary_points(depth: u32) -> Vec<f64> {
    let mut pts = vec![0.0f64];
    for level in 1..=depth {
        let step = 3f64.powi(-(level as i32));
        pts = pts.iter().flat_map(|&x| [x, x + 2.0 * step]).collect();
    }
    let half = 0.5 * 3f64.powi(-(depth as i32));
    pts.iter().map(|x| x + half).collect()
}

#[test]
fn moran_dimension_of_the_ternary_cantor_set() {
    let set = generate_cantor_product(1, 3, &[0, 2], 8).unwrap();
    let est = box_dimension_grid(&set, default_grid_levels(8)).unwrap();
    let moran = 2f64.ln() / 3f64.ln();
    assert!((est.slope - moran).abs() <= 0.05, "{} vs {moran}", est.slope);
}

#[test]
fn cantor_regularity_by_brute_force() {
    let depth = 8;
    let alpha = 2f64.ln() / 3f64.ln();
    let pts = ternary_points(depth);
    let w = 1.0 / pts.len() as f64;
    let radii: Vec<f64> = (1..=6).map(|k| 3f64.powi(-k)).collect();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &x in &pts {
        for &r in &radii {
            let m = pts.iter().filter(|&&c| c >= x - r - 1e-12 && c < x + r - 1e-12).count() as f64 * w;
            lo = lo.min(m / r.powf(alpha));
            hi = hi.max(m / r.powf(alpha));
        }
    }
    assert!(hi / lo <= 9.0, "oracle spread {}", hi / lo);
    let mu = natural_measure(generate_cantor_product(1, 3, &[0, 2], depth).unwrap(), alpha).unwrap();
    let reg = ahlfors_regularity_profile(&mu, pts.len(), &radii, RngSeed(0)).unwrap();
    assert_abs_diff_eq!(reg.c_min, lo, epsilon = 1e-9);
    assert_abs_diff_eq!(reg.c_max, hi, epsilon = 1e-9);
}

#[test]
fn full_square_ratio_by_direct_count() {
    let depth = 6;
    let mu = natural_measure(GridSet::full(2, 2, depth).unwrap(), 2.0).unwrap();
    let radii = [0.25, 0.125, 0.0625];
    let interior: Vec<usize> = (0..mu.support().len())
        .filter(|&i| {
            let c = mu.support().cell(i).center();
            (c[0] - 0.5).abs() < 0.2 && (c[1] - 0.5).abs() < 0.2
        })
        .collect();
    for &i in &interior {
        for &r in &radii {
            // (2r)^2 of unit mass spread uniformly
            let m = projlab::construct::ball_mass(&mu, i, r);
            assert_abs_diff_eq!(m / (r * r), 4.0, epsilon = 1e-9);
        }
    }
}

fn riesz_direct(pts: &[f64], s: f64, floor: f64) -> f64 {
    let w = 1.0 / pts.len() as f64;
    let mut total = 0.0;
    for &a in pts {
        for &b in pts {
            total += w * w * (a - b).abs().max(floor).powf(-s);
        }
    }
    total
}

#[test]
fn riesz_energy_matches_the_direct_double_sum() {
    let alpha = 2f64.ln() / 3f64.ln();
    for depth in [6, 8] {
        let pts = ternary_points(depth);
        let floor = 3f64.powi(-(depth as i32));
        let mu = natural_measure(generate_cantor_product(1, 3, &[0, 2], depth).unwrap(), alpha).unwrap();
        for s in [0.5, 0.8] {
            let want = riesz_direct(&pts, s, floor);
            let got = riesz_energy_natural(&mu, s).unwrap().value;
            assert!((got - want).abs() <= 1e-10 * want, "depth {depth} s {s}: {got} vs {want}");
        }
    }
}

/// `int_{-K}^{K} |x|^(s-1) cos^2(pi x) dx` from the power series of cos.
fn two_atom_series(s: f64, k: f64) -> f64 {
    // 2 int_0^K x^(s-1) (1 + cos 2 pi x) / 2 dx
    let mut osc = 0.0;
    let a = 2.0 * std::f64::consts::PI * k;
    let mut term = 1.0; // a^(2n) / (2n)!
    for n in 0..80 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        osc += sign * term / (2.0 * n as f64 + s);
        term *= a * a / ((2.0 * n as f64 + 1.0) * (2.0 * n as f64 + 2.0));
    }
    k.powf(s) / s + k.powf(s) * osc
}

#[test]
fn two_atom_fourier_side_matches_the_series() {
    let mu = DiscreteMeasure::new(1, vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![0.5, 0.5]).unwrap();
    for (s, k) in [(0.5, 2.0), (0.8, 3.0), (0.3, 1.5)] {
        let want = two_atom_series(s, k);
        let got = energy_fourier_side(
            &mu,
            s,
            FourierOptions {
                cutoff: k,
                radial_samples: 20_000,
                angular_samples: None,
            },
        )
        .unwrap();
        assert!((got - want).abs() <= 0.01 * want, "s {s} K {k}: {got} vs {want}");
    }
}

/// Simpson's rule for `int_{-K}^{K} |x|^(-1/2) |mu^(x)|^2 dx` after `x = t^2`.
fn cantor_fourier_simpson(pts: &[f64], k: f64, n: usize) -> f64 {
    let w = 1.0 / pts.len() as f64;
    let tau = 2.0 * std::f64::consts::PI;
    let f = |t: f64| {
        let x = t * t;
        let (re, im) = pts
            .iter()
            .fold((0.0, 0.0), |(re, im), &p| (re + w * (tau * x * p).cos(), im + w * (tau * x * p).sin()));
        re * re + im * im
    };
    let b = k.sqrt();
    let h = b / n as f64;
    let mut sum = f(0.0) + f(b);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    // two half-lines, dx / sqrt(x) = 2 dt
    2.0 * 2.0 * sum * h / 3.0
}

#[test]
fn cantor_fourier_side_matches_simpson() {
    let depth = 8;
    let pts = ternary_points(depth);
    let mu = natural_measure(generate_cantor_product(1, 3, &[0, 2], depth).unwrap(), 2f64.ln() / 3f64.ln()).unwrap();
    let disc = mu.to_discrete();
    for k in [3f64.powi(3), 3f64.powi(4)] {
        let want = cantor_fourier_simpson(&pts, k, 40_000);
        let got = energy_fourier_side(
            &disc,
            0.5,
            FourierOptions {
                cutoff: k,
                radial_samples: 40_000,
                angular_samples: None,
            },
        )
        .unwrap();
        assert!((got - want).abs() <= 0.01 * want, "K {k}: {got} vs {want}");
    }
}

#[test]
fn full_square_tubes_scale_linearly() {
    let mu = natural_measure(GridSet::full(2, 2, 6).unwrap(), 2.0).unwrap();
    let widths = [0.125, 0.0625, 0.03125];
    let tp = tube_exponent_profile(
        &mu,
        &widths,
        &TubeSearch {
            grid_density: 1.0,
            num_random_tubes: 500,
            seed: RngSeed(0),
        },
    )
    .unwrap();
    // a tube of thickness 2w across the square holds at most 2w * sqrt 2
    for (w, v) in widths.iter().zip(&tp.profile.values) {
        assert!(*v <= 2.0 * w * 2f64.sqrt() + 2.0 / 64.0, "w {w}: {v}");
    }
    let slope = tp.profile.slope().unwrap();
    assert!((0.9..=1.1).contains(&slope), "slope {slope}");
}

#[test]
fn full_cube_projects_to_near_uniform_bins() {
    let mu = natural_measure(GridSet::full(3, 2, 5).unwrap(), 3.0).unwrap();
    let p = project_measure(&mu, &Direction3::e3(), 2f64.powi(-4)).unwrap();
    let masses = p.bins.unwrap().masses;
    let inner = &masses[1..masses.len() - 1];
    let max = inner.iter().cloned().fold(0.0, f64::max);
    let min = inner.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 1.2, "{max} / {min}");
}

#[test]
fn cantor_product_projection_keeps_positive_length() {
    let fx = Fixture::cantor_product(3, 4, &[0, 3], 6).unwrap();
    let l = Direction3::from_vector([0.31, 0.52, 0.79]).unwrap();
    let p = project_set(&fx.set, &l).unwrap();
    let deltas: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
    let lp = projected_length_profile(&p, &deltas).unwrap();
    assert!(lp.profile.values.iter().all(|&v| v >= 0.2), "{:?}", lp.profile.values);
}
