//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Every randomized criterion uses the
//! config default seed 0.

use std::time::{Duration, Instant};

use projlab::analysis::{
    box_dimension_grid, default_grid_levels, dyadic_scales, energy_fourier_side, riesz_energy_natural, worst_case_smallness,
    tube_exponent_profile, FourierOptions, TubeSearch,
};
use projlab::construct::{
    ahlfors_regularity_profile, generate_cantor_product, generate_percolation_set, map_family_to_sphere, natural_measure,
    NaturalMeasure, ProjectionFamily,
};
use projlab::grid::GridSet;
use projlab::pipeline::{run, ExperimentConfig, ExperimentKind};
use projlab::projection::{mmp_experiment, Fixture, MmpConfig, MmpMode};
use projlab::{Direction3, RngSeed};

const SEED: RngSeed = RngSeed(0);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn percolation() -> GridSet {
    generate_percolation_set(2, 4, 8, 6, SEED).unwrap()
}

fn powers(base: f64, lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| base.powi(-k)).collect()
}

fn a1_regularity() -> Verdict {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let reg = pool.install(|| {
        let mu = natural_measure(percolation(), 1.5).unwrap();
        ahlfors_regularity_profile(&mu, 200, &powers(4.0, 1, 5), SEED).unwrap()
    });
    let took = t.elapsed();
    let spread = reg.spread();
    verdict(
        spread <= 32.0 && took <= Duration::from_secs(60),
        format!(
            "C_max/c_min = {spread:.3} (c_min {:.3}, C_max {:.3}) <= 32; {:.2}s single-threaded <= 60s",
            reg.c_min,
            reg.c_max,
            took.as_secs_f64()
        ),
    )
}

fn a2_tubes() -> Verdict {
    let mu = natural_measure(percolation(), 1.5).unwrap();
    let t = Instant::now();
    let tp = tube_exponent_profile(
        &mu,
        &powers(4.0, 1, 5),
        &TubeSearch {
            grid_density: 1.0,
            num_random_tubes: 10_000,
            seed: SEED,
        },
    )
    .unwrap();
    let took = t.elapsed();
    let fit = tp.profile.require_fit().unwrap();
    verdict(
        (0.85..=1.15).contains(&fit.slope) && fit.r_squared >= 0.95 && took <= Duration::from_secs(300),
        format!(
            "slope {:.3} in [0.85, 1.15], R^2 {:.4} >= 0.95; values {:?}; {:.1}s <= 300s",
            fit.slope,
            fit.r_squared,
            tp.profile.values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            took.as_secs_f64()
        ),
    )
}

fn a3_smallness() -> Verdict {
    let fam = map_family_to_sphere(&percolation(), 1.5).unwrap();
    let wc = worst_case_smallness(&fam, &dyadic_scales(2, 6), 500, 2).unwrap();
    let xi = wc.xi.as_array();
    verdict(
        wc.slope >= 0.85,
        format!(
            "worst slope {:.3} >= 0.85 at xi = ({:.3}, {:.3}, {:.3}); {} probes",
            wc.slope, xi[0], xi[1], xi[2], wc.evaluated
        ),
    )
}

fn a4_dimension() -> Verdict {
    let fam = map_family_to_sphere(&percolation(), 1.5).unwrap();
    let fx = Fixture::cantor_product(3, 9, &[0, 8], 5).unwrap();
    let r = mmp_experiment(&fam, &fx, &MmpConfig::new(MmpMode::Dimension, 200, SEED)).unwrap();
    verdict(
        r.pass_fraction >= 0.9,
        format!(
            "{:.3} of 200 within 0.12 of {:.4} (>= 0.90); median estimate {:.3}, q10 {:.3}, q90 {:.3}",
            r.pass_fraction, fx.reference_dim, r.quantiles.median, r.quantiles.q10, r.quantiles.q90
        ),
    )
}

fn a5_measure() -> Verdict {
    let fam = map_family_to_sphere(&percolation(), 1.5).unwrap();
    let fx = Fixture::cantor_product(3, 4, &[0, 3], 6).unwrap();
    let r = mmp_experiment(&fam, &fx, &MmpConfig::new(MmpMode::Measure, 200, SEED)).unwrap();
    let min_floor = r.records.iter().filter_map(|x| x.floor).fold(f64::INFINITY, f64::min);
    let scales_ok = r.scales == powers(2.0, 3, 8);
    verdict(
        r.pass_fraction >= 0.9 && scales_ok,
        format!(
            "{:.3} of 200 with |length slope| <= 0.1 (>= 0.90); median slope {:.3}, q90 {:.3}; smallest floor {:.3}",
            r.pass_fraction, r.quantiles.median, r.quantiles.q90, min_floor
        ),
    )
}

fn a6_negative_control() -> Verdict {
    let normal = Direction3::e3();
    let fam = ProjectionFamily::great_circle(&normal, 500).unwrap();
    let seg = Fixture::axis_segment(2, 10, 2).unwrap();
    let r = mmp_experiment(&fam, &seg, &MmpConfig::new(MmpMode::Dimension, 500, SEED)).unwrap();
    let collapsed = r.records.iter().all(|x| x.estimate <= 0.1);
    let wc = worst_case_smallness(&fam, &dyadic_scales(2, 6), 500, 2).unwrap();
    // the control must be rejected by the A3 and A4 thresholds
    let fails_a3 = wc.slope < 0.85;
    let fails_a4 = !r.meets_threshold;
    verdict(
        collapsed && wc.slope <= 0.2 && fails_a3 && fails_a4,
        format!(
            "max projected dim {:.3} <= 0.1 over all 500; worst smallness slope {:.3} <= 0.2; pass fraction vs reference 1 = {:.3} (A4 rejects: {fails_a4}); A3 rejects: {fails_a3}",
            r.quantiles.max, wc.slope, r.pass_fraction
        ),
    )
}

fn a7_calibration() -> Verdict {
    let sq = box_dimension_grid(&GridSet::full(2, 2, 8).unwrap(), default_grid_levels(8)).unwrap();
    let cantor = generate_cantor_product(1, 3, &[0, 2], 8).unwrap();
    let ca = box_dimension_grid(&cantor, default_grid_levels(8)).unwrap();
    let target = 2f64.ln() / 3f64.ln();
    verdict(
        (sq.slope - 2.0).abs() <= 0.05 && (ca.slope - 0.631).abs() <= 0.05,
        format!(
            "full square {:.4} (2.00 +- 0.05); ternary Cantor {:.4} (0.631 +- 0.05, exact {target:.4})",
            sq.slope, ca.slope
        ),
    )
}

fn cantor_measure(depth: u32) -> NaturalMeasure {
    natural_measure(generate_cantor_product(1, 3, &[0, 2], depth).unwrap(), 2f64.ln() / 3f64.ln()).unwrap()
}

fn a8_energies() -> Verdict {
    let (m6, m8) = (cantor_measure(6), cantor_measure(8));
    let riesz = |m: &NaturalMeasure, s: f64| riesz_energy_natural(m, s).unwrap().value;
    let r05 = (riesz(&m6, 0.5), riesz(&m8, 0.5));
    let r08 = (riesz(&m6, 0.8), riesz(&m8, 0.8));
    let r05_change = (r05.1 - r05.0).abs() / r05.0;
    let r08_growth = r08.1 / r08.0;

    let disc = m8.to_discrete();
    let fourier = |s: f64, k: i32| {
        energy_fourier_side(
            &disc,
            s,
            FourierOptions {
                cutoff: 3f64.powi(k),
                radial_samples: 40_000,
                angular_samples: None,
            },
        )
        .unwrap()
    };
    let f05 = (fourier(0.5, 4), fourier(0.5, 5));
    // s = 0.8 compares K = 3^4 and 3^6, the same x9 resolution step as
    // depth 6 -> 8 on the Riesz side
    let f08 = (fourier(0.8, 4), fourier(0.8, 6));
    let f05_change = (f05.1 - f05.0).abs() / f05.0;
    let f08_growth = f08.1 / f08.0;
    verdict(
        r05_change < 0.10 && f05_change < 0.15 && r08_growth >= 1.5 && f08_growth >= 1.5,
        format!(
            "Riesz s=0.5 change {:.1}% (< 10%), s=0.8 growth x{r08_growth:.3} (>= 1.5); Fourier s=0.5 change {:.1}% (< 15%), s=0.8 growth x{f08_growth:.3} (>= 1.5)",
            100.0 * r05_change,
            100.0 * f05_change
        ),
    )
}

fn a9_determinism() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let mut mismatches = Vec::new();
    let mut files = 0;
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::new(kind);
        cfg.seed = 11;
        cfg.set.depth = 5;
        cfg.tube.random_tubes = 2000;
        cfg.smallness.grid_size = 150;
        cfg.mmp.num_dirs = 60;
        cfg.mmp.enforce = false;
        cfg.fixture.depth = 4;
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for (workers, rep) in [(1, 0), (1, 1), (8, 0), (8, 1)] {
            cfg.workers = Some(workers);
            let dir = root.path().join(format!("{}-{workers}-{rep}", kind.name()));
            cfg.output_dir = Some(dir.clone());
            let report = run(&cfg).unwrap();
            let data: Vec<(String, Vec<u8>)> = report
                .manifest
                .iter()
                .map(|m| (m.path.clone(), std::fs::read(dir.join(&m.path)).unwrap()))
                .collect();
            match &reference {
                None => {
                    files += data.len();
                    reference = Some(data);
                }
                Some(r) if *r != data => mismatches.push(format!("{} workers={workers} rep={rep}", kind.name())),
                Some(_) => {}
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{} kinds x (workers 1, 8) x 2 runs; {files} data files compared byte-for-byte; mismatches: {mismatches:?}",
            ExperimentKind::ALL.len()
        ),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("A1", "regularity", a1_regularity),
        ("A2", "tube condition", a2_tubes),
        ("A3", "smallness uniformity", a3_smallness),
        ("A4", "dimension conservation", a4_dimension),
        ("A5", "measure part", a5_measure),
        ("A6", "negative control", a6_negative_control),
        ("A7", "estimator calibration", a7_calibration),
        ("A8", "energy consistency", a8_energies),
        ("A9", "determinism", a9_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let t = Instant::now();
        let v = check();
        println!(
            "{id} {} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
