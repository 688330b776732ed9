//! Project 3-D fixtures along directions of the mapped family and compare
//! the projected dimension with the fixture's.

use projlab::analysis::box_dimension_1d;
use projlab::construct::{generate_percolation_set, map_family_to_sphere};
use projlab::projection::{
    default_mmp_scales, mmp_experiment, project_measure, project_set, projected_length_profile, Fixture, MmpConfig, MmpMode,
};
use projlab::{Direction3, RngSeed};

fn main() -> projlab::Result<()> {
    let set = generate_percolation_set(2, 4, 8, 6, RngSeed(0))?;
    let family = map_family_to_sphere(&set, 1.5)?;

    let fx = Fixture::cantor_product(3, 9, &[0, 8], 5)?;
    let l = Direction3::from_vector([0.6, 0.0, 0.8])?;
    let p = project_set(&fx.set, &l)?;
    let est = box_dimension_1d(&p.coords, &default_mmp_scales(MmpMode::Dimension, &fx.set))?;
    println!("{}: projected dim along {:?} = {:.3}", fx.label, l.as_array(), est.slope);

    let report = mmp_experiment(&family, &fx, &MmpConfig::new(MmpMode::Dimension, 200, RngSeed(0)))?;
    let q = &report.quantiles;
    println!(
        "  200 family directions: pass {:.3}, estimates min {:.3} q10 {:.3} median {:.3} q90 {:.3}",
        report.pass_fraction, q.min, q.q10, q.median, q.q90
    );

    let big = Fixture::cantor_product(3, 4, &[0, 3], 6)?;
    let mu = projlab::construct::natural_measure(big.set.clone(), big.reference_dim)?;
    let pm = project_measure(&mu, &l, 2f64.powi(-6))?;
    println!("{}: {} bins at delta 2^-6", big.label, pm.bins.map_or(0, |b| b.masses.len()));
    let deltas = default_mmp_scales(MmpMode::Measure, &big.set);
    let lp = projected_length_profile(&project_set(&big.set, &l)?, &deltas)?;
    println!("  length {:.4?}, floor {:.3}", lp.profile.values, lp.floor);
    Ok(())
}
