//! A family on one great circle projects a segment along its normal to a
//! point, so every estimate collapses to 0.

use projlab::analysis::{dyadic_scales, worst_case_smallness};
use projlab::construct::ProjectionFamily;
use projlab::projection::{mmp_experiment, Fixture, MmpConfig, MmpMode};
use projlab::{Direction3, RngSeed};

fn main() -> projlab::Result<()> {
    let family = ProjectionFamily::great_circle(&Direction3::e3(), 500)?;
    let segment = Fixture::axis_segment(2, 10, 2)?;
    let r = mmp_experiment(&family, &segment, &MmpConfig::new(MmpMode::Dimension, 500, RngSeed(0)))?;
    println!(
        "max projected dim {:.3}, pass fraction vs {} = {:.3}, meets threshold: {}",
        r.quantiles.max, r.reference_dim, r.pass_fraction, r.meets_threshold
    );

    let wc = worst_case_smallness(&family, &dyadic_scales(2, 6), 500, 2)?;
    println!("worst smallness slope {:.3} at {:.3?}", wc.slope, wc.xi.as_array());
    Ok(())
}
