//! Sup of natural-measure mass over tubes, across widths.

use projlab::analysis::{tube_exponent_profile, TubeSearch};
use projlab::construct::{generate_percolation_set, natural_measure};
use projlab::grid::GridSet;
use projlab::RngSeed;

fn main() -> projlab::Result<()> {
    let widths: Vec<f64> = (1..=4).map(|k| 4f64.powi(-k)).collect();
    let search = TubeSearch {
        grid_density: 1.0,
        num_random_tubes: 2000,
        seed: RngSeed(0),
    };

    let sets = [
        ("percolation", natural_measure(generate_percolation_set(2, 4, 8, 5, RngSeed(0))?, 1.5)?),
        ("full square", natural_measure(GridSet::full(2, 2, 9)?, 2.0)?),
    ];
    for (name, mu) in &sets {
        let tp = tube_exponent_profile(mu, &widths, &search)?;
        println!("{name}:");
        for ((w, v), tube) in tp.profile.points().zip(&tp.best_tubes) {
            println!("  w = {w:<9.6} sup mass {v:.5}  (angle {:.3}, offset {:.3})", tube.angle, tube.offset);
        }
        let fit = tp.profile.require_fit()?;
        println!("  slope {:.3}, R^2 {:.4}", fit.slope, fit.r_squared);
    }
    Ok(())
}
