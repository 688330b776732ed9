use projlab::analysis::{box_dimension_1d, box_dimension_grid, default_grid_levels, dyadic_scales};
use projlab::construct::{generate_cantor_product, generate_percolation_set};
use projlab::grid::GridSet;
use projlab::RngSeed;

fn main() -> projlab::Result<()> {
    let depth = 8;
    let cases = [
        ("full square", GridSet::full(2, 2, depth)?, 2.0),
        ("ternary Cantor", generate_cantor_product(1, 3, &[0, 2], depth)?, 2f64.ln() / 3f64.ln()),
        ("percolation M=4 N=8", generate_percolation_set(2, 4, 8, 6, RngSeed(0))?, 1.5),
    ];
    for (name, set, expected) in &cases {
        let est = box_dimension_grid(set, default_grid_levels(set.depth()))?;
        println!(
            "{name:<20} {:.4} (expected {expected:.4}), R^2 {:.4}, counts {:?}",
            est.slope, est.r_squared, est.counts
        );
    }

    let coords: Vec<f64> = (0..4096).map(|i| i as f64 / 4096.0).collect();
    let est = box_dimension_1d(&coords, &dyadic_scales(2, 10))?;
    println!("4096 evenly spaced points: {:.4}", est.slope);
    Ok(())
}
