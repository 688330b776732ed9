//! Map a planar set onto the sphere and look at the resulting directions.

use projlab::construct::{generate_percolation_set, map_family_to_sphere};
use projlab::geometry::{bilipschitz_sample, great_circle_preimage, sphere_map};
use projlab::RngSeed;

fn main() -> projlab::Result<()> {
    println!("F(0, 0)   = {:?}", sphere_map(&[0.0, 0.0])?.as_array());
    println!("F(0.1, 0) = {:?}", sphere_map(&[0.1, 0.0])?.as_array());

    let (lo, hi) = bilipschitz_sample(100_000, RngSeed(0))?;
    println!("distortion over 1e5 pairs in [{lo:.4}, {hi:.4}]");

    for nu in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.6, 0.0, 0.8]] {
        match great_circle_preimage(&nu)? {
            Some(seg) => println!("nu {nu:?}: preimage from {:?} to {:?}", seg.start, seg.end),
            None => println!("nu {nu:?}: misses the patch"),
        }
    }

    let set = generate_percolation_set(2, 4, 8, 4, RngSeed(0))?;
    let fam = map_family_to_sphere(&set, 1.5)?;
    let lowest = fam.directions().iter().map(|d| d.as_array()[2]).fold(1.0, f64::min);
    println!(
        "{} directions, total weight {:.6}, lowest z {lowest:.4}",
        fam.len(),
        fam.total_weight()
    );
    Ok(())
}
