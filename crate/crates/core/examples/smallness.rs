//! Smallness profile `rho -> gamma{L : |xi . L| <= rho}` at fixed probes and
//! the worst probe over the sphere.

use projlab::analysis::{dyadic_scales, smallness_profile, worst_case_smallness};
use projlab::construct::{generate_percolation_set, map_family_to_sphere, ProjectionFamily};
use projlab::{Direction3, RngSeed};

fn main() -> projlab::Result<()> {
    let rhos = dyadic_scales(2, 6);
    let set = generate_percolation_set(2, 4, 8, 5, RngSeed(0))?;
    let mapped = map_family_to_sphere(&set, 1.5)?;

    for xi in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        let p = smallness_profile(&mapped, &xi, &rhos)?;
        println!("xi {xi:?}: values {:.4?} slope {:.3?}", p.values, p.slope());
    }

    let wc = worst_case_smallness(&mapped, &rhos, 500, 2)?;
    println!("mapped family: worst slope {:.3} at {:.3?} ({} probes)", wc.slope, wc.xi.as_array(), wc.evaluated);

    // directions on a great circle are all orthogonal to its normal
    let planar = ProjectionFamily::great_circle(&Direction3::e3(), 500)?;
    let wc = worst_case_smallness(&planar, &rhos, 500, 2)?;
    println!("planar family: worst slope {:.3} at {:.3?}", wc.slope, wc.xi.as_array());
    Ok(())
}
