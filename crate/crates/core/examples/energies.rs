//! Riesz energy by direct double sum and on the Fourier side, for the
//! ternary Cantor measure below and above its dimension.

use projlab::analysis::{energy_fourier_side, riesz_energy_natural, FourierOptions};
use projlab::construct::{generate_cantor_product, natural_measure};

fn main() -> projlab::Result<()> {
    let alpha = 2f64.ln() / 3f64.ln();
    for s in [0.5, 0.8] {
        print!("s = {s}: riesz");
        for depth in [4, 6, 8] {
            let mu = natural_measure(generate_cantor_product(1, 3, &[0, 2], depth)?, alpha)?;
            print!("  d{depth} {:.4}", riesz_energy_natural(&mu, s)?.value);
        }
        println!();

        let disc = natural_measure(generate_cantor_product(1, 3, &[0, 2], 8)?, alpha)?.to_discrete();
        print!("        fourier");
        for k in 3..=6 {
            let opts = FourierOptions {
                cutoff: 3f64.powi(k),
                radial_samples: 40_000,
                angular_samples: None,
            };
            print!("  K=3^{k} {:.4}", energy_fourier_side(&disc, s, opts)?);
        }
        println!();
    }
    Ok(())
}
