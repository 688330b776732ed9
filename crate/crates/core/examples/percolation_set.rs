//! Generate a fractal percolation set, check regularity of its natural
//! measure and write it out in both grid formats.
//!
//!     cargo run --example percolation_set -- [seed]

use projlab::construct::{ahlfors_regularity_profile, generate_percolation_set, natural_measure, REGULARITY_SPREAD_LIMIT};
use projlab::RngSeed;

fn main() -> projlab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let (base, branching, depth) = (4, 8, 6);
    let set = generate_percolation_set(2, base, branching, depth, RngSeed(seed))?;
    let alpha = (branching as f64).ln() / (base as f64).ln();
    println!("{} cells at depth {depth}, alpha = {alpha}", set.len());

    for level in 1..=3 {
        println!("  level {level}: {} surviving ancestors", set.ancestor_count(level)?);
    }

    let text = set.to_text();
    let binary = set.to_binary();
    println!("text {} bytes, binary {} bytes", text.len(), binary.len());

    let mu = natural_measure(set, alpha)?;
    let radii: Vec<f64> = (1..depth as i32).map(|k| 4f64.powi(-k)).collect();
    let reg = ahlfors_regularity_profile(&mu, 200, &radii, RngSeed(seed))?;
    for r in &reg.per_radius {
        println!("  r = {:<10.6} ratio in [{:.3}, {:.3}]", r.radius, r.min_ratio, r.max_ratio);
    }
    println!(
        "spread {:.3}, regular at {REGULARITY_SPREAD_LIMIT}: {}",
        reg.spread(),
        reg.is_regular(REGULARITY_SPREAD_LIMIT)
    );
    Ok(())
}
