//! Drive the pipeline from a TOML config, as the CLI does.

use projlab::pipeline::{run, ExperimentConfig};

const CONFIG: &str = r#"
kind = "smallness"
seed = 5

[set]
depth = 5

[smallness]
xi = [0.0, 1.0, 0.0]
"#;

fn main() -> projlab::Result<()> {
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let dir = std::env::temp_dir().join("projlab-example");
    cfg.output_dir = Some(dir.clone());
    let report = run(&cfg)?;
    println!("input hash {}", report.input_hash);
    for m in &report.manifest {
        println!("  {:>8} B  {}  {}", m.bytes, &m.sha256[..16], m.path);
    }
    for t in &report.timings {
        println!("  {:<12} {:.3}s", t.phase, t.seconds);
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
