use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use projlab::pipeline::{emit_plots, run, ExperimentConfig, ExperimentKind, OUTPUT_DIR_ENV};

/// Finite-resolution experiments on restricted projection families.
///
/// Every run subcommand reads an optional TOML config, applies flag and
/// `--param key=value` overrides on top, validates, and writes CSV profiles,
/// JSON sidecars, SVG plots and run_report.json to the output directory.
///
/// Exit codes: 0 success, 1 failed threshold check, 2 invalid input,
/// 3 I/O or resource failure.
#[derive(Parser)]
#[command(name = "projlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a percolation set and its regularity profile.
    GenSet(RunArgs),
    /// Generate a direction family (mapped, great-circle or uniform).
    GenFamily(RunArgs),
    /// Sup of tube masses across widths.
    TubeProfile(RunArgs),
    /// Smallness profile of a family at one probe.
    Smallness(RunArgs),
    /// Worst probe of the smallness profile over the sphere.
    WorstCase(RunArgs),
    /// Project a 3-D fixture onto one direction.
    Project(RunArgs),
    /// Projection experiment over sampled family directions.
    MmpRun(RunArgs),
    /// Estimator calibration table.
    Calibrate(RunArgs),
    /// Render SVG log-log plots from profile CSVs.
    EmitPlots {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Directory for the SVGs; defaults to next to each CSV.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short, env = OUTPUT_DIR_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_plots: bool,
    /// set.dim
    #[arg(long)]
    dim: Option<u8>,
    /// set.base (M)
    #[arg(long)]
    base: Option<u32>,
    /// set.branching (N)
    #[arg(long)]
    branching: Option<u32>,
    /// set.depth
    #[arg(long)]
    depth: Option<u32>,
    /// set.alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// family.source: mapped, great-circle or uniform-sphere
    #[arg(long)]
    family: Option<String>,
    /// mmp.num_dirs
    #[arg(long)]
    num_dirs: Option<usize>,
    /// mmp.mode: dimension or measure
    #[arg(long)]
    mode: Option<String>,
    /// Any config key, e.g. `tube.widths=[0.25,0.0625,0.015625]`.
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<String> {
        let mut o = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push(format!("{k}={v}"));
            }
        };
        put("output_dir", self.out.as_ref().map(|p| toml_string(&p.to_string_lossy())));
        put("seed", self.seed.map(|v| v.to_string()));
        put("workers", self.workers.map(|v| v.to_string()));
        put("plots", self.no_plots.then(|| "false".to_string()));
        put("set.dim", self.dim.map(|v| v.to_string()));
        put("set.base", self.base.map(|v| v.to_string()));
        put("set.branching", self.branching.map(|v| v.to_string()));
        put("set.depth", self.depth.map(|v| v.to_string()));
        put("set.alpha", self.alpha.map(|v| format!("{v:?}")));
        put("family.source", self.family.as_deref().map(toml_string));
        put("mmp.num_dirs", self.num_dirs.map(|v| v.to_string()));
        put("mmp.mode", self.mode.as_deref().map(toml_string));
        o.extend(self.params.iter().cloned());
        o
    }
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn execute(cli: Cli) -> projlab::Result<()> {
    let (kind, args) = match cli.command {
        Command::EmitPlots { files, out } => {
            for p in emit_plots(&files, out.as_deref())? {
                println!("{}", p.display());
            }
            return Ok(());
        }
        Command::GenSet(a) => (ExperimentKind::GenSet, a),
        Command::GenFamily(a) => (ExperimentKind::GenFamily, a),
        Command::TubeProfile(a) => (ExperimentKind::TubeProfile, a),
        Command::Smallness(a) => (ExperimentKind::Smallness, a),
        Command::WorstCase(a) => (ExperimentKind::WorstCase, a),
        Command::Project(a) => (ExperimentKind::Project, a),
        Command::MmpRun(a) => (ExperimentKind::MmpRun, a),
        Command::Calibrate(a) => (ExperimentKind::Calibrate, a),
    };
    let config = ExperimentConfig::load_as(kind, args.config.as_deref(), &args.overrides())?;
    let report = run(&config)?;
    println!("{} -> {}", kind.name(), report.output_dir.display());
    for m in &report.manifest {
        println!("  {}  {}", &m.sha256[..12], m.path);
    }
    if let Some(c) = &report.check {
        println!("check: {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    report.into_result().map(|_| ())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
