//! Executes one [`ExperimentConfig`] end to end.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind, FamilySource, FixtureKind};
use super::output::{object_hash, ManifestEntry, OutputSink};
use super::plot::{render_svg, ProfileData};
use crate::analysis::{
    box_dimension_1d, box_dimension_grid, default_grid_levels, riesz_energy_natural, smallness_profile, tube_exponent_profile,
    worst_case_smallness, ExponentProfile, TubeSearch,
};
use crate::construct::{
    ahlfors_regularity_profile, generate_cantor_product, generate_percolation_set, map_family_to_sphere, natural_measure,
    ProjectionFamily, REGULARITY_SPREAD_LIMIT,
};
use crate::error::{Error, Result};
use crate::geometry::Direction3;
use crate::grid::GridSet;
use crate::projection::{
    default_mmp_scales, mmp_experiment, project_measure, project_set, projected_length_profile, Fixture, MmpConfig, MmpMode,
};
use crate::seed::RngSeed;
use crate::sphere::fibonacci_hemisphere;

/// Name of the report file; it is not part of the manifest.
pub const REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTiming {
    pub phase: String,
    pub seconds: f64,
}

/// Threshold verdict of `mmp-run` and `calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    /// Hash of the config with `output_dir` and `workers` cleared, so it
    /// identifies the outputs rather than where and how fast they were made.
    pub input_hash: String,
    pub output_dir: PathBuf,
    pub timings: Vec<PhaseTiming>,
    pub manifest: Vec<ManifestEntry>,
    pub check: Option<CheckOutcome>,
}

impl RunReport {
    /// `Err(AcceptanceFailed)` when the run carried a failed check.
    pub fn into_result(self) -> Result<RunReport> {
        match &self.check {
            Some(c) if !c.passed => Err(Error::AcceptanceFailed(c.detail.clone())),
            _ => Ok(self),
        }
    }
}

/// Hash of everything that determines the data outputs.
pub fn input_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output_dir = None;
    c.workers = None;
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    object_hash("config", &bytes)
}

#[derive(Default)]
struct Phases(Vec<PhaseTiming>);

impl Phases {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        self.0.push(PhaseTiming {
            phase: phase.to_string(),
            seconds: t.elapsed().as_secs_f64(),
        });
        Ok(out)
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    sink: OutputSink,
    phases: Phases,
}

impl Ctx<'_> {
    fn seed(&self) -> RngSeed {
        RngSeed(self.cfg.seed)
    }

    fn profile(&mut self, stem: &str, profile: &ExponentProfile, parameters: serde_json::Value) -> Result<()> {
        let sidecar = self.sink.write_profile(stem, profile, parameters, self.cfg.seed)?;
        if self.cfg.plots && !profile.is_empty() && profile.values.iter().any(|v| *v > 0.0) {
            let data = ProfileData {
                scales: profile.scales.clone(),
                values: profile.values.clone(),
            };
            let svg = render_svg(stem, &data, Some(&sidecar))?;
            self.sink.write(&format!("{stem}.svg"), svg.as_bytes())?;
        }
        Ok(())
    }

    fn percolation_set(&mut self) -> Result<GridSet> {
        let s = self.cfg.set.clone();
        let seed = self.seed();
        self.phases
            .time("generate-set", || generate_percolation_set(s.dim, s.base, s.branching, s.depth, seed))
    }

    fn family(&mut self) -> Result<ProjectionFamily> {
        let f = self.cfg.family.clone();
        match f.source {
            FamilySource::Mapped => {
                let set = self.percolation_set()?;
                let alpha = self.cfg.set.alpha();
                self.phases.time("map-family", || map_family_to_sphere(&set, alpha))
            }
            FamilySource::GreatCircle => ProjectionFamily::great_circle(&Direction3::new(f.normal)?, f.size),
            FamilySource::UniformSphere => ProjectionFamily::uniform_sphere(f.size),
        }
    }

    fn fixture(&self) -> Result<Fixture> {
        let f = &self.cfg.fixture;
        match f.kind {
            FixtureKind::CantorProduct => Fixture::cantor_product(3, f.base, &f.pattern, f.depth),
            FixtureKind::AxisSegment => Fixture::axis_segment(f.base, f.depth, f.axis),
        }
    }
}

/// Validates `config`, runs it on a pool of `workers` threads, writes every
/// output plus `run_report.json`, and returns the report. A failed
/// threshold check is reported in `check`, not as an error; see
/// [`RunReport::into_result`].
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let out = config.resolved_output_dir();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::ResourceLimit(format!("cannot start worker pool: {e}")))?;
    let mut ctx = Ctx {
        cfg: config,
        sink: OutputSink::create(&out)?,
        phases: Phases::default(),
    };
    let check = pool.install(|| match config.kind {
        ExperimentKind::GenSet => gen_set(&mut ctx).map(|_| None),
        ExperimentKind::GenFamily => gen_family(&mut ctx).map(|_| None),
        ExperimentKind::TubeProfile => tube_profile(&mut ctx).map(|_| None),
        ExperimentKind::Smallness => smallness(&mut ctx).map(|_| None),
        ExperimentKind::WorstCase => worst_case(&mut ctx).map(|_| None),
        ExperimentKind::Project => project(&mut ctx).map(|_| None),
        ExperimentKind::MmpRun => mmp_run(&mut ctx),
        ExperimentKind::Calibrate => calibrate(&mut ctx).map(Some),
    })?;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        input_hash: input_hash(config),
        output_dir: out.clone(),
        timings: ctx.phases.0,
        manifest: ctx.sink.into_manifest(),
        check,
    };
    let path = out.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

fn gen_set(ctx: &mut Ctx) -> Result<()> {
    let set = ctx.percolation_set()?;
    let s = ctx.cfg.set.clone();
    let mu = natural_measure(set.clone(), s.alpha())?;
    ctx.sink.write("set.grid", set.to_text().as_bytes())?;
    ctx.sink.write("set.gset", &set.to_binary())?;
    ctx.sink.write_json(
        "set.json",
        &json!({
            "dim": s.dim,
            "base": s.base,
            "branching": s.branching,
            "depth": s.depth,
            "alpha": s.alpha(),
            "cells": set.len(),
            "total_mass": mu.total_mass(),
            "seed": ctx.cfg.seed,
        }),
    )?;
    let r = ctx.cfg.regularity.clone();
    if r.centers > 0 {
        let radii = r.radii.unwrap_or_else(|| s.default_scales());
        let seed = ctx.seed();
        let reg = ctx
            .phases
            .time("regularity", || ahlfors_regularity_profile(&mu, r.centers, &radii, seed))?;
        ctx.sink.write_csv(
            "regularity.csv",
            &["radius", "min_ratio", "max_ratio"],
            reg.per_radius.iter().map(|p| (p.radius, p.min_ratio, p.max_ratio)),
        )?;
        ctx.sink.write_json(
            "regularity.json",
            &json!({
                "spread": reg.spread(),
                "spread_limit": REGULARITY_SPREAD_LIMIT,
                "regular": reg.is_regular(REGULARITY_SPREAD_LIMIT),
                "profile": reg,
            }),
        )?;
    }
    Ok(())
}

fn gen_family(ctx: &mut Ctx) -> Result<()> {
    let fam = ctx.family()?;
    ctx.sink.write_csv(
        "family.csv",
        &["x", "y", "z", "weight"],
        fam.iter().map(|(d, w)| (d.as_array()[0], d.as_array()[1], d.as_array()[2], w)),
    )?;
    ctx.sink.write_json(
        "family.json",
        &json!({
            "source": ctx.cfg.family.source,
            "size": fam.len(),
            "total_weight": fam.total_weight(),
        }),
    )?;
    Ok(())
}

fn tube_profile(ctx: &mut Ctx) -> Result<()> {
    let set = ctx.percolation_set()?;
    let s = ctx.cfg.set.clone();
    let t = ctx.cfg.tube.clone();
    let widths = t.widths.clone().unwrap_or_else(|| s.default_scales());
    let mu = natural_measure(set, s.alpha())?;
    let search = TubeSearch {
        grid_density: t.grid_density,
        num_random_tubes: t.random_tubes,
        seed: ctx.seed(),
    };
    let tp = ctx.phases.time("tube-search", || tube_exponent_profile(&mu, &widths, &search))?;
    ctx.profile(
        "tube_profile",
        &tp.profile,
        json!({
            "set": s,
            "alpha": s.alpha(),
            "widths": widths,
            "grid_density": t.grid_density,
            "random_tubes": t.random_tubes,
            "grid_sizes": tp.grid_sizes,
            "best_tubes": tp.best_tubes,
        }),
    )
}

fn smallness(ctx: &mut Ctx) -> Result<()> {
    let fam = ctx.family()?;
    let p = ctx.cfg.smallness.clone();
    let prof = ctx.phases.time("smallness", || smallness_profile(&fam, &p.xi, &p.rhos))?;
    ctx.profile(
        "smallness",
        &prof,
        json!({ "family": ctx.cfg.family, "xi": p.xi, "rhos": p.rhos, "family_size": fam.len() }),
    )
}

fn worst_case(ctx: &mut Ctx) -> Result<()> {
    let fam = ctx.family()?;
    let p = ctx.cfg.smallness.clone();
    let wc = ctx
        .phases
        .time("worst-case", || worst_case_smallness(&fam, &p.rhos, p.grid_size, p.refine_steps))?;
    ctx.profile(
        "worst_case",
        &wc.profile,
        json!({
            "family": ctx.cfg.family,
            "family_size": fam.len(),
            "rhos": p.rhos,
            "grid_size": p.grid_size,
            "refine_steps": p.refine_steps,
            "xi": wc.xi,
            "worst_slope": wc.slope,
            "evaluated": wc.evaluated,
        }),
    )?;
    let grid = fibonacci_hemisphere(p.grid_size);
    ctx.sink.write_csv(
        "worst_case_grid.csv",
        &["x", "y", "z", "slope"],
        grid.iter()
            .zip(&wc.grid_slopes)
            .map(|(d, s)| (d.as_array()[0], d.as_array()[1], d.as_array()[2], *s)),
    )?;
    Ok(())
}

fn project(ctx: &mut Ctx) -> Result<()> {
    let fx = ctx.fixture()?;
    let pp = ctx.cfg.projection.clone();
    let dir = Direction3::new(pp.direction)?;
    let proj = ctx.phases.time("project", || project_set(&fx.set, &dir))?;
    let scales = pp.scales.unwrap_or_else(|| default_mmp_scales(MmpMode::Dimension, &fx.set));
    let deltas = pp.deltas.unwrap_or_else(|| default_mmp_scales(MmpMode::Measure, &fx.set));
    let est = box_dimension_1d(&proj.coords, &scales)?;
    let counts = ExponentProfile::new(est.scales.clone(), est.counts.iter().map(|&c| c as f64).collect());
    ctx.profile(
        "projection_counts",
        &counts,
        json!({ "fixture": fx.label, "direction": dir, "dimension": est.slope, "r_squared": est.r_squared, "halfwidth": est.halfwidth }),
    )?;
    let lp = projected_length_profile(&proj, &deltas)?;
    ctx.profile(
        "projection_length",
        &lp.profile,
        json!({ "fixture": fx.label, "direction": dir, "floor": lp.floor, "has_positive_floor": lp.has_positive_floor }),
    )?;
    let alpha = fx.reference_dim.max(f64::MIN_POSITIVE);
    let finest = *deltas.last().unwrap_or(&proj.resolution);
    let mu = natural_measure(fx.set.clone(), alpha)?;
    let binned = project_measure(&mu, &dir, finest.max(proj.resolution))?;
    if let Some(b) = &binned.bins {
        ctx.sink.write_csv(
            "projected_measure.csv",
            &["bin_left", "mass"],
            b.masses
                .iter()
                .enumerate()
                .map(|(k, m)| ((b.first_bin + k as i64) as f64 * b.delta, *m)),
        )?;
    }
    ctx.sink.write_json(
        "projection.json",
        &json!({
            "fixture": fx.label,
            "reference_dim": fx.reference_dim,
            "direction": dir,
            "dimension": est,
            "length_floor": lp.floor,
            "has_positive_floor": lp.has_positive_floor,
        }),
    )?;
    Ok(())
}

fn mmp_run(ctx: &mut Ctx) -> Result<Option<CheckOutcome>> {
    let fam = ctx.family()?;
    let fx = ctx.fixture()?;
    let m = ctx.cfg.mmp.clone();
    let config = MmpConfig {
        mode: m.mode,
        num_dirs: m.num_dirs,
        seed: ctx.seed(),
        dimension_tolerance: m.dimension_tolerance,
        slope_tolerance: m.slope_tolerance,
        pass_threshold: m.pass_threshold,
        scales: m.scales.clone(),
    };
    let report = ctx.phases.time("mmp", || mmp_experiment(&fam, &fx, &config))?;
    ctx.sink.write_json("mmp_report.json", &report)?;
    ctx.sink.write_csv(
        "mmp_summary.csv",
        &["rank", "family_index", "x", "y", "z", "estimate", "pass"],
        report.records.iter().map(|r| {
            let d = r.direction.as_array();
            (r.rank, r.family_index, d[0], d[1], d[2], r.estimate, r.pass)
        }),
    )?;
    if !m.enforce {
        return Ok(None);
    }
    Ok(Some(CheckOutcome {
        passed: report.meets_threshold,
        detail: format!(
            "{} of {} directions pass ({:.3}); threshold {}",
            report.records.iter().filter(|r| r.pass).count(),
            report.records.len(),
            report.pass_fraction,
            m.pass_threshold
        ),
    }))
}

/// One line of the calibration table. Rows without a target are
/// informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub fixture: String,
    pub quantity: String,
    pub depth: u32,
    pub value: f64,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

fn calibrate(ctx: &mut Ctx) -> Result<CheckOutcome> {
    let c = ctx.cfg.calibrate.clone();
    let mut rows = Vec::new();
    let target_row = |fixture: &str, depth: u32, value: f64, target: f64| CalibrationRow {
        fixture: fixture.into(),
        quantity: "box_dimension".into(),
        depth,
        value,
        target: Some(target),
        tolerance: Some(c.tolerance),
        pass: Some((value - target).abs() <= c.tolerance),
    };
    let square = GridSet::full(2, 2, c.square_depth)?;
    let est = ctx
        .phases
        .time("square", || box_dimension_grid(&square, default_grid_levels(c.square_depth)))?;
    rows.push(target_row("full-square", c.square_depth, est.slope, 2.0));

    let cantor_dim = 2f64.ln() / 3f64.ln();
    let cantor = generate_cantor_product(1, 3, &[0, 2], c.cantor_depth)?;
    let est = ctx
        .phases
        .time("cantor", || box_dimension_grid(&cantor, default_grid_levels(c.cantor_depth)))?;
    rows.push(target_row("ternary-cantor", c.cantor_depth, est.slope, cantor_dim));

    ctx.phases.time("riesz", || {
        for depth in [c.cantor_depth - 2, c.cantor_depth] {
            let mu = natural_measure(generate_cantor_product(1, 3, &[0, 2], depth)?, cantor_dim)?;
            for s in [0.5, 0.8] {
                rows.push(CalibrationRow {
                    fixture: "ternary-cantor".into(),
                    quantity: format!("riesz_energy s={s}"),
                    depth,
                    value: riesz_energy_natural(&mu, s)?.value,
                    target: None,
                    tolerance: None,
                    pass: None,
                });
            }
        }
        let top = c.square_depth.min(6);
        for depth in [top - 2, top] {
            let mu = natural_measure(GridSet::full(2, 2, depth)?, 2.0)?;
            rows.push(CalibrationRow {
                fixture: "full-square".into(),
                quantity: "riesz_energy s=1".into(),
                depth,
                value: riesz_energy_natural(&mu, 1.0)?.value,
                target: None,
                tolerance: None,
                pass: None,
            });
        }
        Ok(())
    })?;

    ctx.sink.write_csv(
        "calibration.csv",
        &["fixture", "quantity", "depth", "value", "target", "tolerance", "pass"],
        rows.iter()
            .map(|r| (&r.fixture, &r.quantity, r.depth, r.value, r.target, r.tolerance, r.pass)),
    )?;
    ctx.sink.write_json("calibration.json", &rows)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.pass == Some(false))
        .map(|r| format!("{} {} = {:.4} (target {:.4})", r.fixture, r.quantity, r.value, r.target.unwrap_or(f64::NAN)))
        .collect();
    Ok(CheckOutcome {
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            "all calibration targets met".into()
        } else {
            failed.join("; ")
        },
    })
}
