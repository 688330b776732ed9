//! Experiment configuration: a TOML document with one table per module.
//!
//! Every key is optional except `kind`; unknown keys are rejected. Values
//! are checked against the owning operation's preconditions by
//! [`ExperimentConfig::validate`] before any work starts, and the error names
//! the offending key.
//!
//! ```toml
//! kind = "tube-profile"
//! seed = 7
//! output_dir = "out/tubes"   # else $PROJLAB_OUT, else ./projlab-out
//! workers = 4
//!
//! [set]
//! base = 4
//! branching = 8
//! depth = 6
//!
//! [tube]
//! widths = [0.25, 0.0625, 0.015625]
//! random_tubes = 10000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::construct::MAX_CELLS;
use crate::error::{Error, Result};
use crate::geometry::{Direction3, UNIT_TOLERANCE};
use crate::projection::MmpMode;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PROJLAB_OUT";
/// Output directory when neither the config nor the environment names one.
pub const FALLBACK_OUTPUT_DIR: &str = "projlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenSet,
    GenFamily,
    TubeProfile,
    Smallness,
    WorstCase,
    Project,
    MmpRun,
    Calibrate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::GenSet,
        ExperimentKind::GenFamily,
        ExperimentKind::TubeProfile,
        ExperimentKind::Smallness,
        ExperimentKind::WorstCase,
        ExperimentKind::Project,
        ExperimentKind::MmpRun,
        ExperimentKind::Calibrate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GenSet => "gen-set",
            ExperimentKind::GenFamily => "gen-family",
            ExperimentKind::TubeProfile => "tube-profile",
            ExperimentKind::Smallness => "smallness",
            ExperimentKind::WorstCase => "worst-case",
            ExperimentKind::Project => "project",
            ExperimentKind::MmpRun => "mmp-run",
            ExperimentKind::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Rayon worker threads; outputs do not depend on it.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Write an SVG next to every profile CSV.
    #[serde(default = "yes")]
    pub plots: bool,
    #[serde(default)]
    pub set: SetParams,
    #[serde(default)]
    pub regularity: RegularityParams,
    #[serde(default)]
    pub family: FamilyParams,
    #[serde(default)]
    pub tube: TubeParams,
    #[serde(default)]
    pub smallness: SmallnessParams,
    #[serde(default)]
    pub fixture: FixtureParams,
    #[serde(default)]
    pub projection: ProjectionParams,
    #[serde(default)]
    pub mmp: MmpParams,
    #[serde(default)]
    pub calibrate: CalibrateParams,
}

fn yes() -> bool {
    true
}

/// Percolation set: every kept cell keeps `branching` of its `base^dim`
/// children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetParams {
    pub dim: u8,
    pub base: u32,
    pub branching: u32,
    pub depth: u32,
    /// Defaults to `log branching / log base`.
    pub alpha: Option<f64>,
}

impl Default for SetParams {
    fn default() -> Self {
        SetParams {
            dim: 2,
            base: 4,
            branching: 8,
            depth: 6,
            alpha: None,
        }
    }
}

impl SetParams {
    pub fn alpha(&self) -> f64 {
        self.alpha
            .unwrap_or_else(|| (self.branching as f64).ln() / (self.base as f64).ln())
    }

    /// `base^-1 .. base^-(depth-1)`.
    pub fn default_scales(&self) -> Vec<f64> {
        (1..self.depth as i32).map(|k| (self.base as f64).powi(-k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularityParams {
    /// 0 skips the regularity profile in `gen-set`.
    pub centers: usize,
    pub radii: Option<Vec<f64>>,
}

impl Default for RegularityParams {
    fn default() -> Self {
        RegularityParams {
            centers: 200,
            radii: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySource {
    /// The `[set]` percolation set pushed onto the sphere.
    Mapped,
    /// `size` equally weighted directions on the great circle `normal^perp`.
    GreatCircle,
    /// `size` quasi-uniform directions on the whole sphere.
    UniformSphere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    pub source: FamilySource,
    pub size: usize,
    pub normal: [f64; 3],
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            source: FamilySource::Mapped,
            size: 500,
            normal: [0.0, 0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TubeParams {
    /// Tube radii, strictly decreasing; default `base^-1 .. base^-(depth-1)`.
    pub widths: Option<Vec<f64>>,
    pub grid_density: f64,
    pub random_tubes: usize,
}

impl Default for TubeParams {
    fn default() -> Self {
        TubeParams {
            widths: None,
            grid_density: 1.0,
            random_tubes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SmallnessParams {
    pub rhos: Vec<f64>,
    /// Probe for `smallness`.
    pub xi: [f64; 3],
    /// Hemisphere grid size for `worst-case`.
    pub grid_size: usize,
    pub refine_steps: usize,
}

impl Default for SmallnessParams {
    fn default() -> Self {
        SmallnessParams {
            rhos: (2..=6).map(|k| 2f64.powi(-k)).collect(),
            xi: [1.0, 0.0, 0.0],
            grid_size: 500,
            refine_steps: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// Cells whose base-`base` digits all lie in `pattern`, per axis.
    CantorProduct,
    /// The cells along one coordinate axis through the origin corner.
    AxisSegment,
}

/// The 3-D set that `project` and `mmp-run` project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixtureParams {
    pub kind: FixtureKind,
    pub base: u32,
    pub pattern: Vec<u32>,
    pub depth: u32,
    pub axis: usize,
}

impl Default for FixtureParams {
    fn default() -> Self {
        FixtureParams {
            kind: FixtureKind::CantorProduct,
            base: 9,
            pattern: vec![0, 8],
            depth: 5,
            axis: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionParams {
    pub direction: [f64; 3],
    /// Box sides for the projected dimension estimate.
    pub scales: Option<Vec<f64>>,
    /// Neighbourhood scales for the length profile.
    pub deltas: Option<Vec<f64>>,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            direction: [0.6, 0.0, 0.8],
            scales: None,
            deltas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmpParams {
    pub mode: MmpMode,
    pub num_dirs: usize,
    pub scales: Option<Vec<f64>>,
    pub dimension_tolerance: f64,
    pub slope_tolerance: f64,
    pub pass_threshold: f64,
    /// Fail the run (exit 1) when the pass fraction is below threshold.
    pub enforce: bool,
}

impl Default for MmpParams {
    fn default() -> Self {
        MmpParams {
            mode: MmpMode::Dimension,
            num_dirs: 200,
            scales: None,
            dimension_tolerance: crate::projection::DIMENSION_TOLERANCE,
            slope_tolerance: crate::projection::NO_DECAY_TOLERANCE,
            pass_threshold: crate::projection::PASS_THRESHOLD,
            enforce: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrateParams {
    pub square_depth: u32,
    pub cantor_depth: u32,
    pub tolerance: f64,
}

impl Default for CalibrateParams {
    fn default() -> Self {
        CalibrateParams {
            square_depth: 8,
            cantor_depth: 8,
            tolerance: 0.05,
        }
    }
}

fn bad(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// All defaults for `kind`.
    pub fn new(kind: ExperimentKind) -> Self {
        let mut t = toml::Table::new();
        t.insert("kind".into(), toml::Value::String(kind.name().into()));
        Self::from_table(t).expect("defaults deserialize")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| bad("config", e.to_string()))?;
        Self::from_table(table)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| bad("config", e.message().to_string()))
    }

    /// Reads `path` (if any), applies `key=value` overrides, then
    /// deserializes. Nothing is validated yet.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = read_table(path)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    /// Like [`load`](Self::load) for a fixed kind; a config file naming a
    /// different kind is an error.
    pub fn load_as(kind: ExperimentKind, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = read_table(path)?;
        if let Some(k) = table.get("kind") {
            if k.as_str() != Some(kind.name()) {
                return Err(bad("kind", format!("config file says {k}, command is `{}`", kind.name())));
            }
        }
        table.insert("kind".into(), toml::Value::String(kind.name().into()));
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let c = Self::from_table(table)?;
        if c.kind != kind {
            return Err(bad("kind", format!("cannot override the kind of a `{}` run", kind.name())));
        }
        Ok(c)
    }

    /// Output directory: the config's, else `$PROJLAB_OUT`, else
    /// `./projlab-out`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUTPUT_DIR))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(bad("workers", "must be at least 1"));
        }
        use ExperimentKind::*;
        let needs_set = matches!(self.kind, GenSet | TubeProfile)
            || (matches!(self.kind, GenFamily | Smallness | WorstCase | MmpRun) && self.family.source == FamilySource::Mapped);
        if needs_set {
            self.validate_set()?;
        }
        if matches!(self.kind, GenFamily | Smallness | WorstCase | MmpRun) {
            self.validate_family()?;
        }
        match self.kind {
            GenSet => {
                if self.regularity.centers > 0 {
                    let radii = self.regularity.radii.clone().unwrap_or_else(|| self.set.default_scales());
                    let side = (self.set.base as f64).powi(-(self.set.depth as i32));
                    let diam = (self.set.dim as f64).sqrt();
                    in_open_range("regularity.radii", &radii, side, diam)?;
                    if radii.is_empty() {
                        return Err(bad("regularity.radii", "no radius fits between the cell size and the diameter; raise set.depth or set regularity.centers = 0"));
                    }
                }
            }
            TubeProfile => {
                if self.set.dim != 2 {
                    return Err(bad("set.dim", "tube profiles need a planar set (dim = 2)"));
                }
                let widths = self.tube.widths.clone().unwrap_or_else(|| self.set.default_scales());
                let side = (self.set.base as f64).powi(-(self.set.depth as i32));
                strictly_decreasing("tube.widths", &widths)?;
                in_open_range("tube.widths", &widths, side, 1.0)?;
                if widths.len() < 3 {
                    return Err(bad("tube.widths", "need at least 3 widths to fit a slope"));
                }
                if !(self.tube.grid_density > 0.0 && self.tube.grid_density.is_finite()) {
                    return Err(bad("tube.grid_density", "must be positive"));
                }
            }
            Smallness | WorstCase => {
                strictly_decreasing("smallness.rhos", &self.smallness.rhos)?;
                in_open_range("smallness.rhos", &self.smallness.rhos, 0.0, f64::INFINITY)?;
                if self.kind == Smallness {
                    unit("smallness.xi", &self.smallness.xi)?;
                } else if self.smallness.grid_size < 100 {
                    return Err(bad("smallness.grid_size", format!("need at least 100 probes, got {}", self.smallness.grid_size)));
                }
            }
            Project | MmpRun => {
                self.validate_fixture()?;
                if self.kind == Project {
                    unit("projection.direction", &self.projection.direction)?;
                    for (field, list) in [("projection.scales", &self.projection.scales), ("projection.deltas", &self.projection.deltas)] {
                        if let Some(l) = list {
                            strictly_decreasing(field, l)?;
                            in_open_range(field, l, 0.0, f64::INFINITY)?;
                        }
                    }
                } else {
                    let m = &self.mmp;
                    if m.num_dirs == 0 {
                        return Err(bad("mmp.num_dirs", "must be at least 1"));
                    }
                    if self.family.source != FamilySource::Mapped && m.num_dirs > self.family.size {
                        return Err(bad("mmp.num_dirs", format!("{} exceeds family.size {}", m.num_dirs, self.family.size)));
                    }
                    if self.family.source == FamilySource::Mapped {
                        let cells = (self.set.branching as u64).checked_pow(self.set.depth).unwrap_or(u64::MAX);
                        if m.num_dirs as u64 > cells {
                            return Err(bad("mmp.num_dirs", format!("{} exceeds the family size {cells}", m.num_dirs)));
                        }
                    }
                    if let Some(s) = &m.scales {
                        strictly_decreasing("mmp.scales", s)?;
                        in_open_range("mmp.scales", s, 0.0, f64::INFINITY)?;
                    }
                    if !(m.dimension_tolerance >= 0.0) {
                        return Err(bad("mmp.dimension_tolerance", "must be nonnegative"));
                    }
                    if !(m.slope_tolerance >= 0.0) {
                        return Err(bad("mmp.slope_tolerance", "must be nonnegative"));
                    }
                    if !(0.0..=1.0).contains(&m.pass_threshold) {
                        return Err(bad("mmp.pass_threshold", "must lie in [0, 1]"));
                    }
                }
            }
            Calibrate => {
                let c = &self.calibrate;
                if !(4..=11).contains(&c.square_depth) {
                    return Err(bad("calibrate.square_depth", "must lie in 4..=11"));
                }
                if !(4..=16).contains(&c.cantor_depth) {
                    return Err(bad("calibrate.cantor_depth", "must lie in 4..=16"));
                }
                if !(c.tolerance > 0.0) {
                    return Err(bad("calibrate.tolerance", "must be positive"));
                }
            }
            GenFamily => {}
        }
        Ok(())
    }

    fn validate_set(&self) -> Result<()> {
        let s = &self.set;
        if !(1..=3).contains(&s.dim) {
            return Err(bad("set.dim", format!("must be 1, 2 or 3, got {}", s.dim)));
        }
        if s.base < 2 {
            return Err(bad("set.base", format!("must be at least 2, got {}", s.base)));
        }
        if s.depth == 0 {
            return Err(bad("set.depth", "must be at least 1"));
        }
        let children = (s.base as u64).pow(s.dim as u32);
        if s.branching == 0 || s.branching as u64 > children {
            return Err(bad("set.branching", format!("must lie in 1..={children} (base^dim), got {}", s.branching)));
        }
        let cells = (s.branching as u64).checked_pow(s.depth);
        if cells.is_none_or(|c| c > MAX_CELLS) {
            return Err(Error::ResourceLimit(format!(
                "set.branching^set.depth = {}^{} cells exceeds the limit {MAX_CELLS}",
                s.branching, s.depth
            )));
        }
        let a = s.alpha();
        if !(a > 0.0 && a <= s.dim as f64) {
            return Err(bad("set.alpha", format!("must lie in (0, {}], got {a}", s.dim)));
        }
        Ok(())
    }

    fn validate_family(&self) -> Result<()> {
        match self.family.source {
            FamilySource::Mapped => {
                if self.set.dim != 2 {
                    return Err(bad("set.dim", "the mapped family needs a planar set (dim = 2)"));
                }
            }
            FamilySource::GreatCircle | FamilySource::UniformSphere => {
                if self.family.size == 0 {
                    return Err(bad("family.size", "must be at least 1"));
                }
                if self.family.source == FamilySource::GreatCircle {
                    unit("family.normal", &self.family.normal)?;
                }
            }
        }
        Ok(())
    }

    fn validate_fixture(&self) -> Result<()> {
        let f = &self.fixture;
        if f.base < 2 {
            return Err(bad("fixture.base", "must be at least 2"));
        }
        if f.depth == 0 {
            return Err(bad("fixture.depth", "must be at least 1"));
        }
        let per_axis = match f.kind {
            FixtureKind::CantorProduct => {
                if f.pattern.is_empty() {
                    return Err(bad("fixture.pattern", "must be nonempty"));
                }
                if let Some(&d) = f.pattern.iter().find(|&&d| d >= f.base) {
                    return Err(bad("fixture.pattern", format!("digit {d} is not below base {}", f.base)));
                }
                f.pattern.len() as u64
            }
            FixtureKind::AxisSegment => {
                if f.axis > 2 {
                    return Err(bad("fixture.axis", format!("must be 0, 1 or 2, got {}", f.axis)));
                }
                1
            }
        };
        let cells = match f.kind {
            FixtureKind::CantorProduct => per_axis.checked_pow(3 * f.depth),
            FixtureKind::AxisSegment => (f.base as u64).checked_pow(f.depth),
        };
        if cells.is_none_or(|c| c > MAX_CELLS) {
            return Err(Error::ResourceLimit(format!("fixture would have more than {MAX_CELLS} cells")));
        }
        if (f.base as u64).checked_pow(f.depth).is_none_or(|c| c > 1 << 40) {
            return Err(bad("fixture.depth", "grid too fine for 64-bit indices"));
        }
        Ok(())
    }
}

fn read_table(path: Option<&Path>) -> Result<toml::Table> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            text.parse::<toml::Table>()
                .map_err(|e| bad("config", format!("{}: {e}", p.display())))
        }
        None => Ok(toml::Table::new()),
    }
}

fn strictly_decreasing(field: &str, v: &[f64]) -> Result<()> {
    if v.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(bad(field, "must be strictly decreasing"));
    }
    Ok(())
}

fn in_open_range(field: &str, v: &[f64], lo: f64, hi: f64) -> Result<()> {
    if let Some(x) = v.iter().find(|&&x| !(x > lo && x < hi)) {
        return Err(bad(field, format!("{x} is outside ({lo}, {hi})")));
    }
    Ok(())
}

fn unit(field: &str, v: &[f64; 3]) -> Result<()> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(bad(field, format!("must be a unit vector, norm is {n}")));
    }
    Direction3::new(*v).map(|_| ()).map_err(|e| bad(field, e.to_string()))
}

/// Sets a dotted key such as `tube.random_tubes=500`. The value is read as a
/// TOML value, falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| bad(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(bad(key, "empty key in override"));
    }
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("nonempty key");
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| bad(key, format!("`{p}` is not a table")))?;
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}
