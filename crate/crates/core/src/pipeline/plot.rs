//! Log-log SVG figures for `scale,value` profile CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::analysis::fit_log_log;
use crate::error::{Error, Result};

use super::output::ProfileSidecar;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 64.0;

/// A parsed profile CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileData {
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
}

/// Reads `scale,value` rows. Errors carry the 1-based line number.
pub fn read_profile_csv(path: &Path) -> Result<ProfileData> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_profile_csv(file)
}

pub fn parse_profile_csv<R: std::io::Read>(input: R) -> Result<ProfileData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(csv_parse_error)?.clone();
    if headers.len() != 2 || &headers[0] != "scale" || &headers[1] != "value" {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `scale,value`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut data = ProfileData {
        scales: Vec::new(),
        values: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(csv_parse_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = rec.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {name}"),
            })?;
            let x: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("{name} `{raw}` is not a number"),
            })?;
            if !x.is_finite() || x < 0.0 || (name == "scale" && x == 0.0) {
                return Err(Error::Parse {
                    line,
                    message: format!("{name} `{raw}` is out of range"),
                });
            }
            Ok(x)
        };
        data.scales.push(field(0, "scale")?);
        data.values.push(field(1, "value")?);
    }
    Ok(data)
}

fn csv_parse_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Slope and intercept of the line to draw: the sidecar's when one is
/// given, else a fresh fit on the positive points.
fn line_for(data: &ProfileData, sidecar: Option<&ProfileSidecar>) -> Option<(f64, f64, Option<f64>)> {
    if let Some(s) = sidecar {
        return match (s.slope, s.intercept) {
            (Some(m), Some(b)) => Some((m, b, s.r_squared)),
            _ => None,
        };
    }
    fit_log_log(&data.scales, &data.values, 2)
        .ok()
        .map(|f| (f.slope, f.intercept, Some(f.r_squared)))
}

/// Renders one figure: a marker per positive point, the fitted line, and a
/// slope annotation to 3 decimals.
pub fn render_svg(title: &str, data: &ProfileData, sidecar: Option<&ProfileSidecar>) -> Result<String> {
    if data.scales.is_empty() {
        return Err(Error::InvalidParameter {
            field: "profile",
            message: format!("`{title}` has no data rows; nothing to plot"),
        });
    }
    let pts: Vec<(f64, f64)> = data
        .scales
        .iter()
        .zip(&data.values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&s, &v)| (s.log10(), v.log10()))
        .collect();
    if pts.is_empty() {
        return Err(Error::InvalidParameter {
            field: "profile",
            message: format!("`{title}` has no positive values; nothing to plot on log axes"),
        });
    }
    let line = line_for(data, sidecar);
    let (mut x0, mut x1) = bounds(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1));
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        svg,
        r#"<path class="axis" d="M{l} {t} V{b} H{r}" fill="none" stroke="black"/>"#,
        l = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = sx(k as f64);
        let _ = writeln!(
            svg,
            r#"<path class="tick" d="M{x:.2} {b} v5" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">1e{k}</text>"#,
            b = HEIGHT - MARGIN,
            ty = HEIGHT - MARGIN + 18.0
        );
    }
    for k in (y0.ceil() as i32)..=(y1.floor() as i32) {
        let y = sy(k as f64);
        let _ = writeln!(
            svg,
            r#"<path class="tick" d="M{l} {y:.2} h-5" stroke="black"/><text x="{tx}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">1e{k}</text>"#,
            l = MARGIN,
            tx = MARGIN - 8.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">scale</text><text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">value</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for &(x, y) in &pts {
        let _ = writeln!(svg, r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(x), sy(y));
    }
    let annotation = match line {
        Some((m, b, r2)) => {
            let (la, lb) = bounds(pts.iter().map(|p| p.0));
            // the fit is in natural logs, the axes in log10
            let b10 = b / std::f64::consts::LN_10;
            let ya = b10 + m * la;
            let yb = b10 + m * lb;
            let _ = writeln!(
                svg,
                r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
                sx(la),
                sy(ya),
                sx(lb),
                sy(yb)
            );
            match r2 {
                Some(r2) => format!("slope = {m:.3}, R² = {r2:.3}"),
                None => format!("slope = {m:.3}"),
            }
        }
        None => "slope = n/a".to_string(),
    };
    let _ = writeln!(
        svg,
        r#"<text class="slope" x="{}" y="{}" text-anchor="end">{annotation}</text>"#,
        WIDTH - MARGIN,
        MARGIN - 10.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = (*hi - *lo).max(0.2);
    let mid = 0.5 * (*lo + *hi);
    *lo = mid - 0.55 * span;
    *hi = mid + 0.55 * span;
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The sidecar `<stem>.json` next to `<stem>.csv`, when present.
pub fn read_sidecar(csv_path: &Path) -> Result<Option<ProfileSidecar>> {
    let path = csv_path.with_extension("json");
    match std::fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).map(Some).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: format!("{}: {e}", path.display()),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// One `<stem>.svg` per CSV, written to `out_dir` or next to the input.
pub fn emit_plots(csv_paths: &[PathBuf], out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(csv_paths.len());
    for path in csv_paths {
        let data = read_profile_csv(path).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })?;
        let sidecar = read_sidecar(path)?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        let svg = render_svg(stem, &data, sidecar.as_ref())?;
        let target = match out_dir {
            Some(d) => {
                std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
                d.join(format!("{stem}.svg"))
            }
            None => path.with_extension("svg"),
        };
        std::fs::write(&target, svg).map_err(|e| Error::io(&target, e))?;
        written.push(target);
    }
    Ok(written)
}
