//! Scenario files, S-parameter CSV and map output.
//!
//! Every writer goes through [`write_atomic`]: the file is assembled in a
//! temporary sibling and renamed into place, so a failed run never leaves a
//! partial file behind.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsm::IndicatorMap;
use crate::em::{Anomaly, AntennaArray, MediumParams};
use crate::error::{DsmError, Result};
use crate::forward::{SParamSet, Scenario, ScenarioOptions, SearchDomain};
use crate::geometry::Point2;

/// Array section of a scenario file: either the polar shorthand or explicit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArraySpec {
    Polar { n: usize, radius_m: f64, tx_angle_rad: f64 },
    Explicit { tx: Point2, rx: Vec<Point2> },
}

impl ArraySpec {
    pub fn build(&self) -> Result<AntennaArray> {
        match self {
            ArraySpec::Polar { n, radius_m, tx_angle_rad } => AntennaArray::circular(*n, *radius_m, *tx_angle_rad),
            ArraySpec::Explicit { tx, rx } => AntennaArray::explicit(*tx, rx.clone()),
        }
    }
}

/// On-disk scenario schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub medium: MediumParams,
    pub array: ArraySpec,
    pub anomalies: Vec<Anomaly>,
    pub search: SearchDomain,
    #[serde(default)]
    pub options: ScenarioOptions,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let array = self.array.build()?;
        Scenario::new(self.medium, array, self.anomalies, self.search, self.options)
    }
}

/// Parses and validates a scenario from JSON text. `origin` only labels errors.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
        let mut msg = e.to_string();
        if msg.contains("did not match any variant of untagged enum ArraySpec") {
            msg = format!(
                "field `array` must be {{n, radius_m, tx_angle_rad}} or {{tx, rx}} ({})",
                msg.split(" at line").nth(1).map(|s| format!("at line{s}")).unwrap_or_default()
            );
        }
        DsmError::parse(origin, msg)
    })?;
    file.into_scenario()
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DsmError::io(path, e))?;
    parse_scenario(&text, path)
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| DsmError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| DsmError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| DsmError::io(path, e))?;
    tmp.persist(path).map_err(|e| DsmError::io(path, e.error))?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| DsmError::parse(path, format!("line {line}: bad number {field:?}: {e}")))
}

pub fn sparams_to_csv(s: &SParamSet) -> String {
    let mut out = String::from("n,re,im\n");
    for (i, v) in s.values.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", i + 1, fmt_f64(v.re), fmt_f64(v.im));
    }
    out
}

pub fn write_sparams(s: &SParamSet, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path, sparams_to_csv(s).as_bytes())
}

pub fn parse_sparams(text: &str, origin: &Path) -> Result<SParamSet> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "n,re,im" => {}
        _ => return Err(DsmError::parse(origin, "expected header `n,re,im`")),
    }
    let mut values = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(DsmError::parse(origin, format!("line {lineno}: expected 3 fields")));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| DsmError::parse(origin, format!("line {lineno}: bad receiver index {:?}", fields[0])))?;
        if n != values.len() + 1 {
            return Err(DsmError::parse(
                origin,
                format!("line {lineno}: receiver index {n}, expected {}", values.len() + 1),
            ));
        }
        values.push(Complex64::new(parse_f64(fields[1], origin, lineno)?, parse_f64(fields[2], origin, lineno)?));
    }
    Ok(SParamSet::new(values))
}

pub fn read_sparams(path: impl AsRef<Path>) -> Result<SParamSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DsmError::io(path, e))?;
    parse_sparams(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Csv,
    Pgm,
}

pub fn map_to_csv(map: &IndicatorMap) -> String {
    let mut out = String::from("x,y,value\n");
    for (p, v) in map.grid.points.iter().zip(&map.values) {
        let _ = writeln!(out, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(*v));
    }
    out
}

/// Linear quantization of `[0, 1]` onto `0..=255`.
pub fn quantize(value: f64) -> u8 {
    (value.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Plain (P2) PGM over the bounding square of the grid; cells outside the
/// disk are 0. Rows run from largest `y` down, pixel lines wrap at 70 chars.
pub fn map_to_pgm(map: &IndicatorMap) -> String {
    let w = map.grid.raster_width();
    let mut pixels = vec![0u8; w * w];
    for (idx, &v) in map.values.iter().enumerate() {
        let (row, col) = map.grid.raster_cell(idx);
        pixels[row * w + col] = quantize(v);
    }
    let mut out = format!("P2\n{w} {w}\n255\n");
    for row in pixels.chunks(w) {
        let mut line = String::new();
        for px in row {
            let token = px.to_string();
            if !line.is_empty() && line.len() + 1 + token.len() > 70 {
                out.push_str(&line);
                out.push('\n');
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&token);
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn write_map(map: &IndicatorMap, path: impl AsRef<Path>, format: MapFormat) -> Result<()> {
    if map.is_empty() {
        return Err(DsmError::Validation("refusing to write an empty map".into()));
    }
    let text = match format {
        MapFormat::Csv => map_to_csv(map),
        MapFormat::Pgm => map_to_pgm(map),
    };
    write_atomic(path, text.as_bytes())
}

/// Rows `(x, y, value)` of a map CSV.
pub fn read_map_csv(path: impl AsRef<Path>) -> Result<Vec<(Point2, f64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DsmError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "x,y,value")) => {}
        _ => return Err(DsmError::parse(path, "expected header `x,y,value`")),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(DsmError::parse(path, format!("line {}: expected 3 fields", idx + 1)));
            }
            let p = Point2::new(parse_f64(f[0], path, idx + 1)?, parse_f64(f[1], path, idx + 1)?);
            Ok((p, parse_f64(f[2], path, idx + 1)?))
        })
        .collect()
}

/// Header, dimensions and pixels of a plain PGM.
pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| DsmError::io(path, e))?;
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("P2") {
        return Err(DsmError::parse(path, "not a plain PGM (missing P2)"));
    }
    let mut next_num = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| DsmError::parse(path, format!("missing or bad {what}")))
    };
    let (w, h, maxval) = (next_num("width")?, next_num("height")?, next_num("maxval")?);
    if maxval != 255 {
        return Err(DsmError::parse(path, format!("maxval {maxval}, expected 255")));
    }
    let pixels = (0..w * h).map(|_| next_num("pixel").map(|v| v as u8)).collect::<Result<Vec<_>>>()?;
    Ok((w, h, pixels))
}
