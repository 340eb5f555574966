//! Text serialization of realizations and curve tables.

use std::io::{self, Write};

use thiserror::Error;

use crate::geometry::{LineParams, Point2};
use crate::sampler::{CoxPoint, Realization, GENERATOR_NAME};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("missing metadata key {0}")]
    MissingKey(&'static str),
}

/// Writes `real` as `[metadata]`, `[lines]` and `[points]` CSV sections.
/// `metadata` is written first, followed by the window description.
pub fn write_realization<W: Write>(real: &Realization, metadata: &[(String, String)], out: &mut W) -> io::Result<()> {
    writeln!(out, "[metadata]")?;
    writeln!(out, "key,value")?;
    for (k, v) in metadata {
        writeln!(out, "{k},{v}")?;
    }
    writeln!(out, "generator,{GENERATOR_NAME}")?;
    writeln!(out, "sim_radius,{}", real.sim_radius)?;
    writeln!(out, "obs_radius,{}", real.obs_radius)?;
    writeln!(out, "palm,{}", real.palm)?;
    writeln!(out, "[lines]")?;
    writeln!(out, "line_index,r,theta")?;
    for (i, l) in real.lines.iter().enumerate() {
        writeln!(out, "{i},{},{}", l.r(), l.theta())?;
    }
    writeln!(out, "[points]")?;
    writeln!(out, "point_index,line_index,t,x,y")?;
    for (i, p) in real.points.iter().enumerate() {
        writeln!(out, "{i},{},{},{},{}", p.line_index, p.t, p.position.x, p.position.y)?;
    }
    Ok(())
}

/// Parses the output of [`write_realization`], returning the realization
/// and every metadata pair in file order.
pub fn read_realization(text: &str) -> Result<(Realization, Vec<(String, String)>), ParseError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Metadata,
        Lines,
        Points,
    }
    let mut section = Section::None;
    let mut header_pending = false;
    let mut seen = [false; 3];
    let mut metadata = Vec::new();
    let mut lines = Vec::new();
    let mut points = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let bad = |message: String| ParseError::Malformed { line, message };
        let row = raw.trim_end_matches('\r');
        if row.is_empty() {
            continue;
        }
        let next = match row {
            "[metadata]" => Some(Section::Metadata),
            "[lines]" => Some(Section::Lines),
            "[points]" => Some(Section::Points),
            _ => None,
        };
        if let Some(s) = next {
            seen[match s {
                Section::Metadata => 0,
                Section::Lines => 1,
                _ => 2,
            }] = true;
            section = s;
            header_pending = true;
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let num = |i: usize| -> Result<f64, ParseError> {
            fields
                .get(i)
                .ok_or_else(|| bad(format!("expected at least {} fields", i + 1)))?
                .parse::<f64>()
                .map_err(|e| bad(format!("field {}: {e}", i + 1)))
        };
        let index = |i: usize| -> Result<usize, ParseError> {
            fields
                .get(i)
                .ok_or_else(|| bad(format!("expected at least {} fields", i + 1)))?
                .parse::<usize>()
                .map_err(|e| bad(format!("field {}: {e}", i + 1)))
        };
        match section {
            Section::None => return Err(bad("data before the first section".into())),
            Section::Metadata => {
                let (k, v) = row.split_once(',').ok_or_else(|| bad("expected key,value".into()))?;
                metadata.push((k.to_string(), v.to_string()));
            }
            Section::Lines => {
                if index(0)? != lines.len() {
                    return Err(bad("line indices must be consecutive".into()));
                }
                lines.push(LineParams::new(num(1)?, num(2)?).map_err(|e| bad(e.to_string()))?);
            }
            Section::Points => {
                if index(0)? != points.len() {
                    return Err(bad("point indices must be consecutive".into()));
                }
                points.push(CoxPoint {
                    line_index: index(1)?,
                    t: num(2)?,
                    position: Point2::new(num(3)?, num(4)?),
                });
            }
        }
    }
    for (flag, name) in seen.iter().zip(["metadata", "lines", "points"]) {
        if !flag {
            return Err(ParseError::MissingSection(name));
        }
    }
    let lookup = |key: &'static str| -> Result<&str, ParseError> {
        metadata
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or(ParseError::MissingKey(key))
    };
    let float = |key: &'static str| -> Result<f64, ParseError> {
        lookup(key)?.parse().map_err(|_| ParseError::MissingKey(key))
    };
    let real = Realization {
        lines,
        points,
        sim_radius: float("sim_radius")?,
        obs_radius: float("obs_radius")?,
        palm: lookup("palm")? == "true",
    };
    Ok((real, metadata))
}

/// Writes a CSV table: `# key=value` comment lines, the header row, then one
/// row per entry.
pub fn write_table<W: Write>(
    out: &mut W,
    comments: &[(String, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> io::Result<()> {
    for (k, v) in comments {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
