//! Line-set files and report documents.
//!
//! A line-set file is
//!
//! ```text
//! field p=2 k=3 poly=1,1,0,1
//! ambient dim=7 mode=twisted
//! 1 0 0 0 0 0 0 0 0 1 0 0 0 0 0 0
//! ...
//! ```
//!
//! with one line per record: two spanning points, eight field-element indices each.
//! `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::characterize::CharacterizationVerdict;
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec, Mode};
use crate::projspace::{Subspace, Vec8, N, ZERO_VEC};
use crate::subspaces::{PropertyReport, SupportedCensus};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug)]
pub struct LineSet {
    pub field: Arc<Field>,
    pub lines: Vec<Subspace>,
}

pub fn write_line_set(field: &Field, lines: &[Subspace]) -> String {
    let mut out = String::with_capacity(lines.len() * 40 + 64);
    out.push_str(&field.spec().header());
    out.push('\n');
    let _ = writeln!(out, "ambient dim=7 mode={}", field.mode().as_str());
    for l in lines {
        let mut first = true;
        for row in &l.rows()[..2] {
            for c in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}", c.index());
            }
        }
        out.push('\n');
    }
    out
}

pub fn save_line_set(path: &Path, field: &Field, lines: &[Subspace]) -> Result<()> {
    std::fs::write(path, write_line_set(field, lines))?;
    Ok(())
}

pub fn load_line_set(path: &Path) -> Result<LineSet> {
    parse_line_set(&std::fs::read_to_string(path)?)
}

/// Parses a line-set file; errors carry 1-based physical line numbers.
pub fn parse_line_set(text: &str) -> Result<LineSet> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("").trim()))
        .filter(|(_, s)| !s.is_empty());

    let (header_no, header) = rows
        .next()
        .ok_or_else(|| Error::parse(1, "missing field header"))?;
    let with_line = |e: Error, n: usize| match e {
        Error::Parse { message, .. } => Error::parse(n, message),
        other => Error::parse(n, other.to_string()),
    };

    let mut mode: Option<Mode> = None;
    let mut ambient = false;
    let mut records = Vec::new();
    for (n, s) in rows {
        let first = s.split_whitespace().next().unwrap_or("");
        if first == "ambient" || first.starts_with("mode=") {
            if !records.is_empty() {
                return Err(Error::parse(n, "header attribute after the first record"));
            }
            for word in s.split_whitespace() {
                match word.split_once('=') {
                    None if word == "ambient" => ambient = true,
                    Some(("dim", "7")) => {}
                    Some(("dim", d)) => {
                        return Err(Error::parse(
                            n,
                            format!("ambient dimension {d}, only 7 is supported"),
                        ))
                    }
                    Some(("mode", m)) => {
                        mode = Some(m.parse().map_err(|e| with_line(e, n))?);
                    }
                    _ => return Err(Error::parse(n, format!("unexpected header word `{word}`"))),
                }
            }
            continue;
        }
        records.push((n, s));
    }
    if !ambient {
        return Err(Error::parse(header_no, "missing `ambient dim=7` line"));
    }
    let spec = FieldSpec::parse_header(header, mode).map_err(|e| with_line(e, header_no))?;
    let field = Arc::new(Field::new(spec));
    let f = &*field;

    let mut seen: FxHashMap<Subspace, usize> = FxHashMap::default();
    let mut lines = Vec::with_capacity(records.len());
    for (n, s) in records {
        let nums = s
            .split_whitespace()
            .map(|w| {
                w.parse::<u64>()
                    .map_err(|_| Error::parse(n, format!("not a field-element index: `{w}`")))
            })
            .collect::<Result<Vec<u64>>>()?;
        if nums.len() != 2 * N {
            return Err(Error::parse(
                n,
                format!("expected {} integers, got {}", 2 * N, nums.len()),
            ));
        }
        let mut pts = [ZERO_VEC; 2];
        for (j, &x) in nums.iter().enumerate() {
            pts[j / N][j % N] = f
                .element(x)
                .map_err(|_| Error::parse(n, format!("index {x} outside GF({})", f.order())))?;
        }
        if pts.iter().any(|v: &Vec8| v.iter().all(|c| c.is_zero())) {
            return Err(Error::parse(n, "zero point"));
        }
        let line = Subspace::from_vectors(f, &pts).map_err(|e| Error::parse(n, e.to_string()))?;
        if line.rank() != 2 {
            return Err(Error::parse(n, "the two points are proportional"));
        }
        if let Some(prev) = seen.insert(line, n) {
            return Err(Error::parse(
                n,
                format!("duplicate of the line on line {prev}"),
            ));
        }
        lines.push(line);
    }
    Ok(LineSet { field, lines })
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything that determines a run's output; no clocks, no host details.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub q: u32,
    pub mode: Mode,
    pub seed: u64,
    pub budget: Option<usize>,
    /// whether supported subspaces were classified
    pub classified: bool,
    pub samples_4dp: usize,
    pub lines: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub metadata: RunMetadata,
    pub all_passed: bool,
    pub properties: Vec<PropertyReport>,
    /// supported-subspace class histogram per dimension
    pub classes: Option<BTreeMap<usize, BTreeMap<String, usize>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub metadata: RunMetadata,
    pub census: SupportedCensus,
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterizeReport {
    pub metadata: RunMetadata,
    pub label: String,
    pub characterization: CharacterizationVerdict,
}

pub fn class_histogram(c: &SupportedCensus) -> BTreeMap<usize, BTreeMap<String, usize>> {
    c.classes
        .iter()
        .map(|(d, m)| {
            (
                *d,
                m.iter()
                    .map(|(t, n)| (t.as_str().to_string(), *n))
                    .collect(),
            )
        })
        .collect()
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// `property,count,multiplicity`, one row per histogram entry.
pub fn verify_csv(r: &VerifyReport) -> String {
    let mut out = String::from("property,count,multiplicity\n");
    for p in &r.properties {
        for (count, mult) in &p.histogram {
            let _ = writeln!(out, "{},{},{}", p.property.as_str(), count, mult);
        }
    }
    out
}

/// `dim,lines,class,records`
pub fn classify_csv(r: &ClassifyReport) -> String {
    let mut out = String::from("dim,lines,class,records\n");
    let c = &r.census;
    for (dim, hist) in &c.line_counts {
        for (lines, n) in hist {
            let tag =
                crate::subspaces::ClassTag::expected(*dim, *lines as u64, r.metadata.q as u64)
                    .map(|t| t.as_str())
                    .unwrap_or("unclassified");
            let _ = writeln!(out, "{dim},{lines},{tag},{n}");
        }
    }
    out
}

/// `stage,check,passed`
pub fn characterize_csv(r: &CharacterizeReport) -> String {
    let mut out = String::from("stage,check,passed\n");
    for s in &r.characterization.stages {
        let _ = writeln!(out, "{},{},{}", s.stage, s.check, s.passed);
    }
    let _ = writeln!(
        out,
        "verdict,{},{}",
        r.label,
        r.characterization.is_natural()
    );
    out
}
