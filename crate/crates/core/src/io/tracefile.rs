//! Plain-text trace files: a `#`-prefixed `key: value` header, one row of
//! column names, then comma-separated numeric rows.
//!
//! ```text
//! # kind: rt
//! # wafer_id: W1
//! # length: 1 mm
//! temperature_K,resistance_ohm
//! 2.0,0.0
//! ```
//!
//! A column is named after its quantity with an optional `_<unit>` suffix.
//! A `<quantity>_unit` header key overrides the unit for that quantity.
//! Values are converted to SI on load and written back in SI.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::units::{parse_quantity, Dimension, UnitConverter};
use crate::error::{Error, Result};
use crate::film::{FilmGeometry, RtTrace};
use crate::junction::{AreaSample, IvTrace, SweepDirection};
use crate::resonator::S21Trace;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceKind {
    Rt,
    Iv,
    S21,
    Decay,
    Ramsey,
    Areas,
    QiPower,
    QiTemp,
    Anneal,
    Exposure,
}

impl TraceKind {
    pub const ALL: [TraceKind; 10] = [
        TraceKind::Rt,
        TraceKind::Iv,
        TraceKind::S21,
        TraceKind::Decay,
        TraceKind::Ramsey,
        TraceKind::Areas,
        TraceKind::QiPower,
        TraceKind::QiTemp,
        TraceKind::Anneal,
        TraceKind::Exposure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Rt => "rt",
            TraceKind::Iv => "iv",
            TraceKind::S21 => "s21",
            TraceKind::Decay => "decay",
            TraceKind::Ramsey => "ramsey",
            TraceKind::Areas => "areas",
            TraceKind::QiPower => "qi_power",
            TraceKind::QiTemp => "qi_temp",
            TraceKind::Anneal => "anneal",
            TraceKind::Exposure => "exposure",
        }
    }

    /// Data columns, all required, in file order.
    pub fn columns(self) -> &'static [(&'static str, Dimension)] {
        use Dimension::*;
        match self {
            TraceKind::Rt => &[("temperature", Temperature), ("resistance", Resistance)],
            TraceKind::Iv => &[("current", Current), ("voltage", Voltage)],
            TraceKind::S21 => &[("frequency", Frequency), ("re_s21", Dimensionless), ("im_s21", Dimensionless)],
            TraceKind::Decay | TraceKind::Ramsey => &[("delay", Time), ("population", Dimensionless)],
            TraceKind::Areas => &[("width", Length), ("height", Length), ("resistance", Resistance)],
            TraceKind::QiPower => &[("photon_number", Dimensionless), ("qi", Dimensionless)],
            TraceKind::QiTemp => &[("temperature", Temperature), ("qi", Dimensionless)],
            TraceKind::Anneal => &[("time", Time), ("jc_ratio", Dimensionless)],
            TraceKind::Exposure => &[("exposure", Exposure), ("jc", CurrentDensity)],
        }
    }

    /// Numeric header keys understood for this kind.
    pub fn metadata(self) -> &'static [(&'static str, Dimension)] {
        use Dimension::*;
        match self {
            TraceKind::Rt => &[("length", Length), ("width", Length), ("thickness", Length)],
            TraceKind::Iv => &[("temperature", Temperature)],
            TraceKind::S21 => &[("power", Power), ("temperature", Temperature)],
            TraceKind::Decay | TraceKind::Ramsey => &[("qubit_frequency", Frequency), ("temperature", Temperature)],
            TraceKind::Areas => &[],
            TraceKind::QiPower => &[("temperature", Temperature), ("frequency", Frequency)],
            TraceKind::QiTemp => &[("frequency", Frequency), ("tc", Temperature), ("photon_number", Dimensionless)],
            TraceKind::Anneal => &[("temperature", Temperature)],
            TraceKind::Exposure => &[],
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TraceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TraceKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| Error::Schema(format!("unknown trace kind `{}`", s.trim())))
    }
}

/// A validated trace file with all values in SI.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub kind: TraceKind,
    /// Numeric header values in SI.
    pub values: BTreeMap<String, f64>,
    /// Free-text header values (wafer_id, process, measurement, ...).
    pub text: BTreeMap<String, String>,
    /// One vector per schema column.
    pub columns: Vec<Vec<f64>>,
}

fn is_unit_key(key: &str) -> bool {
    key.ends_with("_unit")
}

impl TraceFile {
    pub fn new(kind: TraceKind, columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = kind.columns();
        if columns.len() != names.len() {
            return Err(Error::Schema(format!(
                "{kind} traces have {} columns, got {}",
                names.len(),
                columns.len()
            )));
        }
        if columns.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(Error::Schema("columns have different lengths".into()));
        }
        Ok(TraceFile {
            kind,
            values: BTreeMap::new(),
            text: BTreeMap::new(),
            columns,
        })
    }

    pub fn with_value(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn with_text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.text.insert(key.to_string(), v.into());
        self
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wafer_id(&self) -> Option<&str> {
        self.text.get("wafer_id").map(String::as_str)
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Column by schema name.
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.kind
            .columns()
            .iter()
            .position(|(n, _)| *n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::Schema(format!("{} traces have no `{name}` column", self.kind)))
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        self.columns[0].iter().copied().zip(self.columns[1].iter().copied()).collect()
    }

    fn expect(&self, kind: TraceKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Schema(format!("expected a {kind} trace, found {}", self.kind)));
        }
        Ok(())
    }

    /// Two-column data as `(x, y)` pairs, for kinds other than s21 and areas.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        if self.columns.len() != 2 {
            return Err(Error::Schema(format!("{} traces are not two-column", self.kind)));
        }
        Ok(self.pairs())
    }

    pub fn to_rt(&self) -> Result<RtTrace> {
        self.expect(TraceKind::Rt)?;
        let geom = match (self.value("length"), self.value("width"), self.value("thickness")) {
            (Some(length), Some(width), Some(thickness)) => Some(FilmGeometry {
                length,
                width,
                thickness,
            }),
            _ => None,
        };
        RtTrace::new(self.pairs(), geom)
    }

    /// Splits the rows at the first largest |current| into an up sweep and, when
    /// rows follow it, a down sweep.
    pub fn to_iv(&self) -> Result<(IvTrace, Option<IvTrace>)> {
        self.expect(TraceKind::Iv)?;
        let pts = self.pairs();
        if pts.is_empty() {
            return Err(Error::Schema("iv trace has no rows".into()));
        }
        // First row at the largest |current|.
        let peak = (1..pts.len()).fold(0, |best, i| if pts[i].0.abs() > pts[best].0.abs() { i } else { best });
        let up = IvTrace {
            points: pts[..=peak].to_vec(),
            direction: SweepDirection::Up,
            under_resolved: false,
        };
        let down = (peak + 1 < pts.len()).then(|| IvTrace {
            points: pts[peak..].to_vec(),
            direction: SweepDirection::Down,
            under_resolved: false,
        });
        Ok((up, down))
    }

    pub fn to_s21(&self) -> Result<S21Trace> {
        self.expect(TraceKind::S21)?;
        let z = self.columns[1]
            .iter()
            .zip(&self.columns[2])
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        let mut t = S21Trace::new(self.columns[0].clone(), z)?;
        t.stimulus_power = self.value("power");
        t.temperature = self.value("temperature");
        Ok(t)
    }

    /// Population versus delay, for decay and ramsey kinds.
    pub fn to_trace(&self) -> Result<Trace> {
        if !matches!(self.kind, TraceKind::Decay | TraceKind::Ramsey) {
            return Err(Error::Schema(format!("expected a decay or ramsey trace, found {}", self.kind)));
        }
        Ok(Trace::real(self.kind.as_str(), self.columns[0].clone(), self.columns[1].clone()).with_units("s", ""))
    }

    pub fn to_areas(&self) -> Result<Vec<AreaSample>> {
        self.expect(TraceKind::Areas)?;
        Ok((0..self.len())
            .map(|i| AreaSample {
                design_width: self.columns[0][i],
                design_height: self.columns[1][i],
                resistance: self.columns[2][i],
            })
            .collect())
    }

    /// Text form, in SI, that [`parse_trace`] reads back to an equal value.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# kind: {}", self.kind);
        for (k, v) in &self.text {
            let _ = writeln!(out, "# {k}: {v}");
        }
        for (k, v) in &self.values {
            let _ = writeln!(out, "# {k}: {v:?}");
        }
        let header: Vec<String> = self
            .kind
            .columns()
            .iter()
            .map(|(n, d)| match d.si_unit() {
                "" => n.to_string(),
                u => format!("{n}_{u}"),
            })
            .collect();
        let _ = writeln!(out, "{}", header.join(","));
        for i in 0..self.len() {
            let row: Vec<String> = self.columns.iter().map(|c| format!("{:?}", c[i])).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, self.serialize().as_bytes())
    }
}

/// Matches a column header against the schema: the longest quantity name
/// that equals the header or prefixes it followed by `_`.
fn match_column<'a>(header: &'a str, schema: &[(&'static str, Dimension)]) -> Option<(usize, &'a str)> {
    schema
        .iter()
        .enumerate()
        .filter_map(|(i, (name, _))| {
            if header == *name {
                Some((i, name.len(), ""))
            } else {
                header
                    .strip_prefix(name)
                    .and_then(|rest| rest.strip_prefix('_'))
                    .map(|unit| (i, name.len(), unit))
            }
        })
        .max_by_key(|m| m.1)
        .map(|(i, _, unit)| (i, unit))
}

/// Parses trace-file text. `expected` rejects files of another kind.
pub fn parse_trace(text: &str, expected: Option<TraceKind>) -> Result<TraceFile> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut column_line = None;
    for (no, line) in lines.by_ref() {
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if rest.is_empty() {
                continue;
            }
            let (k, v) = rest.split_once(':').ok_or_else(|| Error::Parse {
                line: no,
                message: format!("header line `{line}` is not `# key: value`"),
            })?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            column_line = Some((no, line));
            break;
        }
    }
    let kind: TraceKind = header
        .get("kind")
        .ok_or_else(|| Error::Schema("header has no `kind` entry".into()))?
        .parse()?;
    if let Some(e) = expected {
        if e != kind {
            return Err(Error::Schema(format!("expected a {e} trace, found {kind}")));
        }
    }
    let schema = kind.columns();
    let (col_no, col_line) = column_line.ok_or_else(|| Error::Schema("no column header row".into()))?;

    let unit_override = |name: &str| header.get(&format!("{name}_unit")).map(String::as_str);
    let mut slots: Vec<Option<UnitConverter>> = vec![None; schema.len()];
    let mut order = Vec::new();
    for h in col_line.split(',').map(str::trim) {
        let (i, suffix) = match_column(h, schema).ok_or_else(|| {
            Error::Schema(format!(
                "column `{h}` (line {col_no}) is not part of the {kind} schema ({})",
                schema.iter().map(|c| c.0).collect::<Vec<_>>().join(", ")
            ))
        })?;
        if slots[i].is_some() {
            return Err(Error::Schema(format!("column `{}` appears twice", schema[i].0)));
        }
        let unit = unit_override(schema[i].0).unwrap_or(suffix);
        slots[i] = Some(if unit.is_empty() {
            UnitConverter::si()
        } else {
            UnitConverter::new(schema[i].1, unit)?
        });
        order.push(i);
    }
    if let Some(i) = slots.iter().position(Option::is_none) {
        return Err(Error::Schema(format!("{kind} trace is missing the `{}` column", schema[i].0)));
    }
    let conv: Vec<UnitConverter> = slots.into_iter().map(|s| s.expect("checked")).collect();

    let mut columns = vec![Vec::new(); schema.len()];
    for (no, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != order.len() {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {} cells, found {}", order.len(), cells.len()),
            });
        }
        for (cell, &i) in cells.iter().zip(&order) {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: no,
                message: format!("`{cell}` in column `{}` is not a number", schema[i].0),
            })?;
            columns[i].push(conv[i].to_si(v));
        }
    }

    let mut values = BTreeMap::new();
    let mut texts = BTreeMap::new();
    for (k, v) in &header {
        let (k, v) = (k.clone(), v.clone());
        if k == "kind" || is_unit_key(&k) {
            continue;
        }
        match kind.metadata().iter().find(|(n, _)| *n == k) {
            Some(&(_, dim)) => {
                let q = match unit_override(&k) {
                    Some(u) => {
                        let x: f64 = v
                            .parse()
                            .map_err(|_| Error::Schema(format!("header `{k}` value `{v}` is not a number")))?;
                        UnitConverter::new(dim, u)?.to_si(x)
                    }
                    None => parse_quantity(&v, dim)?,
                };
                values.insert(k, q);
            }
            None => {
                texts.insert(k, v);
            }
        }
    }
    Ok(TraceFile {
        kind,
        values,
        text: texts,
        columns,
    })
}

/// Reads and validates a trace file.
pub fn ingest(path: &Path, expected: Option<TraceKind>) -> Result<TraceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trace(&text, expected)
}
