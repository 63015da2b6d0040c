//! Recording model plus ARFF/CSV readers and writers.
//!
//! A [`Recording`] is channel-major: one [`ChannelSeries`] per electrode, all
//! of the same length, and one binary eye-state label per timepoint
//! (0 = eyes open, 1 = eye blink / closed).

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Eye-state label of one timepoint.
pub type Label = u8;

/// Sample rate of the UCI EEG Eye State recording.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 128;

/// Column name used for the label when writing files.
pub const LABEL_COLUMN: &str = "eyeDetection";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelSeries<T> {
    pub name: String,
    pub values: Vec<T>,
}

impl<T: Scalar> ChannelSeries<T> {
    pub fn new(name: impl Into<String>, values: Vec<T>) -> Self {
        Self { name: name.into(), values }
    }
}

/// A validated multichannel recording with per-timepoint labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Recording<T> {
    channels: Vec<ChannelSeries<T>>,
    labels: Vec<Label>,
    sample_rate_hz: u32,
}

impl<T: Scalar> Recording<T> {
    /// Builds a recording, checking every structural invariant.
    pub fn new(channels: Vec<ChannelSeries<T>>, labels: Vec<Label>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidRecording("sample rate must be positive".into()));
        }
        if channels.len() < 2 {
            return Err(Error::InvalidRecording(format!(
                "need at least 2 channels, got {}",
                channels.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::EmptyData);
        }
        for (i, ch) in channels.iter().enumerate() {
            if ch.name.is_empty() {
                return Err(Error::InvalidRecording(format!("channel {i} has an empty name")));
            }
            if channels[..i].iter().any(|c| c.name == ch.name) {
                return Err(Error::InvalidRecording(format!("duplicate channel name {:?}", ch.name)));
            }
            if ch.values.len() != labels.len() {
                return Err(Error::InvalidRecording(format!(
                    "channel {:?} has {} samples, labels have {}",
                    ch.name,
                    ch.values.len(),
                    labels.len()
                )));
            }
            if let Some(t) = ch.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidRecording(format!(
                    "channel {:?} has a non-finite value at index {t}",
                    ch.name
                )));
            }
        }
        if let Some(t) = labels.iter().position(|&l| l > 1) {
            return Err(Error::InvalidRecording(format!("label at index {t} is not 0 or 1")));
        }
        Ok(Self { channels, labels, sample_rate_hz })
    }

    /// Number of timepoints.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[ChannelSeries<T>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &ChannelSeries<T> {
        &self.channels[index]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn names(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.name.clone()).collect()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.name == name)
    }

    /// Feature vector of one timepoint, in channel order.
    pub fn row(&self, t: usize) -> Vec<T> {
        self.channels.iter().map(|c| c.values[t]).collect()
    }

    /// Keeps the given timepoints, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .map(|c| ChannelSeries::new(c.name.clone(), rows.iter().map(|&t| c.values[t]).collect()))
            .collect();
        let labels = rows.iter().map(|&t| self.labels[t]).collect();
        Self::new(channels, labels, self.sample_rate_hz)
    }

    /// Keeps the given channels, in the given order.
    pub fn select_channels(&self, indices: &[usize]) -> Result<Self> {
        let channels = indices.iter().map(|&i| self.channels[i].clone()).collect();
        Self::new(channels, self.labels.clone(), self.sample_rate_hz)
    }

    /// Replaces channel values while keeping names, labels and rate.
    pub(crate) fn with_values(&self, values: Vec<Vec<T>>) -> Result<Self> {
        let channels = self
            .channels
            .iter()
            .zip(values)
            .map(|(c, v)| ChannelSeries::new(c.name.clone(), v))
            .collect();
        Self::new(channels, self.labels.clone(), self.sample_rate_hz)
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Result<Recording<U>> {
        let channels = self
            .channels
            .iter()
            .map(|c| ChannelSeries::new(c.name.clone(), c.values.iter().map(|v| U::lit(v.as_f64())).collect()))
            .collect();
        Recording::new(channels, self.labels.clone(), self.sample_rate_hz)
    }
}

/// Input file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Arff,
    Csv,
}

impl InputFormat {
    /// Guesses from a file extension, defaulting to CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("arff") => InputFormat::Arff,
            _ => InputFormat::Csv,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arff" => Ok(InputFormat::Arff),
            "csv" => Ok(InputFormat::Csv),
            _ => Err(Error::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    if s.len() >= 2 && ((s.starts_with('\'') && s.ends_with('\'')) || (s.starts_with('"') && s.ends_with('"'))) {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// Splits `@attribute <name> <type>` into name and type, honouring quotes.
fn split_attribute(rest: &str) -> Option<(String, &str)> {
    let rest = rest.trim_start();
    let quote = rest.chars().next()?;
    if quote == '\'' || quote == '"' {
        let close = rest[1..].find(quote)? + 1;
        Some((rest[1..close].to_string(), rest[close + 1..].trim()))
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_string(), rest[end..].trim()))
    }
}

fn parse_attribute_kind(spec: &str, line: usize) -> Result<AttributeKind> {
    let lower = spec.to_ascii_lowercase();
    if matches!(lower.as_str(), "numeric" | "real" | "integer") {
        return Ok(AttributeKind::Numeric);
    }
    if spec.starts_with('{') && spec.ends_with('}') {
        let values = spec[1..spec.len() - 1]
            .split(',')
            .map(|v| unquote(v).to_string())
            .filter(|v| !v.is_empty())
            .collect();
        return Ok(AttributeKind::Nominal(values));
    }
    Err(Error::MalformedHeader { line, message: format!("unsupported attribute type {spec:?}") })
}

fn parse_label(raw: &str, line: usize) -> Result<Label> {
    let v = unquote(raw);
    match v {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => match v.parse::<f64>() {
            Ok(x) if x == 0.0 => Ok(0),
            Ok(x) if x == 1.0 => Ok(1),
            _ => Err(Error::InvalidLabel { line, value: raw.to_string() }),
        },
    }
}

fn parse_sample<T: Scalar>(raw: &str, line: usize, column: usize) -> Result<T> {
    let v = unquote(raw);
    let x: T = v
        .parse()
        .map_err(|_| Error::NonNumeric { line, column, value: raw.to_string() })?;
    if !x.is_finite() {
        return Err(Error::NonFinite { line, column, value: raw.to_string() });
    }
    Ok(x)
}

/// Parses the numeric + binary-class subset of ARFF.
///
/// Every attribute but the last must be numeric; the last is the class and
/// may be nominal `{0,1}` or numeric with values 0/1. Keywords are matched
/// case-insensitively and `%` starts a comment line.
pub fn parse_arff<T: Scalar, R: Read>(source: R, sample_rate_hz: u32) -> Result<Recording<T>> {
    let reader = std::io::BufReader::new(source);
    let mut attributes: Vec<(String, AttributeKind)> = Vec::new();
    let mut in_data = false;
    let mut columns: Vec<Vec<T>> = Vec::new();
    let mut labels = Vec::new();
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if !in_data {
            if !trimmed.starts_with('@') {
                return Err(Error::MalformedHeader {
                    line: line_no,
                    message: format!("expected a declaration, found {trimmed:?}"),
                });
            }
            let (keyword, rest) = match trimmed.find(char::is_whitespace) {
                Some(p) => (&trimmed[..p], trimmed[p..].trim()),
                None => (trimmed, ""),
            };
            match keyword.to_ascii_lowercase().as_str() {
                "@relation" => {}
                "@attribute" => {
                    let (name, kind) = split_attribute(rest).ok_or_else(|| Error::MalformedHeader {
                        line: line_no,
                        message: "attribute needs a name and a type".into(),
                    })?;
                    let kind = parse_attribute_kind(kind, line_no)?;
                    attributes.push((name, kind));
                }
                "@data" => {
                    if attributes.len() < 3 {
                        return Err(Error::MalformedHeader {
                            line: line_no,
                            message: format!(
                                "need at least two channel attributes and a class, found {} attributes",
                                attributes.len()
                            ),
                        });
                    }
                    let (channel_attrs, class) = attributes.split_at(attributes.len() - 1);
                    if let Some((name, _)) = channel_attrs.iter().find(|(_, k)| *k != AttributeKind::Numeric) {
                        return Err(Error::MalformedHeader {
                            line: line_no,
                            message: format!("channel attribute {name:?} is not numeric"),
                        });
                    }
                    if let AttributeKind::Nominal(values) = &class[0].1 {
                        if values.is_empty() || values.iter().any(|v| v != "0" && v != "1") {
                            return Err(Error::MalformedHeader {
                                line: line_no,
                                message: format!("class attribute must be binary {{0,1}}, found {values:?}"),
                            });
                        }
                    }
                    columns = vec![Vec::new(); attributes.len() - 1];
                    in_data = true;
                }
                other => {
                    return Err(Error::MalformedHeader {
                        line: line_no,
                        message: format!("unknown declaration {other:?}"),
                    })
                }
            }
            continue;
        }

        if trimmed.starts_with('{') {
            return Err(Error::UnsupportedFormat("sparse ARFF data rows".into()));
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != attributes.len() {
            return Err(Error::RaggedRow { line: line_no, expected: attributes.len(), found: fields.len() });
        }
        for (c, raw) in fields[..fields.len() - 1].iter().enumerate() {
            columns[c].push(parse_sample(raw, line_no, c + 1)?);
        }
        labels.push(parse_label(fields[fields.len() - 1], line_no)?);
    }

    if !in_data {
        return Err(Error::MalformedHeader { line: last_line, message: "missing @data section".into() });
    }
    if labels.is_empty() {
        return Err(Error::EmptyData);
    }
    let channels = attributes
        .into_iter()
        .zip(columns)
        .map(|((name, _), values)| ChannelSeries::new(name, values))
        .collect();
    Recording::new(channels, labels, sample_rate_hz)
}

/// Parses a comma-separated table whose last column is the label.
///
/// Lines starting with `#` are skipped. Without a header, channels are named
/// `ch0`, `ch1`, ...
pub fn parse_csv<T: Scalar, R: Read>(source: R, has_header: bool, sample_rate_hz: u32) -> Result<Recording<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut names: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<T>> = Vec::new();
    let mut labels = Vec::new();
    let mut width = 0usize;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if has_header && names.is_none() {
            width = record.len();
            if width < 3 {
                return Err(Error::InvalidRecording(format!(
                    "need at least two channel columns and a label, header has {width} fields"
                )));
            }
            names = Some(record.iter().take(width - 1).map(str::to_string).collect());
            columns = vec![Vec::new(); width - 1];
            continue;
        }
        if width == 0 {
            width = record.len();
            if width < 3 {
                return Err(Error::InvalidRecording(format!(
                    "need at least two channel columns and a label, row has {width} fields"
                )));
            }
            columns = vec![Vec::new(); width - 1];
        }
        if record.len() != width {
            return Err(Error::RaggedRow { line, expected: width, found: record.len() });
        }
        for (c, raw) in record.iter().take(width - 1).enumerate() {
            columns[c].push(parse_sample(raw, line, c + 1)?);
        }
        labels.push(parse_label(&record[width - 1], line)?);
    }

    if labels.is_empty() {
        return Err(Error::EmptyData);
    }
    let names = names.unwrap_or_else(|| (0..width - 1).map(|i| format!("ch{i}")).collect());
    let channels = names.into_iter().zip(columns).map(|(n, v)| ChannelSeries::new(n, v)).collect();
    Recording::new(channels, labels, sample_rate_hz)
}

/// Writes the recording as CSV with a header row; the label is the last
/// column. Values use the shortest round-tripping representation.
pub fn write_csv<T: Scalar, W: Write>(rec: &Recording<T>, mut out: W) -> Result<()> {
    let mut line = String::new();
    for ch in rec.channels() {
        line.push_str(&ch.name);
        line.push(',');
    }
    line.push_str(LABEL_COLUMN);
    writeln!(out, "{line}")?;
    for t in 0..rec.len() {
        line.clear();
        for ch in rec.channels() {
            line.push_str(&ch.values[t].to_string());
            line.push(',');
        }
        line.push_str(if rec.labels()[t] == 0 { "0" } else { "1" });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes the recording as ARFF with numeric channels and a `{0,1}` class.
pub fn write_arff<T: Scalar, W: Write>(rec: &Recording<T>, relation: &str, mut out: W) -> Result<()> {
    writeln!(out, "@RELATION {relation}")?;
    writeln!(out)?;
    for ch in rec.channels() {
        writeln!(out, "@ATTRIBUTE {} NUMERIC", ch.name)?;
    }
    writeln!(out, "@ATTRIBUTE {LABEL_COLUMN} {{0,1}}")?;
    writeln!(out)?;
    writeln!(out, "@DATA")?;
    let mut line = String::new();
    for t in 0..rec.len() {
        line.clear();
        for ch in rec.channels() {
            line.push_str(&ch.values[t].to_string());
            line.push(',');
        }
        line.push_str(if rec.labels()[t] == 0 { "0" } else { "1" });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ChannelStats<T> {
    pub name: String,
    pub min: T,
    pub mean: T,
    pub max: T,
}

/// Per-channel ranges, label distribution and transition count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SummaryStats<T> {
    pub length: usize,
    pub sample_rate_hz: u32,
    pub duration_seconds: f64,
    pub channels: Vec<ChannelStats<T>>,
    /// Counts of label 0 and label 1.
    pub label_counts: [usize; 2],
    pub transitions: usize,
}

impl<T: Scalar> SummaryStats<T> {
    /// Two-column `label,count` table.
    pub fn label_counts_csv(&self) -> String {
        format!("label,count\n0,{}\n1,{}\n", self.label_counts[0], self.label_counts[1])
    }
}

pub fn summarize<T: Scalar>(rec: &Recording<T>) -> SummaryStats<T> {
    let channels = rec
        .channels()
        .iter()
        .map(|c| ChannelStats {
            name: c.name.clone(),
            min: c.values.iter().copied().fold(T::infinity(), T::min),
            mean: scalar::mean(&c.values),
            max: c.values.iter().copied().fold(T::neg_infinity(), T::max),
        })
        .collect();
    let mut label_counts = [0usize; 2];
    for &l in rec.labels() {
        label_counts[l as usize] += 1;
    }
    let transitions = rec.labels().windows(2).filter(|w| w[0] != w[1]).count();
    SummaryStats {
        length: rec.len(),
        sample_rate_hz: rec.sample_rate_hz(),
        duration_seconds: rec.len() as f64 / rec.sample_rate_hz() as f64,
        channels,
        label_counts,
        transitions,
    }
}
