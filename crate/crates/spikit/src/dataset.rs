//! JSONL priming datasets.
//!
//! One object per line:
//!
//! ```text
//! {"id": "r1", "type": "po", "prime_pos_tree": "(S ...)", "prime_neg_tree": "(S ...)",
//!  "predicted_tree": "(S ...)", "sentence_similarity": 0.4, "image_similarity": 0.7}
//! ```
//!
//! Blank lines are ignored. Bad lines are collected with their line numbers
//! rather than aborting the load.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use serde::Deserialize;
use spikit_core::syntree::ParseError;
use spikit_core::{parse_bracketed, PrimingRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum LineErrorKind {
    MalformedLine(String),
    InvalidTree {
        field: &'static str,
        error: ParseError,
    },
    MissingField(&'static str),
    InvalidValue {
        field: &'static str,
        message: String,
    },
    DuplicateId(String),
}

/// A rejected dataset line. `line` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    pub line: usize,
    pub kind: LineErrorKind,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            LineErrorKind::MalformedLine(msg) => write!(f, "malformed JSON: {msg}"),
            LineErrorKind::InvalidTree { field, error } => {
                write!(f, "invalid tree in `{field}`: {error}")
            }
            LineErrorKind::MissingField(field) => write!(f, "missing field `{field}`"),
            LineErrorKind::InvalidValue { field, message } => write!(f, "`{field}`: {message}"),
            LineErrorKind::DuplicateId(id) => write!(f, "duplicate id {id:?}"),
        }
    }
}

impl std::error::Error for LineError {}

#[derive(Debug, Default)]
pub struct Dataset {
    pub records: Vec<PrimingRecord>,
    pub errors: Vec<LineError>,
}

impl Dataset {
    /// All records, or every line error if there was any.
    pub fn into_records(self) -> Result<Vec<PrimingRecord>, Vec<LineError>> {
        if self.errors.is_empty() {
            Ok(self.records)
        } else {
            Err(self.errors)
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    #[serde(rename = "type")]
    structure_type: Option<String>,
    prime_pos_tree: Option<String>,
    prime_neg_tree: Option<String>,
    predicted_tree: Option<String>,
    sentence_similarity: Option<f64>,
    image_similarity: Option<f64>,
}

fn required<T>(value: Option<T>, field: &'static str) -> Result<T, LineErrorKind> {
    value.ok_or(LineErrorKind::MissingField(field))
}

fn tree(
    text: Option<String>,
    field: &'static str,
) -> Result<spikit_core::SyntaxTree, LineErrorKind> {
    parse_bracketed(&required(text, field)?)
        .map_err(|error| LineErrorKind::InvalidTree { field, error })
}

fn similarity(value: Option<f64>, field: &'static str) -> Result<Option<f64>, LineErrorKind> {
    match value {
        Some(v) if !(0.0..=1.0).contains(&v) => Err(LineErrorKind::InvalidValue {
            field,
            message: format!("similarity must be in [0, 1], got {v}"),
        }),
        other => Ok(other),
    }
}

fn parse_line(text: &str) -> Result<PrimingRecord, LineErrorKind> {
    let raw: RawRecord =
        serde_json::from_str(text).map_err(|e| LineErrorKind::MalformedLine(e.to_string()))?;
    Ok(PrimingRecord {
        id: required(raw.id, "id")?,
        structure_type: required(raw.structure_type, "type")?,
        prime_pos_tree: tree(raw.prime_pos_tree, "prime_pos_tree")?,
        prime_neg_tree: tree(raw.prime_neg_tree, "prime_neg_tree")?,
        predicted_tree: tree(raw.predicted_tree, "predicted_tree")?,
        sentence_similarity: similarity(raw.sentence_similarity, "sentence_similarity")?,
        image_similarity: similarity(raw.image_similarity, "image_similarity")?,
    })
}

pub fn read_dataset<R: BufRead>(reader: R) -> io::Result<Dataset> {
    let mut out = Dataset::default();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let result = parse_line(&line).and_then(|rec| {
            if ids.insert(rec.id.clone()) {
                Ok(rec)
            } else {
                Err(LineErrorKind::DuplicateId(rec.id))
            }
        });
        match result {
            Ok(rec) => out.records.push(rec),
            Err(kind) => out.errors.push(LineError { line: i + 1, kind }),
        }
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> io::Result<Dataset> {
    read_dataset(io::BufReader::new(fs::File::open(path)?))
}

/// One JSONL line for `record`, in the input schema.
pub fn record_to_line(record: &PrimingRecord) -> String {
    serde_json::to_string(record).expect("records serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"id":"a","type":"po","prime_pos_tree":"(S (NN a))","prime_neg_tree":"(S (VB b))","predicted_tree":"(S (NN c))"}"#;

    #[test]
    fn loads_good_lines_and_reports_bad_ones() {
        let text = format!(
            "{GOOD}\n\n{}\n{}\nnot json\n{}\n",
            GOOD.replace("\"a\",\"type\"", "\"b\",\"type\""),
            GOOD.replace("\"a\",\"type\"", "\"c\",\"type\"")
                .replace("(S (NN c))", "(S (NN c)"),
            GOOD.replace(",\"prime_neg_tree\":\"(S (VB b))\"", "")
                .replace("\"a\"", "\"d\""),
        );
        let ds = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(ds.records.len(), 2);
        let lines: Vec<usize> = ds.errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, [4, 5, 6]);
        assert!(matches!(
            ds.errors[0].kind,
            LineErrorKind::InvalidTree {
                field: "predicted_tree",
                ..
            }
        ));
        assert!(matches!(ds.errors[1].kind, LineErrorKind::MalformedLine(_)));
        assert_eq!(
            ds.errors[2].kind,
            LineErrorKind::MissingField("prime_neg_tree")
        );
    }

    #[test]
    fn similarity_range_and_duplicates() {
        let hi = GOOD.replace("}", ",\"image_similarity\":1.2}");
        let ds = read_dataset(format!("{GOOD}\n{GOOD}\n").as_bytes()).unwrap();
        assert_eq!(ds.errors[0].kind, LineErrorKind::DuplicateId("a".into()));
        let ds = read_dataset(hi.as_bytes()).unwrap();
        assert!(matches!(
            ds.errors[0].kind,
            LineErrorKind::InvalidValue {
                field: "image_similarity",
                ..
            }
        ));
    }

    #[test]
    fn null_similarity_is_absent() {
        let line = GOOD.replace("}", ",\"sentence_similarity\":null}");
        let recs = read_dataset(line.as_bytes())
            .unwrap()
            .into_records()
            .unwrap();
        assert_eq!(recs[0].sentence_similarity, None);
    }

    #[test]
    fn record_line_round_trip() {
        let recs = read_dataset(GOOD.as_bytes())
            .unwrap()
            .into_records()
            .unwrap();
        let again = read_dataset(record_to_line(&recs[0]).as_bytes()).unwrap();
        assert_eq!(again.into_records().unwrap(), recs);
    }
}
