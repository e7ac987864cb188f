//! Batch scoring of priming records.
//!
//! Each record holds a positive prime, a negative prime and a predicted
//! tree. Scores are aggregated per declared structure type; output order is
//! by record id so that the report never depends on scoring order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{KernelParams, MatchMode};
use crate::spi::{self, Direction, SpiError, SpiParams, SpiResult, SpiVariant};
use crate::stats::{self, Correlation, StatsError};
use crate::syntree::SyntaxTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimingRecord {
    pub id: String,
    #[serde(rename = "type")]
    pub structure_type: String,
    pub prime_pos_tree: SyntaxTree,
    pub prime_neg_tree: SyntaxTree,
    pub predicted_tree: SyntaxTree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_similarity: Option<f64>,
}

impl PrimingRecord {
    /// Rejects similarity values that are not finite numbers in `[0, 1]`.
    pub fn check_similarities(&self) -> Result<(), EvalError> {
        for (field, value) in [
            ("sentence_similarity", self.sentence_similarity),
            ("image_similarity", self.image_similarity),
        ] {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(EvalError::SimilarityOutOfRange { field, value: v });
                }
            }
        }
        Ok(())
    }
}

/// Flattened echo of the kernel and SPI settings used for a report.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct EvalConfig {
    pub kernel: KernelParams,
    pub spi: SpiParams,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    lambda: f64,
    mode: MatchMode,
    gamma: f64,
    variant: SpiVariant,
}

impl From<EvalConfig> for RawConfig {
    fn from(c: EvalConfig) -> Self {
        RawConfig {
            lambda: c.kernel.lambda(),
            mode: c.kernel.mode(),
            gamma: c.spi.gamma(),
            variant: c.spi.variant(),
        }
    }
}

impl TryFrom<RawConfig> for EvalConfig {
    type Error = String;

    fn try_from(raw: RawConfig) -> Result<Self, Self::Error> {
        use alloc::string::ToString;
        Ok(EvalConfig {
            kernel: KernelParams::new(raw.lambda, raw.mode).map_err(|e| e.to_string())?,
            spi: SpiParams::new(raw.gamma, raw.variant).map_err(|e| e.to_string())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordScore {
    pub id: String,
    #[serde(rename = "type")]
    pub structure_type: String,
    pub d_p: f64,
    pub d_n: f64,
    pub spi: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeSummary {
    pub n: usize,
    pub mean_spi: f64,
    pub positive_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCorrelation {
    pub used: usize,
    pub skipped: usize,
    /// `None` when no record carries the field.
    pub result: Option<Correlation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub sentence: FieldCorrelation,
    pub image: FieldCorrelation,
}

impl Correlations {
    pub fn any(&self) -> bool {
        self.sentence.result.is_some() || self.image.result.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub per_record: Vec<RecordScore>,
    pub per_type: BTreeMap<String, TypeSummary>,
    pub correlations: Option<Correlations>,
}

impl EvalReport {
    /// Mean SPI over all records, in id order.
    pub fn overall_mean_spi(&self) -> Option<f64> {
        if self.per_record.is_empty() {
            return None;
        }
        let sum: f64 = self.per_record.iter().map(|r| r.spi).sum();
        Some(sum / self.per_record.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    EmptyInput,
    DuplicateId(String),
    /// A record id absent from the report being correlated.
    UnknownRecord(String),
    SimilarityOutOfRange {
        field: &'static str,
        value: f64,
    },
    /// Result count differs from record count.
    ScoreCountMismatch {
        records: usize,
        scores: usize,
    },
    Spi(SpiError),
    Correlation {
        field: &'static str,
        error: StatsError,
    },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::EmptyInput => f.write_str("no records to evaluate"),
            EvalError::DuplicateId(id) => write!(f, "duplicate record id {id:?}"),
            EvalError::UnknownRecord(id) => write!(f, "record {id:?} is not in the report"),
            EvalError::SimilarityOutOfRange { field, value } => {
                write!(f, "{field} must be in [0, 1], got {value}")
            }
            EvalError::ScoreCountMismatch { records, scores } => {
                write!(f, "{scores} scores for {records} records")
            }
            EvalError::Spi(e) => write!(f, "{e}"),
            EvalError::Correlation { field, error } => write!(f, "{field}: {error}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<SpiError> for EvalError {
    fn from(e: SpiError) -> Self {
        EvalError::Spi(e)
    }
}

pub fn score_record(record: &PrimingRecord, config: &EvalConfig) -> Result<SpiResult, SpiError> {
    spi::spi_score(
        &record.prime_pos_tree,
        &record.prime_neg_tree,
        &record.predicted_tree,
        &config.kernel,
        &config.spi,
    )
}

fn check_records(records: &[PrimingRecord]) -> Result<(), EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(EvalError::DuplicateId(r.id.clone()));
        }
        r.check_similarities()?;
    }
    Ok(())
}

/// Builds a report from per-record results given in record order.
///
/// Scoring can therefore happen anywhere (serially, on a thread pool); the
/// aggregation here is the only reduction and runs in id order.
pub fn assemble_report(
    records: &[PrimingRecord],
    scores: &[SpiResult],
    config: EvalConfig,
) -> Result<EvalReport, EvalError> {
    check_records(records)?;
    if records.len() != scores.len() {
        return Err(EvalError::ScoreCountMismatch {
            records: records.len(),
            scores: scores.len(),
        });
    }
    let mut per_record: Vec<RecordScore> = records
        .iter()
        .zip(scores)
        .map(|(rec, s)| RecordScore {
            id: rec.id.clone(),
            structure_type: rec.structure_type.clone(),
            d_p: s.d_p,
            d_n: s.d_n,
            spi: s.spi,
            direction: s.direction,
        })
        .collect();
    per_record.sort_by(|a, b| a.id.cmp(&b.id));

    let mut grouped: BTreeMap<&str, (usize, f64, usize)> = BTreeMap::new();
    for r in &per_record {
        let e = grouped.entry(&r.structure_type).or_insert((0, 0.0, 0));
        e.0 += 1;
        e.1 += r.spi;
        if r.direction == Direction::Positive {
            e.2 += 1;
        }
    }
    let per_type = grouped
        .into_iter()
        .map(|(ty, (n, sum, positive))| {
            (
                String::from(ty),
                TypeSummary {
                    n,
                    mean_spi: sum / n as f64,
                    positive_rate: positive as f64 / n as f64,
                },
            )
        })
        .collect();

    Ok(EvalReport {
        config,
        per_record,
        per_type,
        correlations: None,
    })
}

/// Scores every record serially and aggregates.
pub fn evaluate(
    records: &[PrimingRecord],
    kparams: &KernelParams,
    sparams: &SpiParams,
) -> Result<EvalReport, EvalError> {
    check_records(records)?;
    let config = EvalConfig {
        kernel: *kparams,
        spi: *sparams,
    };
    let scores = records
        .iter()
        .map(|r| score_record(r, &config))
        .collect::<Result<Vec<_>, _>>()?;
    assemble_report(records, &scores, config)
}

fn correlate_field(
    field: &'static str,
    pairs: &[(Option<f64>, f64)],
) -> Result<FieldCorrelation, EvalError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .filter_map(|&(sim, spi)| sim.map(|s| (s, spi)))
        .unzip();
    let used = xs.len();
    let skipped = pairs.len() - used;
    let result = if used == 0 {
        None
    } else {
        Some(stats::pearson(&xs, &ys).map_err(|error| EvalError::Correlation { field, error })?)
    };
    Ok(FieldCorrelation {
        used,
        skipped,
        result,
    })
}

/// Correlates each similarity field with SPI. Records lacking a field are
/// skipped for that field only.
pub fn correlate(report: &EvalReport, records: &[PrimingRecord]) -> Result<EvalReport, EvalError> {
    let by_id: BTreeMap<&str, &PrimingRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut sentence = Vec::with_capacity(report.per_record.len());
    let mut image = Vec::with_capacity(report.per_record.len());
    for score in &report.per_record {
        let rec = by_id
            .get(score.id.as_str())
            .ok_or_else(|| EvalError::UnknownRecord(score.id.clone()))?;
        sentence.push((rec.sentence_similarity, score.spi));
        image.push((rec.image_similarity, score.spi));
    }
    let mut out = report.clone();
    out.correlations = Some(Correlations {
        sentence: correlate_field("sentence_similarity", &sentence)?,
        image: correlate_field("image_similarity", &image)?,
    });
    Ok(out)
}
