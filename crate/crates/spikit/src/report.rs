//! Report serialization.
//!
//! JSON is the canonical form: fixed field order, shortest round-trip floats,
//! so parsing a report and emitting it again reproduces the same bytes.
//!
//! CSV holds up to three blocks separated by blank lines, after a
//! `# config:` comment line:
//!
//! ```text
//! id,type,d_p,d_n,spi,direction
//! type,n,mean_spi,positive_rate
//! field,used,skipped,r,p            (only when correlations were computed)
//! ```

use std::fmt;
use std::str::FromStr;

use spikit_core::eval::FieldCorrelation;
use spikit_core::spi::SweepRow;
use spikit_core::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format {s:?} (expected json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

pub fn emit_report(report: &EvalReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

pub fn to_json(report: &EvalReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> serde_json::Result<EvalReport> {
    serde_json::from_str(text)
}

fn block<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn correlation_row(field: &str, c: &FieldCorrelation) -> Vec<String> {
    let (r, p) = match c.result {
        Some(res) => (res.r.to_string(), res.p.to_string()),
        None => (String::new(), String::new()),
    };
    vec![
        field.to_string(),
        c.used.to_string(),
        c.skipped.to_string(),
        r,
        p,
    ]
}

pub fn to_csv(report: &EvalReport) -> String {
    let c = report.config;
    let mut out = format!(
        "# config: lambda={},mode={},gamma={},variant={}\n",
        c.kernel.lambda(),
        c.kernel.mode(),
        c.spi.gamma(),
        c.spi.variant()
    );
    out += &block(
        &["id", "type", "d_p", "d_n", "spi", "direction"],
        report.per_record.iter().map(|r| {
            [
                r.id.clone(),
                r.structure_type.clone(),
                r.d_p.to_string(),
                r.d_n.to_string(),
                r.spi.to_string(),
                r.direction.to_string(),
            ]
        }),
    );
    out.push('\n');
    out += &block(
        &["type", "n", "mean_spi", "positive_rate"],
        report.per_type.iter().map(|(ty, s)| {
            [
                ty.clone(),
                s.n.to_string(),
                s.mean_spi.to_string(),
                s.positive_rate.to_string(),
            ]
        }),
    );
    if let Some(corr) = &report.correlations {
        out.push('\n');
        out += &block(
            &["field", "used", "skipped", "r", "p"],
            [
                correlation_row("sentence_similarity", &corr.sentence),
                correlation_row("image_similarity", &corr.image),
            ],
        );
    }
    out
}

/// `x,gamma,spi` rows.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    block(
        &["x", "gamma", "spi"],
        rows.iter()
            .map(|r| [r.x.to_string(), r.gamma.to_string(), r.spi.to_string()]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use spikit_core::eval::evaluate;
    use spikit_core::{parse_bracketed, KernelParams, PrimingRecord, SpiParams};

    fn report(n: usize) -> EvalReport {
        let a = parse_bracketed("(S (NP (NN a)) (VP (VB b)))").unwrap();
        let b = parse_bracketed("(S (VP (VB b)) (NP (NN a)))").unwrap();
        let records: Vec<PrimingRecord> = (0..n)
            .map(|i| PrimingRecord {
                id: format!("r{i}"),
                structure_type: if i % 2 == 0 { "po" } else { "do" }.into(),
                prime_pos_tree: a.clone(),
                prime_neg_tree: b.clone(),
                predicted_tree: if i % 3 == 0 { a.clone() } else { b.clone() },
                sentence_similarity: None,
                image_similarity: None,
            })
            .collect();
        evaluate(&records, &KernelParams::default(), &SpiParams::default()).unwrap()
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = report(5);
        let text = to_json(&r);
        let back = parse_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn csv_layout() {
        let csv = to_csv(&report(2));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "# config: lambda=1,mode=delexicalized,gamma=3,variant=tanh"
        );
        assert_eq!(lines[1], "id,type,d_p,d_n,spi,direction");
        assert!(lines[2].starts_with("r0,po,1,"));
        assert_eq!(lines[4], "");
        assert_eq!(lines[5], "type,n,mean_spi,positive_rate");
        assert_eq!(lines.len(), 8);
    }

    #[test]
    fn empty_report_has_headers_only() {
        let mut r = report(1);
        r.per_record.clear();
        r.per_type.clear();
        let csv = to_csv(&r);
        assert_eq!(
            csv.lines()
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .count(),
            2
        );
    }
}
