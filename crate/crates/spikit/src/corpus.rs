//! Sentence sources for corpus statistics.

use spikit_core::primegen::detokenize;
use spikit_core::PrimingRecord;

use crate::dataset::{read_dataset, LineError};

/// Non-blank lines of a plain-text corpus, one sentence each.
pub fn text_sentences(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// The three sentences of each record, rebuilt from tree leaves.
pub fn record_sentences(records: &[PrimingRecord]) -> Vec<String> {
    records
        .iter()
        .flat_map(|r| [&r.prime_pos_tree, &r.prime_neg_tree, &r.predicted_tree])
        .map(|t| detokenize(t.leaves()))
        .collect()
}

/// Treats the input as dataset JSONL if its first non-blank line opens an
/// object, plain text otherwise.
pub fn sentences_from(text: &str) -> Result<Vec<String>, Vec<LineError>> {
    let is_jsonl = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with('{'));
    if is_jsonl {
        let ds = read_dataset(text.as_bytes()).expect("reading from memory");
        Ok(record_sentences(&ds.into_records()?))
    } else {
        Ok(text_sentences(text))
    }
}
