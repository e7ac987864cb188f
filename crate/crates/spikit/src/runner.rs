//! Parallel scoring.

use rayon::prelude::*;
use spikit_core::eval::{assemble_report, score_record, EvalConfig, EvalError};
use spikit_core::{EvalReport, PrimingRecord};

/// Scores `records` on `jobs` threads (all cores when `None`).
///
/// Records are scored independently and aggregated in id order, so the
/// report does not depend on `jobs`.
pub fn evaluate_parallel(
    records: &[PrimingRecord],
    config: EvalConfig,
    jobs: Option<usize>,
) -> Result<EvalReport, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().expect("thread pool");
    let scores = pool.install(|| {
        records
            .par_iter()
            .map(|r| score_record(r, &config))
            .collect::<Result<Vec<_>, _>>()
    })?;
    assemble_report(records, &scores, config)
}
