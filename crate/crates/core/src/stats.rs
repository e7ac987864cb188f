//! Pearson correlation with significance, preservation rate and corpus
//! lexical statistics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::spi::{Direction, SpiResult};

/// Largest sample size accepted by [`pearson_permutation_p`] (9! orderings).
pub const EXACT_PERMUTATION_MAX: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    EmptyInput,
    LengthMismatch {
        x: usize,
        y: usize,
    },
    TooFewPoints(usize),
    ZeroVariance,
    NonFinite,
    /// Exact permutation test requested for more than [`EXACT_PERMUTATION_MAX`] points.
    TooManyForExact(usize),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::EmptyInput => f.write_str("empty input"),
            StatsError::LengthMismatch { x, y } => write!(f, "length mismatch: {x} vs {y}"),
            StatsError::TooFewPoints(n) => write!(f, "need at least 3 points, got {n}"),
            StatsError::ZeroVariance => f.write_str("zero variance"),
            StatsError::NonFinite => f.write_str("non-finite value"),
            StatsError::TooManyForExact(n) => write!(
                f,
                "exact permutation test supports at most {EXACT_PERMUTATION_MAX} points, got {n}"
            ),
        }
    }
}

impl core::error::Error for StatsError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    /// Two-tailed.
    pub p: f64,
    pub n: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewPoints(x.len()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Sample correlation coefficient and its two-tailed p-value under a
/// Student-t null with `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    check_pair(x, y)?;
    let r = pearson_r(x, y)?;
    Ok(Correlation {
        r,
        p: correlation_p_value(r, x.len()),
        n: x.len(),
    })
}

/// Two-tailed p for a correlation `r` over `n` points.
///
/// With `t = r * sqrt(df / (1 - r^2))`, `P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`
/// and `df / (df + t^2)` reduces to `1 - r^2`.
pub fn correlation_p_value(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let x = (1.0 - r * r).clamp(0.0, 1.0);
    regularized_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Two-tailed exact permutation p-value: the share of all orderings of `y`
/// whose |r| reaches the observed |r|.
pub fn pearson_permutation_p(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    let n = x.len();
    if n > EXACT_PERMUTATION_MAX {
        return Err(StatsError::TooManyForExact(n));
    }
    let observed = libm::fabs(pearson_r(x, y)?);
    let tol = 1e-12;
    let mut perm: Vec<f64> = y.to_vec();
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut tally = |p: &[f64]| {
        total += 1;
        // variance of y is permutation-invariant, so this cannot fail
        if let Ok(r) = pearson_r(x, p) {
            if libm::fabs(r) >= observed - tol {
                hits += 1;
            }
        }
    };
    // Heap's algorithm, iterative
    let mut c = alloc::vec![0usize; n];
    tally(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            tally(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// `I_x(a, b)` by the continued-fraction expansion (modified Lentz).
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let guard = |v: f64| if libm::fabs(v) < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let step = d * c;
        h *= step;
        if libm::fabs(step - 1.0) < EPS {
            break;
        }
    }
    h
}

/// Share of results classified positive. Neutral results count as not positive.
pub fn preservation_rate(results: &[SpiResult]) -> Result<f64, StatsError> {
    if results.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let positive = results
        .iter()
        .filter(|r| r.direction == Direction::Positive)
        .count();
    Ok(positive as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentence_count: usize,
    pub token_count: usize,
    pub word_type_count: usize,
    pub ttr: f64,
    pub mean_tokens_per_sentence: f64,
    pub token_range: (usize, usize),
}

/// Lowercased whitespace tokens with non-alphanumeric characters trimmed
/// from both ends; tokens left empty are dropped.
pub fn tokenize(sentence: &str) -> impl Iterator<Item = String> + '_ {
    sentence.split_whitespace().filter_map(|raw| {
        let token = raw.trim_matches(|c: char| !c.is_alphanumeric());
        (!token.is_empty()).then(|| token.to_lowercase())
    })
}

pub fn corpus_stats<S: AsRef<str>>(sentences: &[S]) -> Result<CorpusStats, StatsError> {
    if sentences.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut types = BTreeSet::new();
    let mut token_count = 0;
    let mut min = usize::MAX;
    let mut max = 0;
    for sentence in sentences {
        let mut len = 0;
        for token in tokenize(sentence.as_ref()) {
            len += 1;
            types.insert(token);
        }
        token_count += len;
        min = min.min(len);
        max = max.max(len);
    }
    if token_count == 0 {
        return Err(StatsError::EmptyInput);
    }
    Ok(CorpusStats {
        sentence_count: sentences.len(),
        token_count,
        word_type_count: types.len(),
        ttr: types.len() as f64 / token_count as f64,
        mean_tokens_per_sentence: token_count as f64 / sentences.len() as f64,
        token_range: (min, max),
    })
}
