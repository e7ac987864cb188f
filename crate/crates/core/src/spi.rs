//! Syntactic Preservation Index.
//!
//! A predicted tree is compared with a positive and a negative prime tree:
//! `d_p = K_norm(pp, ps)`, `d_n = K_norm(np, ps)`, and the difference
//! `x = d_p - d_n` is mapped into `(-1, 1)` with a `gamma`-scaled squashing
//! function. Positive scores mean the prediction reuses the positive prime's
//! structure.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::{self, KernelError, KernelParams};
use crate::syntree::SyntaxTree;

pub const GAMMA_MIN: f64 = 0.1;
pub const GAMMA_MAX: f64 = 10.0;

/// Squashing function applied to `x = d_p - d_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpiVariant {
    /// `(e^{gx} - 1) / (e^{gx} + 1)`, i.e. `tanh(gx / 2)`. Odd and bounded.
    #[default]
    Tanh,
    /// `(e^{gx} - 1) / (e^{-gx} + 1)`. Unbounded above; kept for comparison.
    Literal,
}

impl SpiVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SpiVariant::Tanh => "tanh",
            SpiVariant::Literal => "literal",
        }
    }
}

impl fmt::Display for SpiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for SpiVariant {
    type Err = SpiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(SpiVariant::Tanh),
            "literal" => Ok(SpiVariant::Literal),
            _ => Err(SpiError::UnknownVariant),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiParams {
    gamma: f64,
    variant: SpiVariant,
}

impl SpiParams {
    pub const DEFAULT_GAMMA: f64 = 3.0;

    pub fn new(gamma: f64, variant: SpiVariant) -> Result<Self, SpiError> {
        check_gamma(gamma)?;
        Ok(SpiParams { gamma, variant })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn variant(&self) -> SpiVariant {
        self.variant
    }
}

impl Default for SpiParams {
    fn default() -> Self {
        SpiParams {
            gamma: Self::DEFAULT_GAMMA,
            variant: SpiVariant::Tanh,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<(), SpiError> {
    if (GAMMA_MIN..=GAMMA_MAX).contains(&gamma) {
        Ok(())
    } else {
        Err(SpiError::GammaOutOfRange(gamma))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpiError {
    GammaOutOfRange(f64),
    /// Sweep abscissa outside `[-1, 1]`.
    DifferenceOutOfRange(f64),
    UnknownVariant,
    Kernel(KernelError),
}

impl fmt::Display for SpiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpiError::GammaOutOfRange(g) => {
                write!(f, "gamma must be in [{GAMMA_MIN}, {GAMMA_MAX}], got {g}")
            }
            SpiError::DifferenceOutOfRange(x) => {
                write!(f, "kernel difference must be in [-1, 1], got {x}")
            }
            SpiError::UnknownVariant => f.write_str("variant must be `tanh` or `literal`"),
            SpiError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SpiError {}

impl From<KernelError> for SpiError {
    fn from(e: KernelError) -> Self {
        SpiError::Kernel(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
    Neutral,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
            Direction::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiResult {
    pub d_p: f64,
    pub d_n: f64,
    pub spi: f64,
    pub direction: Direction,
}

/// Positive above `epsilon`, negative below `-epsilon`, neutral otherwise.
pub fn classify(spi: f64, epsilon: f64) -> Direction {
    if spi > epsilon {
        Direction::Positive
    } else if spi < -epsilon {
        Direction::Negative
    } else {
        Direction::Neutral
    }
}

/// Squashes a kernel difference. No range checks.
pub fn squash(x: f64, gamma: f64, variant: SpiVariant) -> f64 {
    match variant {
        // libm's tanh is odd to the bit, which the exp ratio is not
        SpiVariant::Tanh => libm::tanh(gamma * x / 2.0),
        SpiVariant::Literal => {
            let gx = gamma * x;
            (libm::exp(gx) - 1.0) / (libm::exp(-gx) + 1.0)
        }
    }
}

/// Scores a pair of already computed normalized kernels.
pub fn spi_from_kernels(d_p: f64, d_n: f64, params: &SpiParams) -> SpiResult {
    let spi = squash(d_p - d_n, params.gamma, params.variant);
    SpiResult {
        d_p,
        d_n,
        spi,
        direction: classify(spi, 0.0),
    }
}

/// Scores predicted tree `ps` against positive prime `pp` and negative prime `np`.
pub fn spi_score(
    pp: &SyntaxTree,
    np: &SyntaxTree,
    ps: &SyntaxTree,
    kparams: &KernelParams,
    sparams: &SpiParams,
) -> Result<SpiResult, SpiError> {
    check_gamma(sparams.gamma)?;
    let self_ps = kernel::kernel(ps, ps, kparams);
    let self_pp = kernel::kernel(pp, pp, kparams);
    let self_np = kernel::kernel(np, np, kparams);
    let d_p = kernel::normalized_with_self(pp, ps, self_pp, self_ps, kparams)?;
    let d_n = kernel::normalized_with_self(np, ps, self_np, self_ps, kparams)?;
    Ok(spi_from_kernels(d_p, d_n, sparams))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub gamma: f64,
    pub spi: f64,
}

/// Cross product of kernel differences and gammas, x-major.
pub fn gamma_sweep(
    x_values: &[f64],
    gamma_grid: &[f64],
    variant: SpiVariant,
) -> Result<Vec<SweepRow>, SpiError> {
    for &g in gamma_grid {
        check_gamma(g)?;
    }
    for &x in x_values {
        if !(-1.0..=1.0).contains(&x) {
            return Err(SpiError::DifferenceOutOfRange(x));
        }
    }
    Ok(x_values
        .iter()
        .flat_map(|&x| {
            gamma_grid.iter().map(move |&gamma| SweepRow {
                x,
                gamma,
                spi: squash(x, gamma, variant),
            })
        })
        .collect())
}
