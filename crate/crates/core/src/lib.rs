//! Reference-free structural priming scores.
//!
//! * [`syntree`]: constituency trees and the bracketed text format.
//! * [`kernel`]: subset-tree convolution kernel, its normalization and distance.
//! * [`spi`]: the Syntactic Preservation Index and gamma sweeps.
//! * [`primegen`]: template generation of positive/negative prime pairs.
//! * [`stats`]: Pearson correlation, preservation rate, corpus statistics.
//! * [`eval`]: batch scoring and per-type aggregation.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]
extern crate alloc;

pub mod eval;
pub mod kernel;
pub mod primegen;
pub mod spi;
pub mod stats;
pub mod syntree;

pub use eval::{EvalConfig, EvalError, EvalReport, PrimingRecord};
pub use kernel::{KernelParams, KernelValue, MatchMode};
pub use primegen::{Alternation, GeneratedSentence, Role, SlotBindings, StructureType};
pub use spi::{Direction, SpiParams, SpiResult, SpiVariant};
pub use syntree::{parse_bracketed, SyntaxTree, TreeNode};
