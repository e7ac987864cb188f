//! Slot-binding files for template generation.
//!
//! One pair per line; `|` separates fields:
//!
//! ```text
//! # comment
//! simple_dative | subject=A man | verb=tells | direct_object=stories | prep=to | indirect_object=people
//! simple_do     | subject=A man | verb=tells | ...
//! ```
//!
//! The first field names an alternation (its first member becomes the
//! positive prime) or a structure type (which becomes the positive prime).

use std::fmt;

use spikit_core::primegen::{Alternation, StructureType};
use spikit_core::SlotBindings;

#[derive(Debug, Clone, PartialEq)]
pub struct BindingLine {
    pub line: usize,
    pub positive: StructureType,
    pub bindings: SlotBindings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingsErrorKind {
    UnknownStructureType(String),
    /// A field without `=`.
    MalformedField(String),
    EmptySlotName,
    DuplicateSlot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingsError {
    pub line: usize,
    pub kind: BindingsErrorKind,
}

impl fmt::Display for BindingsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            BindingsErrorKind::UnknownStructureType(s) => write!(f, "unknown structure type {s:?}"),
            BindingsErrorKind::MalformedField(s) => write!(f, "expected `slot=value`, got {s:?}"),
            BindingsErrorKind::EmptySlotName => f.write_str("empty slot name"),
            BindingsErrorKind::DuplicateSlot(s) => write!(f, "slot `{s}` bound twice"),
        }
    }
}

impl std::error::Error for BindingsError {}

fn resolve(head: &str) -> Option<StructureType> {
    head.parse::<Alternation>()
        .map(|a| a.members().0)
        .or_else(|_| head.parse::<StructureType>())
        .ok()
}

fn parse_line(text: &str) -> Result<(StructureType, SlotBindings), BindingsErrorKind> {
    let mut fields = text.split('|').map(str::trim);
    let head = fields.next().unwrap_or_default();
    let positive =
        resolve(head).ok_or_else(|| BindingsErrorKind::UnknownStructureType(head.to_string()))?;
    let mut bindings = SlotBindings::new();
    for field in fields.filter(|f| !f.is_empty()) {
        let (slot, value) = field
            .split_once('=')
            .ok_or_else(|| BindingsErrorKind::MalformedField(field.to_string()))?;
        let slot = slot.trim();
        if slot.is_empty() {
            return Err(BindingsErrorKind::EmptySlotName);
        }
        if bindings.get(slot).is_some() {
            return Err(BindingsErrorKind::DuplicateSlot(slot.to_string()));
        }
        bindings.insert(slot, value.trim());
    }
    Ok((positive, bindings))
}

/// Parses a whole bindings file. Comment (`#`) and blank lines are skipped.
pub fn parse_bindings(text: &str) -> Result<Vec<BindingLine>, Vec<BindingsError>> {
    let mut lines = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match parse_line(t) {
            Ok((positive, bindings)) => lines.push(BindingLine {
                line: i + 1,
                positive,
                bindings,
            }),
            Err(kind) => errors.push(BindingsError { line: i + 1, kind }),
        }
    }
    if errors.is_empty() {
        Ok(lines)
    } else {
        Err(errors)
    }
}
