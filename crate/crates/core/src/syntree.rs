//! Constituency trees and their bracketed text form.
//!
//! A tree is written label-first, children after:
//!
//! ```text
//! (S (NP (DT the) (NN dog)) (VP (VB runs)))
//! ```
//!
//! Internal nodes carry a label and at least one child. Leaves are bare
//! words. A node whose only child is a leaf is a *preterminal* (a POS tag
//! node); leaves are never mixed with other children.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Word used in place of every leaf by [`delexicalize`].
pub const DELEX_WORD: &str = "*";

/// One node of a constituency tree. An empty `children` list marks a leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeNode {
    pub label: String,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(word: impl Into<String>) -> Self {
        TreeNode {
            label: word.into(),
            children: Vec::new(),
        }
    }

    pub fn internal(label: impl Into<String>, children: Vec<TreeNode>) -> Self {
        TreeNode {
            label: label.into(),
            children,
        }
    }

    /// `(TAG word)`
    pub fn preterminal(tag: impl Into<String>, word: impl Into<String>) -> Self {
        TreeNode::internal(tag, alloc::vec![TreeNode::leaf(word)])
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_preterminal(&self) -> bool {
        self.children.len() == 1 && self.children[0].is_leaf()
    }

    fn write_bracketed(&self, out: &mut String) {
        if self.is_leaf() {
            out.push_str(&self.label);
            return;
        }
        out.push('(');
        out.push_str(&self.label);
        for child in &self.children {
            out.push(' ');
            child.write_bracketed(out);
        }
        out.push(')');
    }

    fn count_internal(&self) -> usize {
        if self.is_leaf() {
            0
        } else {
            1 + self
                .children
                .iter()
                .map(TreeNode::count_internal)
                .sum::<usize>()
        }
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }
}

/// A validated constituency tree whose root is an internal node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SyntaxTree {
    root: TreeNode,
}

impl SyntaxTree {
    /// Wraps `root` after checking every tree invariant.
    pub fn new(root: TreeNode) -> Result<Self, Vec<Violation>> {
        let violations = validate(&root);
        if violations.is_empty() {
            Ok(SyntaxTree { root })
        } else {
            Err(violations)
        }
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn into_root(self) -> TreeNode {
        self.root
    }

    /// Number of internal nodes, preterminals included.
    pub fn internal_count(&self) -> usize {
        self.root.count_internal()
    }

    /// Leaf words in order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    pub fn to_bracketed(&self) -> String {
        to_bracketed(self)
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_bracketed(self))
    }
}

impl core::str::FromStr for SyntaxTree {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bracketed(s)
    }
}

impl Serialize for SyntaxTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_bracketed(self))
    }
}

impl<'de> Deserialize<'de> for SyntaxTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_bracketed(&text).map_err(serde::de::Error::custom)
    }
}

/// A rewrite rule instance: a node label and its ordered child labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Production {
    pub parent: String,
    pub children: Vec<String>,
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.parent)?;
        for child in &self.children {
            write!(f, " {child}")?;
        }
        Ok(())
    }
}

/// Child-index path from the root; the root itself is the empty path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for idx in &self.0 {
            write!(f, "/{idx}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The root has no children.
    BareLeaf,
    EmptyLabel,
    /// Label contains whitespace, a bracket or a control character.
    IllegalLabel(String),
    /// A leaf shares its parent with an internal node.
    MixedChildren,
    /// Several bare words directly under one label.
    FlatWords,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: NodePath,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::BareLeaf => write!(f, "bare leaf at {}", self.path),
            ViolationKind::EmptyLabel => write!(f, "empty label at {}", self.path),
            ViolationKind::IllegalLabel(l) => write!(f, "illegal label {l:?} at {}", self.path),
            ViolationKind::MixedChildren => {
                write!(f, "word mixed with phrase children at {}", self.path)
            }
            ViolationKind::FlatWords => write!(f, "flat word list at {}", self.path),
        }
    }
}

fn label_is_legal(label: &str) -> bool {
    !label
        .chars()
        .any(|c| c.is_whitespace() || c.is_control() || c == '(' || c == ')')
}

/// Checks every tree invariant; the result is empty iff `root` is a valid tree root.
pub fn validate(root: &TreeNode) -> Vec<Violation> {
    let mut out = Vec::new();
    if root.is_leaf() {
        out.push(Violation {
            path: NodePath::default(),
            kind: ViolationKind::BareLeaf,
        });
    }
    let mut path = Vec::new();
    validate_node(root, &mut path, &mut out);
    out
}

fn validate_node(node: &TreeNode, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    let here = |kind| Violation {
        path: NodePath(path.clone()),
        kind,
    };
    if node.label.is_empty() {
        out.push(here(ViolationKind::EmptyLabel));
    } else if !label_is_legal(&node.label) {
        out.push(here(ViolationKind::IllegalLabel(node.label.clone())));
    }
    if node.children.len() > 1 {
        let leaves = node.children.iter().filter(|c| c.is_leaf()).count();
        if leaves == node.children.len() {
            out.push(here(ViolationKind::FlatWords));
        } else if leaves > 0 {
            out.push(here(ViolationKind::MixedChildren));
        }
    }
    for (idx, child) in node.children.iter().enumerate() {
        path.push(idx);
        validate_node(child, path, out);
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    EmptyInput,
    /// Opening and closing bracket counts differ.
    UnbalancedBrackets {
        open: usize,
        close: usize,
    },
    /// `()`
    EmptyNode,
    /// `(A)`: a label with nothing under it.
    ChildlessNode(String),
    /// `((A x))`: a node opened where a label was expected.
    MissingLabel,
    TrailingContent,
    /// The input is a bare token rather than a bracketed node.
    BareLeaf,
    Invalid(Vec<Violation>),
}

/// Parse failure with a 1-based line/column position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::EmptyInput => f.write_str("empty input"),
            ParseErrorKind::UnbalancedBrackets { open, close } => {
                write!(f, "unbalanced brackets ({open} open, {close} close)")
            }
            ParseErrorKind::EmptyNode => f.write_str("empty node `()`"),
            ParseErrorKind::ChildlessNode(l) => write!(f, "node {l:?} has no children"),
            ParseErrorKind::MissingLabel => f.write_str("expected a label, found `(`"),
            ParseErrorKind::TrailingContent => f.write_str("trailing content after tree"),
            ParseErrorKind::BareLeaf => f.write_str("bare token is not a tree"),
            ParseErrorKind::Invalid(vs) => {
                f.write_str("invalid tree: ")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    text: &'a str,
    offset: usize,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            offset: 0,
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self, c: char) {
        self.offset += c.len_utf8();
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
    }

    fn next_token(&mut self) -> Option<(Token<'a>, Pos)> {
        let rest = &self.text[self.offset..];
        let mut chars = rest.chars();
        let c = loop {
            let c = chars.next()?;
            if c.is_whitespace() {
                self.bump(c);
            } else {
                break c;
            }
        };
        let start = self.pos;
        match c {
            '(' => {
                self.bump(c);
                Some((Token::Open, start))
            }
            ')' => {
                self.bump(c);
                Some((Token::Close, start))
            }
            _ => {
                let begin = self.offset;
                for c in self.text[begin..].chars() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    self.bump(c);
                }
                Some((Token::Atom(&self.text[begin..self.offset]), start))
            }
        }
    }
}

struct Frame {
    open: Pos,
    label: Option<String>,
    children: Vec<TreeNode>,
}

fn bracket_counts(text: &str) -> (usize, usize) {
    text.chars().fold((0, 0), |(o, c), ch| match ch {
        '(' => (o + 1, c),
        ')' => (o, c + 1),
        _ => (o, c),
    })
}

/// Parses one bracketed tree. Whitespace between tokens is free-form.
pub fn parse_bracketed(text: &str) -> Result<SyntaxTree, ParseError> {
    let err = |kind, pos: Pos| ParseError {
        kind,
        line: pos.line,
        column: pos.column,
    };
    let unbalanced = |pos| {
        let (open, close) = bracket_counts(text);
        err(ParseErrorKind::UnbalancedBrackets { open, close }, pos)
    };

    let mut lexer = Lexer::new(text);
    let mut stack: Vec<Frame> = Vec::new();
    let mut root: Option<TreeNode> = None;

    while let Some((token, pos)) = lexer.next_token() {
        if root.is_some() {
            return Err(match token {
                Token::Close => unbalanced(pos),
                _ => err(ParseErrorKind::TrailingContent, pos),
            });
        }
        match token {
            Token::Open => {
                if let Some(top) = stack.last() {
                    if top.label.is_none() {
                        return Err(err(ParseErrorKind::MissingLabel, pos));
                    }
                }
                stack.push(Frame {
                    open: pos,
                    label: None,
                    children: Vec::new(),
                });
            }
            Token::Atom(atom) => match stack.last_mut() {
                None => return Err(err(ParseErrorKind::BareLeaf, pos)),
                Some(top) if top.label.is_none() => top.label = Some(atom.to_string()),
                Some(top) => top.children.push(TreeNode::leaf(atom)),
            },
            Token::Close => {
                let frame = stack.pop().ok_or_else(|| unbalanced(pos))?;
                let label = frame
                    .label
                    .ok_or_else(|| err(ParseErrorKind::EmptyNode, pos))?;
                if frame.children.is_empty() {
                    return Err(err(ParseErrorKind::ChildlessNode(label), pos));
                }
                let node = TreeNode::internal(label, frame.children);
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => root = Some(node),
                }
            }
        }
    }

    // point at the innermost bracket left open
    if let Some(top) = stack.last() {
        return Err(unbalanced(top.open));
    }
    let root = root.ok_or_else(|| err(ParseErrorKind::EmptyInput, lexer.pos))?;
    SyntaxTree::new(root).map_err(|vs| err(ParseErrorKind::Invalid(vs), Pos { line: 1, column: 1 }))
}

/// Canonical single-space bracketed form.
pub fn to_bracketed(tree: &SyntaxTree) -> String {
    let mut out = String::new();
    tree.root.write_bracketed(&mut out);
    out
}

/// One production per internal node, in pre-order.
pub fn productions(tree: &SyntaxTree) -> Vec<Production> {
    fn walk(node: &TreeNode, out: &mut Vec<Production>) {
        if node.is_leaf() {
            return;
        }
        out.push(Production {
            parent: node.label.clone(),
            children: node.children.iter().map(|c| c.label.clone()).collect(),
        });
        for child in &node.children {
            walk(child, out);
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut out);
    out
}

/// Replaces every leaf word with [`DELEX_WORD`], keeping labels and shape.
pub fn delexicalize(tree: &SyntaxTree) -> SyntaxTree {
    fn erase(node: &TreeNode) -> TreeNode {
        if node.is_leaf() {
            TreeNode::leaf(DELEX_WORD)
        } else {
            TreeNode::internal(
                node.label.clone(),
                node.children.iter().map(erase).collect(),
            )
        }
    }
    SyntaxTree {
        root: erase(&tree.root),
    }
}
