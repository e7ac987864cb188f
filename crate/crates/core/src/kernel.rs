//! Subset-tree convolution kernel over constituency trees.
//!
//! `K(T1, T2)` sums `delta(n1, n2)` over all pairs of internal nodes, where
//! `delta` counts the common tree fragments rooted at both nodes, each
//! fragment weighted by `lambda` per expanded node:
//!
//! * `0` when the productions at `n1` and `n2` differ,
//! * `lambda` when they match and `n1` is a preterminal,
//! * `lambda * prod_j (1 + delta(ch(n1, j), ch(n2, j)))` otherwise.
//!
//! Leaf words are not kernel nodes. The normalized kernel divides by the
//! geometric mean of the self-kernels and the induced distance is
//! `sqrt(2 - 2 * K_norm)`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::syntree::{SyntaxTree, TreeNode};

/// How preterminal productions are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// `(NN dog)` matches only `(NN dog)`.
    Lexicalized,
    /// `(NN dog)` matches any `(NN _)`.
    #[default]
    Delexicalized,
}

impl MatchMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchMode::Lexicalized => "lexicalized",
            MatchMode::Delexicalized => "delexicalized",
        }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for MatchMode {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lexicalized" | "lex" => Ok(MatchMode::Lexicalized),
            "delexicalized" | "delex" => Ok(MatchMode::Delexicalized),
            _ => Err(KernelError::UnknownMode),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    lambda: f64,
    mode: MatchMode,
}

impl KernelParams {
    pub const DEFAULT_LAMBDA: f64 = 1.0;

    /// Fails unless `0 < lambda <= 1`.
    pub fn new(lambda: f64, mode: MatchMode) -> Result<Self, KernelError> {
        if lambda.is_finite() && lambda > 0.0 && lambda <= 1.0 {
            Ok(KernelParams { lambda, mode })
        } else {
            Err(KernelError::InvalidLambda(lambda))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            lambda: Self::DEFAULT_LAMBDA,
            mode: MatchMode::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelError {
    InvalidLambda(f64),
    UnknownMode,
    /// A self-kernel evaluated to zero.
    DegenerateTree,
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidLambda(l) => write!(f, "lambda must be in (0, 1], got {l}"),
            KernelError::UnknownMode => {
                f.write_str("mode must be `lexicalized` or `delexicalized`")
            }
            KernelError::DegenerateTree => f.write_str("tree has a zero self-kernel"),
        }
    }
}

impl core::error::Error for KernelError {}

/// Raw kernel, normalized kernel and distance for one tree pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub raw: f64,
    pub normalized: f64,
    pub distance: f64,
}

// Production identity. The preterminal flag keeps `(A B)` (a tag over the
// word "B") apart from `(A (B ...))`.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct ProdKey<'a> {
    label: &'a str,
    preterminal: bool,
    children: Vec<&'a str>,
}

struct IndexedNode {
    prod: usize,
    preterminal: bool,
    children: Vec<usize>,
}

#[derive(Default)]
struct Interner<'a> {
    ids: BTreeMap<ProdKey<'a>, usize>,
}

impl<'a> Interner<'a> {
    fn intern(&mut self, node: &'a TreeNode, mode: MatchMode) -> usize {
        let preterminal = node.is_preterminal();
        let children = if preterminal && mode == MatchMode::Delexicalized {
            Vec::new()
        } else {
            node.children.iter().map(|c| c.label.as_str()).collect()
        };
        let key = ProdKey {
            label: &node.label,
            preterminal,
            children,
        };
        let next = self.ids.len();
        *self.ids.entry(key).or_insert(next)
    }

    /// Flattens the internal nodes under `root` in post-order, so every
    /// child index is smaller than its parent's.
    fn index(&mut self, root: &'a TreeNode, mode: MatchMode) -> Vec<IndexedNode> {
        fn walk<'a>(
            node: &'a TreeNode,
            mode: MatchMode,
            interner: &mut Interner<'a>,
            out: &mut Vec<IndexedNode>,
        ) -> usize {
            let preterminal = node.is_preterminal();
            let children = if preterminal {
                Vec::new()
            } else {
                node.children
                    .iter()
                    .map(|c| walk(c, mode, interner, out))
                    .collect()
            };
            let prod = interner.intern(node, mode);
            out.push(IndexedNode {
                prod,
                preterminal,
                children,
            });
            out.len() - 1
        }
        let mut out = Vec::new();
        if !root.is_leaf() {
            walk(root, mode, self, &mut out);
        }
        out
    }
}

/// Every nonzero `delta(n1, n2)` plus the full pair table.
struct DeltaTable {
    cols: usize,
    table: Vec<f64>,
    nonzero: Vec<f64>,
}

fn delta_table(a: &TreeNode, b: &TreeNode, params: &KernelParams) -> DeltaTable {
    let mut interner = Interner::default();
    let left = interner.index(a, params.mode);
    let right = interner.index(b, params.mode);

    let mut by_prod: Vec<Vec<usize>> = vec![Vec::new(); interner.ids.len()];
    for (j, node) in right.iter().enumerate() {
        by_prod[node.prod].push(j);
    }

    let cols = right.len();
    let mut table = vec![0.0; left.len() * cols];
    let mut nonzero = Vec::new();
    for (i, n1) in left.iter().enumerate() {
        for &j in &by_prod[n1.prod] {
            let delta = if n1.preterminal {
                params.lambda
            } else {
                // equal productions imply equal arity
                n1.children
                    .iter()
                    .zip(&right[j].children)
                    .fold(params.lambda, |acc, (&c1, &c2)| {
                        acc * (1.0 + table[c1 * cols + c2])
                    })
            };
            table[i * cols + j] = delta;
            nonzero.push(delta);
        }
    }
    DeltaTable {
        cols,
        table,
        nonzero,
    }
}

/// Weighted count of common fragments rooted at both `n1` and `n2`.
/// Returns 0 when either node is a leaf.
pub fn delta(n1: &TreeNode, n2: &TreeNode, params: &KernelParams) -> f64 {
    if n1.is_leaf() || n2.is_leaf() {
        return 0.0;
    }
    let t = delta_table(n1, n2, params);
    // roots come last in post-order
    let rows = t.table.len() / t.cols;
    t.table[(rows - 1) * t.cols + (t.cols - 1)]
}

/// Sum of `delta` over all internal-node pairs.
///
/// The nonzero terms are summed in ascending order, so the result does not
/// depend on which tree comes first.
pub fn kernel(t1: &SyntaxTree, t2: &SyntaxTree, params: &KernelParams) -> f64 {
    let mut terms = delta_table(t1.root(), t2.root(), params).nonzero;
    terms.sort_by(f64::total_cmp);
    terms.iter().fold(0.0, |acc, t| acc + t)
}

fn normalize(raw: f64, self1: f64, self2: f64) -> Result<f64, KernelError> {
    if !(self1 > 0.0 && self2 > 0.0) {
        return Err(KernelError::DegenerateTree);
    }
    let mut denom = libm::sqrt(self1 * self2);
    if !denom.is_finite() {
        denom = libm::sqrt(self1) * libm::sqrt(self2);
    }
    Ok((raw / denom).clamp(0.0, 1.0))
}

fn distance_from(normalized: f64) -> f64 {
    libm::sqrt((2.0 - 2.0 * normalized).max(0.0))
}

/// `K(t1, t2) / sqrt(K(t1, t1) * K(t2, t2))`, clamped to `[0, 1]`.
pub fn normalized_kernel(
    t1: &SyntaxTree,
    t2: &SyntaxTree,
    params: &KernelParams,
) -> Result<f64, KernelError> {
    normalize(
        kernel(t1, t2, params),
        kernel(t1, t1, params),
        kernel(t2, t2, params),
    )
}

pub fn tree_distance(
    t1: &SyntaxTree,
    t2: &SyntaxTree,
    params: &KernelParams,
) -> Result<f64, KernelError> {
    normalized_kernel(t1, t2, params).map(distance_from)
}

/// All three quantities from a single set of kernel evaluations.
pub fn kernel_value(
    t1: &SyntaxTree,
    t2: &SyntaxTree,
    params: &KernelParams,
) -> Result<KernelValue, KernelError> {
    let raw = kernel(t1, t2, params);
    let normalized = normalize(raw, kernel(t1, t1, params), kernel(t2, t2, params))?;
    Ok(KernelValue {
        raw,
        normalized,
        distance: distance_from(normalized),
    })
}

/// Normalized kernel given a precomputed self-kernel for each side.
pub(crate) fn normalized_with_self(
    t1: &SyntaxTree,
    t2: &SyntaxTree,
    self1: f64,
    self2: f64,
    params: &KernelParams,
) -> Result<f64, KernelError> {
    normalize(kernel(t1, t2, params), self1, self2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntree::parse_bracketed;

    const DOG: &str = "(S (NP (DT the) (NN dog)) (VP (VB runs)))";
    const CAT: &str = "(S (NP (DT the) (NN cat)) (VP (VB runs)))";

    fn tree(s: &str) -> SyntaxTree {
        parse_bracketed(s).unwrap()
    }

    fn lex(lambda: f64) -> KernelParams {
        KernelParams::new(lambda, MatchMode::Lexicalized).unwrap()
    }

    fn delex(lambda: f64) -> KernelParams {
        KernelParams::new(lambda, MatchMode::Delexicalized).unwrap()
    }

    #[test]
    fn lambda_range() {
        assert!(KernelParams::new(0.0, MatchMode::Lexicalized).is_err());
        assert!(KernelParams::new(1.5, MatchMode::Lexicalized).is_err());
        assert!(KernelParams::new(f64::NAN, MatchMode::Lexicalized).is_err());
        assert!(KernelParams::new(1.0, MatchMode::Lexicalized).is_ok());
        let d = KernelParams::default();
        assert_eq!((d.lambda(), d.mode()), (1.0, MatchMode::Delexicalized));
    }

    #[test]
    fn delta_base_cases() {
        let dog = tree("(NN dog)");
        let cat = tree("(NN cat)");
        assert_eq!(delta(dog.root(), dog.root(), &lex(1.0)), 1.0);
        assert_eq!(delta(dog.root(), cat.root(), &lex(1.0)), 0.0);
        assert_eq!(delta(dog.root(), cat.root(), &delex(0.3)), 0.3);
        let np = tree("(NP (DT the) (NN dog))");
        assert_eq!(delta(np.root(), np.root(), &lex(1.0)), 4.0);
    }

    #[test]
    fn preterminal_is_not_a_phrase() {
        // same label strings, different shapes
        let a = tree("(A B)");
        let b = tree("(A (B x))");
        assert_eq!(kernel(&a, &b, &lex(1.0)), 0.0);
        assert_eq!(kernel(&b, &a, &lex(1.0)), 0.0);
    }

    #[test]
    fn kernel_examples() {
        let t = tree(DOG);
        assert_eq!(kernel(&t, &t, &lex(1.0)), 24.0);
        assert_eq!(kernel(&t, &t, &lex(0.5)), 5.234375);
        let c = tree(CAT);
        assert_eq!(kernel(&t, &c, &lex(1.0)), 15.0);
        assert_eq!(kernel(&c, &t, &lex(1.0)), 15.0);
    }

    #[test]
    fn normalized_examples() {
        let t = tree(DOG);
        let c = tree(CAT);
        assert!((normalized_kernel(&t, &t, &lex(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(normalized_kernel(&t, &c, &lex(1.0)).unwrap(), 0.625);
        assert_eq!(normalized_kernel(&t, &c, &delex(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn distance_examples() {
        let t = tree(DOG);
        let c = tree(CAT);
        assert!(tree_distance(&t, &t, &lex(1.0)).unwrap() < 1e-9);
        let d = tree_distance(&t, &c, &lex(1.0)).unwrap();
        assert!((d - 0.866025).abs() < 1e-6);
        let other = tree("(X (Y z))");
        let d = tree_distance(&t, &other, &lex(1.0)).unwrap();
        assert!((d - core::f64::consts::SQRT_2).abs() < 1e-12);
        let v = kernel_value(&t, &other, &lex(1.0)).unwrap();
        assert_eq!((v.raw, v.normalized), (0.0, 0.0));
    }
}
