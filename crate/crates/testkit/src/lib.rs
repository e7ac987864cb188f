//! Oracles and generators for the spikit test suites.
//!
//! Nothing here calls into `spikit_core::kernel`: the fragment oracle
//! enumerates subset-tree fragments explicitly and counts matches.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use spikit_core::primegen::{load_templates, Alternation, SlotBindings, SlotKind, StructureType};
use spikit_core::{PrimingRecord, SyntaxTree, TreeNode};

/// A subset-tree fragment. `Cut` is a frontier node whose expansion was dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fragment {
    Word(String),
    Cut(String),
    Node(String, Vec<Fragment>),
}

impl Fragment {
    /// Number of expanded nodes.
    pub fn size(&self) -> u32 {
        match self {
            Fragment::Word(_) | Fragment::Cut(_) => 0,
            Fragment::Node(_, children) => 1 + children.iter().map(Fragment::size).sum::<u32>(),
        }
    }
}

fn is_preterminal(node: &TreeNode) -> bool {
    node.children.len() == 1 && node.children[0].children.is_empty()
}

/// Every fragment rooted at `node`: the full production at `node`, each
/// child either cut or replaced by one of its own fragments.
pub fn fragments_at(node: &TreeNode, lexicalized: bool) -> Vec<Fragment> {
    if is_preterminal(node) {
        let word = if lexicalized {
            node.children[0].label.clone()
        } else {
            "*".to_string()
        };
        return vec![Fragment::Node(
            node.label.clone(),
            vec![Fragment::Word(word)],
        )];
    }
    let mut partial: Vec<Vec<Fragment>> = vec![Vec::new()];
    for child in &node.children {
        let mut options = vec![Fragment::Cut(child.label.clone())];
        options.extend(fragments_at(child, lexicalized));
        partial = partial
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    partial
        .into_iter()
        .map(|children| Fragment::Node(node.label.clone(), children))
        .collect()
}

/// Multiset of all fragments rooted anywhere in `tree`.
pub fn fragment_bag(tree: &SyntaxTree, lexicalized: bool) -> BTreeMap<Fragment, u64> {
    fn walk(node: &TreeNode, lexicalized: bool, bag: &mut BTreeMap<Fragment, u64>) {
        if node.children.is_empty() {
            return;
        }
        for f in fragments_at(node, lexicalized) {
            *bag.entry(f).or_default() += 1;
        }
        for c in &node.children {
            walk(c, lexicalized, bag);
        }
    }
    let mut bag = BTreeMap::new();
    walk(tree.root(), lexicalized, &mut bag);
    bag
}

/// Exact number of shared fragment occurrences: sum over fragments of
/// count-in-t1 times count-in-t2.
pub fn common_fragment_count(t1: &SyntaxTree, t2: &SyntaxTree, lexicalized: bool) -> u128 {
    let b1 = fragment_bag(t1, lexicalized);
    let b2 = fragment_bag(t2, lexicalized);
    b1.iter()
        .filter_map(|(f, &c1)| b2.get(f).map(|&c2| c1 as u128 * c2 as u128))
        .sum()
}

/// Shared fragments weighted by `lambda` per expanded node.
pub fn weighted_fragment_kernel(
    t1: &SyntaxTree,
    t2: &SyntaxTree,
    lambda: f64,
    lexicalized: bool,
) -> f64 {
    let b1 = fragment_bag(t1, lexicalized);
    let b2 = fragment_bag(t2, lexicalized);
    b1.iter()
        .filter_map(|(f, &c1)| {
            b2.get(f)
                .map(|&c2| (c1 * c2) as f64 * lambda.powi(f.size() as i32))
        })
        .sum()
}

const PHRASES: &[&str] = &["S", "NP", "VP", "PP", "X"];
const TAGS: &[&str] = &["DT", "NN", "VB", "IN", "X"];
const WORDS: &[&str] = &["a", "b", "c"];

fn random_node<R: Rng>(rng: &mut R, budget: usize) -> TreeNode {
    if budget == 1 || rng.random_bool(0.25) {
        return TreeNode::preterminal(*TAGS.choose(rng).unwrap(), *WORDS.choose(rng).unwrap());
    }
    let label = *PHRASES.choose(rng).unwrap();
    let remaining = budget - 1;
    let arity = rng.random_range(1..=remaining.min(3));
    // split the remaining budget across children, each at least 1
    let mut shares = vec![1; arity];
    for _ in 0..(remaining - arity) {
        if rng.random_bool(0.6) {
            let i = rng.random_range(0..arity);
            shares[i] += 1;
        }
    }
    let children = shares.into_iter().map(|b| random_node(rng, b)).collect();
    TreeNode::internal(label, children)
}

/// A random valid tree with at most `max_internal` internal nodes, drawn
/// from a small label alphabet so that productions collide often.
pub fn random_tree<R: Rng>(rng: &mut R, max_internal: usize) -> SyntaxTree {
    let budget = rng.random_range(1..=max_internal.max(1));
    SyntaxTree::new(random_node(rng, budget)).expect("generator emits valid trees")
}

const NOUNS: &[&str] = &[
    "man", "woman", "dog", "child", "artist", "ball", "book", "audience", "street",
];
const DETS: &[&str] = &["a", "the", "this", "their"];
const VERBS: &[&str] = &["gives", "shows", "tells", "throws", "hands", "carries"];
const PARTICIPLES: &[&str] = &["given", "shown", "told", "thrown", "carried"];
const PREPS: &[&str] = &["to", "for", "with", "on"];
const ADJS: &[&str] = &["green", "small", "tall", "bright"];
const ADVERBS: &[&str] = &["loudly", "quietly", "intently", "slowly"];

fn random_np<R: Rng>(rng: &mut R) -> String {
    let mut words = Vec::new();
    if rng.random_bool(0.7) {
        words.push(*DETS.choose(rng).unwrap());
    }
    if rng.random_bool(0.3) {
        words.push(*ADJS.choose(rng).unwrap());
    }
    words.push(*NOUNS.choose(rng).unwrap());
    if rng.random_bool(0.2) {
        words.extend(["wearing", "a", "hat"]);
    } else if rng.random_bool(0.2) {
        words.extend([
            "that",
            *VERBS.choose(rng).unwrap(),
            *NOUNS.choose(rng).unwrap(),
        ]);
    }
    words.join(" ")
}

fn random_filler<R: Rng>(rng: &mut R, kind: SlotKind) -> String {
    match kind {
        SlotKind::NounPhrase | SlotKind::Possessor => random_np(rng),
        SlotKind::Word("VB") => VERBS.choose(rng).unwrap().to_string(),
        SlotKind::Word("VBN") => PARTICIPLES.choose(rng).unwrap().to_string(),
        SlotKind::Word("AUX") => ["is", "was", "were"].choose(rng).unwrap().to_string(),
        SlotKind::Word("IN") => PREPS.choose(rng).unwrap().to_string(),
        SlotKind::Word("DT") => ["the", "a"].choose(rng).unwrap().to_string(),
        SlotKind::Word(_) => NOUNS.choose(rng).unwrap().to_string(),
        SlotKind::Flat { label: "ADVP", .. } => ADVERBS.choose(rng).unwrap().to_string(),
        SlotKind::Flat { label: "ADJP", .. } => {
            if rng.random_bool(0.5) {
                format!(
                    "{} and {}",
                    ADJS.choose(rng).unwrap(),
                    ADJS.choose(rng).unwrap()
                )
            } else {
                ADJS.choose(rng).unwrap().to_string()
            }
        }
        SlotKind::Flat { .. } => format!(
            "{} as the {} {} {}",
            ADVERBS.choose(rng).unwrap(),
            NOUNS.choose(rng).unwrap(),
            VERBS.choose(rng).unwrap(),
            random_np(rng)
        ),
        SlotKind::PrepPhrase => format!("{} {}", PREPS.choose(rng).unwrap(), random_np(rng)),
    }
}

/// Random fillers for every slot of `alternation`'s shared schema.
pub fn random_bindings<R: Rng>(rng: &mut R, alternation: Alternation) -> SlotBindings {
    let reg = load_templates();
    let template = reg.get(alternation.members().0);
    template
        .slots
        .iter()
        .map(|s| (s.name, random_filler(rng, s.kind)))
        .collect()
}

/// The reference example sentence for each structure type and the bindings
/// that reproduce it.
pub fn golden_examples() -> Vec<(StructureType, SlotBindings, &'static str)> {
    use StructureType::*;
    let b = |pairs: &[(&str, &str)]| pairs.iter().copied().collect::<SlotBindings>();

    let boy_ball = b(&[
        ("agent", "a boy"),
        ("verb", "carries"),
        ("patient", "a ball"),
        ("auxiliary", "is"),
        ("participle", "carried"),
    ]);
    let girl_colors = b(&[
        ("subject", "a girl"),
        ("verb", "painted"),
        ("direct_object", "the colors"),
        ("auxiliary", "were"),
        ("participle", "painted"),
        ("prep", "on"),
        ("prep_object", "paper"),
        ("adjunct", "with the brush"),
    ]);
    let sidewalk_passive = b(&[
        ("patient_det", "the"),
        ("patient_noun", "sidewalk"),
        ("auxiliary", "was"),
        ("participle", "washed"),
        ("agent", "the women"),
        ("copula", "is"),
        ("attribute", "green and purple"),
        ("verb", "washed"),
    ]);
    let sidewalk_active = b(&[
        ("patient_det", "the"),
        ("patient_noun", "sidewalk"),
        ("auxiliary", "was"),
        ("participle", "washed"),
        ("agent", "a woman"),
        ("copula", "is"),
        ("attribute", "green and purple"),
        ("verb", "washed"),
    ]);
    let music = b(&[
        ("subject", "the music"),
        ("verb", "plays"),
        (
            "adverbial_clause",
            "loudly as the singer performs in front of the audience",
        ),
        ("adverbial_modifier", "loudly"),
        (
            "additional_clause",
            "as the singer performs in front of the audience",
        ),
    ]);
    let audience = b(&[
        ("subject", "the audience"),
        ("verb", "listens"),
        ("adverbial_clause", "intently as the band plays their music"),
        ("adverbial_modifier", "intently"),
        ("additional_clause", "as the band plays their music"),
    ]);
    let man_tells = b(&[
        ("subject", "A man"),
        ("verb", "tells"),
        ("direct_object", "stories"),
        ("prep", "to"),
        ("indirect_object", "people"),
    ]);
    let woman_shares = b(&[
        ("subject_phrase", "a woman wearing black glasses"),
        ("verb_phrase", "share"),
        ("direct_object_phrase", "sweets"),
        ("prep", "with"),
        (
            "indirect_object_phrase",
            "a toddler girl wearing a princess hat",
        ),
    ]);
    let teacher = |subject: &str| {
        b(&[
            ("subject", subject),
            ("verb", "give"),
            ("direct_object", "assignments"),
            ("prep", "to"),
            (
                "indirect_object_clause",
                "the student that studys in the library",
            ),
        ])
    };
    let firefighters = b(&[
        ("head", "Reflections"),
        ("head_prep", "from"),
        ("possessor", "the firefighters"),
        ("possessed", "uniforms"),
    ]);

    vec![
        (SimpleActive, boy_ball.clone(), "A boy carries a ball."),
        (SimplePassive, boy_ball, "A ball is carried by a boy."),
        (
            PoPassive,
            girl_colors.clone(),
            "The colors were painted on paper by a girl with the brush.",
        ),
        (PoActive, girl_colors, "A girl painted the colors on paper with the brush."),
        (
            EmbeddedPassive,
            sidewalk_passive,
            "The sidewalk that was washed by the women is green and purple.",
        ),
        (EmbeddedActive, sidewalk_active, "A woman washed the green and purple sidewalk."),
        (
            Mediopassive,
            music,
            "The music plays loudly as the singer performs in front of the audience.",
        ),
        (
            MediopassiveLikeActive,
            audience,
            "The audience listens intently as the band plays their music.",
        ),
        (SimplePo, man_tells.clone(), "A man tells stories to people."),
        (SimpleDo, man_tells, "A man tells people stories."),
        (
            ComplexPo,
            woman_shares.clone(),
            "A woman wearing black glasses share sweets with a toddler girl wearing a princess hat.",
        ),
        (
            ComplexDo,
            woman_shares,
            "A woman wearing black glasses share a toddler girl wearing a princess hat sweets.",
        ),
        (
            PoClause,
            teacher("the teacher that carrys books"),
            "The teacher that carrys books give assignments to the student that studys in the library.",
        ),
        (
            DoClause,
            teacher("the teacher that carries books"),
            "The teacher that carries books give the student that studys in the library assignments.",
        ),
        (SGenitive, firefighters.clone(), "Reflections from the firefighters' uniforms."),
        (OfGenitive, firefighters, "Reflections from the uniforms of the firefighters."),
    ]
}

/// `n` records built from generated prime pairs. The prediction is the
/// positive prime, the negative prime, or a random tree; about two thirds
/// carry similarity values.
pub fn synthetic_records<R: Rng>(rng: &mut R, n: usize) -> Vec<PrimingRecord> {
    let reg = load_templates();
    (0..n)
        .map(|i| {
            let alt = *Alternation::ALL.choose(rng).unwrap();
            let b = random_bindings(rng, alt);
            let (p, q) = reg.generate_pair(alt, &b).expect("complete bindings");
            let predicted = match rng.random_range(0..3) {
                0 => p.tree.clone(),
                1 => q.tree.clone(),
                _ => random_tree(rng, 12),
            };
            PrimingRecord {
                id: format!("rec{i:05}"),
                structure_type: p.structure_type.name().to_string(),
                prime_pos_tree: p.tree,
                prime_neg_tree: q.tree,
                predicted_tree: predicted,
                sentence_similarity: rng.random_bool(0.66).then(|| rng.random()),
                image_similarity: rng.random_bool(0.66).then(|| rng.random()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use spikit_core::parse_bracketed;

    #[test]
    fn np_has_four_fragments() {
        let t = parse_bracketed("(NP (DT the) (NN dog))").unwrap();
        assert_eq!(fragments_at(t.root(), true).len(), 4);
    }

    #[test]
    fn dog_sentence_counts() {
        let dog = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VB runs)))").unwrap();
        let cat = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VB runs)))").unwrap();
        assert_eq!(common_fragment_count(&dog, &dog, true), 24);
        assert_eq!(common_fragment_count(&dog, &cat, true), 15);
        assert_eq!(common_fragment_count(&dog, &cat, false), 24);
        assert_eq!(weighted_fragment_kernel(&dog, &dog, 0.5, true), 5.234375);
    }
}
