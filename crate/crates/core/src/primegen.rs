//! Template-based generation of priming sentence pairs.
//!
//! Sixteen structure types are grouped into eight alternations (voice,
//! dative and genitive families). A template is a skeleton tree in which
//! `(@ name)` marks a slot; fixed function words are ordinary preterminals.
//! Filling the slots yields the tree directly, and the sentence text is
//! read off its leaves, so no external parser is involved.
//!
//! Filler words are tagged by a small closed-class rule set: articles and
//! demonstratives become `DT`, possessive pronouns `PRP$`, conjunctions
//! `CC`, prepositions and subordinators `IN`. Everything else takes the
//! slot's default tag. Noun fillers are split once at a relative pronoun
//! (`the teacher that carries books`) or at a trailing participle
//! (`a woman wearing black glasses`).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::syntree::{parse_bracketed, SyntaxTree, TreeNode};

/// Label of a slot placeholder node in a skeleton.
const SLOT_LABEL: &str = "@";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureType {
    SimpleActive,
    SimplePassive,
    PoPassive,
    PoActive,
    EmbeddedPassive,
    EmbeddedActive,
    Mediopassive,
    MediopassiveLikeActive,
    SimplePo,
    SimpleDo,
    ComplexPo,
    ComplexDo,
    PoClause,
    DoClause,
    SGenitive,
    OfGenitive,
}

impl StructureType {
    pub const ALL: [StructureType; 16] = [
        StructureType::SimpleActive,
        StructureType::SimplePassive,
        StructureType::PoPassive,
        StructureType::PoActive,
        StructureType::EmbeddedPassive,
        StructureType::EmbeddedActive,
        StructureType::Mediopassive,
        StructureType::MediopassiveLikeActive,
        StructureType::SimplePo,
        StructureType::SimpleDo,
        StructureType::ComplexPo,
        StructureType::ComplexDo,
        StructureType::PoClause,
        StructureType::DoClause,
        StructureType::SGenitive,
        StructureType::OfGenitive,
    ];

    /// Machine name, e.g. `simple_po`.
    pub fn name(self) -> &'static str {
        match self {
            StructureType::SimpleActive => "simple_active",
            StructureType::SimplePassive => "simple_passive",
            StructureType::PoPassive => "po_passive",
            StructureType::PoActive => "po_active",
            StructureType::EmbeddedPassive => "embedded_passive",
            StructureType::EmbeddedActive => "embedded_active",
            StructureType::Mediopassive => "mediopassive",
            StructureType::MediopassiveLikeActive => "mediopassive_like_active",
            StructureType::SimplePo => "simple_po",
            StructureType::SimpleDo => "simple_do",
            StructureType::ComplexPo => "complex_po",
            StructureType::ComplexDo => "complex_do",
            StructureType::PoClause => "po_clause",
            StructureType::DoClause => "do_clause",
            StructureType::SGenitive => "s_genitive",
            StructureType::OfGenitive => "of_genitive",
        }
    }

    /// Human-readable name, e.g. `Simple PO`.
    pub fn title(self) -> &'static str {
        match self {
            StructureType::SimpleActive => "Simple Active",
            StructureType::SimplePassive => "Simple Passive",
            StructureType::PoPassive => "PO Passive",
            StructureType::PoActive => "PO Active",
            StructureType::EmbeddedPassive => "Embedded Passive",
            StructureType::EmbeddedActive => "Embedded Active",
            StructureType::Mediopassive => "Mediopassive",
            StructureType::MediopassiveLikeActive => "Mediopassive-like Active",
            StructureType::SimplePo => "Simple PO",
            StructureType::SimpleDo => "Simple DO",
            StructureType::ComplexPo => "Complex PO",
            StructureType::ComplexDo => "Complex DO",
            StructureType::PoClause => "PO Clause",
            StructureType::DoClause => "DO Clause",
            StructureType::SGenitive => "S-Genitive",
            StructureType::OfGenitive => "Of-Genitive",
        }
    }

    pub fn alternation(self) -> Alternation {
        Alternation::ALL
            .into_iter()
            .find(|a| {
                let (x, y) = a.members();
                x == self || y == self
            })
            .expect("every structure type belongs to one alternation")
    }

    /// The other member of this type's alternation.
    pub fn alternate(self) -> StructureType {
        let (x, y) = self.alternation().members();
        if x == self {
            y
        } else {
            x
        }
    }
}

impl fmt::Display for StructureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for StructureType {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StructureType::ALL
            .into_iter()
            .find(|t| t.name() == s || t.title() == s)
            .ok_or_else(|| GenError::UnknownStructureType(s.to_string()))
    }
}

/// A pair of structure types that express the same content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternation {
    SimpleVoice,
    PoVoice,
    EmbeddedVoice,
    MiddleVoice,
    SimpleDative,
    ComplexDative,
    ClauseDative,
    Genitive,
}

impl Alternation {
    pub const ALL: [Alternation; 8] = [
        Alternation::SimpleVoice,
        Alternation::PoVoice,
        Alternation::EmbeddedVoice,
        Alternation::MiddleVoice,
        Alternation::SimpleDative,
        Alternation::ComplexDative,
        Alternation::ClauseDative,
        Alternation::Genitive,
    ];

    /// `(default positive, default negative)`.
    pub fn members(self) -> (StructureType, StructureType) {
        use StructureType::*;
        match self {
            Alternation::SimpleVoice => (SimpleActive, SimplePassive),
            Alternation::PoVoice => (PoPassive, PoActive),
            Alternation::EmbeddedVoice => (EmbeddedPassive, EmbeddedActive),
            Alternation::MiddleVoice => (Mediopassive, MediopassiveLikeActive),
            Alternation::SimpleDative => (SimplePo, SimpleDo),
            Alternation::ComplexDative => (ComplexPo, ComplexDo),
            Alternation::ClauseDative => (PoClause, DoClause),
            Alternation::Genitive => (SGenitive, OfGenitive),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Alternation::SimpleVoice => "simple_voice",
            Alternation::PoVoice => "po_voice",
            Alternation::EmbeddedVoice => "embedded_voice",
            Alternation::MiddleVoice => "middle_voice",
            Alternation::SimpleDative => "simple_dative",
            Alternation::ComplexDative => "complex_dative",
            Alternation::ClauseDative => "clause_dative",
            Alternation::Genitive => "genitive",
        }
    }
}

impl fmt::Display for Alternation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Alternation {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Alternation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GenError::UnknownStructureType(s.to_string()))
    }
}

/// How a slot's filler becomes tree nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    /// A noun phrase, split at a relative pronoun or participle if present.
    NounPhrase,
    /// One preterminal per token with the given tag, spliced into the parent.
    Word(&'static str),
    /// A flat phrase node; open-class words take the default tag.
    Flat {
        label: &'static str,
        default_tag: &'static str,
    },
    /// Preposition followed by a noun phrase.
    PrepPhrase,
    /// A flat noun phrase closed by a possessive marker (`'` or `'s`).
    Possessor,
}

impl SlotKind {
    /// The syntactic category the slot produces.
    pub fn tag(self) -> &'static str {
        match self {
            SlotKind::NounPhrase | SlotKind::Possessor => "NP",
            SlotKind::Word(tag) => tag,
            SlotKind::Flat { label, .. } => label,
            SlotKind::PrepPhrase => "PP",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotSpec {
    pub name: &'static str,
    pub kind: SlotKind,
}

/// A slot reference or fixed word in surface order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceItem {
    Slot(String),
    Word(String),
}

#[derive(Debug, Clone)]
pub struct Template {
    pub structure_type: StructureType,
    /// The alternation's shared schema. A template may leave some of these
    /// unrealized (the double-object form has no preposition).
    pub slots: Vec<SlotSpec>,
    skeleton: SyntaxTree,
}

impl Template {
    /// Skeleton tree; slot positions appear as `(@ name)`.
    pub fn tree_shape(&self) -> &SyntaxTree {
        &self.skeleton
    }

    /// Slots and fixed words in reading order.
    pub fn surface_pattern(&self) -> Vec<SurfaceItem> {
        fn walk(node: &TreeNode, out: &mut Vec<SurfaceItem>) {
            if node.label == SLOT_LABEL && node.is_preterminal() {
                out.push(SurfaceItem::Slot(node.children[0].label.clone()));
            } else if node.is_leaf() {
                out.push(SurfaceItem::Word(node.label.clone()));
            } else {
                for c in &node.children {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self.skeleton.root(), &mut out);
        out
    }

    pub fn slot_names(&self) -> BTreeSet<&'static str> {
        self.slots.iter().map(|s| s.name).collect()
    }

    /// Slots that appear in the skeleton.
    pub fn realized_slots(&self) -> BTreeSet<String> {
        self.surface_pattern()
            .into_iter()
            .filter_map(|i| match i {
                SurfaceItem::Slot(s) => Some(s),
                SurfaceItem::Word(_) => None,
            })
            .collect()
    }
}

/// Slot name to filler text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotBindings(BTreeMap<String, String>);

impl SlotBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, slot: &str, filler: &str) -> Self {
        self.insert(slot, filler);
        self
    }

    pub fn insert(&mut self, slot: &str, filler: &str) {
        self.0.insert(slot.to_string(), filler.to_string());
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: AsRef<str>, V: AsRef<str>> FromIterator<(K, V)> for SlotBindings {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        SlotBindings(
            iter.into_iter()
                .map(|(k, v)| (k.as_ref().to_string(), v.as_ref().to_string()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    PositivePrime,
    NegativePrime,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::PositivePrime => "positive_prime",
            Role::NegativePrime => "negative_prime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSentence {
    #[serde(rename = "type")]
    pub structure_type: StructureType,
    pub role: Role,
    pub text: String,
    pub tree: SyntaxTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    MissingSlot(String),
    UnknownStructureType(String),
    /// Filler is empty or whitespace only.
    EmptyFiller(String),
    /// Filler token cannot be a tree leaf (contains a bracket).
    InvalidFiller {
        slot: String,
        token: String,
    },
    LengthMismatch {
        sentences: usize,
        scores: usize,
    },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::MissingSlot(s) => write!(f, "missing slot `{s}`"),
            GenError::UnknownStructureType(s) => write!(f, "unknown structure type {s:?}"),
            GenError::EmptyFiller(s) => write!(f, "slot `{s}` has an empty filler"),
            GenError::InvalidFiller { slot, token } => {
                write!(f, "slot `{slot}`: token {token:?} cannot appear in a tree")
            }
            GenError::LengthMismatch { sentences, scores } => {
                write!(f, "{sentences} sentences but {scores} scores")
            }
        }
    }
}

impl core::error::Error for GenError {}

const NP: SlotKind = SlotKind::NounPhrase;
const VERB: SlotKind = SlotKind::Word("VB");
const PARTICIPLE: SlotKind = SlotKind::Word("VBN");
const AUX: SlotKind = SlotKind::Word("AUX");
const PREP: SlotKind = SlotKind::Word("IN");
const DET: SlotKind = SlotKind::Word("DT");
const NOUN: SlotKind = SlotKind::Word("NN");
const ADJP: SlotKind = SlotKind::Flat {
    label: "ADJP",
    default_tag: "JJ",
};
const ADVP: SlotKind = SlotKind::Flat {
    label: "ADVP",
    default_tag: "RB",
};
const CLAUSE: SlotKind = SlotKind::Flat {
    label: "SBAR",
    default_tag: "NN",
};

fn spec(name: &'static str, kind: SlotKind) -> SlotSpec {
    SlotSpec { name, kind }
}

fn template_def(ty: StructureType) -> (&'static str, Vec<SlotSpec>) {
    use StructureType::*;
    match ty {
        SimpleActive => (
            "(S (@ agent) (VP (@ verb) (@ patient)))",
            vec![spec("agent", NP), spec("verb", VERB), spec("patient", NP)],
        ),
        SimplePassive => (
            "(S (@ patient) (VP (@ auxiliary) (VP (@ participle) (PP (IN by) (@ agent)))))",
            vec![
                spec("patient", NP),
                spec("auxiliary", AUX),
                spec("participle", PARTICIPLE),
                spec("agent", NP),
            ],
        ),
        PoPassive => (
            "(S (@ direct_object) (VP (@ auxiliary) (VP (@ participle) \
             (PP (@ prep) (@ prep_object)) (PP (IN by) (@ subject)) (@ adjunct))))",
            vec![
                spec("direct_object", NP),
                spec("auxiliary", AUX),
                spec("participle", PARTICIPLE),
                spec("prep", PREP),
                spec("prep_object", NP),
                spec("subject", NP),
                spec("adjunct", SlotKind::PrepPhrase),
            ],
        ),
        PoActive => (
            "(S (@ subject) (VP (@ verb) (@ direct_object) \
             (PP (@ prep) (@ prep_object)) (@ adjunct)))",
            vec![
                spec("subject", NP),
                spec("verb", VERB),
                spec("direct_object", NP),
                spec("prep", PREP),
                spec("prep_object", NP),
                spec("adjunct", SlotKind::PrepPhrase),
            ],
        ),
        // The relative clause carries the passive; the main clause is copular.
        EmbeddedPassive => (
            "(S (NP (NP (@ patient_det) (@ patient_noun)) \
             (SBAR (WHNP (WDT that)) (S (VP (@ auxiliary) (VP (@ participle) (PP (IN by) (@ agent))))))) \
             (VP (@ copula) (@ attribute)))",
            vec![
                spec("patient_det", DET),
                spec("patient_noun", NOUN),
                spec("auxiliary", AUX),
                spec("participle", PARTICIPLE),
                spec("agent", NP),
                spec("copula", AUX),
                spec("attribute", ADJP),
            ],
        ),
        // The attribute moves inside the object noun phrase.
        EmbeddedActive => (
            "(S (@ agent) (VP (@ verb) (NP (@ patient_det) (@ attribute) (@ patient_noun))))",
            vec![
                spec("agent", NP),
                spec("verb", VERB),
                spec("patient_det", DET),
                spec("attribute", ADJP),
                spec("patient_noun", NOUN),
            ],
        ),
        // Adverbial clause kept as one flat node.
        Mediopassive => (
            "(S (@ subject) (VP (@ verb) (@ adverbial_clause)))",
            vec![
                spec("subject", NP),
                spec("verb", VERB),
                spec("adverbial_clause", CLAUSE),
            ],
        ),
        MediopassiveLikeActive => (
            "(S (@ subject) (VP (@ verb) (@ adverbial_modifier) (@ additional_clause)))",
            vec![
                spec("subject", NP),
                spec("verb", VERB),
                spec("adverbial_modifier", ADVP),
                spec("additional_clause", CLAUSE),
            ],
        ),
        SimplePo => (
            "(S (@ subject) (VP (@ verb) (@ direct_object) (PP (@ prep) (@ indirect_object))))",
            dative_slots("subject", "verb", "direct_object", "indirect_object"),
        ),
        SimpleDo => (
            "(S (@ subject) (VP (@ verb) (@ indirect_object) (@ direct_object)))",
            dative_slots("subject", "verb", "direct_object", "indirect_object"),
        ),
        ComplexPo => (
            "(S (@ subject_phrase) (VP (@ verb_phrase) (@ direct_object_phrase) \
             (PP (@ prep) (@ indirect_object_phrase))))",
            dative_slots(
                "subject_phrase",
                "verb_phrase",
                "direct_object_phrase",
                "indirect_object_phrase",
            ),
        ),
        ComplexDo => (
            "(S (@ subject_phrase) (VP (@ verb_phrase) (@ indirect_object_phrase) \
             (@ direct_object_phrase)))",
            dative_slots(
                "subject_phrase",
                "verb_phrase",
                "direct_object_phrase",
                "indirect_object_phrase",
            ),
        ),
        PoClause => (
            "(S (@ subject) (VP (@ verb) (@ direct_object) (PP (@ prep) (@ indirect_object_clause))))",
            dative_slots("subject", "verb", "direct_object", "indirect_object_clause"),
        ),
        DoClause => (
            "(S (@ subject) (VP (@ verb) (@ indirect_object_clause) (@ direct_object)))",
            dative_slots("subject", "verb", "direct_object", "indirect_object_clause"),
        ),
        SGenitive => (
            "(S (NP (@ head) (PP (@ head_prep) (NP (@ possessor) (@ possessed)))))",
            vec![
                spec("head", NP),
                spec("head_prep", PREP),
                spec("possessor", SlotKind::Possessor),
                spec("possessed", NOUN),
            ],
        ),
        OfGenitive => (
            "(S (NP (@ head) (PP (@ head_prep) (NP (NP (DT the) (@ possessed)) (PP (IN of) (@ possessor))))))",
            vec![
                spec("head", NP),
                spec("head_prep", PREP),
                spec("possessed", NOUN),
                spec("possessor", NP),
            ],
        ),
    }
}

fn dative_slots(
    subject: &'static str,
    verb: &'static str,
    direct: &'static str,
    indirect: &'static str,
) -> Vec<SlotSpec> {
    vec![
        spec(subject, NP),
        spec(verb, VERB),
        spec(direct, NP),
        spec("prep", PREP),
        spec(indirect, NP),
    ]
}

/// The sixteen built-in templates.
#[derive(Debug, Clone)]
pub struct TemplateRegistry {
    templates: BTreeMap<StructureType, Template>,
}

impl TemplateRegistry {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, ty: StructureType) -> &Template {
        &self.templates[&ty]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> {
        self.templates.values()
    }

    pub fn alternate(&self, ty: StructureType) -> &Template {
        self.get(ty.alternate())
    }

    /// Slot names shared by both members of `alternation`.
    pub fn pair_schema(&self, alternation: Alternation) -> BTreeSet<&'static str> {
        self.get(alternation.members().0).slot_names()
    }
}

pub fn load_templates() -> TemplateRegistry {
    let templates = StructureType::ALL
        .into_iter()
        .map(|ty| {
            let (shape, mut slots) = template_def(ty);
            // both members of an alternation share one slot schema
            for other in template_def(ty.alternate()).1 {
                if !slots.iter().any(|s| s.name == other.name) {
                    slots.push(other);
                }
            }
            let skeleton = parse_bracketed(shape).expect("built-in skeleton parses");
            (
                ty,
                Template {
                    structure_type: ty,
                    slots,
                    skeleton,
                },
            )
        })
        .collect();
    TemplateRegistry { templates }
}

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "that", "these", "those", "some", "every", "each", "another",
];
const POSSESSIVES: &[&str] = &["my", "your", "his", "her", "its", "our", "their"];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor"];
const PREPOSITIONS: &[&str] = &[
    "about",
    "above",
    "across",
    "after",
    "against",
    "along",
    "among",
    "around",
    "as",
    "at",
    "because",
    "before",
    "behind",
    "below",
    "beneath",
    "beside",
    "between",
    "beyond",
    "by",
    "down",
    "during",
    "for",
    "from",
    "in",
    "inside",
    "into",
    "near",
    "of",
    "off",
    "on",
    "onto",
    "outside",
    "over",
    "past",
    "through",
    "to",
    "toward",
    "towards",
    "under",
    "underneath",
    "until",
    "upon",
    "when",
    "while",
    "with",
    "within",
    "without",
];
const RELATIVES: &[&str] = &["that", "which", "who", "whom", "whose"];

fn is_one_of(word: &str, list: &[&str]) -> bool {
    list.iter().any(|w| w.eq_ignore_ascii_case(word))
}

fn closed_class_tag(word: &str) -> Option<&'static str> {
    if is_one_of(word, DETERMINERS) {
        Some("DT")
    } else if is_one_of(word, POSSESSIVES) {
        Some("PRP$")
    } else if is_one_of(word, CONJUNCTIONS) {
        Some("CC")
    } else if is_one_of(word, PREPOSITIONS) {
        Some("IN")
    } else {
        None
    }
}

fn is_participle(word: &str) -> bool {
    word.len() > 4 && word.to_ascii_lowercase().ends_with("ing")
}

fn flat_tag(word: &str, default_tag: &'static str) -> &'static str {
    if let Some(tag) = closed_class_tag(word) {
        return tag;
    }
    if word.len() > 3 && word.to_ascii_lowercase().ends_with("ly") {
        return "RB";
    }
    default_tag
}

fn base_np(tokens: &[&str]) -> TreeNode {
    let children = tokens
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let tag = match closed_class_tag(w) {
                Some("DT") if i > 0 => "NN",
                Some(tag) => tag,
                None => "NN",
            };
            TreeNode::preterminal(tag, w)
        })
        .collect();
    TreeNode::internal("NP", children)
}

/// Splits `tokens` into an optional leading NP followed by one PP per preposition.
fn chunk(tokens: &[&str]) -> Vec<TreeNode> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let is_prep = is_one_of(tokens[start], PREPOSITIONS);
        let end = tokens[start + 1..]
            .iter()
            .position(|w| is_one_of(w, PREPOSITIONS))
            .map_or(tokens.len(), |p| start + 1 + p);
        if is_prep {
            let mut children = vec![TreeNode::preterminal("IN", tokens[start])];
            if end > start + 1 {
                children.push(noun_phrase(&tokens[start + 1..end]));
            }
            out.push(TreeNode::internal("PP", children));
        } else {
            out.push(noun_phrase(&tokens[start..end]));
        }
        start = end;
    }
    out
}

fn noun_phrase(tokens: &[&str]) -> TreeNode {
    if let Some(k) = (1..tokens.len()).find(|&i| is_one_of(tokens[i], RELATIVES)) {
        let rel_tag = if is_one_of(tokens[k], &["who", "whom", "whose"]) {
            "WP"
        } else {
            "WDT"
        };
        let mut clause = vec![TreeNode::preterminal(rel_tag, tokens[k])];
        if let Some((verb, rest)) = tokens[k + 1..].split_first() {
            let mut vp = vec![TreeNode::preterminal("VB", *verb)];
            vp.extend(chunk(rest));
            clause.push(TreeNode::internal("S", vec![TreeNode::internal("VP", vp)]));
        }
        return TreeNode::internal(
            "NP",
            vec![
                noun_phrase(&tokens[..k]),
                TreeNode::internal("SBAR", clause),
            ],
        );
    }
    let participle = (1..tokens.len().saturating_sub(1))
        .find(|&i| is_participle(tokens[i]) && !is_one_of(tokens[i - 1], DETERMINERS));
    if let Some(k) = participle {
        let mut vp = vec![TreeNode::preterminal("VBG", tokens[k])];
        vp.extend(chunk(&tokens[k + 1..]));
        return TreeNode::internal(
            "NP",
            vec![noun_phrase(&tokens[..k]), TreeNode::internal("VP", vp)],
        );
    }
    base_np(tokens)
}

fn possessive_marker(tokens: &[&str]) -> &'static str {
    match tokens.last() {
        Some(w) if w.ends_with('s') || w.ends_with('S') => "'",
        _ => "'s",
    }
}

fn fill_slot(slot: &str, kind: SlotKind, filler: &str) -> Result<Vec<TreeNode>, GenError> {
    let tokens: Vec<&str> = filler.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(GenError::EmptyFiller(slot.to_string()));
    }
    if let Some(bad) = tokens.iter().find(|t| t.contains(['(', ')'])) {
        return Err(GenError::InvalidFiller {
            slot: slot.to_string(),
            token: bad.to_string(),
        });
    }
    Ok(match kind {
        SlotKind::NounPhrase => vec![noun_phrase(&tokens)],
        SlotKind::Word(tag) => tokens
            .iter()
            .map(|w| TreeNode::preterminal(tag, *w))
            .collect(),
        SlotKind::Flat { label, default_tag } => vec![TreeNode::internal(
            label,
            tokens
                .iter()
                .map(|w| TreeNode::preterminal(flat_tag(w, default_tag), *w))
                .collect(),
        )],
        SlotKind::PrepPhrase => {
            let mut children = vec![TreeNode::preterminal("IN", tokens[0])];
            if tokens.len() > 1 {
                children.push(noun_phrase(&tokens[1..]));
            }
            vec![TreeNode::internal("PP", children)]
        }
        SlotKind::Possessor => {
            let TreeNode {
                label,
                mut children,
            } = base_np(&tokens);
            children.push(TreeNode::preterminal("POS", possessive_marker(&tokens)));
            vec![TreeNode::internal(label, children)]
        }
    })
}

fn expand(node: &TreeNode, fills: &BTreeMap<&str, Vec<TreeNode>>) -> Vec<TreeNode> {
    if node.label == SLOT_LABEL && node.is_preterminal() {
        return fills[node.children[0].label.as_str()].clone();
    }
    if node.is_leaf() {
        return vec![node.clone()];
    }
    let children = node
        .children
        .iter()
        .flat_map(|c| expand(c, fills))
        .collect();
    vec![TreeNode::internal(node.label.clone(), children)]
}

fn capitalize_first_leaf(node: &mut TreeNode) {
    if node.is_leaf() {
        let mut chars = node.label.chars();
        if let Some(first) = chars.next() {
            let mut out: String = first.to_uppercase().collect();
            out.push_str(chars.as_str());
            node.label = out;
        }
    } else if let Some(first) = node.children.first_mut() {
        capitalize_first_leaf(first);
    }
}

/// Joins words with single spaces; possessive markers attach to the word before.
pub fn detokenize<'a>(words: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for w in words {
        if !out.is_empty() && w != "'" && w != "'s" {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

impl TemplateRegistry {
    pub fn instantiate(
        &self,
        ty: StructureType,
        bindings: &SlotBindings,
        role: Role,
    ) -> Result<GeneratedSentence, GenError> {
        let template = self.get(ty);
        let mut fills = BTreeMap::new();
        for slot in &template.slots {
            let filler = bindings
                .get(slot.name)
                .ok_or_else(|| GenError::MissingSlot(slot.name.to_string()))?;
            fills.insert(slot.name, fill_slot(slot.name, slot.kind, filler)?);
        }
        let mut root = expand(template.skeleton.root(), &fills)
            .pop()
            .expect("skeleton root is a node");
        capitalize_first_leaf(&mut root);
        let tree = SyntaxTree::new(root).expect("filled template is a valid tree");
        let mut text = detokenize(tree.leaves());
        text.push('.');
        Ok(GeneratedSentence {
            structure_type: ty,
            role,
            text,
            tree,
        })
    }

    /// Generates both members of `alternation` from one set of bindings,
    /// the first member as the positive prime.
    pub fn generate_pair(
        &self,
        alternation: Alternation,
        bindings: &SlotBindings,
    ) -> Result<(GeneratedSentence, GeneratedSentence), GenError> {
        self.generate_pair_with_positive(alternation.members().0, bindings)
    }

    /// Generates `positive` and its alternate (as the negative prime).
    pub fn generate_pair_with_positive(
        &self,
        positive: StructureType,
        bindings: &SlotBindings,
    ) -> Result<(GeneratedSentence, GeneratedSentence), GenError> {
        Ok((
            self.instantiate(positive, bindings, Role::PositivePrime)?,
            self.instantiate(positive.alternate(), bindings, Role::NegativePrime)?,
        ))
    }
}

/// Convenience wrapper over a freshly loaded registry.
pub fn instantiate(
    ty: StructureType,
    bindings: &SlotBindings,
) -> Result<GeneratedSentence, GenError> {
    load_templates().instantiate(ty, bindings, Role::PositivePrime)
}

/// Keeps items whose perplexity is at most `threshold`, preserving order.
pub fn filter_by_perplexity<T>(
    sentences: Vec<T>,
    scores: &[f64],
    threshold: f64,
) -> Result<(Vec<T>, Vec<T>), GenError> {
    if sentences.len() != scores.len() {
        return Err(GenError::LengthMismatch {
            sentences: sentences.len(),
            scores: scores.len(),
        });
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (s, &score) in sentences.into_iter().zip(scores) {
        if score <= threshold {
            kept.push(s);
        } else {
            dropped.push(s);
        }
    }
    Ok((kept, dropped))
}

pub const DEFAULT_PERPLEXITY_THRESHOLD: f64 = 300.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{normalized_kernel, KernelParams};

    fn man_tells() -> SlotBindings {
        SlotBindings::new()
            .with("subject", "A man")
            .with("verb", "tells")
            .with("direct_object", "stories")
            .with("prep", "to")
            .with("indirect_object", "people")
    }

    #[test]
    fn registry_shape() {
        let reg = load_templates();
        assert_eq!(reg.len(), 16);
        assert_eq!(
            reg.alternate(StructureType::SimplePo).structure_type,
            StructureType::SimpleDo
        );
        assert_eq!(StructureType::SimpleDo.alternate(), StructureType::SimplePo);
        for ty in StructureType::ALL {
            assert_eq!(ty.alternate().alternate(), ty);
            assert_eq!(ty.name().parse::<StructureType>().unwrap(), ty);
        }
    }

    #[test]
    fn slots_appear_once_in_shape() {
        let reg = load_templates();
        for t in reg.iter() {
            let pattern_slots = t
                .surface_pattern()
                .into_iter()
                .filter(|i| matches!(i, SurfaceItem::Slot(_)))
                .count();
            let realized = t.realized_slots();
            assert_eq!(
                realized.len(),
                pattern_slots,
                "{} repeats a slot",
                t.structure_type
            );
            for name in &realized {
                assert!(t.slot_names().contains(name.as_str()), "{name} undeclared");
            }
        }
    }

    #[test]
    fn pair_members_share_schema() {
        let reg = load_templates();
        for alt in Alternation::ALL {
            let (a, b) = alt.members();
            assert_eq!(reg.get(a).slot_names(), reg.get(b).slot_names(), "{alt}");
            // every schema slot is realized by at least one member
            let mut realized = reg.get(a).realized_slots();
            realized.extend(reg.get(b).realized_slots());
            let schema: BTreeSet<String> =
                reg.pair_schema(alt).iter().map(|s| s.to_string()).collect();
            assert_eq!(realized, schema, "{alt}");
        }
    }

    #[test]
    fn simple_dative_examples() {
        let reg = load_templates();
        let po = reg
            .instantiate(StructureType::SimplePo, &man_tells(), Role::PositivePrime)
            .unwrap();
        assert_eq!(po.text, "A man tells stories to people.");
        assert_eq!(
            po.tree.to_bracketed(),
            "(S (NP (DT A) (NN man)) (VP (VB tells) (NP (NN stories)) (PP (IN to) (NP (NN people)))))"
        );
        let d = reg
            .instantiate(StructureType::SimpleDo, &man_tells(), Role::PositivePrime)
            .unwrap();
        assert_eq!(d.text, "A man tells people stories.");
    }

    #[test]
    fn missing_slot() {
        let mut b = man_tells();
        b.0.remove("prep");
        assert_eq!(
            instantiate(StructureType::SimplePo, &b),
            Err(GenError::MissingSlot("prep".to_string()))
        );
        assert_eq!(
            "simple_xx".parse::<StructureType>(),
            Err(GenError::UnknownStructureType("simple_xx".to_string()))
        );
        let b = man_tells().with("verb", "  ");
        assert_eq!(
            instantiate(StructureType::SimplePo, &b),
            Err(GenError::EmptyFiller("verb".to_string()))
        );
        let b = man_tells().with("verb", "te(lls");
        assert!(matches!(
            instantiate(StructureType::SimplePo, &b),
            Err(GenError::InvalidFiller { .. })
        ));
    }

    #[test]
    fn artist_pair() {
        let b = SlotBindings::new()
            .with("subject", "The talented artist")
            .with("verb", "performs")
            .with("direct_object", "art")
            .with("prep", "to")
            .with("indirect_object", "the audience");
        let (pos, neg) = load_templates()
            .generate_pair(Alternation::SimpleDative, &b)
            .unwrap();
        assert_eq!(
            pos.text,
            "The talented artist performs art to the audience."
        );
        assert_eq!(neg.text, "The talented artist performs the audience art.");
        assert_eq!(
            (pos.role, neg.role),
            (Role::PositivePrime, Role::NegativePrime)
        );
        let k = KernelParams::default();
        assert!(normalized_kernel(&pos.tree, &neg.tree, &k).unwrap() < 1.0);
    }

    #[test]
    fn genitive_pair() {
        let b = SlotBindings::new()
            .with("head", "Reflections")
            .with("head_prep", "from")
            .with("possessor", "the firefighters")
            .with("possessed", "uniforms");
        let (pos, neg) = load_templates()
            .generate_pair(Alternation::Genitive, &b)
            .unwrap();
        assert_eq!(pos.text, "Reflections from the firefighters' uniforms.");
        assert_eq!(
            neg.text,
            "Reflections from the uniforms of the firefighters."
        );
        let b = b.with("possessor", "the boy");
        let s = instantiate(StructureType::SGenitive, &b).unwrap();
        assert_eq!(s.text, "Reflections from the boy's uniforms.");
    }

    #[test]
    fn positive_override() {
        let reg = load_templates();
        let (pos, neg) = reg
            .generate_pair_with_positive(StructureType::SimpleDo, &man_tells())
            .unwrap();
        assert_eq!(pos.structure_type, StructureType::SimpleDo);
        assert_eq!(neg.structure_type, StructureType::SimplePo);
        let mut partial = man_tells();
        partial.0.remove("indirect_object");
        assert_eq!(
            reg.generate_pair(Alternation::SimpleDative, &partial),
            Err(GenError::MissingSlot("indirect_object".to_string()))
        );
    }

    #[test]
    fn noun_phrase_splitting() {
        let np = noun_phrase(&["a", "woman", "wearing", "black", "glasses"]);
        assert_eq!(
            SyntaxTree::new(np).unwrap().to_bracketed(),
            "(NP (NP (DT a) (NN woman)) (VP (VBG wearing) (NP (NN black) (NN glasses))))"
        );
        let np = noun_phrase(&["the", "student", "that", "studys", "in", "the", "library"]);
        assert_eq!(
            SyntaxTree::new(np).unwrap().to_bracketed(),
            "(NP (NP (DT the) (NN student)) (SBAR (WDT that) (S (VP (VB studys) (PP (IN in) (NP (DT the) (NN library)))))))"
        );
        // a participle right after a determiner is a noun
        let np = noun_phrase(&["a", "building", "with", "windows"]);
        assert_eq!(
            SyntaxTree::new(np).unwrap().to_bracketed(),
            "(NP (DT a) (NN building) (IN with) (NN windows))"
        );
    }

    #[test]
    fn perplexity_filter() {
        let (kept, dropped) =
            filter_by_perplexity(vec!["a", "b", "c"], &[86.37, 310.0, 300.0], 300.0).unwrap();
        assert_eq!(kept, ["a", "c"]);
        assert_eq!(dropped, ["b"]);
        assert_eq!(
            filter_by_perplexity(vec!["a"], &[], 300.0),
            Err(GenError::LengthMismatch {
                sentences: 1,
                scores: 0
            })
        );
        let (kept, _) = filter_by_perplexity(vec![1], &[f64::NAN], 300.0).unwrap();
        assert!(kept.is_empty());
    }

    #[test]
    fn detokenize_possessives() {
        assert_eq!(detokenize(["the", "boy", "'s", "hat"]), "the boy's hat");
        assert_eq!(detokenize(["'", "x"]), "' x");
    }
}
