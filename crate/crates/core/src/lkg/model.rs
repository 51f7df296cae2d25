use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Donor;
use crate::text::normalize_key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Pattern,
    Lang,
    Loanword,
    NativeSyn,
    Pos,
}

impl NodeKind {
    pub fn id_prefix(self) -> &'static str {
        match self {
            NodeKind::Pattern => "pattern",
            NodeKind::Lang => "lang",
            NodeKind::Loanword => "loanword",
            NodeKind::NativeSyn => "native_syn",
            NodeKind::Pos => "pos",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Pattern => "PATTERN",
            NodeKind::Lang => "LANG",
            NodeKind::Loanword => "LOANWORD",
            NodeKind::NativeSyn => "NATIVE_SYN",
            NodeKind::Pos => "POS",
        };
        f.write_str(s)
    }
}

/// `kind:normalized-key`.
pub fn node_id(kind: NodeKind, key: &str) -> String {
    format!("{}:{}", kind.id_prefix(), normalize_key(key))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternType {
    Morphological,
    Orthographic,
    Lexical,
}

impl PatternType {
    pub fn short(self) -> &'static str {
        match self {
            PatternType::Morphological => "morph",
            PatternType::Orthographic => "orth",
            PatternType::Lexical => "lex",
        }
    }
}

impl FromStr for PatternType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "morphological" | "morph" => Ok(PatternType::Morphological),
            "orthographic" | "orth" => Ok(PatternType::Orthographic),
            "lexical" | "lex" => Ok(PatternType::Lexical),
            _ => Err(Error::UnknownValue {
                what: "pattern type",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePair {
    pub lux: String,
    pub donor: String,
}

/// A Luxembourgish affix with an optional trailing segment:
/// `éiere(n)` matches both `…éieren` and `…éiere`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affix {
    pub base: String,
    pub optional: String,
}

impl Affix {
    pub fn parse(spec: &str) -> Option<Affix> {
        let spec = spec.trim();
        let (base, optional) = match spec.strip_suffix(')').and_then(|s| s.split_once('(')) {
            Some((base, opt)) => (base, opt),
            None => (spec, ""),
        };
        if base.is_empty() || base.contains(['(', ')']) || optional.contains(['(', ')']) {
            return None;
        }
        Some(Affix {
            base: base.to_string(),
            optional: optional.to_string(),
        })
    }

    /// Surface variants, longest first.
    pub fn variants(&self) -> Vec<String> {
        if self.optional.is_empty() {
            vec![self.base.clone()]
        } else {
            vec![format!("{}{}", self.base, self.optional), self.base.clone()]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternPayload {
    pub pattern_id: String,
    /// Luxembourgish side, in `base(optional)` notation.
    pub affix_lux: String,
    /// Donor-side replacement.
    pub affix_donor: String,
    pub pattern_type: PatternType,
    pub examples: Vec<ExamplePair>,
}

impl PatternPayload {
    pub fn affix(&self) -> Affix {
        Affix::parse(&self.affix_lux).unwrap_or(Affix {
            base: self.affix_lux.clone(),
            optional: String::new(),
        })
    }

    /// Display name, e.g. `éiere → er`.
    pub fn display_name(&self) -> String {
        format!("{} → {}", self.affix().base, self.affix_donor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoanwordPayload {
    pub lemma: String,
    pub donor_form: String,
    pub definition: String,
    pub etymology: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodePayload {
    Pattern(PatternPayload),
    Lang { donor: Donor },
    Loanword(LoanwordPayload),
    NativeSyn { lemma: String },
    Pos { tag: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LkgNode {
    pub id: String,
    #[serde(flatten)]
    pub payload: NodePayload,
}

impl LkgNode {
    pub fn kind(&self) -> NodeKind {
        match self.payload {
            NodePayload::Pattern(_) => NodeKind::Pattern,
            NodePayload::Lang { .. } => NodeKind::Lang,
            NodePayload::Loanword(_) => NodeKind::Loanword,
            NodePayload::NativeSyn { .. } => NodeKind::NativeSyn,
            NodePayload::Pos { .. } => NodeKind::Pos,
        }
    }

    pub fn pattern(&self) -> Option<&PatternPayload> {
        match &self.payload {
            NodePayload::Pattern(p) => Some(p),
            _ => None,
        }
    }

    pub fn loanword(&self) -> Option<&LoanwordPayload> {
        match &self.payload {
            NodePayload::Loanword(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    FollowsPattern,
    FromDonor,
    HasSynonym,
    Contrastive,
    HasPos,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::FollowsPattern => "follows_pattern",
            Relation::FromDonor => "from_donor",
            Relation::HasSynonym => "has_synonym",
            Relation::Contrastive => "contrastive",
            Relation::HasPos => "has_pos",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LkgEdge {
    pub from: String,
    pub to: String,
    pub relation: Relation,
}

impl LkgEdge {
    pub fn new(from: impl Into<String>, to: impl Into<String>, relation: Relation) -> Self {
        LkgEdge {
            from: from.into(),
            to: to.into(),
            relation,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    nodes: Vec<LkgNode>,
    edges: Vec<LkgEdge>,
}

/// Immutable typed graph. Nodes are kept sorted by id and edges by
/// `(from, to, relation)`, so serialization is byte-stable.
#[derive(Debug, Clone, Default)]
pub struct LkgGraph {
    nodes: BTreeMap<String, LkgNode>,
    edges: Vec<LkgEdge>,
    outgoing: HashMap<String, Vec<usize>>,
    incoming: HashMap<String, Vec<usize>>,
}

impl PartialEq for LkgGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl LkgGraph {
    /// Assemble a graph without checking edge constraints (see
    /// [`validate`](super::validate)). Identical edges are merged.
    pub fn new(nodes: Vec<LkgNode>, mut edges: Vec<LkgEdge>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if map.contains_key(&node.id) {
                return Err(Error::DuplicateNode(node.id));
            }
            map.insert(node.id.clone(), node);
        }
        edges.sort();
        edges.dedup();
        let mut outgoing: HashMap<String, Vec<usize>> = HashMap::new();
        let mut incoming: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            outgoing.entry(e.from.clone()).or_default().push(i);
            incoming.entry(e.to.clone()).or_default().push(i);
        }
        Ok(LkgGraph {
            nodes: map,
            edges,
            outgoing,
            incoming,
        })
    }

    pub fn node(&self, id: &str) -> Option<&LkgNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LkgNode> {
        self.nodes.values()
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &LkgNode> {
        self.nodes.values().filter(move |n| n.kind() == kind)
    }

    pub fn edges(&self) -> &[LkgEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Targets of outgoing `relation` edges, in id order.
    pub fn targets(&self, id: &str, relation: Relation) -> impl Iterator<Item = &str> {
        self.outgoing
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
            .filter(move |e| e.relation == relation)
            .map(|e| e.to.as_str())
    }

    /// Sources of incoming `relation` edges, in id order.
    pub fn sources(&self, id: &str, relation: Relation) -> Vec<&str> {
        let mut v: Vec<&str> = self
            .incoming
            .get(id)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
            .filter(|e| e.relation == relation)
            .map(|e| e.from.as_str())
            .collect();
        v.sort_unstable();
        v
    }

    pub fn donor_of(&self, id: &str) -> Option<Donor> {
        self.targets(id, Relation::FromDonor)
            .find_map(|lang| match self.node(lang)?.payload {
                NodePayload::Lang { donor } => Some(donor),
                _ => None,
            })
    }

    pub fn pos_of(&self, id: &str) -> Option<&str> {
        self.targets(id, Relation::HasPos)
            .find_map(|p| match &self.node(p)?.payload {
                NodePayload::Pos { tag } => Some(tag.as_str()),
                _ => None,
            })
    }

    /// Contrastive neighbours of a pattern (edges are undirected in meaning).
    pub fn contrastive_of(&self, pattern: &str) -> Vec<&str> {
        let mut v: Vec<&str> = self.targets(pattern, Relation::Contrastive).collect();
        v.extend(self.sources(pattern, Relation::Contrastive));
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GraphDoc {
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(s)?;
        Self::new(doc.nodes, doc.edges)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}
