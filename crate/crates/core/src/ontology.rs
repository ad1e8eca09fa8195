//! Multi-ontology term graph with a precomputed reachability index.
//!
//! Every term is addressed internally by a dense [`TermIdx`]. Reachable sets
//! are stored per relation-set configuration as two compressed rows
//! (ancestors and descendants), each sorted by index. The default
//! configuration `{is_a, part_of}` is materialized at build time; the other
//! six non-empty subsets are computed on first use.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::obo::{ParsedOntology, Synonym};

/// Edge type of a child → parent edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    IsA,
    PartOf,
    DevelopsFrom,
    /// Preserved but never followed by closure.
    Other(String),
}

impl Relation {
    pub fn from_label(label: &str) -> Self {
        match label {
            "is_a" => Relation::IsA,
            "part_of" => Relation::PartOf,
            "develops_from" => Relation::DevelopsFrom,
            other => Relation::Other(other.to_string()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Relation::IsA => "is_a",
            Relation::PartOf => "part_of",
            Relation::DevelopsFrom => "develops_from",
            Relation::Other(label) => label,
        }
    }

    /// The single-relation bit for closure-eligible relations.
    pub fn closure_bit(&self) -> Option<RelationSet> {
        match self {
            Relation::IsA => Some(RelationSet::IS_A),
            Relation::PartOf => Some(RelationSet::PART_OF),
            Relation::DevelopsFrom => Some(RelationSet::DEVELOPS_FROM),
            Relation::Other(_) => None,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Relation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for Relation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let label = String::deserialize(d)?;
        Ok(Relation::from_label(&label))
    }
}

/// Subset of the closure-eligible relations `{is_a, part_of, develops_from}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSet(u8);

impl RelationSet {
    pub const EMPTY: RelationSet = RelationSet(0);
    pub const IS_A: RelationSet = RelationSet(1);
    pub const PART_OF: RelationSet = RelationSet(2);
    pub const DEVELOPS_FROM: RelationSet = RelationSet(4);
    pub const ALL: RelationSet = RelationSet(7);

    pub const fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits <= 7).then_some(RelationSet(bits))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: RelationSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: RelationSet) -> RelationSet {
        RelationSet(self.0 | other.0)
    }

    pub fn includes(self, relation: &Relation) -> bool {
        relation.closure_bit().is_some_and(|bit| self.contains(bit))
    }

    /// All seven non-empty subsets, in bit order.
    pub fn non_empty_subsets() -> impl Iterator<Item = RelationSet> {
        (1..=7).map(RelationSet)
    }

    pub fn labels(self) -> Vec<&'static str> {
        [
            (RelationSet::IS_A, "is_a"),
            (RelationSet::PART_OF, "part_of"),
            (RelationSet::DEVELOPS_FROM, "develops_from"),
        ]
        .into_iter()
        .filter(|(bit, _)| self.contains(*bit))
        .map(|(_, label)| label)
        .collect()
    }

    /// Parses a comma-separated list such as `is_a,part_of`.
    pub fn parse_list(s: &str) -> Result<RelationSet, String> {
        let mut set = RelationSet::EMPTY;
        for label in s.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let bit = Relation::from_label(label)
                .closure_bit()
                .ok_or_else(|| format!("unsupported relation {label:?}"))?;
            set = set.union(bit);
        }
        if set.is_empty() {
            return Err("relation set must not be empty".to_string());
        }
        Ok(set)
    }
}

impl Default for RelationSet {
    fn default() -> Self {
        RelationSet(RelationSet::IS_A.0 | RelationSet::PART_OF.0)
    }
}

impl fmt::Debug for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RelationSet({})", self)
    }
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join(","))
    }
}

impl Serialize for RelationSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.labels().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RelationSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let labels = Vec::<String>::deserialize(d)?;
        RelationSet::parse_list(&labels.join(",")).map_err(serde::de::Error::custom)
    }
}

/// Dense index of a term inside an [`OntologyIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermIdx(pub u32);

impl TermIdx {
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub id: String,
    pub name: String,
    pub definition: Option<String>,
    pub synonyms: Vec<Synonym>,
    pub obsolete: bool,
    pub synthetic: bool,
    pub ontology: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyInfo {
    pub key: String,
    pub format_version: String,
    pub source: String,
    pub term_count: usize,
    pub edge_count: usize,
}

/// One witness cycle over closure-eligible edges; first element equals last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleError {
    pub cycle: Vec<String>,
}

impl fmt::Display for CycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cycle detected: {}", self.cycle.join(" -> "))
    }
}

impl std::error::Error for CycleError {}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error("term {id} is declared by both {first} and {second}")]
    DuplicateTerm {
        id: String,
        first: String,
        second: String,
    },
    #[error("ontology key {0} is declared by more than one file")]
    DuplicateOntology(String),
    #[error("{ontology}: edge {child} -> {parent} points outside its own document")]
    DanglingEdge {
        ontology: String,
        child: String,
        parent: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("relation set must not be empty")]
    EmptyRelationSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbor {
    pub term: TermIdx,
    pub relation: Relation,
}

/// Rows of sorted `u32` lists packed into one buffer.
#[derive(Debug, Default)]
struct Rows {
    offsets: Vec<usize>,
    items: Vec<u32>,
}

impl Rows {
    fn row(&self, i: usize) -> &[u32] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }
}

#[derive(Debug)]
struct Closure {
    ancestors: Rows,
    descendants: Rows,
}

#[derive(Debug)]
pub struct OntologyIndex {
    terms: Vec<Term>,
    by_id: HashMap<String, TermIdx>,
    ontologies: BTreeMap<String, (OntologyInfo, Vec<TermIdx>)>,
    up: Vec<Vec<Neighbor>>,
    down: Vec<Vec<Neighbor>>,
    /// Closure-eligible topological order, parents before children.
    topo: Vec<u32>,
    closures: [OnceLock<Closure>; 8],
}

impl OntologyIndex {
    pub fn empty() -> Self {
        build_index(Vec::new()).expect("empty index always builds")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.up.iter().map(Vec::len).sum()
    }

    pub fn terms(&self) -> impl ExactSizeIterator<Item = &Term> {
        self.terms.iter()
    }

    pub fn term(&self, idx: TermIdx) -> &Term {
        &self.terms[idx.as_usize()]
    }

    pub fn lookup(&self, id: &str) -> Option<TermIdx> {
        self.by_id.get(id).copied()
    }

    pub fn resolve(&self, id: &str) -> Result<TermIdx, LookupError> {
        self.lookup(id)
            .ok_or_else(|| LookupError::UnknownTerm(id.to_string()))
    }

    pub fn term_info(&self, id: &str) -> Result<&Term, LookupError> {
        self.resolve(id).map(|idx| self.term(idx))
    }

    pub fn ontologies(&self) -> impl Iterator<Item = &OntologyInfo> {
        self.ontologies.values().map(|(info, _)| info)
    }

    pub fn ontology_terms(&self, key: &str) -> Option<&[TermIdx]> {
        self.ontologies.get(key).map(|(_, terms)| terms.as_slice())
    }

    /// Raw parent edges of a term, every relation kind included.
    pub fn up_edges(&self, idx: TermIdx) -> &[Neighbor] {
        &self.up[idx.as_usize()]
    }

    /// Raw child edges of a term, every relation kind included.
    pub fn down_edges(&self, idx: TermIdx) -> &[Neighbor] {
        &self.down[idx.as_usize()]
    }

    fn closure(&self, relations: RelationSet) -> Result<&Closure, LookupError> {
        if relations.is_empty() {
            return Err(LookupError::EmptyRelationSet);
        }
        Ok(self.closures[relations.bits() as usize]
            .get_or_init(|| compute_closure(&self.up, &self.topo, relations)))
    }

    /// Indices of all strict descendants, sorted ascending.
    pub fn descendants_of(
        &self,
        idx: TermIdx,
        relations: RelationSet,
    ) -> Result<&[u32], LookupError> {
        Ok(self.closure(relations)?.descendants.row(idx.as_usize()))
    }

    /// Indices of all strict ancestors, sorted ascending.
    pub fn ancestors_of(
        &self,
        idx: TermIdx,
        relations: RelationSet,
    ) -> Result<&[u32], LookupError> {
        Ok(self.closure(relations)?.ancestors.row(idx.as_usize()))
    }

    fn ids(&self, rows: impl IntoIterator<Item = u32>) -> BTreeSet<&str> {
        rows.into_iter()
            .map(|i| self.terms[i as usize].id.as_str())
            .collect()
    }

    /// All terms reachable child → … → `term`, excluding `term` itself.
    pub fn descendants(
        &self,
        term: &str,
        relations: RelationSet,
    ) -> Result<BTreeSet<&str>, LookupError> {
        let idx = self.resolve(term)?;
        Ok(self.ids(self.descendants_of(idx, relations)?.iter().copied()))
    }

    pub fn ancestors(
        &self,
        term: &str,
        relations: RelationSet,
    ) -> Result<BTreeSet<&str>, LookupError> {
        let idx = self.resolve(term)?;
        Ok(self.ids(self.ancestors_of(idx, relations)?.iter().copied()))
    }

    pub fn parents(
        &self,
        term: &str,
        relations: RelationSet,
    ) -> Result<BTreeSet<&str>, LookupError> {
        let idx = self.resolve(term)?;
        if relations.is_empty() {
            return Err(LookupError::EmptyRelationSet);
        }
        Ok(self.ids(
            self.up_edges(idx)
                .iter()
                .filter(|n| relations.includes(&n.relation))
                .map(|n| n.term.0),
        ))
    }

    pub fn children(
        &self,
        term: &str,
        relations: RelationSet,
    ) -> Result<BTreeSet<&str>, LookupError> {
        let idx = self.resolve(term)?;
        if relations.is_empty() {
            return Err(LookupError::EmptyRelationSet);
        }
        Ok(self.ids(
            self.down_edges(idx)
                .iter()
                .filter(|n| relations.includes(&n.relation))
                .map(|n| n.term.0),
        ))
    }

    /// Downward edge path `from` → … → `to` over `relations`, both ends
    /// included, or `None` when `to` is not a descendant of `from`.
    ///
    /// The path is walked upward from `to` using the closure: at each step
    /// the parent taken is `from` itself if adjacent, else the lowest-indexed
    /// parent that still has `from` among its ancestors.
    pub fn downward_path(
        &self,
        from: TermIdx,
        to: TermIdx,
        relations: RelationSet,
    ) -> Option<Vec<TermIdx>> {
        let mut path = self.upward_path(to, from, relations)?;
        path.reverse();
        Some(path)
    }

    /// Upward edge path `from` → … → `to` (child towards ancestor).
    pub fn upward_path(
        &self,
        from: TermIdx,
        to: TermIdx,
        relations: RelationSet,
    ) -> Option<Vec<TermIdx>> {
        let closure = self.closure(relations).ok()?;
        let reaches = |node: TermIdx| {
            node == to
                || closure
                    .ancestors
                    .row(node.as_usize())
                    .binary_search(&to.0)
                    .is_ok()
        };
        if !reaches(from) {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.up[cur.as_usize()]
                .iter()
                .filter(|n| relations.includes(&n.relation) && reaches(n.term))
                .map(|n| n.term)
                .min_by_key(|&p| (p != to, p))?;
            path.push(cur);
        }
        Some(path)
    }
}

fn compute_closure(up: &[Vec<Neighbor>], topo: &[u32], relations: RelationSet) -> Closure {
    let n = up.len();
    // Ancestor rows are filled in topological order (parents first), so
    // each parent's row is final before any child reads it.
    let mut anc_rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut stamp = vec![u32::MAX; n];
    for &node in topo {
        let mut row = Vec::new();
        for edge in &up[node as usize] {
            if !relations.includes(&edge.relation) {
                continue;
            }
            let parent = edge.term.0;
            if stamp[parent as usize] != node {
                stamp[parent as usize] = node;
                row.push(parent);
            }
            for &a in &anc_rows[parent as usize] {
                if stamp[a as usize] != node {
                    stamp[a as usize] = node;
                    row.push(a);
                }
            }
        }
        row.sort_unstable();
        row.shrink_to_fit();
        anc_rows[node as usize] = row;
    }

    let mut ancestors = Rows {
        offsets: Vec::with_capacity(n + 1),
        items: Vec::with_capacity(anc_rows.iter().map(Vec::len).sum()),
    };
    ancestors.offsets.push(0);
    let mut desc_counts = vec![0usize; n];
    for row in anc_rows {
        for &a in &row {
            desc_counts[a as usize] += 1;
        }
        ancestors.items.extend_from_slice(&row);
        ancestors.offsets.push(ancestors.items.len());
    }

    // Invert: iterating children in ascending order keeps every
    // descendant row sorted.
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for count in &desc_counts {
        offsets.push(offsets.last().unwrap() + count);
    }
    let mut cursor = offsets[..n].to_vec();
    let mut items = vec![0u32; ancestors.items.len()];
    for child in 0..n {
        for &a in ancestors.row(child) {
            items[cursor[a as usize]] = child as u32;
            cursor[a as usize] += 1;
        }
    }

    Closure {
        ancestors,
        descendants: Rows { offsets, items },
    }
}

/// Kahn's algorithm over closure-eligible edges. On failure returns one
/// witness cycle, rotated to start at its lowest-indexed term.
fn topological_order(up: &[Vec<Neighbor>], down: &[Vec<Neighbor>]) -> Result<Vec<u32>, Vec<u32>> {
    let n = up.len();
    let eligible = |nb: &Neighbor| RelationSet::ALL.includes(&nb.relation);
    let mut pending_parents: Vec<usize> = up
        .iter()
        .map(|edges| edges.iter().filter(|e| eligible(e)).count())
        .collect();
    let mut queue: std::collections::VecDeque<u32> = (0..n as u32)
        .filter(|&i| pending_parents[i as usize] == 0)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(node) = queue.pop_front() {
        order.push(node);
        for child in down[node as usize].iter().filter(|e| eligible(e)) {
            let c = child.term.as_usize();
            pending_parents[c] -= 1;
            if pending_parents[c] == 0 {
                queue.push_back(child.term.0);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every leftover node has an eligible parent that is also leftover, so
    // walking parents from any leftover node must revisit a node.
    let start = (0..n).find(|&i| pending_parents[i] > 0).unwrap();
    let mut position: HashMap<usize, usize> = HashMap::new();
    let mut walk = Vec::new();
    let mut cur = start;
    loop {
        if let Some(&pos) = position.get(&cur) {
            let mut cycle: Vec<u32> = walk[pos..].iter().map(|&i| i as u32).collect();
            let min_pos = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
            cycle.rotate_left(min_pos);
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        position.insert(cur, walk.len());
        walk.push(cur);
        cur = up[cur]
            .iter()
            .filter(|e| eligible(e) && pending_parents[e.term.as_usize()] > 0)
            .map(|e| e.term.as_usize())
            .min()
            .expect("leftover node keeps a leftover parent");
    }
}

/// Merges parsed ontologies into one index and precomputes the default
/// `{is_a, part_of}` closure.
pub fn build_index(parsed: Vec<ParsedOntology>) -> Result<OntologyIndex, BuildError> {
    let mut terms = Vec::new();
    let mut by_id: HashMap<String, TermIdx> = HashMap::new();
    let mut ontologies = BTreeMap::new();

    for doc in &parsed {
        if ontologies.contains_key(&doc.ontology_key) {
            return Err(BuildError::DuplicateOntology(doc.ontology_key.clone()));
        }
        let mut members = Vec::with_capacity(doc.terms.len());
        for pt in &doc.terms {
            let idx = TermIdx(terms.len() as u32);
            if let Some(prev) = by_id.get(&pt.id) {
                let prev: &Term = &terms[prev.as_usize()];
                return Err(BuildError::DuplicateTerm {
                    id: pt.id.clone(),
                    first: prev.ontology.clone(),
                    second: doc.ontology_key.clone(),
                });
            }
            by_id.insert(pt.id.clone(), idx);
            members.push(idx);
            terms.push(Term {
                id: pt.id.clone(),
                name: pt.name.clone(),
                definition: pt.definition.clone(),
                synonyms: pt.synonyms.clone(),
                obsolete: pt.obsolete,
                synthetic: pt.synthetic,
                ontology: doc.ontology_key.clone(),
            });
        }
        let info = OntologyInfo {
            key: doc.ontology_key.clone(),
            format_version: doc.format_version.clone(),
            source: doc.source.clone(),
            term_count: doc.terms.len(),
            edge_count: doc.edges.len(),
        };
        ontologies.insert(doc.ontology_key.clone(), (info, members));
    }

    let mut up: Vec<Vec<Neighbor>> = vec![Vec::new(); terms.len()];
    let mut down: Vec<Vec<Neighbor>> = vec![Vec::new(); terms.len()];
    for doc in &parsed {
        for edge in &doc.edges {
            let dangling = || BuildError::DanglingEdge {
                ontology: doc.ontology_key.clone(),
                child: edge.child_id.clone(),
                parent: edge.parent_id.clone(),
            };
            let child = *by_id.get(&edge.child_id).ok_or_else(dangling)?;
            let parent = *by_id.get(&edge.parent_id).ok_or_else(dangling)?;
            if terms[parent.as_usize()].ontology != doc.ontology_key
                || terms[child.as_usize()].ontology != doc.ontology_key
            {
                return Err(dangling());
            }
            up[child.as_usize()].push(Neighbor {
                term: parent,
                relation: edge.relation.clone(),
            });
            down[parent.as_usize()].push(Neighbor {
                term: child,
                relation: edge.relation.clone(),
            });
        }
    }

    let topo = topological_order(&up, &down).map_err(|cycle| CycleError {
        cycle: cycle
            .into_iter()
            .map(|i| terms[i as usize].id.clone())
            .collect(),
    })?;

    let index = OntologyIndex {
        terms,
        by_id,
        ontologies,
        up,
        down,
        topo,
        closures: Default::default(),
    };
    index
        .closure(RelationSet::default())
        .expect("default relation set is non-empty");
    Ok(index)
}
