//! Test support: random instance generators and brute-force oracles.
//!
//! The oracles only read raw edges, annotation rows and bridge rows; they
//! never touch the closure, the lexical tables or the query engine.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::PathBuf;

use ontoq::obo::{ParsedTerm, RelationEdge, Synonym, SynonymScope};
use ontoq::query::AnnotationMatch;
use ontoq::{
    build_annotation_index, build_bridge_index, build_index, AnnotatedEntity, Annotation,
    AnnotationType, BridgeLink, DataObject, DataSources, Engine, ParsedOntology, PathKind,
    QueryRequest, Relation, RelationSet,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_sources() -> DataSources {
    let dir = fixtures_dir();
    DataSources {
        obo_files: vec![dir.join("mini-ao.obo"), dir.join("mini-go.obo")],
        annotation_file: Some(dir.join("annotations.tsv")),
        bridge_files: vec![dir.join("bridge.tsv")],
        lenient: false,
    }
}

pub fn fixture_engine() -> Engine {
    Engine::load(&fixture_sources()).expect("fixtures load")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SYLLABLES: &[&str] = &[
    "ret", "in", "a", "eye", "fin", "de", "vel", "op", "ment", "neu", "ral", "Ret", "ACT", "ino",
    "épi", "the", "li", "um", "x",
];

pub fn random_word(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=3);
    (0..n)
        .map(|_| *SYLLABLES.choose(rng).unwrap())
        .collect::<String>()
}

pub fn random_phrase(rng: &mut impl Rng) -> String {
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|_| random_word(rng))
        .collect::<Vec<_>>()
        .join(" ")
}

fn random_relation(rng: &mut impl Rng) -> Relation {
    match rng.gen_range(0..10) {
        0..=3 => Relation::IsA,
        4..=6 => Relation::PartOf,
        7..=8 => Relation::DevelopsFrom,
        _ => Relation::Other("adjacent_to".into()),
    }
}

/// Random DAG over closure-eligible relations with up to `max_parents`
/// parents per node. Stanza order is shuffled so it differs from any
/// topological order, and a few `adjacent_to` back edges form harmless
/// cycles.
pub fn random_ontology(
    rng: &mut impl Rng,
    prefix: &str,
    key: &str,
    n: usize,
    max_parents: usize,
) -> ParsedOntology {
    let ids: Vec<String> = (0..n).map(|i| format!("{prefix}:{i:07}")).collect();
    let mut edges = Vec::new();
    for child in 1..n {
        let k = rng.gen_range(0..=max_parents);
        let mut parents = HashSet::new();
        for _ in 0..k {
            parents.insert(rng.gen_range(0..child));
        }
        let mut parents: Vec<_> = parents.into_iter().collect();
        parents.sort_unstable();
        for parent in parents {
            edges.push(RelationEdge {
                child_id: ids[child].clone(),
                parent_id: ids[parent].clone(),
                relation: random_relation(rng),
                line: 0,
            });
        }
        if rng.gen_bool(0.05) {
            let later = rng.gen_range(0..n);
            if later != child {
                edges.push(RelationEdge {
                    child_id: ids[later.min(child)].clone(),
                    parent_id: ids[later.max(child)].clone(),
                    relation: Relation::Other("adjacent_to".into()),
                    line: 0,
                });
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let terms = order
        .iter()
        .map(|&i| ParsedTerm {
            id: ids[i].clone(),
            name: random_phrase(rng),
            definition: None,
            synonyms: (0..rng.gen_range(0..=2))
                .map(|_| Synonym {
                    text: random_phrase(rng),
                    scope: SynonymScope::Exact,
                })
                .collect(),
            obsolete: rng.gen_bool(0.03),
            synthetic: false,
            line: 0,
        })
        .collect();
    ParsedOntology {
        source: format!("{key}.obo"),
        ontology_key: key.to_string(),
        format_version: "1.2".into(),
        terms,
        edges,
        warnings: Vec::new(),
    }
}

/// Raw edge list of a set of parsed ontologies, with plain adjacency maps.
pub struct RawGraph {
    pub edges: Vec<(String, String, Relation)>,
    up: HashMap<String, Vec<(String, Relation)>>,
    down: HashMap<String, Vec<(String, Relation)>>,
}

impl RawGraph {
    pub fn new(docs: &[ParsedOntology]) -> Self {
        let edges: Vec<_> = docs
            .iter()
            .flat_map(|d| d.edges.iter())
            .map(|e| (e.child_id.clone(), e.parent_id.clone(), e.relation.clone()))
            .collect();
        let mut up: HashMap<String, Vec<(String, Relation)>> = HashMap::new();
        let mut down: HashMap<String, Vec<(String, Relation)>> = HashMap::new();
        for (c, p, r) in &edges {
            up.entry(c.clone())
                .or_default()
                .push((p.clone(), r.clone()));
            down.entry(p.clone())
                .or_default()
                .push((c.clone(), r.clone()));
        }
        Self { edges, up, down }
    }

    fn dfs(&self, start: &str, relations: RelationSet, upward: bool) -> BTreeSet<String> {
        let adjacency = if upward { &self.up } else { &self.down };
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.to_string()];
        while let Some(node) = stack.pop() {
            for (next, rel) in adjacency.get(&node).into_iter().flatten() {
                if relations.includes(rel) && seen.insert(next.clone()) {
                    stack.push(next.clone());
                }
            }
        }
        seen.remove(start);
        seen
    }

    pub fn descendants(&self, term: &str, relations: RelationSet) -> BTreeSet<String> {
        self.dfs(term, relations, false)
    }

    pub fn ancestors(&self, term: &str, relations: RelationSet) -> BTreeSet<String> {
        self.dfs(term, relations, true)
    }

    pub fn has_edge(&self, child: &str, parent: &str, relations: RelationSet) -> bool {
        self.up
            .get(child)
            .into_iter()
            .flatten()
            .any(|(p, r)| p == parent && relations.includes(r))
    }
}

/// A complete random corpus plus the raw rows it was built from.
pub struct Instance {
    pub docs: Vec<ParsedOntology>,
    pub annotations: Vec<Annotation>,
    pub links: Vec<BridgeLink>,
    pub engine: Engine,
}

impl Instance {
    pub fn term_ids(&self) -> Vec<String> {
        self.docs
            .iter()
            .flat_map(|d| d.terms.iter().map(|t| t.id.clone()))
            .collect()
    }

    pub fn raw(&self) -> RawGraph {
        RawGraph::new(&self.docs)
    }
}

pub fn build_instance(
    docs: Vec<ParsedOntology>,
    annotations: Vec<Annotation>,
    links: Vec<BridgeLink>,
) -> Instance {
    let ontology = build_index(docs.clone()).expect("random DAGs are acyclic");
    let engine = Engine::from_parts(
        ontology,
        build_annotation_index(annotations.clone()),
        build_bridge_index(links.clone()),
        Vec::new(),
    );
    Instance {
        docs,
        annotations,
        links,
        engine,
    }
}

/// Up to 200 terms over three ontologies, up to 500 annotations and up to
/// 50 bridge links.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = rng(seed);
    let keys = [("AA", "aa"), ("BB", "bb"), ("CC", "cc")];
    let docs: Vec<ParsedOntology> = keys
        .iter()
        .map(|(prefix, key)| {
            let n = rng.gen_range(1..=66);
            random_ontology(&mut rng, prefix, key, n, 3)
        })
        .collect();
    let by_doc: Vec<Vec<String>> = docs
        .iter()
        .map(|d| d.terms.iter().map(|t| t.id.clone()).collect())
        .collect();
    let all: Vec<String> = by_doc.iter().flatten().cloned().collect();

    let objects: Vec<DataObject> = (0..rng.gen_range(1..=60))
        .map(|i| DataObject {
            id: format!("obj{i}"),
            object_type: ["gene", "genotype", "antibody"][rng.gen_range(0..3)].to_string(),
        })
        .collect();
    let types = [
        AnnotationType::Expression,
        AnnotationType::Phenotype,
        AnnotationType::Function,
    ];
    let annotations = (0..rng.gen_range(0..=500))
        .map(|i| {
            let primary = all.choose(&mut rng).unwrap().clone();
            let entity = if all.len() > 1 && rng.gen_bool(0.4) {
                let secondary = loop {
                    let s = all.choose(&mut rng).unwrap();
                    if *s != primary {
                        break s.clone();
                    }
                };
                AnnotatedEntity::PostComposed { primary, secondary }
            } else {
                AnnotatedEntity::Simple { term: primary }
            };
            Annotation {
                object: objects.choose(&mut rng).unwrap().clone(),
                entity,
                annotation_type: *types.choose(&mut rng).unwrap(),
                source_line: i + 1,
            }
        })
        .collect();

    let mut links = Vec::new();
    for _ in 0..rng.gen_range(0..=50) {
        let a = rng.gen_range(0..by_doc.len());
        let b = (a + rng.gen_range(1..by_doc.len())) % by_doc.len();
        links.push(BridgeLink {
            source: by_doc[a].choose(&mut rng).unwrap().clone(),
            relation: "process_of".into(),
            target: by_doc[b].choose(&mut rng).unwrap().clone(),
        });
    }
    build_instance(docs, annotations, links)
}

/// All 16 combinations of the four expansion flags.
pub fn flag_combinations(term: &str, relations: RelationSet) -> Vec<QueryRequest> {
    (0..16u8)
        .map(|bits| {
            QueryRequest::new(term)
                .relations(relations)
                .descendants(bits & 1 != 0)
                .composites(bits & 2 != 0)
                .bridges(bits & 4 != 0)
                .ancestor_composites(bits & 8 != 0)
        })
        .collect()
}

/// Brute-force evaluator: annotation `source_line` → explanation kind.
pub fn oracle_search(inst: &Instance, request: &QueryRequest) -> BTreeMap<usize, PathKind> {
    let raw = inst.raw();
    let term = request.term.as_str();
    let mut home: BTreeSet<String> = BTreeSet::from([term.to_string()]);
    if request.include_descendants {
        home.extend(raw.descendants(term, request.relations));
    }
    let mut bridged = BTreeSet::new();
    if request.include_bridges {
        for link in &inst.links {
            if home.contains(&link.target) {
                bridged.insert(link.source.clone());
                bridged.extend(raw.descendants(&link.source, RelationSet::IS_A));
            }
        }
    }
    let ancestors = raw.ancestors(term, request.relations);

    let mut out = BTreeMap::new();
    for ann in &inst.annotations {
        let kind = match &ann.entity {
            AnnotatedEntity::Simple { term: t } => {
                if t == term {
                    Some(PathKind::Direct)
                } else if home.contains(t) {
                    Some(PathKind::Descendant)
                } else if bridged.contains(t) {
                    Some(PathKind::Bridged)
                } else {
                    None
                }
            }
            AnnotatedEntity::PostComposed { primary, secondary } => {
                let any = |set: &BTreeSet<String>| set.contains(primary) || set.contains(secondary);
                if request.include_composites && any(&home) {
                    Some(PathKind::CompositeComponent)
                } else if request.include_composites && any(&bridged) {
                    Some(PathKind::Bridged)
                } else if request.include_ancestor_composites && any(&ancestors) {
                    Some(PathKind::AncestorComposite)
                } else {
                    None
                }
            }
        };
        let Some(kind) = kind else { continue };
        if request
            .annotation_type_filter
            .is_some_and(|t| t != ann.annotation_type)
        {
            continue;
        }
        if request
            .object_type_filter
            .as_ref()
            .is_some_and(|t| *t != ann.object.object_type)
        {
            continue;
        }
        out.insert(ann.source_line, kind);
    }
    out
}

/// Replays an explanation against raw edges, entity components and bridge
/// rows.
pub fn replay_explanation(
    raw: &RawGraph,
    links: &[BridgeLink],
    request: &QueryRequest,
    m: &AnnotationMatch,
) -> Result<(), String> {
    let via = &m.explanation.via_terms;
    let kind = m.explanation.path_kind;
    if via.first().map(String::as_str) != Some(request.term.as_str()) {
        return Err(format!("via must start at the query term: {via:?}"));
    }
    let last = via.last().unwrap();
    let components = m.annotation.entity.components();
    if !components.contains(&last.as_str()) {
        return Err(format!("via ends at {last}, not an annotated term"));
    }
    if m.explanation.inferred != (kind == PathKind::AncestorComposite) {
        return Err("inferred flag mismatch".into());
    }
    let down_ok = |steps: &[String], rels: RelationSet| {
        steps.windows(2).all(|w| raw.has_edge(&w[1], &w[0], rels))
    };
    match kind {
        PathKind::Direct => {
            if via.len() != 1 || m.annotation.entity.is_composite() {
                return Err("direct match must be a simple annotation on the query term".into());
            }
        }
        PathKind::Descendant | PathKind::CompositeComponent => {
            if (kind == PathKind::CompositeComponent) != m.annotation.entity.is_composite() {
                return Err("entity kind does not fit the path kind".into());
            }
            if !request.include_descendants && via.len() != 1 {
                return Err("descendant steps with descendants off".into());
            }
            if !down_ok(via, request.relations) {
                return Err(format!("not a downward edge path: {via:?}"));
            }
        }
        PathKind::Bridged => {
            let ok = (0..via.len().saturating_sub(1)).any(|j| {
                let home = &via[..=j];
                let hop = links
                    .iter()
                    .any(|l| l.target == via[j] && l.source == via[j + 1]);
                hop && (request.include_descendants || j == 0)
                    && down_ok(home, request.relations)
                    && down_ok(&via[j + 1..], RelationSet::IS_A)
            });
            if !ok {
                return Err(format!("no valid bridge split in {via:?}"));
            }
        }
        PathKind::AncestorComposite => {
            if !m.annotation.entity.is_composite() || via.len() < 2 {
                return Err("ancestor match needs a composite and at least one step".into());
            }
            if !via
                .windows(2)
                .all(|w| raw.has_edge(&w[0], &w[1], request.relations))
            {
                return Err(format!("not an upward edge path: {via:?}"));
            }
        }
    }
    Ok(())
}

/// Linear-scan autocomplete: `(term id, display name, tier)` in rank order.
pub fn oracle_autocomplete(
    docs: &[ParsedOntology],
    query: &str,
    limit: usize,
    ontology: Option<&str>,
) -> Vec<(String, String, u8, String)> {
    let q: Vec<char> = query.trim().to_lowercase().chars().collect();
    let matches_at =
        |key: &[char], at: usize| key.len() >= at + q.len() && key[at..at + q.len()] == q[..];
    let token_match = |key: &[char]| {
        (1..key.len())
            .any(|i| key[i - 1].is_whitespace() && !key[i].is_whitespace() && matches_at(key, i))
    };
    let mut found = Vec::new();
    for doc in docs {
        if ontology.is_some_and(|o| o != doc.ontology_key) {
            continue;
        }
        for term in doc.terms.iter().filter(|t| !t.obsolete) {
            let mut best: Option<(u8, usize, String)> = None;
            let texts = std::iter::once(&term.name).chain(term.synonyms.iter().map(|s| &s.text));
            for (ordinal, text) in texts.enumerate() {
                let key: Vec<char> = text.to_lowercase().chars().collect();
                let is_name = ordinal == 0;
                let tier = if is_name && key == q {
                    Some(1)
                } else if is_name && matches_at(&key, 0) {
                    Some(2)
                } else if is_name && token_match(&key) {
                    Some(3)
                } else if !is_name && matches_at(&key, 0) {
                    Some(4)
                } else if !is_name && token_match(&key) {
                    Some(5)
                } else {
                    None
                };
                if let Some(tier) = tier {
                    if best.as_ref().is_none_or(|b| (tier, ordinal) < (b.0, b.1)) {
                        best = Some((tier, ordinal, text.clone()));
                    }
                }
            }
            if let Some((tier, _, text)) = best {
                found.push((term.id.clone(), term.name.clone(), tier, text));
            }
        }
    }
    found.sort_by(|a, b| (a.2, &a.1, &a.0).cmp(&(b.2, &b.1, &b.0)));
    found.truncate(limit);
    found
}

/// Synthetic OBO text: `n` terms, each non-root node with 1–3 parents
/// (mean 2) drawn from earlier nodes.
pub fn synthetic_obo(seed: u64, n: usize) -> String {
    use std::fmt::Write;
    let mut rng = rng(seed);
    let mut out = String::from("format-version: 1.2\nontology: synthetic\n");
    for i in 0..n {
        let _ = write!(
            out,
            "[Term]\nid: SYN:{i:07}\nname: {}\n",
            random_phrase(&mut rng)
        );
        if i == 0 {
            continue;
        }
        let k = rng.gen_range(1..=3).min(i);
        let mut parents = BTreeSet::new();
        while parents.len() < k {
            parents.insert(rng.gen_range(0..i));
        }
        for p in parents {
            if rng.gen_bool(0.7) {
                let _ = writeln!(out, "is_a: SYN:{p:07}");
            } else {
                let _ = writeln!(out, "relationship: part_of SYN:{p:07}");
            }
        }
    }
    out
}
