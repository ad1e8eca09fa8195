//! Ontology-aware annotation search.
//!
//! A request for term `T` expands into a home set (`T` plus, optionally, its
//! descendants) and, when bridges are enabled, a bridged set (every source
//! linked to a home term, plus its `is_a` descendants). Both expansions read
//! the precomputed closure; the search itself is set algebra over the
//! annotation index. Each returned annotation carries the highest-priority
//! explanation that applies to it, together with a chain of term ids that can
//! be replayed against the raw edges, components and bridge links.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotatedEntity, Annotation, AnnotationId, AnnotationType, MatchMode};
use crate::engine::Engine;
use crate::ontology::{LookupError, RelationSet, TermIdx};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequest {
    pub term: String,
    pub include_descendants: bool,
    pub relations: RelationSet,
    pub include_composites: bool,
    pub include_ancestor_composites: bool,
    pub include_bridges: bool,
    pub annotation_type_filter: Option<AnnotationType>,
    pub object_type_filter: Option<String>,
}

impl QueryRequest {
    pub fn new(term: impl Into<String>) -> Self {
        Self {
            term: term.into(),
            include_descendants: true,
            relations: RelationSet::default(),
            include_composites: true,
            include_ancestor_composites: false,
            include_bridges: false,
            annotation_type_filter: None,
            object_type_filter: None,
        }
    }

    pub fn descendants(mut self, on: bool) -> Self {
        self.include_descendants = on;
        self
    }

    pub fn relations(mut self, relations: RelationSet) -> Self {
        self.relations = relations;
        self
    }

    pub fn composites(mut self, on: bool) -> Self {
        self.include_composites = on;
        self
    }

    pub fn ancestor_composites(mut self, on: bool) -> Self {
        self.include_ancestor_composites = on;
        self
    }

    pub fn bridges(mut self, on: bool) -> Self {
        self.include_bridges = on;
        self
    }
}

/// Why an annotation matched, in priority order (highest first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Direct,
    Descendant,
    CompositeComponent,
    Bridged,
    AncestorComposite,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Direct => "direct",
            PathKind::Descendant => "descendant",
            PathKind::CompositeComponent => "composite_component",
            PathKind::Bridged => "bridged",
            PathKind::AncestorComposite => "ancestor_composite",
        }
    }
}

impl fmt::Display for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `via_terms` starts at the query term and ends at the annotated term (or
/// matched component). Consecutive entries are joined by a relation edge in
/// the request's relation set, except for one bridge hop in bridged matches
/// (home term → bridge source), after which steps are `is_a` edges.
/// Ancestor matches walk upward instead of downward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchExplanation {
    pub path_kind: PathKind,
    pub via_terms: Vec<String>,
    /// Set only for ancestor-composite matches.
    pub inferred: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationMatch {
    pub annotation: Annotation,
    pub explanation: MatchExplanation,
}

/// facet name → facet value → count.
pub type Facets = BTreeMap<String, BTreeMap<String, usize>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub request: QueryRequest,
    pub matched_terms: Vec<String>,
    pub annotations: Vec<AnnotationMatch>,
    pub facets: Facets,
}

/// Exact counts by annotation type and object type. Both facets are always
/// present; zero-count values never are.
pub fn compute_facets<'a>(annotations: impl IntoIterator<Item = &'a Annotation>) -> Facets {
    let mut by_type: BTreeMap<String, usize> = BTreeMap::new();
    let mut by_object: BTreeMap<String, usize> = BTreeMap::new();
    for ann in annotations {
        *by_type.entry(ann.annotation_type.to_string()).or_default() += 1;
        *by_object.entry(ann.object.object_type.clone()).or_default() += 1;
    }
    Facets::from([
        ("annotation_type".to_string(), by_type),
        ("object_type".to_string(), by_object),
    ])
}

/// The two expanded term sets of a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub home: BTreeSet<TermIdx>,
    pub bridged: BTreeSet<TermIdx>,
}

impl Engine {
    fn idx_set(&self, ids: &BTreeSet<TermIdx>) -> BTreeSet<&str> {
        ids.iter()
            .map(|&i| self.ontology.term(i).id.as_str())
            .collect()
    }

    fn expand(&self, request: &QueryRequest) -> Result<(TermIdx, Expansion), LookupError> {
        let ont = &self.ontology;
        let root = ont.resolve(&request.term)?;
        let mut home = BTreeSet::from([root]);
        if request.include_descendants {
            home.extend(
                ont.descendants_of(root, request.relations)?
                    .iter()
                    .map(|&i| TermIdx(i)),
            );
        } else if request.relations.is_empty() {
            return Err(LookupError::EmptyRelationSet);
        }
        let mut bridged = BTreeSet::new();
        if request.include_bridges {
            let home_ids = home.iter().map(|&i| ont.term(i).id.as_str());
            for source in self.bridges.bridged_sources(home_ids) {
                let s = ont.resolve(source)?;
                bridged.insert(s);
                bridged.extend(
                    ont.descendants_of(s, RelationSet::IS_A)?
                        .iter()
                        .map(|&i| TermIdx(i)),
                );
            }
        }
        Ok((root, Expansion { home, bridged }))
    }

    /// Returns `(home_set, bridged_set)` as term ids.
    pub fn expand_query_terms(
        &self,
        request: &QueryRequest,
    ) -> Result<(BTreeSet<&str>, BTreeSet<&str>), LookupError> {
        let (_, exp) = self.expand(request)?;
        Ok((self.idx_set(&exp.home), self.idx_set(&exp.bridged)))
    }

    fn ids(&self, path: impl IntoIterator<Item = TermIdx>) -> Vec<String> {
        path.into_iter()
            .map(|i| self.ontology.term(i).id.clone())
            .collect()
    }

    fn home_path(&self, request: &QueryRequest, root: TermIdx, target: TermIdx) -> Vec<String> {
        let path = self
            .ontology
            .downward_path(root, target, request.relations)
            .expect("home-set member is reachable from the query term");
        self.ids(path)
    }

    /// Shortest bridge route to `target` (ties broken by the id sequence):
    /// home path to a linked term, the bridge hop, then `is_a` steps down to
    /// `target`.
    fn bridged_path(
        &self,
        request: &QueryRequest,
        root: TermIdx,
        exp: &Expansion,
        target: TermIdx,
    ) -> Vec<String> {
        let ont = &self.ontology;
        let mut best: Option<Vec<String>> = None;
        for source in self.bridges.bridged_sources(self.idx_set(&exp.home)) {
            let s = ont
                .lookup(source)
                .expect("bridge ids were validated at load");
            let Some(tail) = ont.downward_path(s, target, RelationSet::IS_A) else {
                continue;
            };
            let tail = self.ids(tail);
            for entry in self.bridges.targets_of(source).into_iter().flatten() {
                let Some(h) = ont.lookup(entry).filter(|h| exp.home.contains(h)) else {
                    continue;
                };
                let mut via = self.home_path(request, root, h);
                via.extend(tail.iter().cloned());
                let better = best
                    .as_ref()
                    .is_none_or(|b| (via.len(), &via) < (b.len(), b));
                if better {
                    best = Some(via);
                }
            }
        }
        best.expect("bridged-set member has a bridge route")
    }

    fn classify(
        &self,
        request: &QueryRequest,
        root: TermIdx,
        exp: &Expansion,
        ancestors: &HashSet<TermIdx>,
        ann: &Annotation,
    ) -> Option<MatchExplanation> {
        let ont = &self.ontology;
        let explain = |path_kind, via_terms| MatchExplanation {
            path_kind,
            via_terms,
            inferred: path_kind == PathKind::AncestorComposite,
        };
        match &ann.entity {
            AnnotatedEntity::Simple { term } => {
                let t = ont.lookup(term)?;
                if t == root {
                    Some(explain(PathKind::Direct, vec![term.clone()]))
                } else if exp.home.contains(&t) {
                    Some(explain(
                        PathKind::Descendant,
                        self.home_path(request, root, t),
                    ))
                } else if exp.bridged.contains(&t) {
                    Some(explain(
                        PathKind::Bridged,
                        self.bridged_path(request, root, exp, t),
                    ))
                } else {
                    None
                }
            }
            AnnotatedEntity::PostComposed { primary, secondary } => {
                let components: Vec<TermIdx> = [primary, secondary]
                    .iter()
                    .filter_map(|c| ont.lookup(c))
                    .collect();
                // Prefer the query term itself, then the primary component.
                let pick = |set: &dyn Fn(&TermIdx) -> bool| {
                    components
                        .iter()
                        .copied()
                        .filter(|c| set(c))
                        .min_by_key(|&c| c != root)
                };
                if request.include_composites {
                    if let Some(c) = pick(&|c| exp.home.contains(c)) {
                        return Some(explain(
                            PathKind::CompositeComponent,
                            self.home_path(request, root, c),
                        ));
                    }
                    if let Some(c) = pick(&|c| exp.bridged.contains(c)) {
                        return Some(explain(
                            PathKind::Bridged,
                            self.bridged_path(request, root, exp, c),
                        ));
                    }
                }
                if request.include_ancestor_composites {
                    if let Some(c) = pick(&|c| ancestors.contains(c)) {
                        let path = ont
                            .upward_path(root, c, request.relations)
                            .expect("ancestor is reachable upward");
                        return Some(explain(PathKind::AncestorComposite, self.ids(path)));
                    }
                }
                None
            }
        }
    }

    pub fn execute_search(&self, request: &QueryRequest) -> Result<QueryResult, LookupError> {
        let (root, exp) = self.expand(request)?;
        let ancestors: HashSet<TermIdx> = if request.include_ancestor_composites {
            self.ontology
                .ancestors_of(root, request.relations)?
                .iter()
                .map(|&i| TermIdx(i))
                .collect()
        } else {
            HashSet::new()
        };

        let mode = if request.include_composites {
            MatchMode::WithComposites
        } else {
            MatchMode::SimpleOnly
        };
        let term_id = |i: &TermIdx| self.ontology.term(*i).id.as_str();
        let mut candidates: BTreeSet<AnnotationId> = self
            .annotations
            .annotations_for_terms(exp.home.iter().chain(&exp.bridged).map(term_id), mode);
        for a in &ancestors {
            candidates.extend(
                self.annotations
                    .for_term(term_id(a))
                    .iter()
                    .filter(|&&id| self.annotations.get(id).entity.is_composite()),
            );
        }

        let mut matches: Vec<(AnnotationId, AnnotationMatch)> = candidates
            .into_iter()
            .filter_map(|id| {
                let ann = self.annotations.get(id);
                let explanation = self.classify(request, root, &exp, &ancestors, ann)?;
                Some((
                    id,
                    AnnotationMatch {
                        annotation: ann.clone(),
                        explanation,
                    },
                ))
            })
            .filter(|(_, m)| {
                request
                    .annotation_type_filter
                    .is_none_or(|t| m.annotation.annotation_type == t)
                    && request
                        .object_type_filter
                        .as_ref()
                        .is_none_or(|t| &m.annotation.object.object_type == t)
            })
            .collect();
        matches.sort_by(|(ia, a), (ib, b)| {
            let key = |m: &AnnotationMatch| {
                (
                    m.annotation.object.id.clone(),
                    m.annotation.annotation_type,
                    m.annotation
                        .entity
                        .components()
                        .into_iter()
                        .map(str::to_string)
                        .collect::<Vec<_>>(),
                )
            };
            key(a).cmp(&key(b)).then(ia.cmp(ib))
        });
        let annotations: Vec<AnnotationMatch> = matches.into_iter().map(|(_, m)| m).collect();

        let facets = compute_facets(annotations.iter().map(|m| &m.annotation));
        let mut matched_terms: Vec<String> = exp
            .home
            .iter()
            .chain(&exp.bridged)
            .map(|i| term_id(i).to_string())
            .collect();
        matched_terms.sort();
        matched_terms.dedup();

        Ok(QueryResult {
            request: request.clone(),
            matched_terms,
            annotations,
            facets,
        })
    }

    /// Number of annotations a default search (descendants and composites on,
    /// bridges and ancestor composites off) returns for `term`.
    pub fn annotation_count(
        &self,
        term: &str,
        relations: RelationSet,
    ) -> Result<usize, LookupError> {
        let idx = self.ontology.resolve(term)?;
        let desc = self.ontology.descendants_of(idx, relations)?;
        let ids = std::iter::once(idx.0)
            .chain(desc.iter().copied())
            .map(|i| self.ontology.term(TermIdx(i)).id.as_str());
        Ok(self
            .annotations
            .annotations_for_terms(ids, MatchMode::WithComposites)
            .len())
    }

    /// [`Engine::annotation_count`] for every term in the index.
    pub fn annotation_counts_per_term(
        &self,
        relations: RelationSet,
    ) -> Result<BTreeMap<String, usize>, LookupError> {
        self.ontology
            .terms()
            .map(|t| Ok((t.id.clone(), self.annotation_count(&t.id, relations)?)))
            .collect()
    }
}
