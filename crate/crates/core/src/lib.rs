//! Ontology-aware annotation search.
//!
//! Loads OBO ontologies into a DAG index with precomputed reachability,
//! indexes annotations (simple and post-composed), links ontologies through
//! explicit bridge files, and answers subterm-inclusive searches with
//! per-result explanations and facet counts. The same engine backs the
//! `ontoq` CLI and the HTTP service.

pub mod annotation;
pub mod bridge;
pub mod cli;
pub mod engine;
pub mod lexical;
pub mod obo;
pub mod ontology;
pub mod query;
pub mod service;

pub use annotation::{
    build_annotation_index, parse_annotation_file, AnnotatedEntity, Annotation, AnnotationId,
    AnnotationIndex, AnnotationType, DataObject, MatchMode,
};
pub use bridge::{build_bridge_index, parse_bridge_file, BridgeIndex, BridgeLink};
pub use engine::{DataSources, Engine, LoadError, Stats};
pub use lexical::{build_lexical_index, AutocompleteError, AutocompleteMatch, LexicalIndex};
pub use obo::{parse_obo_document, resolve_references, ParseError, ParsedOntology, ResolveMode};
pub use ontology::{
    build_index, BuildError, CycleError, LookupError, OntologyIndex, Relation, RelationSet, Term,
    TermIdx,
};
pub use query::{compute_facets, MatchExplanation, PathKind, QueryRequest, QueryResult};
