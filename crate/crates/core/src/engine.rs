//! Loading pipeline: files on disk → parsed documents → immutable indices.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::annotation::{build_annotation_index, parse_annotation_file, AnnotationIndex};
use crate::bridge::{build_bridge_index, parse_bridge_file, BridgeIndex};
use crate::lexical::{build_lexical_index, LexicalIndex};
use crate::obo::{parse_obo_document, resolve_references, ParseError, ParsedOntology, ResolveMode};
use crate::ontology::{build_index, BuildError, OntologyIndex};

#[derive(Debug, Clone, Default)]
pub struct DataSources {
    pub obo_files: Vec<PathBuf>,
    pub annotation_file: Option<PathBuf>,
    pub bridge_files: Vec<PathBuf>,
    pub lenient: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("no ontologies: at least one OBO file is required")]
    NoOntologies,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Unresolved(Vec<ParseError>),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Corpus counts, serialized as the `/stats` body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub terms: usize,
    pub ontologies: usize,
    pub annotations: usize,
    pub bridges: usize,
}

/// Every index the query layer needs, built once and read-only afterwards.
#[derive(Debug)]
pub struct Engine {
    pub ontology: OntologyIndex,
    pub lexicon: LexicalIndex,
    pub annotations: AnnotationIndex,
    pub bridges: BridgeIndex,
    pub warnings: Vec<String>,
}

pub(crate) fn read_text(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses and resolves one OBO file.
pub fn load_obo_file(path: &Path, lenient: bool) -> Result<ParsedOntology, LoadError> {
    let text = read_text(path)?;
    let parsed = parse_obo_document(&path.display().to_string(), &text)?;
    let mode = if lenient {
        ResolveMode::Lenient
    } else {
        ResolveMode::Strict
    };
    resolve_references(parsed, mode).map_err(LoadError::Unresolved)
}

impl Engine {
    pub fn load(sources: &DataSources) -> Result<Engine, LoadError> {
        if sources.obo_files.is_empty() {
            return Err(LoadError::NoOntologies);
        }
        let parsed = sources
            .obo_files
            .iter()
            .map(|p| load_obo_file(p, sources.lenient))
            .collect::<Result<Vec<_>, _>>()?;
        let mut warnings: Vec<String> = parsed
            .iter()
            .flat_map(|p| p.warnings.iter().cloned())
            .collect();
        let ontology = build_index(parsed)?;

        let annotations = match &sources.annotation_file {
            Some(path) => {
                let text = read_text(path)?;
                let (annotations, w) =
                    parse_annotation_file(&path.display().to_string(), &text, &ontology)?;
                warnings.extend(w);
                annotations
            }
            None => Vec::new(),
        };
        let mut links = Vec::new();
        for path in &sources.bridge_files {
            let text = read_text(path)?;
            links.extend(parse_bridge_file(
                &path.display().to_string(),
                &text,
                &ontology,
            )?);
        }
        Ok(Engine::from_parts(
            ontology,
            build_annotation_index(annotations),
            build_bridge_index(links),
            warnings,
        ))
    }

    pub fn from_parts(
        ontology: OntologyIndex,
        annotations: AnnotationIndex,
        bridges: BridgeIndex,
        warnings: Vec<String>,
    ) -> Engine {
        let lexicon = build_lexical_index(&ontology, false);
        Engine {
            ontology,
            lexicon,
            annotations,
            bridges,
            warnings,
        }
    }

    pub fn stats(&self) -> Stats {
        Stats {
            terms: self.ontology.len(),
            ontologies: self.ontology.ontologies().count(),
            annotations: self.annotations.len(),
            bridges: self.bridges.len(),
        }
    }
}
