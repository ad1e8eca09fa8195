//! Annotations of data objects to simple terms or post-composed term pairs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::obo::ParseError;
use crate::ontology::OntologyIndex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataObject {
    pub id: String,
    /// Free-form kind such as `gene` or `genotype`.
    pub object_type: String,
}

/// The thing an annotation points at.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AnnotatedEntity {
    Simple {
        term: String,
    },
    /// Ordered pair, matched symmetrically over its components.
    PostComposed {
        primary: String,
        secondary: String,
    },
}

impl AnnotatedEntity {
    pub fn components(&self) -> Vec<&str> {
        match self {
            AnnotatedEntity::Simple { term } => vec![term],
            AnnotatedEntity::PostComposed { primary, secondary } => vec![primary, secondary],
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, AnnotatedEntity::PostComposed { .. })
    }
}

impl fmt::Display for AnnotatedEntity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnnotatedEntity::Simple { term } => f.write_str(term),
            AnnotatedEntity::PostComposed { primary, secondary } => {
                write!(f, "{primary}^{secondary}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationType {
    Expression,
    Phenotype,
    Function,
}

impl AnnotationType {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationType::Expression => "expression",
            AnnotationType::Phenotype => "phenotype",
            AnnotationType::Function => "function",
        }
    }
}

impl fmt::Display for AnnotationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnnotationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "expression" => Ok(AnnotationType::Expression),
            "phenotype" => Ok(AnnotationType::Phenotype),
            "function" => Ok(AnnotationType::Function),
            other => Err(format!("unknown annotation type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub object: DataObject,
    pub entity: AnnotatedEntity,
    pub annotation_type: AnnotationType,
    pub source_line: usize,
}

/// Position of an annotation in [`AnnotationIndex::all`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotationId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    SimpleOnly,
    WithComposites,
}

/// Parses the five-column annotation TSV:
/// `object_id, object_type, annotation_type, term1_id, term2_id`.
///
/// `term2_id` is empty for simple annotations. Lines starting with `#` and
/// blank lines are skipped. Annotations to obsolete terms load with a warning.
pub fn parse_annotation_file(
    source_name: &str,
    text: &str,
    index: &OntologyIndex,
) -> Result<(Vec<Annotation>, Vec<String>), ParseError> {
    let mut annotations = Vec::new();
    let mut warnings = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| ParseError::new(source_name, line_no, msg);
        let cols: Vec<&str> = line.split('\t').collect();
        let [object_id, object_type, annotation_type, term1, term2] = cols[..] else {
            return Err(err(format!(
                "expected 5 tab-separated columns, found {}",
                cols.len()
            )));
        };
        if object_id.is_empty() {
            return Err(err("empty object id".into()));
        }
        let annotation_type: AnnotationType = annotation_type.parse().map_err(err)?;
        for term in [term1, term2].into_iter().filter(|t| !t.is_empty()) {
            let t = index
                .term_info(term)
                .map_err(|_| err(format!("unknown term {term}")))?;
            if t.obsolete {
                warnings.push(format!(
                    "{source_name}:{line_no}: {object_id} is annotated to obsolete term {term}"
                ));
            }
        }
        let entity = match (term1, term2) {
            ("", _) => return Err(err("first term column is empty".into())),
            (t, "") => AnnotatedEntity::Simple {
                term: t.to_string(),
            },
            (p, s) if p == s => {
                return Err(err(format!("post-composed pair repeats {p}")));
            }
            (p, s) => AnnotatedEntity::PostComposed {
                primary: p.to_string(),
                secondary: s.to_string(),
            },
        };
        annotations.push(Annotation {
            object: DataObject {
                id: object_id.to_string(),
                object_type: object_type.to_string(),
            },
            entity,
            annotation_type,
            source_line: line_no,
        });
    }
    Ok((annotations, warnings))
}

/// Annotations indexed by term (post-composed ones under both components)
/// and by data object.
#[derive(Debug, Default, Clone)]
pub struct AnnotationIndex {
    all: Vec<Annotation>,
    by_term: HashMap<String, Vec<AnnotationId>>,
    by_object: BTreeMap<String, Vec<AnnotationId>>,
}

impl AnnotationIndex {
    pub fn all(&self) -> &[Annotation] {
        &self.all
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    pub fn get(&self, id: AnnotationId) -> &Annotation {
        &self.all[id.0 as usize]
    }

    pub fn for_term(&self, term: &str) -> &[AnnotationId] {
        self.by_term.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn for_object(&self, object_id: &str) -> &[AnnotationId] {
        self.by_object
            .get(object_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn indexed_terms(&self) -> impl Iterator<Item = &str> {
        self.by_term.keys().map(String::as_str)
    }

    /// Annotations whose simple term is in `terms`, plus (with composites)
    /// post-composed annotations with either component in `terms`.
    pub fn annotations_for_terms<'a, I>(&self, terms: I, mode: MatchMode) -> BTreeSet<AnnotationId>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeSet::new();
        for term in terms {
            for &id in self.for_term(term) {
                if mode == MatchMode::WithComposites || !self.get(id).entity.is_composite() {
                    out.insert(id);
                }
            }
        }
        out
    }
}

pub fn build_annotation_index(annotations: Vec<Annotation>) -> AnnotationIndex {
    let mut by_term: HashMap<String, Vec<AnnotationId>> = HashMap::new();
    let mut by_object: BTreeMap<String, Vec<AnnotationId>> = BTreeMap::new();
    for (i, ann) in annotations.iter().enumerate() {
        let id = AnnotationId(i as u32);
        let distinct: HashSet<&str> = ann.entity.components().into_iter().collect();
        for term in distinct {
            by_term.entry(term.to_string()).or_default().push(id);
        }
        by_object.entry(ann.object.id.clone()).or_default().push(id);
    }
    AnnotationIndex {
        all: annotations,
        by_term,
        by_object,
    }
}
