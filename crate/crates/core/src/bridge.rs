//! Explicit cross-ontology links (process term → entity term).
//!
//! Links are identifier-level only; term names never take part in matching.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::obo::ParseError;
use crate::ontology::OntologyIndex;

pub const DEFAULT_BRIDGE_RELATION: &str = "process_of";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BridgeLink {
    pub source: String,
    pub relation: String,
    pub target: String,
}

/// Parses the three-column bridge TSV `source_term_id, relation, target_term_id`.
/// An empty relation column means `process_of`.
pub fn parse_bridge_file(
    source_name: &str,
    text: &str,
    index: &OntologyIndex,
) -> Result<Vec<BridgeLink>, ParseError> {
    let mut links = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| ParseError::new(source_name, line_no, msg);
        let cols: Vec<&str> = line.split('\t').collect();
        let [source, relation, target] = cols[..] else {
            return Err(err(format!(
                "expected 3 tab-separated columns, found {}",
                cols.len()
            )));
        };
        let source_term = index
            .term_info(source)
            .map_err(|_| err(format!("unknown term {source}")))?;
        let target_term = index
            .term_info(target)
            .map_err(|_| err(format!("unknown term {target}")))?;
        if source_term.ontology == target_term.ontology {
            return Err(err(format!(
                "bridge {source} -> {target} stays within the same ontology ({})",
                source_term.ontology
            )));
        }
        let relation = if relation.is_empty() {
            DEFAULT_BRIDGE_RELATION
        } else {
            relation
        };
        links.push(BridgeLink {
            source: source.to_string(),
            relation: relation.to_string(),
            target: target.to_string(),
        });
    }
    Ok(links)
}

#[derive(Debug, Default, Clone)]
pub struct BridgeIndex {
    links: BTreeSet<BridgeLink>,
    by_target: BTreeMap<String, BTreeSet<String>>,
    by_source: BTreeMap<String, BTreeSet<String>>,
}

impl BridgeIndex {
    /// Distinct links, sorted.
    pub fn links(&self) -> impl Iterator<Item = &BridgeLink> {
        self.links.iter()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn sources_of(&self, target: &str) -> Option<&BTreeSet<String>> {
        self.by_target.get(target)
    }

    pub fn targets_of(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.by_source.get(source)
    }

    /// Inverse image of `entity_terms` under the links. One hop, no closure.
    pub fn bridged_sources<'a, I>(&self, entity_terms: I) -> BTreeSet<&str>
    where
        I: IntoIterator<Item = &'a str>,
    {
        entity_terms
            .into_iter()
            .filter_map(|t| self.by_target.get(t))
            .flatten()
            .map(String::as_str)
            .collect()
    }
}

/// Indexes links in both directions, dropping exact duplicates.
pub fn build_bridge_index(links: impl IntoIterator<Item = BridgeLink>) -> BridgeIndex {
    let mut bidx = BridgeIndex::default();
    for link in links {
        bidx.by_target
            .entry(link.target.clone())
            .or_default()
            .insert(link.source.clone());
        bidx.by_source
            .entry(link.source.clone())
            .or_default()
            .insert(link.target.clone());
        bidx.links.insert(link);
    }
    bidx
}
