//! Ranked, synonym-aware term lookup for autocomplete.
//!
//! Matching is case-insensitive and ranks every candidate into one of five
//! tiers:
//!
//! 1. the query equals the term name
//! 2. the name starts with the query
//! 3. some later whitespace-delimited token of the name starts the query
//! 4. a synonym starts with (or equals) the query
//! 5. some later token of a synonym starts the query
//!
//! Each term is reported once at its best tier. Results are ordered by
//! `(tier, display name by code point, term id)`.
//!
//! Lookups go through two sorted key arrays: full keys (names and synonyms)
//! and token suffixes (the remainder of a key from each inner token start).
//! A prefix query is then a binary-searched range in each array.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::obo::SynonymScope;
use crate::ontology::{OntologyIndex, TermIdx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Name,
    Synonym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "scope")]
pub enum EntryKind {
    Name,
    Synonym(SynonymScope),
}

impl EntryKind {
    pub fn match_kind(self) -> MatchKind {
        match self {
            EntryKind::Name => MatchKind::Name,
            EntryKind::Synonym(_) => MatchKind::Synonym,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalEntry {
    /// Case-folded name or synonym text.
    pub key: String,
    /// The text as written in the ontology.
    pub text: String,
    pub kind: EntryKind,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutocompleteMatch {
    pub term: String,
    pub display_name: String,
    pub matched_text: String,
    pub matched_kind: MatchKind,
    pub tier: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutocompleteError {
    #[error("query must not be empty")]
    EmptyQuery,
    #[error("limit must be a positive integer")]
    ZeroLimit,
}

/// Case folding shared by index keys and queries.
pub fn fold(text: &str) -> String {
    text.to_lowercase()
}

/// Byte offsets of whitespace-delimited tokens after the first character.
pub fn inner_token_starts(key: &str) -> impl Iterator<Item = usize> + '_ {
    let mut prev_ws = false;
    key.char_indices().filter_map(move |(i, c)| {
        let start = prev_ws && !c.is_whitespace() && i > 0;
        prev_ws = c.is_whitespace();
        start.then_some(i)
    })
}

#[derive(Debug, Clone)]
struct EntryMeta {
    term: TermIdx,
    ontology: u32,
    /// Position among the term's entries (name first, then synonyms).
    ordinal: u32,
}

#[derive(Debug, Default)]
pub struct LexicalIndex {
    entries: Vec<LexicalEntry>,
    meta: Vec<EntryMeta>,
    display: Vec<String>,
    ids: Vec<String>,
    ontology_keys: HashMap<String, u32>,
    /// Entry indices sorted by full key.
    full_keys: Vec<u32>,
    /// (entry, byte offset) pairs sorted by the key suffix at that offset.
    suffixes: Vec<(u32, u32)>,
}

impl LexicalIndex {
    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn suffix(&self, (entry, offset): (u32, u32)) -> &str {
        &self.entries[entry as usize].key[offset as usize..]
    }

    pub fn autocomplete(
        &self,
        query: &str,
        limit: usize,
        ontology_filter: Option<&str>,
    ) -> Result<Vec<AutocompleteMatch>, AutocompleteError> {
        let query = fold(query.trim());
        if query.is_empty() {
            return Err(AutocompleteError::EmptyQuery);
        }
        if limit == 0 {
            return Err(AutocompleteError::ZeroLimit);
        }
        let ontology = match ontology_filter {
            Some(key) => match self.ontology_keys.get(key) {
                Some(&o) => Some(o),
                None => return Ok(Vec::new()),
            },
            None => None,
        };

        // term -> (tier, ordinal, entry)
        let mut best: HashMap<TermIdx, (u8, u32, u32)> = HashMap::new();
        let mut offer = |entry: u32, tier: u8| {
            let meta = &self.meta[entry as usize];
            if ontology.is_some_and(|o| o != meta.ontology) {
                return;
            }
            let candidate = (tier, meta.ordinal, entry);
            best.entry(meta.term)
                .and_modify(|cur| {
                    if (candidate.0, candidate.1) < (cur.0, cur.1) {
                        *cur = candidate;
                    }
                })
                .or_insert(candidate);
        };

        let lo = self
            .full_keys
            .partition_point(|&e| self.entries[e as usize].key.as_str() < query.as_str());
        for &e in &self.full_keys[lo..] {
            let entry = &self.entries[e as usize];
            if !entry.key.starts_with(&query) {
                break;
            }
            let tier = match entry.kind {
                EntryKind::Name if entry.key == query => 1,
                EntryKind::Name => 2,
                EntryKind::Synonym(_) => 4,
            };
            offer(e, tier);
        }

        let lo = self
            .suffixes
            .partition_point(|&s| self.suffix(s) < query.as_str());
        for &s in &self.suffixes[lo..] {
            if !self.suffix(s).starts_with(&query) {
                break;
            }
            let tier = match self.entries[s.0 as usize].kind {
                EntryKind::Name => 3,
                EntryKind::Synonym(_) => 5,
            };
            offer(s.0, tier);
        }

        let mut ranked: Vec<(u8, TermIdx, u32)> = best
            .into_iter()
            .map(|(term, (tier, _, entry))| (tier, term, entry))
            .collect();
        ranked.sort_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| self.display[a.1.as_usize()].cmp(&self.display[b.1.as_usize()]))
                .then_with(|| self.ids[a.1.as_usize()].cmp(&self.ids[b.1.as_usize()]))
        });
        ranked.truncate(limit);

        Ok(ranked
            .into_iter()
            .map(|(tier, term, entry)| {
                let entry = &self.entries[entry as usize];
                AutocompleteMatch {
                    term: self.ids[term.as_usize()].clone(),
                    display_name: self.display[term.as_usize()].clone(),
                    matched_text: entry.text.clone(),
                    matched_kind: entry.kind.match_kind(),
                    tier,
                }
            })
            .collect())
    }
}

/// Builds the lookup tables. Obsolete terms are skipped unless
/// `include_obsolete` is set; every included term contributes one name
/// entry plus one entry per synonym.
pub fn build_lexical_index(index: &OntologyIndex, include_obsolete: bool) -> LexicalIndex {
    let mut lex = LexicalIndex::default();
    for (i, term) in index.terms().enumerate() {
        lex.display.push(term.name.clone());
        lex.ids.push(term.id.clone());
        if term.obsolete && !include_obsolete {
            continue;
        }
        let next_key = lex.ontology_keys.len() as u32;
        let ontology = *lex
            .ontology_keys
            .entry(term.ontology.clone())
            .or_insert(next_key);
        let texts = std::iter::once((term.name.as_str(), EntryKind::Name)).chain(
            term.synonyms
                .iter()
                .map(|s| (s.text.as_str(), EntryKind::Synonym(s.scope))),
        );
        for (ordinal, (text, kind)) in texts.enumerate() {
            lex.entries.push(LexicalEntry {
                key: fold(text),
                text: text.to_string(),
                kind,
                term: term.id.clone(),
            });
            lex.meta.push(EntryMeta {
                term: TermIdx(i as u32),
                ontology,
                ordinal: ordinal as u32,
            });
        }
    }

    lex.full_keys = (0..lex.entries.len() as u32).collect();
    lex.full_keys.sort_by(|&a, &b| {
        lex.entries[a as usize]
            .key
            .cmp(&lex.entries[b as usize].key)
    });

    let mut suffixes = Vec::new();
    for (e, entry) in lex.entries.iter().enumerate() {
        suffixes.extend(inner_token_starts(&entry.key).map(|off| (e as u32, off as u32)));
    }
    suffixes.sort_by(|&a, &b| lex.suffix(a).cmp(lex.suffix(b)));
    lex.suffixes = suffixes;
    lex
}
