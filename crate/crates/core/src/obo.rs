//! Line-oriented parser for the OBO 1.2 subset used by the engine.
//!
//! Supported header tags are `format-version` and `ontology`. Inside `[Term]`
//! stanzas the parser understands `id`, `name`, `def`, `synonym`, `is_a`,
//! `relationship` and `is_obsolete`; every other tag is ignored, and every
//! other stanza type (`[Typedef]`, `[Instance]`, ...) is skipped whole.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ontology::Relation;

/// A parse failure pinned to one physical line of one source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct ParseError {
    pub file: String,
    /// 1-based line number of the offending line.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(file: &str, line: usize, message: impl Into<String>) -> Self {
        Self {
            file: file.to_string(),
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SynonymScope {
    Exact,
    Broad,
    Narrow,
    Related,
}

impl SynonymScope {
    pub fn as_str(self) -> &'static str {
        match self {
            SynonymScope::Exact => "EXACT",
            SynonymScope::Broad => "BROAD",
            SynonymScope::Narrow => "NARROW",
            SynonymScope::Related => "RELATED",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "EXACT" => Some(SynonymScope::Exact),
            "BROAD" => Some(SynonymScope::Broad),
            "NARROW" => Some(SynonymScope::Narrow),
            "RELATED" => Some(SynonymScope::Related),
            _ => None,
        }
    }
}

impl fmt::Display for SynonymScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Synonym {
    pub text: String,
    pub scope: SynonymScope,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTerm {
    pub id: String,
    pub name: String,
    pub definition: Option<String>,
    pub synonyms: Vec<Synonym>,
    pub obsolete: bool,
    /// Stub materialized for a dangling reference in lenient mode.
    pub synthetic: bool,
    /// Line of the `[Term]` header, 0 for synthetic stubs.
    pub line: usize,
}

/// Directed child → parent edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationEdge {
    pub child_id: String,
    pub parent_id: String,
    pub relation: Relation,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedOntology {
    pub source: String,
    pub ontology_key: String,
    pub format_version: String,
    /// Terms in stanza order.
    pub terms: Vec<ParsedTerm>,
    /// Edges in line order.
    pub edges: Vec<RelationEdge>,
    /// Non-fatal diagnostics, e.g. stubs created by lenient resolution.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolveMode {
    Strict,
    Lenient,
}

/// True when `id` has the `PREFIX:LOCALID` shape.
pub fn is_valid_term_id(id: &str) -> bool {
    let Some((prefix, local)) = id.split_once(':') else {
        return false;
    };
    !prefix.is_empty()
        && !local.is_empty()
        && prefix.bytes().all(|b| b.is_ascii_alphabetic() || b == b'_')
        && local
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Strips an unquoted `!` comment and trailing whitespace.
fn strip_comment(line: &str) -> &str {
    let mut in_quotes = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_quotes => escaped = true,
            '"' => in_quotes = !in_quotes,
            '!' if !in_quotes => return line[..i].trim_end(),
            _ => {}
        }
    }
    line.trim_end()
}

/// Reads a leading double-quoted string, returning the unescaped text and the rest.
fn take_quoted(value: &str) -> Option<(String, &str)> {
    let body = value.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                let (_, next) = chars.next()?;
                out.push(match next {
                    'n' => '\n',
                    't' => '\t',
                    other => other,
                });
            }
            '"' => return Some((out, &body[i + 1..])),
            other => out.push(other),
        }
    }
    None
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn parse_synonym(value: &str) -> Option<Synonym> {
    let (text, rest) = take_quoted(value)?;
    let rest = rest.trim_start();
    let (scope, rest) = rest.split_once(char::is_whitespace)?;
    let scope = SynonymScope::parse(scope)?;
    let rest = rest.trim();
    if !(rest.starts_with('[') && rest.ends_with(']')) {
        return None;
    }
    Some(Synonym { text, scope })
}

fn source_stem(source_name: &str) -> String {
    Path::new(source_name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Default)]
struct StanzaBuilder {
    header_line: usize,
    id: Option<String>,
    name: Option<String>,
    definition: Option<String>,
    synonyms: Vec<Synonym>,
    obsolete: bool,
    edges: Vec<(String, Relation, usize)>,
}

struct DocumentParser<'a> {
    file: &'a str,
    terms: Vec<ParsedTerm>,
    edges: Vec<RelationEdge>,
    seen: std::collections::HashMap<String, usize>,
}

impl DocumentParser<'_> {
    fn err(&self, line: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(self.file, line, message)
    }

    fn finish_stanza(&mut self, stanza: StanzaBuilder) -> Result<(), ParseError> {
        let Some(id) = stanza.id else {
            return Err(self.err(stanza.header_line, "[Term] stanza is missing an id: tag"));
        };
        let name = stanza.name.unwrap_or_default();
        if name.is_empty() && !stanza.obsolete {
            return Err(self.err(stanza.header_line, format!("term {id} has no name")));
        }
        for (parent, relation, line) in stanza.edges {
            if parent == id {
                return Err(self.err(line, format!("self-loop edge on {id}")));
            }
            self.edges.push(RelationEdge {
                child_id: id.clone(),
                parent_id: parent,
                relation,
                line,
            });
        }
        self.terms.push(ParsedTerm {
            id,
            name,
            definition: stanza.definition,
            synonyms: stanza.synonyms,
            obsolete: stanza.obsolete,
            synthetic: false,
            line: stanza.header_line,
        });
        Ok(())
    }

    fn term_tag(
        &mut self,
        stanza: &mut StanzaBuilder,
        line_no: usize,
        tag: &str,
        value: &str,
    ) -> Result<(), ParseError> {
        match tag {
            "id" => {
                if stanza.id.is_some() {
                    return Err(self.err(line_no, "stanza has more than one id: tag"));
                }
                if !is_valid_term_id(value) {
                    return Err(self.err(line_no, format!("malformed term id {value:?}")));
                }
                if let Some(first) = self.seen.get(value) {
                    return Err(self.err(
                        line_no,
                        format!("duplicate id {value} (first declared on line {first})"),
                    ));
                }
                self.seen.insert(value.to_string(), line_no);
                stanza.id = Some(value.to_string());
            }
            "name" => {
                if stanza.name.is_some() {
                    return Err(self.err(line_no, "stanza has more than one name: tag"));
                }
                stanza.name = Some(value.to_string());
            }
            "def" => {
                let text = match take_quoted(value) {
                    Some((text, _)) => text,
                    None => value.to_string(),
                };
                stanza.definition = Some(text);
            }
            "synonym" => {
                let synonym = parse_synonym(value).ok_or_else(|| {
                    self.err(
                        line_no,
                        format!("malformed synonym (expected \"TEXT\" SCOPE [...]): {value}"),
                    )
                })?;
                stanza.synonyms.push(synonym);
            }
            "is_a" => {
                let target = value.split_whitespace().next().unwrap_or("");
                if !is_valid_term_id(target) {
                    return Err(self.err(line_no, format!("malformed is_a target {target:?}")));
                }
                stanza
                    .edges
                    .push((target.to_string(), Relation::IsA, line_no));
            }
            "relationship" => {
                let mut tokens = value.split_whitespace();
                let (Some(rel), Some(target)) = (tokens.next(), tokens.next()) else {
                    return Err(self.err(line_no, "relationship: needs a relation and a target id"));
                };
                if !is_valid_term_id(target) {
                    return Err(
                        self.err(line_no, format!("malformed relationship target {target:?}"))
                    );
                }
                stanza
                    .edges
                    .push((target.to_string(), Relation::from_label(rel), line_no));
            }
            "is_obsolete" => stanza.obsolete = value == "true",
            _ => {}
        }
        Ok(())
    }
}

enum Section {
    Header,
    Term(StanzaBuilder),
    Skipped,
}

/// Parses one OBO document. `source_name` is used for diagnostics and as the
/// ontology key fallback (its file stem) when the header has no `ontology:` tag.
pub fn parse_obo_document(source_name: &str, text: &str) -> Result<ParsedOntology, ParseError> {
    let mut parser = DocumentParser {
        file: source_name,
        terms: Vec::new(),
        edges: Vec::new(),
        seen: Default::default(),
    };
    let mut ontology_key = None;
    let mut format_version = String::new();
    let mut section = Section::Header;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw.strip_suffix('\r').unwrap_or(raw));
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') && trimmed.ends_with(']') {
            if let Section::Term(stanza) = std::mem::replace(&mut section, Section::Skipped) {
                parser.finish_stanza(stanza)?;
            }
            if trimmed == "[Term]" {
                section = Section::Term(StanzaBuilder {
                    header_line: line_no,
                    ..Default::default()
                });
            }
            continue;
        }
        let Some((tag, value)) = trimmed.split_once(':') else {
            if matches!(section, Section::Skipped) {
                continue;
            }
            return Err(parser.err(line_no, format!("expected `tag: value`, found {trimmed:?}")));
        };
        let (tag, value) = (tag.trim(), value.trim());
        match &mut section {
            Section::Header => match tag {
                "format-version" => format_version = value.to_string(),
                "ontology" => ontology_key = Some(value.to_string()),
                _ => {}
            },
            Section::Term(stanza) => parser.term_tag(stanza, line_no, tag, value)?,
            Section::Skipped => {}
        }
    }
    if let Section::Term(stanza) = section {
        parser.finish_stanza(stanza)?;
    }

    let ontology_key = ontology_key
        .filter(|k| !k.is_empty())
        .unwrap_or_else(|| source_stem(source_name));
    if ontology_key.is_empty() {
        return Err(ParseError::new(
            source_name,
            1,
            "no ontology: header and no usable file name for the ontology key",
        ));
    }

    Ok(ParsedOntology {
        source: source_name.to_string(),
        ontology_key,
        format_version,
        terms: parser.terms,
        edges: parser.edges,
        warnings: Vec::new(),
    })
}

/// Checks that every edge target is declared in the same document.
///
/// Strict mode reports one error per dangling edge. Lenient mode adds a stub
/// term (name = id) for each missing target and records a warning instead.
pub fn resolve_references(
    mut parsed: ParsedOntology,
    mode: ResolveMode,
) -> Result<ParsedOntology, Vec<ParseError>> {
    let declared: std::collections::HashSet<String> =
        parsed.terms.iter().map(|t| t.id.clone()).collect();
    let mut errors = Vec::new();
    let mut stubbed = std::collections::HashSet::new();
    let mut stubs = Vec::new();
    for edge in &parsed.edges {
        if declared.contains(&edge.parent_id) {
            continue;
        }
        match mode {
            ResolveMode::Strict => errors.push(ParseError::new(
                &parsed.source,
                edge.line,
                format!(
                    "{} references undeclared term {}",
                    edge.child_id, edge.parent_id
                ),
            )),
            ResolveMode::Lenient => {
                if stubbed.insert(edge.parent_id.clone()) {
                    parsed.warnings.push(format!(
                        "{}:{}: created stub term for undeclared {}",
                        parsed.source, edge.line, edge.parent_id
                    ));
                    stubs.push(ParsedTerm {
                        id: edge.parent_id.clone(),
                        name: edge.parent_id.clone(),
                        definition: None,
                        synonyms: Vec::new(),
                        obsolete: false,
                        synthetic: true,
                        line: 0,
                    });
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    parsed.terms.extend(stubs);
    Ok(parsed)
}

/// Serializes to canonical OBO text: header, then one stanza per term in
/// order, one tag per line, edges listed under their child in edge order.
pub fn to_obo_text(parsed: &ParsedOntology) -> String {
    use std::fmt::Write;

    let mut out = String::new();
    if !parsed.format_version.is_empty() {
        let _ = writeln!(out, "format-version: {}", parsed.format_version);
    }
    let _ = writeln!(out, "ontology: {}", parsed.ontology_key);
    let mut edges_by_child: std::collections::HashMap<&str, Vec<&RelationEdge>> =
        Default::default();
    for edge in &parsed.edges {
        edges_by_child.entry(&edge.child_id).or_default().push(edge);
    }
    for term in &parsed.terms {
        out.push_str("[Term]\n");
        let _ = writeln!(out, "id: {}", term.id);
        if !term.name.is_empty() {
            let _ = writeln!(out, "name: {}", term.name);
        }
        if let Some(def) = &term.definition {
            let _ = writeln!(out, "def: {} []", quote(def));
        }
        for syn in &term.synonyms {
            let _ = writeln!(out, "synonym: {} {} []", quote(&syn.text), syn.scope);
        }
        for edge in edges_by_child.get(term.id.as_str()).into_iter().flatten() {
            match &edge.relation {
                Relation::IsA => {
                    let _ = writeln!(out, "is_a: {}", edge.parent_id);
                }
                rel => {
                    let _ = writeln!(out, "relationship: {} {}", rel.label(), edge.parent_id);
                }
            }
        }
        if term.obsolete {
            out.push_str("is_obsolete: true\n");
        }
    }
    out
}
