mod common;

use common::{fixture_engine, oracle_autocomplete, random_ontology, random_phrase, rng};
use ontoq::{build_index, build_lexical_index, AutocompleteError, LexicalIndex, ParsedOntology};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn corpus(seed: u64, n: usize) -> (Vec<ParsedOntology>, LexicalIndex) {
    let mut r = rng(seed);
    let docs = vec![
        random_ontology(&mut r, "LA", "la", n, 2),
        random_ontology(&mut r, "LB", "lb", n / 2 + 1, 2),
    ];
    let index = build_index(docs.clone()).unwrap();
    let lexicon = build_lexical_index(&index, false);
    (docs, lexicon)
}

/// Queries drawn from real names and synonyms (whole, prefixes, inner
/// tokens, odd casing) plus unrelated noise.
fn random_query(r: &mut impl Rng, docs: &[ParsedOntology]) -> String {
    let term = docs.choose(r).unwrap().terms.choose(r).unwrap();
    let text = if term.synonyms.is_empty() || r.gen_bool(0.5) {
        term.name.clone()
    } else {
        term.synonyms.choose(r).unwrap().text.clone()
    };
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let base = match r.gen_range(0..5) {
        0 => text.clone(),
        1 => tokens.choose(r).unwrap().to_string(),
        2 => random_phrase(r),
        _ => {
            let start = if r.gen_bool(0.5) {
                0
            } else {
                r.gen_range(0..tokens.len())
            };
            tokens[start..].join(" ")
        }
    };
    let chars: Vec<char> = base.chars().collect();
    let cut = r.gen_range(1..=chars.len());
    let mut q: String = chars[..cut].iter().collect();
    if r.gen_bool(0.3) {
        q = q.to_uppercase();
    }
    if r.gen_bool(0.1) {
        q = format!("  {q} ");
    }
    if q.trim().is_empty() {
        q = "a".into();
    }
    q
}

fn as_tuples(
    lexicon: &LexicalIndex,
    q: &str,
    limit: usize,
    ont: Option<&str>,
) -> Vec<(String, String, u8, String)> {
    lexicon
        .autocomplete(q, limit, ont)
        .unwrap()
        .into_iter()
        .map(|m| (m.term, m.display_name, m.tier, m.matched_text))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn autocomplete_matches_linear_scan(seed in any::<u64>()) {
        let (docs, lexicon) = corpus(seed, 150);
        let mut r = rng(seed ^ 1);
        for _ in 0..40 {
            let q = random_query(&mut r, &docs);
            let limit = *[1usize, 5, 10, 1000].choose(&mut r).unwrap();
            let ont = *[None, Some("la"), Some("lb")].choose(&mut r).unwrap();
            prop_assert_eq!(
                as_tuples(&lexicon, &q, limit, ont),
                oracle_autocomplete(&docs, &q, limit, ont),
                "query {:?}", q
            );
        }
    }

    #[test]
    fn prefixes_keep_tier_three_hits(seed in any::<u64>()) {
        let (docs, lexicon) = corpus(seed, 100);
        let mut r = rng(seed ^ 2);
        let terms = |q: &str, max_tier: u8| -> std::collections::BTreeSet<String> {
            lexicon
                .autocomplete(q, usize::MAX, None)
                .unwrap()
                .into_iter()
                .filter(|m| m.tier <= max_tier)
                .map(|m| m.term)
                .collect()
        };
        for _ in 0..20 {
            let q = random_query(&mut r, &docs).trim().to_string();
            let strong = terms(&q, 3);
            let chars: Vec<char> = q.chars().collect();
            for cut in 1..chars.len() {
                let prefix: String = chars[..cut].iter().collect();
                if prefix.trim().is_empty() {
                    continue;
                }
                prop_assert!(strong.is_subset(&terms(&prefix, 5)), "{:?} vs {:?}", q, prefix);
            }
        }
    }

    #[test]
    fn results_are_deterministic(seed in any::<u64>()) {
        let (docs, lexicon) = corpus(seed, 80);
        let again = build_lexical_index(&build_index(docs.clone()).unwrap(), false);
        let mut r = rng(seed ^ 3);
        for _ in 0..20 {
            let q = random_query(&mut r, &docs);
            prop_assert_eq!(as_tuples(&lexicon, &q, 10, None), as_tuples(&again, &q, 10, None));
        }
    }

    #[test]
    fn unique_synonym_ranks_its_term_first(seed in any::<u64>()) {
        let (docs, lexicon) = corpus(seed, 60);
        let terms: Vec<_> = docs.iter().flat_map(|d| &d.terms).filter(|t| !t.obsolete).collect();
        for term in &terms {
            for syn in &term.synonyms {
                // Any other term whose name matches (tiers 1-3) or whose
                // synonym starts with `s` may legitimately outrank it.
                let q = syn.text.to_lowercase();
                let rival = terms.iter().any(|o| {
                    o.id != term.id
                        && std::iter::once(&o.name)
                            .chain(o.synonyms.iter().map(|s| &s.text))
                            .any(|text| {
                                let key = text.to_lowercase();
                                key.split_whitespace().collect::<Vec<_>>().join(" ").contains(&q)
                                    || key.starts_with(&q)
                            })
                });
                if rival {
                    continue;
                }
                let top = lexicon.autocomplete(&syn.text, 1, None).unwrap();
                prop_assert_eq!(&top[0].term, &term.id);
            }
        }
    }

    #[test]
    fn every_synonym_is_reachable(seed in any::<u64>()) {
        let (docs, lexicon) = corpus(seed, 60);
        for term in docs.iter().flat_map(|d| &d.terms).filter(|t| !t.obsolete) {
            for syn in &term.synonyms {
                let found = lexicon.autocomplete(&syn.text, usize::MAX, None).unwrap();
                prop_assert!(found.iter().any(|m| m.term == term.id), "{} via {:?}", term.id, syn.text);
            }
        }
    }
}

#[test]
fn large_corpus_matches_oracle() {
    let (docs, lexicon) = corpus(99, 700);
    let entries: usize = docs
        .iter()
        .flat_map(|d| &d.terms)
        .map(|t| 1 + t.synonyms.len())
        .sum();
    assert!(entries >= 1000, "{entries}");
    let mut r = rng(100);
    for _ in 0..500 {
        let q = random_query(&mut r, &docs);
        assert_eq!(
            as_tuples(&lexicon, &q, 10, None),
            oracle_autocomplete(&docs, &q, 10, None),
            "{q:?}"
        );
    }
}

#[test]
fn fixture_ret_ranking() {
    let engine = fixture_engine();
    let hits = engine.lexicon.autocomplete("ret", 10, None).unwrap();
    let ids: Vec<&str> = hits.iter().map(|m| m.term.as_str()).collect();
    assert_eq!(
        ids,
        ["ZFA:0000002", "GO:0000003", "ZFA:0000003", "GO:0000004"]
    );
    let tiers: Vec<u8> = hits.iter().map(|m| m.tier).collect();
    assert_eq!(tiers, [2, 2, 2, 3]);
    let rpe = engine.lexicon.autocomplete("rpe", 10, None).unwrap();
    assert_eq!(rpe[0].term, "ZFA:0000003");
    assert_eq!(rpe[0].matched_text, "RPE");
}

#[test]
fn obsolete_terms_are_hidden() {
    let text = "ontology: o\n[Term]\nid: O:1\nname: old thing\nis_obsolete: true\n[Term]\nid: O:2\nname: old friend\n";
    let doc = ontoq::parse_obo_document("o.obo", text).unwrap();
    let index = build_index(vec![doc]).unwrap();
    let lexicon = build_lexical_index(&index, false);
    let hits = lexicon.autocomplete("old", 10, None).unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].term, "O:2");
    let all = build_lexical_index(&index, true)
        .autocomplete("old", 10, None)
        .unwrap();
    assert_eq!(all.len(), 2);
}

#[test]
fn invalid_arguments() {
    let engine = fixture_engine();
    assert_eq!(
        engine.lexicon.autocomplete("  ", 10, None).unwrap_err(),
        AutocompleteError::EmptyQuery
    );
    assert_eq!(
        engine.lexicon.autocomplete("eye", 0, None).unwrap_err(),
        AutocompleteError::ZeroLimit
    );
    assert!(engine
        .lexicon
        .autocomplete("eye", 10, Some("nope"))
        .unwrap()
        .is_empty());
}
