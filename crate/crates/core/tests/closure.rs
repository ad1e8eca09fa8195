mod common;

use std::collections::BTreeSet;

use common::{random_ontology, rng, RawGraph};
use ontoq::obo::RelationEdge;
use ontoq::{build_index, BuildError, OntologyIndex, ParsedOntology, Relation, RelationSet};
use proptest::prelude::*;
use rand::Rng;

fn owned(set: BTreeSet<&str>) -> BTreeSet<String> {
    set.into_iter().map(str::to_string).collect()
}

fn random_doc(seed: u64, max_nodes: usize) -> ParsedOntology {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_nodes);
    random_ontology(&mut r, "TT", "tt", n, 3)
}

fn check_against_oracle(doc: &ParsedOntology, index: &OntologyIndex) {
    let raw = RawGraph::new(std::slice::from_ref(doc));
    for relations in RelationSet::non_empty_subsets() {
        for term in &doc.terms {
            let id = term.id.as_str();
            assert_eq!(
                owned(index.descendants(id, relations).unwrap()),
                raw.descendants(id, relations),
                "descendants of {id} over {relations:?}"
            );
            assert_eq!(
                owned(index.ancestors(id, relations).unwrap()),
                raw.ancestors(id, relations),
                "ancestors of {id} over {relations:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closure_matches_dfs(seed in any::<u64>()) {
        let doc = random_doc(seed, 80);
        let index = build_index(vec![doc.clone()]).unwrap();
        check_against_oracle(&doc, &index);
    }

    #[test]
    fn duality_and_irreflexivity(seed in any::<u64>(), bits in 1u8..8) {
        let doc = random_doc(seed, 80);
        let index = build_index(vec![doc.clone()]).unwrap();
        let relations = RelationSet::from_bits(bits).unwrap();
        for a in &doc.terms {
            let desc = index.descendants(&a.id, relations).unwrap();
            prop_assert!(!desc.contains(a.id.as_str()));
            for b in &doc.terms {
                let up = index.ancestors(&b.id, relations).unwrap();
                prop_assert_eq!(desc.contains(b.id.as_str()), up.contains(a.id.as_str()));
            }
        }
    }

    #[test]
    fn adding_an_edge_only_grows_closures(seed in any::<u64>()) {
        let doc = random_doc(seed, 60);
        prop_assume!(doc.terms.len() >= 2);
        let before = build_index(vec![doc.clone()]).unwrap();
        // Topological order is the numeric id order, so old → new stays acyclic.
        let mut r = rng(seed ^ 0x5eed);
        let i = r.gen_range(0..doc.terms.len() - 1);
        let j = r.gen_range(i + 1..doc.terms.len());
        let mut grown = doc.clone();
        grown.edges.push(RelationEdge {
            child_id: format!("TT:{j:07}"),
            parent_id: format!("TT:{i:07}"),
            relation: Relation::IsA,
            line: 0,
        });
        let after = build_index(vec![grown]).unwrap();
        for relations in RelationSet::non_empty_subsets() {
            for t in &doc.terms {
                let old = before.descendants(&t.id, relations).unwrap();
                let new = after.descendants(&t.id, relations).unwrap();
                prop_assert!(old.is_subset(&new));
                let old = before.ancestors(&t.id, relations).unwrap();
                let new = after.ancestors(&t.id, relations).unwrap();
                prop_assert!(old.is_subset(&new));
            }
        }
    }

    #[test]
    fn relation_subsets_are_monotone(seed in any::<u64>()) {
        let doc = random_doc(seed, 60);
        let index = build_index(vec![doc.clone()]).unwrap();
        for small in RelationSet::non_empty_subsets() {
            for big in RelationSet::non_empty_subsets().filter(|b| b.contains(small)) {
                for t in &doc.terms {
                    let a = index.descendants(&t.id, small).unwrap();
                    let b = index.descendants(&t.id, big).unwrap();
                    prop_assert!(a.is_subset(&b));
                }
            }
        }
    }

    #[test]
    fn paths_follow_real_edges(seed in any::<u64>(), bits in 1u8..8) {
        let doc = random_doc(seed, 60);
        let index = build_index(vec![doc.clone()]).unwrap();
        let raw = RawGraph::new(std::slice::from_ref(&doc));
        let relations = RelationSet::from_bits(bits).unwrap();
        for t in doc.terms.iter().take(10) {
            for d in index.descendants(&t.id, relations).unwrap() {
                let from = index.lookup(&t.id).unwrap();
                let to = index.lookup(d).unwrap();
                let path: Vec<String> = index
                    .downward_path(from, to, relations)
                    .unwrap()
                    .into_iter()
                    .map(|i| index.term(i).id.clone())
                    .collect();
                prop_assert_eq!(path.first().map(String::as_str), Some(t.id.as_str()));
                prop_assert_eq!(path.last().map(String::as_str), Some(d));
                for w in path.windows(2) {
                    prop_assert!(raw.has_edge(&w[1], &w[0], relations));
                }
            }
        }
    }
}

fn cyclic_doc(len: usize, relation: Relation) -> ParsedOntology {
    let mut text = String::from("format-version: 1.2\nontology: cyc\n");
    for i in 0..len {
        let parent = (i + 1) % len;
        let line = match &relation {
            Relation::IsA => format!("is_a: CY:{parent:07}"),
            r => format!("relationship: {} CY:{parent:07}", r.label()),
        };
        text.push_str(&format!("[Term]\nid: CY:{i:07}\nname: node {i}\n{line}\n"));
    }
    let parsed = ontoq::parse_obo_document("cyc.obo", &text).unwrap();
    ontoq::resolve_references(parsed, ontoq::ResolveMode::Strict).unwrap()
}

#[test]
fn cycles_are_rejected_with_a_witness() {
    for relation in [Relation::IsA, Relation::PartOf, Relation::DevelopsFrom] {
        for len in [2, 3, 5] {
            let doc = cyclic_doc(len, relation.clone());
            let raw = RawGraph::new(std::slice::from_ref(&doc));
            match build_index(vec![doc]) {
                Err(BuildError::Cycle(e)) => {
                    let cycle = &e.cycle;
                    assert_eq!(cycle.first(), cycle.last());
                    assert_eq!(cycle.len(), len + 1);
                    for w in cycle.windows(2) {
                        assert!(raw.has_edge(&w[0], &w[1], RelationSet::ALL));
                    }
                }
                other => panic!("expected cycle error, got {other:?}"),
            }
        }
    }
}

#[test]
fn other_relation_cycles_are_accepted() {
    let doc = cyclic_doc(4, Relation::Other("adjacent_to".into()));
    let index = build_index(vec![doc]).unwrap();
    for i in 0..4 {
        let id = format!("CY:{i:07}");
        assert!(index.descendants(&id, RelationSet::ALL).unwrap().is_empty());
    }
}

#[test]
fn empty_relation_set_is_an_error() {
    let index = build_index(vec![random_doc(1, 10)]).unwrap();
    assert!(index.descendants("TT:0000000", RelationSet::EMPTY).is_err());
}
