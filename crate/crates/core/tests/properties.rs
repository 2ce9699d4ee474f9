mod common;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use common::{GraphKit, public_entity};
use proofchain_core::canonical;
use proofchain_core::crypto::{check_geq, group_params, pedersen_commit, prove_geq, Profile};
use proofchain_core::graph::{verify_chain, verify_link, DataEntity, Domain, Granularity, ProofGraph, ProofLink, Evidence};
use proofchain_core::ledger::{AnchorValue, LedgerState};
use proofchain_core::merkle::{build_tree, verify_membership};
use proofchain_core::zk_link::{
    check_bundle, commit_preserved, register_builtin_validators, resolve_builtin, zkcu_reveal_field,
    PreservedRecord,
};
use proofchain_core::Digest;

fn json_tree() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![any::<bool>().prop_map(Value::Bool), ".{0,12}".prop_map(Value::String)];
    leaf.prop_recursive(4, 40, 6, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..6).prop_map(Value::Array),
            prop::collection::btree_map(".{0,8}", inner, 0..6)
                .prop_map(|m| Value::Object(m.into_iter().collect())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merkle_paths_verify_only_against_their_root(
        leaves in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..24), 1..40),
        other in prop::collection::vec(any::<u8>(), 0..24),
    ) {
        let tree = build_tree(&leaves).unwrap();
        let alt = build_tree(std::slice::from_ref(&other)).unwrap();
        for (i, leaf) in leaves.iter().enumerate() {
            let path = tree.prove_membership(i).unwrap();
            prop_assert_eq!(path.leaf_index, i as u64);
            prop_assert!(verify_membership(&tree.root(), leaf, &path));
            if alt.root() != tree.root() {
                prop_assert!(!verify_membership(&alt.root(), leaf, &path));
            }
            if !leaves.contains(&other) {
                prop_assert!(!verify_membership(&tree.root(), &other, &path));
            }
        }
        prop_assert!(tree.prove_membership(leaves.len()).is_err());
    }

    #[test]
    fn canonical_bytes_round_trip(v in json_tree()) {
        let bytes = canonical::to_vec(&v).unwrap();
        prop_assert!(canonical::is_canonical(&bytes));
        let back: Value = canonical::from_slice(&bytes).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(canonical::to_vec(&back).unwrap(), bytes);
    }

    #[test]
    fn ledger_grows_by_one_block_and_survives_export(
        ops in prop::collection::vec((0u8..3, 0u8..4, any::<[u8; 32]>(), 0u64..3), 1..25),
    ) {
        let mut ledger = LedgerState::new();
        let mut t = 0;
        let mut latest: BTreeMap<(String, String), Digest> = BTreeMap::new();
        let mut seen = std::collections::BTreeSet::new();
        for (author, label, digest, dt) in ops {
            t += dt;
            let (author, label) = (format!("a{author}"), format!("l{label}"));
            let before = ledger.height();
            match ledger.register_commitment(&author, AnchorValue::Digest(Digest(digest)), &label, t) {
                Ok((next, _)) => {
                    prop_assert_eq!(next.height(), before + 1);
                    prop_assert_eq!(ledger.height(), before);
                    ledger = next;
                    seen.insert((author.clone(), label.clone(), t));
                    latest.insert((author, label), Digest(digest));
                }
                // one commitment per (author, label) per tick
                Err(e) => prop_assert!(seen.contains(&(author.clone(), label.clone(), t)), "{}", e),
            }
            prop_assert!(ledger.audit_chain());
        }
        for ((author, label), digest) in &latest {
            let rec = ledger.latest_commitment(author, label).unwrap();
            prop_assert_eq!(rec.value.digest(), Some(*digest));
        }
        let text = ledger.to_jsonl().unwrap();
        let back = LedgerState::from_jsonl(&text, resolve_builtin).unwrap();
        prop_assert!(back.audit_chain());
        prop_assert_eq!(back.to_jsonl().unwrap(), text);
    }
}

fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Anchoring a previously unanchored entity never weakens any chain.
    #[test]
    fn anchoring_is_monotone(seed in any::<u64>()) {
        let kit = GraphKit::new();
        let (graph, ledger) = kit.random_graph(&mut seeded(seed), 7, "mono");
        let before: BTreeMap<String, _> = graph
            .entities()
            .map(|e| (e.id.clone(), verify_chain(&graph, &e.id, &ledger).unwrap()))
            .collect();
        let Some(pick) = graph.entities().find(|e| e.anchor.is_none()).cloned() else { return Ok(()) };
        let (ledger, anchored) = kit.anchor(&ledger, pick.clone(), &format!("mono/extra/{}", pick.id));
        let entities = graph.entities().map(|e| if e.id == pick.id { anchored.clone() } else { e.clone() }).collect();
        let graph = ProofGraph::from_parts_unchecked(entities, graph.links().to_vec()).unwrap();
        for (id, old) in before {
            let new = verify_chain(&graph, &id, &ledger).unwrap();
            prop_assert!(new.chain_strength >= old.chain_strength, "{}: {:?} -> {:?}", id, old.chain_strength, new.chain_strength);
            prop_assert!(new.verified || !old.verified, "{} lost verification", id);
        }
    }

    // Editing any disclosed payload upstream of a verified target unverifies it.
    #[test]
    fn upstream_tampering_propagates(seed in any::<u64>()) {
        let kit = GraphKit::new();
        let (graph, ledger) = kit.random_graph(&mut seeded(seed), 7, "prop");
        for target in graph.entities() {
            let report = verify_chain(&graph, &target.id, &ledger).unwrap();
            if !report.verified {
                continue;
            }
            let mut closure = vec![target.id.clone()];
            let mut i = 0;
            while i < closure.len() {
                let here = closure[i].clone();
                for l in graph.in_links(&here) {
                    if !closure.contains(&l.source) {
                        closure.push(l.source.clone());
                    }
                }
                i += 1;
            }
            for victim in &closure {
                let e = graph.entity(victim).unwrap();
                let Some(payload) = &e.payload else { continue };
                let mut edited = e.clone();
                edited.payload = Some(json!({"edited": payload.clone()}));
                let entities = graph.entities().map(|x| if x.id == *victim { edited.clone() } else { x.clone() }).collect();
                let g = ProofGraph::from_parts_unchecked(entities, graph.links().to_vec()).unwrap();
                let after = verify_chain(&g, &target.id, &ledger).unwrap();
                prop_assert!(!after.verified, "editing {} left {} verified", victim, target.id);
            }
        }
    }
}

#[test]
fn bundles_bind_to_their_own_anchor() {
    let params = group_params(Profile::Test);
    let mut ledger = register_builtin_validators(&LedgerState::new(), "operator", 0).unwrap();
    let mut anchors = Vec::new();
    for i in 0..50u64 {
        let owner = format!("owner-{}", i % 7);
        let rec = PreservedRecord::seeded("r", vec![("city", "oslo".into()), ("n", i.into())], &i.to_be_bytes());
        let (l, pc) = commit_preserved(vec![rec], &owner, &format!("corpus-{i}"), &ledger, i + 1, &params).unwrap();
        ledger = l;
        anchors.push(pc);
    }
    for (i, pc) in anchors.iter().enumerate() {
        let bundle = zkcu_reveal_field(pc, "r", "city").unwrap();
        assert!(check_bundle(&ledger, &bundle).verdict);
        let claim = DataEntity::disclosed("claim", Domain::Public, Granularity::Digest, bundle.statement["outputs"].clone(), 99).unwrap();
        for (j, other) in anchors.iter().enumerate() {
            let source = DataEntity::digest_only("src", Domain::Private, Granularity::Transactional, other.root(), 1)
                .with_anchor(other.anchor());
            let graph = ProofGraph::from_parts(
                vec![source, claim.clone()],
                vec![ProofLink::new("zk", "src", "claim", Evidence::ZeroKnowledge { bundle: bundle.clone() })],
            )
            .unwrap();
            let v = verify_link(&graph, &graph.links()[0], &ledger);
            if i == j {
                assert!(v.verdict, "{i}: {}", v.reason);
            } else {
                assert_eq!((v.verdict, v.reason.as_str()), (false, "source-mismatch"), "{i} vs {j}");
            }
        }
    }
}

#[test]
fn predicate_is_exact_at_eight_bits() {
    let params = group_params(Profile::Test);
    let r = BigUint::from(0x1234_5678u64);
    for t in [0u32, 1, 18, 255] {
        let tb = BigUint::from(t);
        for v in 0u32..256 {
            let vb = BigUint::from(v);
            let c = pedersen_commit(&vb, &r, &params).unwrap();
            match prove_geq(&c, &vb, &r, &tb, 8, &v.to_be_bytes(), &params) {
                Ok(proof) => {
                    assert!(v >= t, "proof produced for {v} < {t}");
                    assert!(check_geq(&c, &tb, 8, &proof, &params).is_ok());
                    if t < 255 {
                        assert!(check_geq(&c, &(&tb + 1u8), 8, &proof, &params).is_err());
                    }
                }
                Err(_) => assert!(v < t, "refused {v} >= {t}"),
            }
        }
    }
}

#[test]
fn toy_commitments_are_perfectly_hiding() {
    // every subgroup element is hit by exactly q openings
    let toy = group_params(Profile::Toy);
    let mut hits: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
    for v in 0..11u64 {
        for r in 0..11u64 {
            let c = pedersen_commit(&BigUint::from(v), &BigUint::from(r), &toy).unwrap();
            let value = u64::try_from(&c.value).unwrap();
            assert_eq!(value, common::modpow(2, v, 23) * common::modpow(3, r, 23) % 23);
            hits.entry(value).or_default().push((v, r));
        }
    }
    assert_eq!(hits.len(), 11);
    for openings in hits.values() {
        assert_eq!(openings.len(), 11);
        let values: std::collections::BTreeSet<u64> = openings.iter().map(|(v, _)| *v).collect();
        assert_eq!(values.len(), 11, "each value appears once per commitment");
    }
}

#[test]
fn public_payload_digest_is_canonical() {
    let a = public_entity("a", json!({"x": "1", "y": "2"}));
    let b = public_entity("a", serde_json::from_str(r#"{"y":"2","x":"1"}"#).unwrap());
    assert_eq!(a.payload_digest, b.payload_digest);
}
