//! Oracles and generators shared by the integration tests. Everything here
//! is deliberately independent of the code under test where it matters:
//! modular arithmetic on u64, plain-integer sums, and path enumeration.

#![allow(dead_code)]

use num_bigint::BigUint;
use rand::Rng;
use serde_json::{json, Value};

use proofchain_core::canonical;
use proofchain_core::crypto::{group_params, public_key, sign_message, GroupParams, Profile};
use proofchain_core::graph::{
    model_label, verify_entity, verify_link, DataEntity, Domain, Evidence, Granularity, LinkKind,
    ProofGraph, ProofLink, Recipe, Strength,
};
use proofchain_core::ledger::{AnchorValue, LedgerState};
use proofchain_core::zk_link::{
    commit_preserved, register_builtin_validators, zkcu_predicate_geq, PreservedCommitment,
    PreservedRecord, ZkLinkBundle,
};
use proofchain_core::Digest;

/// Square-and-multiply on machine integers.
pub fn modpow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub fn random_below<R: Rng>(rng: &mut R, bound: &BigUint) -> BigUint {
    let mut bytes = vec![0u8; (bound.bits() as usize).div_ceil(8) + 16];
    rng.fill(bytes.as_mut_slice());
    BigUint::from_bytes_be(&bytes) % bound
}

fn leaf_pointers(v: &Value, prefix: String, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                leaf_pointers(child, format!("{prefix}/{k}"), out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                leaf_pointers(child, format!("{prefix}/{i}"), out);
            }
        }
        Value::String(_) | Value::Bool(_) => out.push(prefix),
        _ => {}
    }
}

fn is_hex(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

/// Changes one leaf of a JSON document while keeping it well-typed where
/// possible: digests get one bit flipped, hex integers one bit toggled,
/// sides swapped, booleans negated, other strings extended.
pub fn mutate_one<R: Rng>(v: &Value, rng: &mut R) -> (Value, String) {
    let mut pointers = Vec::new();
    leaf_pointers(v, String::new(), &mut pointers);
    assert!(!pointers.is_empty(), "nothing to mutate");
    let ptr = pointers[rng.gen_range(0..pointers.len())].clone();
    let mut out = v.clone();
    let slot = out.pointer_mut(&ptr).expect("pointer from walk");
    let replacement = match &*slot {
        Value::Bool(b) => Value::Bool(!b),
        Value::String(s) if s == "left" => json!("right"),
        Value::String(s) if s == "right" => json!("left"),
        Value::String(s) if s.len() == 64 && is_hex(s) => {
            let mut bytes = hex::decode(s).expect("hex");
            let bit = rng.gen_range(0..256);
            bytes[bit / 8] ^= 1 << (bit % 8);
            json!(hex::encode(bytes))
        }
        Value::String(s) if is_hex(s) && (s == "0" || !s.starts_with('0')) => {
            let n = BigUint::parse_bytes(s.as_bytes(), 16).expect("hex");
            let width = n.bits().max(8);
            let flipped = n ^ (BigUint::from(1u8) << rng.gen_range(0..width));
            json!(flipped.to_str_radix(16))
        }
        Value::String(s) => json!(format!("{s}x")),
        other => other.clone(),
    };
    *slot = replacement;
    (out, ptr)
}

/// Fixed material every generated proof graph draws on.
pub struct GraphKit {
    pub params: GroupParams,
    pub ledger: LedgerState,
    pub authority_sk: BigUint,
    pub model: Value,
    pub pc: PreservedCommitment,
    pub bundle: ZkLinkBundle,
    /// The bundle's shared outputs; entities carrying it are valid ZK
    /// targets.
    pub shared: Value,
}

pub const AUTHORITY: &str = "registry";
pub const LAB: &str = "lab";

impl GraphKit {
    pub fn new() -> Self {
        let params = group_params(Profile::Test);
        let authority_sk = BigUint::from(0x5eed_0001u64);
        let model = json!({"id": "m1", "family": "linear"});
        let ledger = register_builtin_validators(&LedgerState::new(), "operator", 0).unwrap();
        let (ledger, _) = ledger
            .register_authority(AUTHORITY, &public_key(&authority_sk, &params), &params, 1)
            .unwrap();
        let (ledger, _) = ledger
            .register_commitment(
                LAB,
                AnchorValue::Digest(canonical::digest(&model).unwrap()),
                &model_label("m1"),
                1,
            )
            .unwrap();
        let rec = PreservedRecord::seeded("p", vec![("age", 40u64.into())], b"kit");
        let (ledger, pc) = commit_preserved(vec![rec], "archive", "kit", &ledger, 2, &params).unwrap();
        let bundle = zkcu_predicate_geq(&pc, "p", "age", &BigUint::from(21u8), 8, b"kit").unwrap();
        let shared = bundle.statement["outputs"].clone();
        GraphKit { params, ledger, authority_sk, model, pc, bundle, shared }
    }

    pub fn authority_link(&self, id: &str, source: &str, target: &DataEntity, honest: bool) -> ProofLink {
        let sk = if honest { self.authority_sk.clone() } else { BigUint::from(77u8) };
        let signature = sign_message(&sk, target.payload_digest.as_bytes(), id.as_bytes(), &self.params).unwrap();
        ProofLink::new(
            id,
            source,
            &target.id,
            Evidence::Authority { authority: AUTHORITY.into(), signature },
        )
    }

    pub fn statistical_link(&self, id: &str, source: &str, target: &str, registered: bool) -> ProofLink {
        let model = if registered { self.model.clone() } else { json!({"id": "m9"}) };
        ProofLink::new(id, source, target, Evidence::Statistical { registrant: LAB.into(), model })
    }

    pub fn zk_link(&self, id: &str, source: &str, target: &str) -> ProofLink {
        ProofLink::new(id, source, target, Evidence::ZeroKnowledge { bundle: self.bundle.clone() })
    }

    /// The private entity the kit's bundle is anchored to.
    pub fn zk_source(&self, id: &str) -> DataEntity {
        DataEntity::digest_only(id, Domain::Private, Granularity::Transactional, self.pc.root(), 2)
            .with_anchor(self.pc.anchor())
    }

    /// Registers `entity`'s digest on the ledger and anchors it there.
    pub fn anchor(&self, ledger: &LedgerState, entity: DataEntity, label: &str) -> (LedgerState, DataEntity) {
        let t = ledger.tip_timestamp().unwrap_or(0) + 1;
        let (ledger, entry) = ledger
            .register_commitment("publisher", AnchorValue::Digest(entity.payload_digest), label, t)
            .unwrap();
        (ledger, entity.with_anchor(entry))
    }

    /// A random acyclic graph of up to `max_entities` entities mixing every
    /// link kind, with honest and broken evidence and anchors.
    pub fn random_graph<R: Rng>(&self, rng: &mut R, max_entities: usize, tag: &str) -> (ProofGraph, LedgerState) {
        let n = rng.gen_range(1..=max_entities);
        let mut ledger = self.ledger.clone();
        let mut entities = Vec::new();
        for i in 0..n {
            let id = format!("e{i}");
            let entity = if rng.gen_bool(0.15) {
                self.zk_source(&id)
            } else {
                let payload = if rng.gen_bool(0.7) { self.shared.clone() } else { json!({"u": i.to_string()}) };
                let domain = if rng.gen_bool(0.8) { Domain::Public } else { Domain::Private };
                let gran = if rng.gen_bool(0.5) { Granularity::Digest } else { Granularity::Transactional };
                let e = DataEntity::disclosed(&id, domain, gran, payload, i as u64).unwrap();
                let label = format!("{tag}/{id}");
                match rng.gen_range(0..20) {
                    0..=6 => {
                        let (l, e) = self.anchor(&ledger, e, &label);
                        ledger = l;
                        e
                    }
                    7..=8 => {
                        // anchored, then superseded by a later commitment
                        let (l, e) = self.anchor(&ledger, e, &label);
                        let t = l.tip_timestamp().unwrap() + 1;
                        ledger = l
                            .register_commitment("publisher", AnchorValue::Digest(Digest::ZERO), &label, t)
                            .unwrap()
                            .0;
                        e
                    }
                    9 => e.with_anchor(Digest::ZERO.with_bit_flipped(i)),
                    _ => e,
                }
            };
            entities.push(entity);
        }

        let mut links = Vec::new();
        for j in 1..n {
            for i in 0..j {
                if !rng.gen_bool(0.4) {
                    continue;
                }
                let (src, dst) = (&entities[i], &entities[j]);
                let id = format!("l{i}_{j}");
                let zk_ok = src.domain == Domain::Private && dst.domain == Domain::Public;
                let logical_ok = !(src.domain == Domain::Private && src.payload.is_none());
                let link = loop {
                    match rng.gen_range(0..4) {
                        0 if logical_ok => {
                            break ProofLink::new(&id, &src.id, &dst.id, Evidence::Logical { recipe: Recipe::Identity })
                        }
                        1 if zk_ok => break self.zk_link(&id, &src.id, &dst.id),
                        2 => break self.authority_link(&id, &src.id, dst, rng.gen_bool(0.75)),
                        3 => break self.statistical_link(&id, &src.id, &dst.id, rng.gen_bool(0.75)),
                        _ => {}
                    }
                };
                links.push(link);
            }
        }
        (ProofGraph::from_parts(entities, links).expect("generator respects build rules"), ledger)
    }
}

/// Brute-force chain semantics: enumerate every backward path from the
/// target, keep those made of verified links and entities that start at an
/// anchor, and aggregate. Per-link and per-entity verdicts come from the
/// library; path aggregation is computed here independently.
pub fn enumerate_paths(graph: &ProofGraph, ledger: &LedgerState, target: &str) -> (Strength, u64) {
    let entity_ok = |id: &str| verify_entity(graph.entity(id).unwrap(), ledger).verdict;
    let link_ok = |l: &ProofLink| verify_link(graph, l, ledger).verdict;
    let base = |id: &str| {
        let e = graph.entity(id).unwrap();
        let mut b = Strength::None;
        if e.anchor.is_some() {
            b = Strength::Strong;
        } else if graph
            .links()
            .iter()
            .any(|l| l.source == id && l.kind == LinkKind::Authority && link_ok(l))
        {
            b = Strength::Anchored;
        }
        b
    };

    let mut best = Strength::None;
    let mut longest = 0u64;
    let mut found = false;
    // stack of (entity, classes of links between it and the target)
    let mut stack: Vec<(String, Vec<Strength>)> = vec![(target.to_string(), Vec::new())];
    while let Some((id, classes)) = stack.pop() {
        if !entity_ok(&id) {
            continue;
        }
        let b = base(&id);
        if b != Strength::None {
            let s = classes.iter().copied().fold(b, Strength::min);
            best = best.max(s);
            longest = longest.max(classes.len() as u64);
            found = true;
        }
        for l in graph.links().iter().filter(|l| l.target == id) {
            if link_ok(l) {
                let mut next = classes.clone();
                next.push(l.kind.strength());
                stack.push((l.source.clone(), next));
            }
        }
    }
    if found {
        (best, longest)
    } else {
        (Strength::None, 0)
    }
}

/// Every entity and link upstream of `target` verifies.
pub fn closure_clean(graph: &ProofGraph, ledger: &LedgerState, target: &str) -> bool {
    let mut stack = vec![target.to_string()];
    let mut seen = std::collections::BTreeSet::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id.clone()) {
            continue;
        }
        if !verify_entity(graph.entity(&id).unwrap(), ledger).verdict {
            return false;
        }
        for l in graph.links().iter().filter(|l| l.target == id) {
            if !verify_link(graph, l, ledger).verdict {
                return false;
            }
            stack.push(l.source.clone());
        }
    }
    true
}

pub fn public_entity(id: &str, payload: Value) -> DataEntity {
    DataEntity::disclosed(id, Domain::Public, Granularity::Digest, payload, 1).unwrap()
}
