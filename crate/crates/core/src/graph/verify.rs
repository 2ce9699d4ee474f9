use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{DataEntity, Evidence, LinkKind, ProofGraph, ProofLink, Strength};
use crate::canonical::{self, hex_u64};
use crate::crypto::{check_signature, GroupParams};
use crate::error::{Error, Result};
use crate::hash::Digest;
use crate::ledger::{LedgerState, Verdict};
use crate::zk_link::check_bundle;

/// Where a verified chain terminates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorRef {
    Entry(Digest),
    Authority(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub subject: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub target: String,
    pub verified: bool,
    pub anchors_reached: Vec<AnchorRef>,
    pub chain_strength: Strength,
    #[serde(with = "hex_u64")]
    pub chain_length: u64,
    pub failures: Vec<Failure>,
}

/// Checks an entity on its own: a disclosed payload must hash to the
/// payload digest, and an anchor must be the latest commitment its author
/// made under that label, with the same digest.
pub fn verify_entity(entity: &DataEntity, ledger: &LedgerState) -> Verdict {
    if let Some(payload) = &entity.payload {
        match canonical::digest(payload) {
            Ok(d) if d == entity.payload_digest => {}
            Ok(_) => return Verdict::reject("payload-mismatch"),
            Err(_) => return Verdict::reject("malformed-payload"),
        }
    }
    let Some(anchor) = entity.anchor else {
        return Verdict::accept();
    };
    let Some(record) = ledger.commitment_record(&anchor) else {
        return Verdict::reject("unanchored");
    };
    match ledger.latest_commitment(&record.author, &record.label) {
        Some(latest) if latest.entry_id == anchor => {}
        _ => return Verdict::reject("stale-anchor"),
    }
    if record.value.digest() != Some(entity.payload_digest) {
        return Verdict::reject("anchor-mismatch");
    }
    Verdict::accept()
}

pub fn verify_link(graph: &ProofGraph, link: &ProofLink, ledger: &LedgerState) -> Verdict {
    let (Some(source), Some(target)) = (graph.entity(&link.source), graph.entity(&link.target)) else {
        return Verdict::reject("dangling-endpoint");
    };
    if link.evidence.kind() != link.kind {
        return Verdict::reject("evidence-mismatch");
    }
    match &link.evidence {
        Evidence::Logical { recipe } => {
            let Some(payload) = &source.payload else {
                return Verdict::reject("undisclosed-input");
            };
            match canonical::digest(payload) {
                Ok(d) if d == source.payload_digest => {}
                _ => return Verdict::reject("payload-mismatch"),
            }
            match recipe.apply(payload) {
                Ok(d) if d == target.payload_digest => Verdict::accept(),
                Ok(_) => Verdict::reject("recomputation-mismatch"),
                Err(_) => Verdict::reject("malformed-input"),
            }
        }
        Evidence::ZeroKnowledge { bundle } => {
            let verdict = check_bundle(ledger, bundle);
            if !verdict.verdict {
                return verdict;
            }
            let Ok(statement) = bundle.parse_statement() else {
                return Verdict::reject("malformed-statement");
            };
            if source.anchor != Some(statement.anchor) {
                return Verdict::reject("source-mismatch");
            }
            match bundle.shared_digest() {
                Ok(d) if d == target.payload_digest => Verdict::accept(),
                _ => Verdict::reject("shared-data-mismatch"),
            }
        }
        Evidence::Authority { authority, signature } => {
            let Some((key, params_id)) = ledger.authority_key(authority) else {
                return Verdict::reject("unanchored");
            };
            if *key != signature.signer_key {
                return Verdict::reject("unanchored");
            }
            let Some(params) = GroupParams::by_id(&params_id) else {
                return Verdict::reject("unknown-params");
            };
            match check_signature(signature, target.payload_digest.as_bytes(), &params) {
                Ok(()) => Verdict::accept(),
                Err(r) => Verdict::reject(r.code()),
            }
        }
        Evidence::Statistical { registrant, model } => {
            let Some(model_id) = model.get("id").and_then(|v| v.as_str()) else {
                return Verdict::reject("malformed-evidence");
            };
            let Some(record) = ledger.latest_commitment(registrant, &super::model_label(model_id))
            else {
                return Verdict::reject("unanchored");
            };
            match canonical::digest(model) {
                Ok(d) if record.value.digest() == Some(d) => Verdict::accept(),
                _ => Verdict::reject("model-mismatch"),
            }
        }
    }
}

/// Per-entity state of the backward walk.
#[derive(Clone, Default)]
struct Reach {
    strength: Option<Strength>,
    length: u64,
    anchors: BTreeSet<AnchorRef>,
}

pub fn verify_chain(graph: &ProofGraph, target: &str, ledger: &LedgerState) -> Result<ChainReport> {
    if graph.entity(target).is_none() {
        return Err(Error::Lookup(format!("unknown entity `{target}`")));
    }

    // backward breadth-first closure of the target
    let mut order = vec![target];
    let mut seen = BTreeSet::from([target]);
    let mut queue = VecDeque::from([target]);
    let mut closure_links = Vec::new();
    while let Some(cur) = queue.pop_front() {
        for link in graph.in_links(cur) {
            closure_links.push(link);
            if seen.insert(link.source.as_str()) {
                order.push(&link.source);
                queue.push_back(&link.source);
            }
        }
    }

    let mut failures = Vec::new();
    let mut entity_ok = BTreeMap::new();
    for id in &order {
        let v = verify_entity(graph.entity(id).expect("closure entity"), ledger);
        if !v.verdict {
            failures.push(Failure { subject: id.to_string(), reason: v.reason });
        }
        entity_ok.insert(*id, v.verdict);
    }
    let mut link_ok = BTreeMap::new();
    for link in &closure_links {
        let v = verify_link(graph, link, ledger);
        if !v.verdict {
            failures.push(Failure { subject: link.id.clone(), reason: v.reason });
        }
        link_ok.insert(link.id.as_str(), v.verdict);
    }

    // best strength and longest length per entity, sources before targets
    let mut reach: BTreeMap<&str, Reach> = BTreeMap::new();
    for id in topo_order(graph, &order) {
        let mut r = Reach::default();
        if entity_ok[id] {
            let entity = graph.entity(id).expect("closure entity");
            if let Some(anchor) = entity.anchor {
                r.strength = Some(Strength::Strong);
                r.anchors.insert(AnchorRef::Entry(anchor));
            }
            for link in graph.out_links(id).filter(|l| l.kind == LinkKind::Authority) {
                let ok = match link_ok.get(link.id.as_str()) {
                    Some(ok) => *ok,
                    None => verify_link(graph, link, ledger).verdict,
                };
                if let (true, Evidence::Authority { authority, .. }) = (ok, &link.evidence) {
                    r.strength = r.strength.max(Some(Strength::Anchored));
                    r.anchors.insert(AnchorRef::Authority(authority.clone()));
                }
            }
            for link in graph.in_links(id) {
                if !link_ok[link.id.as_str()] {
                    continue;
                }
                let src = &reach[link.source.as_str()];
                let Some(s) = src.strength else { continue };
                let candidate = s.min(link.kind.strength());
                r.length = if r.strength.is_some() {
                    r.length.max(src.length + 1)
                } else {
                    src.length + 1
                };
                r.strength = r.strength.max(Some(candidate));
                r.anchors.extend(src.anchors.iter().cloned());
            }
        }
        reach.insert(id, r);
    }

    let end = &reach[target];
    let strength = end.strength.unwrap_or(Strength::None);
    Ok(ChainReport {
        target: target.to_string(),
        verified: strength != Strength::None && failures.is_empty(),
        anchors_reached: end.anchors.iter().cloned().collect(),
        chain_strength: strength,
        chain_length: if strength == Strength::None { 0 } else { end.length },
        failures,
    })
}

/// Kahn's algorithm restricted to the closure; sources first.
fn topo_order<'a>(graph: &'a ProofGraph, closure: &[&'a str]) -> Vec<&'a str> {
    let members: BTreeSet<&str> = closure.iter().copied().collect();
    let mut indegree: BTreeMap<&str, usize> = members.iter().map(|id| (*id, 0)).collect();
    for link in graph.links() {
        if members.contains(link.target.as_str()) {
            *indegree.get_mut(link.target.as_str()).expect("member") += 1;
        }
    }
    let mut ready: VecDeque<&str> = closure
        .iter()
        .copied()
        .filter(|id| indegree[id] == 0)
        .collect();
    let mut out = Vec::with_capacity(closure.len());
    while let Some(id) = ready.pop_front() {
        out.push(id);
        for link in graph.out_links(id) {
            if let Some(d) = indegree.get_mut(link.target.as_str()) {
                *d -= 1;
                if *d == 0 {
                    ready.push_back(link.target.as_str());
                }
            }
        }
    }
    out
}
