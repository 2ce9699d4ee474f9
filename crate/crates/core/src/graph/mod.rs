//! Proof graphs: data entities in the private and public domains joined by
//! typed proof links. Verification walks a public claim backwards to ledger
//! anchors and registered authorities.

mod lint;
mod verify;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::canonical::{self, hex_u64};
use crate::crypto::Signature;
use crate::error::{BuildError, Error, Result};
use crate::hash::{Digest, FramedHasher};
use crate::zk_link::ZkLinkBundle;

pub use lint::{lint_chain, LintCode, LintWarning};
pub use verify::{verify_chain, verify_entity, verify_link, AnchorRef, ChainReport, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Private,
    Public,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Transactional,
    Digest,
}

/// Ordinal strength classes. `None` only appears in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    None,
    Weak,
    Anchored,
    Strong,
}

impl Strength {
    pub fn as_str(self) -> &'static str {
        match self {
            Strength::None => "none",
            Strength::Weak => "weak",
            Strength::Anchored => "anchored",
            Strength::Strong => "strong",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Logical,
    ZeroKnowledge,
    Authority,
    Statistical,
}

impl LinkKind {
    pub fn strength(self) -> Strength {
        match self {
            LinkKind::Logical | LinkKind::ZeroKnowledge => Strength::Strong,
            LinkKind::Authority => Strength::Anchored,
            LinkKind::Statistical => Strength::Weak,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataEntity {
    pub id: String,
    pub domain: Domain,
    pub granularity: Granularity,
    pub payload_digest: Digest,
    /// Disclosed payload, if any. Private entities normally carry only the
    /// digest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(with = "hex_u64")]
    pub created_at: u64,
    /// Ledger entry id of the commitment record this entity claims.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Digest>,
}

impl DataEntity {
    pub fn disclosed(
        id: &str,
        domain: Domain,
        granularity: Granularity,
        payload: Value,
        created_at: u64,
    ) -> Result<Self> {
        Ok(DataEntity {
            id: id.to_string(),
            domain,
            granularity,
            payload_digest: canonical::digest(&payload)?,
            payload: Some(payload),
            created_at,
            anchor: None,
        })
    }

    pub fn digest_only(
        id: &str,
        domain: Domain,
        granularity: Granularity,
        payload_digest: Digest,
        created_at: u64,
    ) -> Self {
        DataEntity {
            id: id.to_string(),
            domain,
            granularity,
            payload_digest,
            payload: None,
            created_at,
            anchor: None,
        }
    }

    pub fn with_anchor(mut self, entry_id: Digest) -> Self {
        self.anchor = Some(entry_id);
        self
    }
}

/// Deterministic transforms a logical link can recompute.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Recipe {
    /// Target payload digest equals the digest of the source payload.
    Identity,
    /// Source payload is an array; the target digest is [`concat_hash`] of it.
    ConcatHash,
    /// Source payload is an array of objects; the target payload is
    /// [`sum_payload`] of the named field's total.
    SumOfFields { field: String },
}

const CONCAT_TAG: &[u8] = b"proofchain/concat-hash/v1";

pub fn concat_hash(items: &[Value]) -> Result<Digest> {
    let mut h = FramedHasher::new().field(CONCAT_TAG);
    for item in items {
        h.push(&canonical::value_to_vec(item)?);
    }
    Ok(h.finish())
}

pub fn sum_payload(total: &BigUint) -> Value {
    json!({ "total": canonical::encode_uint(total) })
}

impl Recipe {
    /// The payload digest the target must carry, given the source payload.
    pub fn apply(&self, source: &Value) -> Result<Digest> {
        match self {
            Recipe::Identity => canonical::digest(source),
            Recipe::ConcatHash => {
                let items = source
                    .as_array()
                    .ok_or_else(|| Error::Encoding("concat-hash input is not an array".into()))?;
                concat_hash(items)
            }
            Recipe::SumOfFields { field } => {
                let items = source
                    .as_array()
                    .ok_or_else(|| Error::Encoding("sum input is not an array".into()))?;
                let mut total = BigUint::default();
                for item in items {
                    let s = item
                        .get(field)
                        .and_then(Value::as_str)
                        .ok_or_else(|| Error::Encoding(format!("item lacks field `{field}`")))?;
                    total += canonical::decode_uint(s)?;
                }
                canonical::digest(&sum_payload(&total))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Logical { recipe: Recipe },
    ZeroKnowledge { bundle: ZkLinkBundle },
    /// Signature by a ledger-registered authority over the target's payload
    /// digest.
    Authority { authority: String, signature: Signature },
    /// Model metadata; its digest must match the registrant's latest
    /// commitment under [`model_label`].
    Statistical { registrant: String, model: Value },
}

impl Evidence {
    pub fn kind(&self) -> LinkKind {
        match self {
            Evidence::Logical { .. } => LinkKind::Logical,
            Evidence::ZeroKnowledge { .. } => LinkKind::ZeroKnowledge,
            Evidence::Authority { .. } => LinkKind::Authority,
            Evidence::Statistical { .. } => LinkKind::Statistical,
        }
    }
}

pub fn model_label(model_id: &str) -> String {
    format!("model/{model_id}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLink {
    pub id: String,
    pub source: String,
    pub target: String,
    pub kind: LinkKind,
    pub strength_class: Strength,
    pub evidence: Evidence,
}

impl ProofLink {
    /// Kind and strength class follow from the evidence.
    pub fn new(id: &str, source: &str, target: &str, evidence: Evidence) -> Self {
        let kind = evidence.kind();
        ProofLink {
            id: id.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            kind,
            strength_class: kind.strength(),
            evidence,
        }
    }
}

/// An immutable directed acyclic graph of entities and links.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofGraph {
    entities: BTreeMap<String, DataEntity>,
    links: Vec<ProofLink>,
}

impl ProofGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity(&self, id: &str) -> Option<&DataEntity> {
        self.entities.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &DataEntity> {
        self.entities.values()
    }

    pub fn links(&self) -> &[ProofLink] {
        &self.links
    }

    pub fn link(&self, id: &str) -> Option<&ProofLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn in_links<'a>(&'a self, entity: &'a str) -> impl Iterator<Item = &'a ProofLink> + 'a {
        self.links.iter().filter(move |l| l.target == entity)
    }

    pub fn out_links<'a>(&'a self, entity: &'a str) -> impl Iterator<Item = &'a ProofLink> + 'a {
        self.links.iter().filter(move |l| l.source == entity)
    }

    pub fn add_entity(&self, entity: DataEntity) -> Result<ProofGraph, BuildError> {
        if self.entities.contains_key(&entity.id) {
            return Err(BuildError::DuplicateId(entity.id));
        }
        let mut next = self.clone();
        next.entities.insert(entity.id.clone(), entity);
        Ok(next)
    }

    pub fn add_link(&self, link: ProofLink) -> Result<ProofGraph, BuildError> {
        self.check_structure(&link)?;
        self.check_policy(&link)?;
        let mut next = self.clone();
        next.links.push(link);
        Ok(next)
    }

    fn check_structure(&self, link: &ProofLink) -> Result<(), BuildError> {
        if self.link(&link.id).is_some() {
            return Err(BuildError::DuplicateId(link.id.clone()));
        }
        for end in [&link.source, &link.target] {
            if !self.entities.contains_key(end) {
                return Err(BuildError::DanglingEndpoint {
                    link: link.id.clone(),
                    entity: end.clone(),
                });
            }
        }
        if link.source == link.target || self.reaches(&link.target, &link.source) {
            return Err(BuildError::Cycle(link.id.clone()));
        }
        Ok(())
    }

    fn check_policy(&self, link: &ProofLink) -> Result<(), BuildError> {
        if link.evidence.kind() != link.kind {
            return Err(BuildError::EvidenceMismatch(link.id.clone()));
        }
        if link.strength_class != link.kind.strength() {
            return Err(BuildError::StrengthMismatch(link.id.clone()));
        }
        let source = &self.entities[&link.source];
        let target = &self.entities[&link.target];
        match link.kind {
            LinkKind::ZeroKnowledge
                if source.domain != Domain::Private || target.domain != Domain::Public =>
            {
                Err(BuildError::DomainCrossing(link.id.clone()))
            }
            LinkKind::Logical if source.domain == Domain::Private && source.payload.is_none() => {
                Err(BuildError::NeedsZeroKnowledge(link.id.clone()))
            }
            _ => Ok(()),
        }
    }

    fn reaches(&self, from: &str, to: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(cur) = stack.pop() {
            if cur == to {
                return true;
            }
            if seen.insert(cur) {
                stack.extend(self.out_links(cur).map(|l| l.target.as_str()));
            }
        }
        false
    }

    /// Builds a graph enforcing every rule `add_entity`/`add_link` enforce.
    pub fn from_parts(entities: Vec<DataEntity>, links: Vec<ProofLink>) -> Result<Self, BuildError> {
        let mut g = entities
            .into_iter()
            .try_fold(ProofGraph::new(), |g, e| g.add_entity(e))?;
        for link in links {
            g = g.add_link(link)?;
        }
        Ok(g)
    }

    /// Like [`from_parts`](Self::from_parts) but only checks the structural
    /// rules (unique ids, endpoints, acyclicity) the verifier depends on.
    /// Domain and strength rules are left to `validate` and to the linter,
    /// so a file with a misplaced link can still be inspected.
    pub fn from_parts_unchecked(
        entities: Vec<DataEntity>,
        links: Vec<ProofLink>,
    ) -> Result<Self, BuildError> {
        let mut g = entities
            .into_iter()
            .try_fold(ProofGraph::new(), |g, e| g.add_entity(e))?;
        for link in links {
            g.check_structure(&link)?;
            g.links.push(link);
        }
        Ok(g)
    }

    /// Re-checks the domain and strength rules over every link.
    pub fn validate(&self) -> Result<(), BuildError> {
        self.links.iter().try_for_each(|l| self.check_policy(l))
    }

    pub fn to_canonical(&self) -> Result<Vec<u8>> {
        canonical::to_vec(self)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        canonical::from_slice(bytes)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    entities: Vec<DataEntity>,
    links: Vec<ProofLink>,
}

impl Serialize for ProofGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphFile {
            entities: self.entities.values().cloned().collect(),
            links: self.links.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProofGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GraphFile::deserialize(d)?;
        ProofGraph::from_parts_unchecked(file.entities, file.links).map_err(serde::de::Error::custom)
    }
}
