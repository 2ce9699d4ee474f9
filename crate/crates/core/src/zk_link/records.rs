use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::canonical::{hex_array, hex_u64, hex_uint};
use crate::crypto::{hash_to_scalar, pedersen_commit, Commitment, GroupParams, Profile};
use crate::error::{Error, Result};
use crate::hash::{sha256, Digest, FramedHasher};
use crate::ledger::{AnchorValue, LedgerState};
use crate::merkle::{build_tree, MerklePath, MerkleTree};

const TEXT_LEAF_PREFIX: u8 = 0x02;
const NUMERIC_LEAF_PREFIX: u8 = 0x03;
const RECORD_LEAF_PREFIX: u8 = 0x04;
const FIELD_BLINDING_TAG: &str = "proofchain/field-blinding/v1";
const SALT_TAG: &[u8] = b"proofchain/salt/v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldValue {
    Int(#[serde(with = "hex_uint")] BigUint),
    Text(String),
}

impl From<u64> for FieldValue {
    fn from(v: u64) -> Self {
        FieldValue::Int(BigUint::from(v))
    }
}

impl From<&str> for FieldValue {
    fn from(v: &str) -> Self {
        FieldValue::Text(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub name: String,
    pub value: FieldValue,
    #[serde(with = "hex_array")]
    pub salt: [u8; 16],
}

/// One private business record. Each field is committed separately so that
/// a single field can be disclosed or proven about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservedRecord {
    pub record_id: String,
    pub fields: Vec<Field>,
}

impl PreservedRecord {
    pub fn new(record_id: impl Into<String>) -> Self {
        PreservedRecord {
            record_id: record_id.into(),
            fields: Vec::new(),
        }
    }

    pub fn with_field(mut self, name: &str, value: impl Into<FieldValue>, salt: [u8; 16]) -> Self {
        self.fields.push(Field {
            name: name.to_string(),
            value: value.into(),
            salt,
        });
        self
    }

    /// Builds a record whose salts derive from `seed`, record id and field
    /// name, so that the same seed reproduces the same commitments.
    pub fn seeded(record_id: &str, fields: Vec<(&str, FieldValue)>, seed: &[u8]) -> Self {
        let mut record = PreservedRecord::new(record_id);
        for (name, value) in fields {
            let salt = derive_salt(seed, record_id, name);
            record = record.with_field(name, value, salt);
        }
        record
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut Field> {
        self.fields.iter_mut().find(|f| f.name == name)
    }
}

pub fn derive_salt(seed: &[u8], record_id: &str, field: &str) -> [u8; 16] {
    let d = FramedHasher::new()
        .field(SALT_TAG)
        .field(seed)
        .field(record_id.as_bytes())
        .field(field.as_bytes())
        .finish();
    d.0[..16].try_into().expect("16 bytes")
}

/// Pedersen blinding factor of a numeric field, derived from its salt.
pub fn field_blinding(salt: &[u8; 16], name: &str, params: &GroupParams) -> BigUint {
    hash_to_scalar(FIELD_BLINDING_TAG, &[salt, name.as_bytes()], params)
}

pub fn field_commitment(field: &Field, params: &GroupParams) -> Result<Commitment> {
    match &field.value {
        FieldValue::Int(v) => {
            if !params.is_scalar(v) {
                return Err(Error::Parameter(format!(
                    "numeric field `{}` is not below the group order",
                    field.name
                )));
            }
            pedersen_commit(v, &field_blinding(&field.salt, &field.name, params), params)
        }
        FieldValue::Text(_) => Err(Error::Parameter(format!(
            "field `{}` is not numeric",
            field.name
        ))),
    }
}

fn push_framed(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

/// Leaf payload of a numeric field: `0x03 ‖ name ‖ commitment bytes`.
pub fn numeric_leaf_payload(name: &str, c: &Commitment, params: &GroupParams) -> Vec<u8> {
    let mut out = vec![NUMERIC_LEAF_PREFIX];
    push_framed(&mut out, name.as_bytes());
    out.extend_from_slice(&c.to_bytes(params));
    out
}

/// Leaf payload of a text field: `H(0x02 ‖ salt ‖ name ‖ value)`.
pub fn text_leaf_payload(name: &str, value: &str, salt: &[u8; 16]) -> Vec<u8> {
    let mut buf = vec![TEXT_LEAF_PREFIX];
    buf.extend_from_slice(salt);
    push_framed(&mut buf, name.as_bytes());
    push_framed(&mut buf, value.as_bytes());
    sha256(&buf).0.to_vec()
}

pub fn field_leaf_payload(field: &Field, params: &GroupParams) -> Result<Vec<u8>> {
    match &field.value {
        FieldValue::Int(_) => Ok(numeric_leaf_payload(
            &field.name,
            &field_commitment(field, params)?,
            params,
        )),
        FieldValue::Text(s) => Ok(text_leaf_payload(&field.name, s, &field.salt)),
    }
}

/// Leaf payload binding a record id to its field-tree root.
pub fn record_leaf_payload(record_id: &str, record_root: &Digest) -> Vec<u8> {
    let mut out = vec![RECORD_LEAF_PREFIX];
    push_framed(&mut out, record_id.as_bytes());
    out.extend_from_slice(record_root.as_bytes());
    out
}

/// What actually goes into a tree: the leaf's position followed by its
/// payload. Hashing the position makes a path's `leaf_index` binding, which
/// the carry-up tree shape alone does not guarantee.
pub fn positioned(index: u64, payload: &[u8]) -> Vec<u8> {
    let mut out = index.to_be_bytes().to_vec();
    out.extend_from_slice(payload);
    out
}

/// Merkle paths from a field leaf to its record root and from the record
/// leaf to the anchored set root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inclusion {
    pub field_path: MerklePath,
    pub record_path: MerklePath,
}

impl Inclusion {
    pub fn set_root(&self, record_id: &str, field_leaf_payload: &[u8]) -> Digest {
        let record_root = self
            .field_path
            .root_from_payload(&positioned(self.field_path.leaf_index, field_leaf_payload));
        self.record_path.root_from_payload(&positioned(
            self.record_path.leaf_index,
            &record_leaf_payload(record_id, &record_root),
        ))
    }
}

/// The owner's view of an anchored record set: the records with their
/// openings, the trees built over them and the ledger entry anchoring the
/// root. Only the root goes on-ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "OpeningsFile", try_from = "OpeningsFile")]
pub struct PreservedCommitment {
    owner: String,
    label: String,
    anchor: Digest,
    root: Digest,
    profile: Profile,
    timestamp: u64,
    records: Vec<PreservedRecord>,
    record_trees: Vec<MerkleTree>,
    set_tree: MerkleTree,
}

/// Serialized form of a [`PreservedCommitment`]; trees are rebuilt on load.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningsFile {
    pub owner: String,
    pub label: String,
    pub anchor: Digest,
    pub root: Digest,
    pub profile: Profile,
    #[serde(with = "hex_u64")]
    pub timestamp: u64,
    pub records: Vec<PreservedRecord>,
}

impl From<PreservedCommitment> for OpeningsFile {
    fn from(pc: PreservedCommitment) -> Self {
        OpeningsFile {
            owner: pc.owner,
            label: pc.label,
            anchor: pc.anchor,
            root: pc.root,
            profile: pc.profile,
            timestamp: pc.timestamp,
            records: pc.records,
        }
    }
}

impl TryFrom<OpeningsFile> for PreservedCommitment {
    type Error = Error;

    fn try_from(f: OpeningsFile) -> Result<Self> {
        let params = GroupParams::new(f.profile);
        let (record_trees, set_tree) = build_trees(&f.records, &params)?;
        if set_tree.root() != f.root {
            return Err(Error::Encoding(
                "openings do not reproduce the recorded root".into(),
            ));
        }
        Ok(PreservedCommitment {
            owner: f.owner,
            label: f.label,
            anchor: f.anchor,
            root: f.root,
            profile: f.profile,
            timestamp: f.timestamp,
            records: f.records,
            record_trees,
            set_tree,
        })
    }
}

fn build_trees(
    records: &[PreservedRecord],
    params: &GroupParams,
) -> Result<(Vec<MerkleTree>, MerkleTree)> {
    if records.is_empty() {
        return Err(Error::Parameter("at least one record is required".into()));
    }
    let mut ids = BTreeSet::new();
    let mut record_trees = Vec::with_capacity(records.len());
    let mut set_leaves = Vec::with_capacity(records.len());
    for (ri, record) in records.iter().enumerate() {
        if !ids.insert(record.record_id.as_str()) {
            return Err(Error::Parameter(format!(
                "duplicate record id `{}`",
                record.record_id
            )));
        }
        if record.fields.is_empty() {
            return Err(Error::Parameter(format!(
                "record `{}` has no fields",
                record.record_id
            )));
        }
        let mut names = BTreeSet::new();
        let mut leaves = Vec::with_capacity(record.fields.len());
        for (fi, field) in record.fields.iter().enumerate() {
            if !names.insert(field.name.as_str()) {
                return Err(Error::Parameter(format!(
                    "duplicate field `{}` in record `{}`",
                    field.name, record.record_id
                )));
            }
            leaves.push(positioned(fi as u64, &field_leaf_payload(field, params)?));
        }
        let tree = build_tree(&leaves)?;
        set_leaves.push(positioned(
            ri as u64,
            &record_leaf_payload(&record.record_id, &tree.root()),
        ));
        record_trees.push(tree);
    }
    let set_tree = build_tree(&set_leaves)?;
    Ok((record_trees, set_tree))
}

/// Builds per-record field trees and a record-set tree, anchors the set root
/// on the ledger under `(owner, label)`, and hands the openings back to the
/// owner.
pub fn commit_preserved(
    records: Vec<PreservedRecord>,
    owner: &str,
    label: &str,
    ledger: &LedgerState,
    timestamp: u64,
    params: &GroupParams,
) -> Result<(LedgerState, PreservedCommitment)> {
    let (record_trees, set_tree) = build_trees(&records, params)?;
    let root = set_tree.root();
    let (ledger, anchor) =
        ledger.register_commitment(owner, AnchorValue::Digest(root), label, timestamp)?;
    Ok((
        ledger,
        PreservedCommitment {
            owner: owner.to_string(),
            label: label.to_string(),
            anchor,
            root,
            profile: params.profile(),
            timestamp,
            records,
            record_trees,
            set_tree,
        },
    ))
}

impl PreservedCommitment {
    pub fn owner(&self) -> &str {
        &self.owner
    }
    pub fn label(&self) -> &str {
        &self.label
    }
    pub fn anchor(&self) -> Digest {
        self.anchor
    }
    pub fn root(&self) -> Digest {
        self.root
    }
    pub fn timestamp(&self) -> u64 {
        self.timestamp
    }
    pub fn records(&self) -> &[PreservedRecord] {
        &self.records
    }
    pub fn params(&self) -> GroupParams {
        GroupParams::new(self.profile)
    }

    /// Rebuilds the trees over `records` while keeping the old anchor, the
    /// situation where data drifted after it was anchored.
    pub fn with_records_unanchored(&self, records: Vec<PreservedRecord>) -> Result<Self> {
        let (record_trees, set_tree) = build_trees(&records, &self.params())?;
        Ok(PreservedCommitment {
            root: set_tree.root(),
            records,
            record_trees,
            set_tree,
            ..self.clone()
        })
    }

    pub(crate) fn locate(&self, record_id: &str, field: &str) -> Result<(usize, usize)> {
        let ri = self
            .records
            .iter()
            .position(|r| r.record_id == record_id)
            .ok_or_else(|| Error::Lookup(format!("record `{record_id}`")))?;
        let fi = self.records[ri]
            .fields
            .iter()
            .position(|f| f.name == field)
            .ok_or_else(|| Error::Lookup(format!("field `{field}` in record `{record_id}`")))?;
        Ok((ri, fi))
    }

    pub(crate) fn inclusion(&self, ri: usize, fi: usize) -> Result<Inclusion> {
        Ok(Inclusion {
            field_path: self.record_trees[ri].prove_membership(fi)?,
            record_path: self.set_tree.prove_membership(ri)?,
        })
    }

    pub(crate) fn field_at(&self, ri: usize, fi: usize) -> &Field {
        &self.records[ri].fields[fi]
    }
}
