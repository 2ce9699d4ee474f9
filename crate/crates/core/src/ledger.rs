//! A deterministic single-writer ledger simulation.
//!
//! Blocks carry content-addressed entries: commitment records, authority
//! keys, validator registrations and recorded verification results. All
//! updates are functional; a [`LedgerState`] never changes once built, and
//! appending returns a new state that shares the existing blocks.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::canonical::{self, hex_u64, hex_uint};
use crate::crypto::{Commitment, GroupParams};
use crate::error::{Error, Result};
use crate::hash::{Digest, FramedHasher};
use crate::merkle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    CommitmentRecord,
    AuthorityKey,
    ValidatorRegistration,
    VerificationResult,
}

impl EntryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::CommitmentRecord => "commitment_record",
            EntryKind::AuthorityKey => "authority_key",
            EntryKind::ValidatorRegistration => "validator_registration",
            EntryKind::VerificationResult => "verification_result",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub kind: EntryKind,
    pub author: String,
    pub payload: Value,
    pub entry_id: Digest,
}

impl LedgerEntry {
    pub fn new(kind: EntryKind, author: impl Into<String>, payload: Value) -> Result<Self> {
        let author = author.into();
        let entry_id = Self::compute_id(kind, &author, &payload)?;
        Ok(LedgerEntry {
            kind,
            author,
            payload,
            entry_id,
        })
    }

    /// `H(kind ‖ author ‖ canonical payload)` with length framing.
    pub fn compute_id(kind: EntryKind, author: &str, payload: &Value) -> Result<Digest> {
        let bytes = canonical::value_to_vec(payload)?;
        Ok(FramedHasher::new()
            .field(kind.as_str().as_bytes())
            .field(author.as_bytes())
            .field(&bytes)
            .finish())
    }

    pub fn is_consistent(&self) -> bool {
        Self::compute_id(self.kind, &self.author, &self.payload).is_ok_and(|id| id == self.entry_id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    #[serde(with = "hex_u64")]
    pub index: u64,
    pub prev_hash: Digest,
    #[serde(with = "hex_u64")]
    pub timestamp: u64,
    pub entries_root: Digest,
    pub entries: Vec<LedgerEntry>,
    pub block_hash: Digest,
}

impl Block {
    pub fn header_hash(index: u64, prev_hash: &Digest, timestamp: u64, entries_root: &Digest) -> Digest {
        canonical::digest(&json!({
            "index": canonical::encode_u64(index),
            "prev_hash": prev_hash,
            "timestamp": canonical::encode_u64(timestamp),
            "entries_root": entries_root,
        }))
        .expect("header encodes canonically")
    }

    pub fn entries_root_of(entries: &[LedgerEntry]) -> Result<Digest> {
        let ids: Vec<&[u8]> = entries.iter().map(|e| &e.entry_id.0[..]).collect();
        Ok(merkle::build_tree(&ids)?.root())
    }
}

/// What a commitment record anchors: a 32-byte digest (Merkle root, archive
/// hash) or a Pedersen commitment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorValue {
    Digest(Digest),
    Commitment(Commitment),
}

impl AnchorValue {
    pub fn digest(&self) -> Option<Digest> {
        match self {
            AnchorValue::Digest(d) => Some(*d),
            AnchorValue::Commitment(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct CommitmentPayload {
    label: String,
    value: AnchorValue,
    #[serde(with = "hex_u64")]
    timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct AuthorityPayload {
    #[serde(with = "hex_uint")]
    public_key: BigUint,
    params_id: Digest,
    #[serde(with = "hex_u64")]
    timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ValidatorPayload {
    descriptor: ValidatorDescriptor,
    #[serde(with = "hex_u64")]
    timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct VerificationPayload {
    validator_id: String,
    version: String,
    statement: Value,
    proof: Value,
    statement_digest: Digest,
    verdict: bool,
    reason: String,
    #[serde(with = "hex_u64")]
    timestamp: u64,
}

/// A resolved commitment-record entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitmentRecord {
    pub entry_id: Digest,
    pub author: String,
    pub label: String,
    pub value: AnchorValue,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValidatorDescriptor {
    pub id: String,
    pub version: String,
    pub statement_schema: String,
}

/// Outcome of one validator run. Validators never fail outright; malformed
/// input produces `verdict = false` with a reason code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: bool,
    pub reason: String,
}

impl Verdict {
    pub fn accept() -> Self {
        Verdict {
            verdict: true,
            reason: "ok".into(),
        }
    }

    pub fn reject(reason: impl Into<String>) -> Self {
        Verdict {
            verdict: false,
            reason: reason.into(),
        }
    }
}

/// A deterministic verifier over `(statement, proof, ledger)`.
pub type VerifyFn = fn(&Value, &Value, &LedgerState) -> Verdict;

#[derive(Clone)]
pub struct Validator {
    pub descriptor: ValidatorDescriptor,
    pub verify: VerifyFn,
}

impl fmt::Debug for Validator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Validator")
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub entry_id: Digest,
    pub validator_id: String,
    pub statement_digest: Digest,
    pub verdict: bool,
    pub reason: String,
}

/// Re-execution of one recorded verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub entry_id: Digest,
    pub recorded: bool,
    pub recomputed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFailure {
    pub block: u64,
    pub reason: String,
}

impl fmt::Display for AuditFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block {}: {}", self.block, self.reason)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Derived {
    index: BTreeMap<Digest, (u64, usize)>,
    labels: BTreeMap<(String, String), Vec<(u64, Digest)>>,
    authorities: BTreeMap<String, (BigUint, Digest)>,
    validators: BTreeMap<String, ValidatorDescriptor>,
}

impl Derived {
    fn apply_block(&mut self, block: &Block) -> Result<()> {
        for (offset, entry) in block.entries.iter().enumerate() {
            self.apply_entry(entry, block.index, offset, block.timestamp)?;
        }
        Ok(())
    }

    fn apply_entry(&mut self, entry: &LedgerEntry, block: u64, offset: usize, ts: u64) -> Result<()> {
        if !entry.is_consistent() {
            return Err(Error::Encoding(format!(
                "entry {} does not match its content",
                entry.entry_id
            )));
        }
        if self.index.contains_key(&entry.entry_id) {
            return Err(Error::Conflict(format!("entry {} already recorded", entry.entry_id)));
        }
        let check_ts = |payload_ts: u64| {
            if payload_ts == ts {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "entry timestamp {payload_ts} differs from block timestamp {ts}"
                )))
            }
        };
        match entry.kind {
            EntryKind::CommitmentRecord => {
                let p: CommitmentPayload = canonical::from_value(&entry.payload)?;
                check_ts(p.timestamp)?;
                if p.label.is_empty() {
                    return Err(Error::Parameter("commitment label must be non-empty".into()));
                }
                let history = self
                    .labels
                    .entry((entry.author.clone(), p.label.clone()))
                    .or_default();
                if history.iter().any(|(t, _)| *t == p.timestamp) {
                    return Err(Error::Conflict(format!(
                        "`{}` already registered `{}` at tick {}",
                        entry.author, p.label, p.timestamp
                    )));
                }
                history.push((p.timestamp, entry.entry_id));
            }
            EntryKind::AuthorityKey => {
                let p: AuthorityPayload = canonical::from_value(&entry.payload)?;
                check_ts(p.timestamp)?;
                let params = GroupParams::by_id(&p.params_id)
                    .ok_or_else(|| Error::Parameter("unknown group parameters".into()))?;
                if !params.is_element(&p.public_key) {
                    return Err(Error::Parameter("authority key is not a group element".into()));
                }
                if self.authorities.contains_key(&entry.author) {
                    return Err(Error::Conflict(format!(
                        "authority `{}` already registered",
                        entry.author
                    )));
                }
                self.authorities
                    .insert(entry.author.clone(), (p.public_key, p.params_id));
            }
            EntryKind::ValidatorRegistration => {
                let p: ValidatorPayload = canonical::from_value(&entry.payload)?;
                check_ts(p.timestamp)?;
                if self.validators.contains_key(&p.descriptor.id) {
                    return Err(Error::Conflict(format!(
                        "validator `{}` already registered",
                        p.descriptor.id
                    )));
                }
                self.validators.insert(p.descriptor.id.clone(), p.descriptor);
            }
            EntryKind::VerificationResult => {
                let p: VerificationPayload = canonical::from_value(&entry.payload)?;
                check_ts(p.timestamp)?;
                if !self.validators.contains_key(&p.validator_id) {
                    return Err(Error::Lookup(format!("validator `{}`", p.validator_id)));
                }
            }
        }
        self.index.insert(entry.entry_id, (block, offset));
        Ok(())
    }
}

#[derive(Clone, Default)]
pub struct LedgerState {
    blocks: Vec<Arc<Block>>,
    derived: Derived,
    verifiers: BTreeMap<String, VerifyFn>,
}

impl fmt::Debug for LedgerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LedgerState")
            .field("height", &self.blocks.len())
            .field("tip", &self.tip().map(|b| b.block_hash))
            .finish()
    }
}

impl LedgerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().map(|b| b.as_ref())
    }

    pub fn height(&self) -> usize {
        self.blocks.len()
    }

    pub fn tip(&self) -> Option<&Block> {
        self.blocks.last().map(|b| b.as_ref())
    }

    pub fn tip_timestamp(&self) -> Option<u64> {
        self.tip().map(|b| b.timestamp)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.blocks().flat_map(|b| b.entries.iter())
    }

    pub fn entry(&self, id: &Digest) -> Option<&LedgerEntry> {
        let (block, offset) = self.derived.index.get(id)?;
        self.blocks.get(*block as usize)?.entries.get(*offset)
    }

    /// The commitment record with this entry id, if any.
    pub fn commitment_record(&self, id: &Digest) -> Option<CommitmentRecord> {
        let entry = self.entry(id)?;
        if entry.kind != EntryKind::CommitmentRecord {
            return None;
        }
        let p: CommitmentPayload = canonical::from_value(&entry.payload).ok()?;
        Some(CommitmentRecord {
            entry_id: entry.entry_id,
            author: entry.author.clone(),
            label: p.label,
            value: p.value,
            timestamp: p.timestamp,
        })
    }

    /// The latest-timestamp record for `(author, label)`.
    pub fn latest_commitment(&self, author: &str, label: &str) -> Option<CommitmentRecord> {
        let history = self
            .derived
            .labels
            .get(&(author.to_string(), label.to_string()))?;
        let (_, id) = history.iter().max_by_key(|(ts, _)| *ts)?;
        self.commitment_record(id)
    }

    /// Public key and parameter-set id registered for `authority`.
    pub fn authority_key(&self, authority: &str) -> Option<(&BigUint, Digest)> {
        self.derived
            .authorities
            .get(authority)
            .map(|(key, params)| (key, *params))
    }

    pub fn authorities(&self) -> impl Iterator<Item = &str> {
        self.derived.authorities.keys().map(String::as_str)
    }

    pub fn validator(&self, id: &str) -> Option<&ValidatorDescriptor> {
        self.derived.validators.get(id)
    }

    pub fn append_block(&self, entries: Vec<LedgerEntry>, timestamp: u64) -> Result<LedgerState> {
        if entries.is_empty() {
            return Err(Error::Parameter("a block needs at least one entry".into()));
        }
        if let Some(tip) = self.tip_timestamp() {
            if timestamp < tip {
                return Err(Error::Ordering { tip, got: timestamp });
            }
        }
        let index = self.blocks.len() as u64;
        let prev_hash = self.tip().map_or(Digest::ZERO, |b| b.block_hash);
        let entries_root = Block::entries_root_of(&entries)?;
        let block = Block {
            index,
            prev_hash,
            timestamp,
            block_hash: Block::header_hash(index, &prev_hash, timestamp, &entries_root),
            entries_root,
            entries,
        };
        let mut next = self.clone();
        next.derived.apply_block(&block)?;
        next.blocks.push(Arc::new(block));
        Ok(next)
    }

    pub fn register_commitment(
        &self,
        author: &str,
        value: AnchorValue,
        label: &str,
        timestamp: u64,
    ) -> Result<(LedgerState, Digest)> {
        if label.is_empty() {
            return Err(Error::Parameter("commitment label must be non-empty".into()));
        }
        let payload = serde_json::to_value(CommitmentPayload {
            label: label.to_string(),
            value,
            timestamp,
        })?;
        let entry = LedgerEntry::new(EntryKind::CommitmentRecord, author, payload)?;
        let id = entry.entry_id;
        Ok((self.append_block(vec![entry], timestamp)?, id))
    }

    pub fn register_authority(
        &self,
        authority: &str,
        public_key: &BigUint,
        params: &GroupParams,
        timestamp: u64,
    ) -> Result<(LedgerState, Digest)> {
        let payload = serde_json::to_value(AuthorityPayload {
            public_key: public_key.clone(),
            params_id: params.id(),
            timestamp,
        })?;
        let entry = LedgerEntry::new(EntryKind::AuthorityKey, authority, payload)?;
        let id = entry.entry_id;
        Ok((self.append_block(vec![entry], timestamp)?, id))
    }

    /// Records the descriptor on-ledger and binds its verifier in memory.
    pub fn register_validator(
        &self,
        author: &str,
        validator: &Validator,
        timestamp: u64,
    ) -> Result<LedgerState> {
        self.register_validators(author, std::slice::from_ref(validator), timestamp)
    }

    /// Registers several validators in one block.
    pub fn register_validators(
        &self,
        author: &str,
        validators: &[Validator],
        timestamp: u64,
    ) -> Result<LedgerState> {
        let entries = validators
            .iter()
            .map(|v| {
                let payload = serde_json::to_value(ValidatorPayload {
                    descriptor: v.descriptor.clone(),
                    timestamp,
                })?;
                LedgerEntry::new(EntryKind::ValidatorRegistration, author, payload)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = self.append_block(entries, timestamp)?;
        for v in validators {
            next.verifiers.insert(v.descriptor.id.clone(), v.verify);
        }
        Ok(next)
    }

    fn verifier(&self, validator_id: &str) -> Result<(&ValidatorDescriptor, VerifyFn)> {
        let descriptor = self
            .validator(validator_id)
            .ok_or_else(|| Error::Lookup(format!("validator `{validator_id}` is not registered")))?;
        let verify = self.verifiers.get(validator_id).copied().ok_or_else(|| {
            Error::Lookup(format!("validator `{validator_id}` has no bound implementation"))
        })?;
        Ok((descriptor, verify))
    }

    /// Runs a registered validator without recording anything.
    pub fn check_with_validator(
        &self,
        validator_id: &str,
        statement: &Value,
        proof: &Value,
    ) -> Result<Verdict> {
        let (_, verify) = self.verifier(validator_id)?;
        Ok(verify(statement, proof, self))
    }

    /// Runs a registered validator and appends its verdict to the ledger.
    pub fn invoke_validator(
        &self,
        validator_id: &str,
        statement: &Value,
        proof: &Value,
        timestamp: u64,
    ) -> Result<(LedgerState, VerificationResult)> {
        let (descriptor, verify) = self.verifier(validator_id)?;
        let version = descriptor.version.clone();
        let (statement, proof, statement_digest, verdict) = match (
            canonical::value_to_vec(statement),
            canonical::value_to_vec(proof),
        ) {
            (Ok(sb), Ok(_)) => (
                statement.clone(),
                proof.clone(),
                crate::hash::sha256(&sb),
                verify(statement, proof, self),
            ),
            _ => (
                Value::Null,
                Value::Null,
                Digest::ZERO,
                Verdict::reject("non-canonical-input"),
            ),
        };
        let payload = serde_json::to_value(VerificationPayload {
            validator_id: validator_id.to_string(),
            version,
            statement,
            proof,
            statement_digest,
            verdict: verdict.verdict,
            reason: verdict.reason.clone(),
            timestamp,
        })?;
        let entry = LedgerEntry::new(EntryKind::VerificationResult, validator_id, payload)?;
        let result = VerificationResult {
            entry_id: entry.entry_id,
            validator_id: validator_id.to_string(),
            statement_digest,
            verdict: verdict.verdict,
            reason: verdict.reason,
        };
        Ok((self.append_block(vec![entry], timestamp)?, result))
    }

    /// All recorded verification results, oldest first.
    pub fn verification_results(&self) -> Vec<VerificationResult> {
        self.entries()
            .filter(|e| e.kind == EntryKind::VerificationResult)
            .filter_map(|e| {
                let p: VerificationPayload = canonical::from_value(&e.payload).ok()?;
                Some(VerificationResult {
                    entry_id: e.entry_id,
                    validator_id: p.validator_id,
                    statement_digest: p.statement_digest,
                    verdict: p.verdict,
                    reason: p.reason,
                })
            })
            .collect()
    }

    /// Re-runs every recorded verification against the ledger as it stood
    /// just before the result was appended.
    pub fn replay_verifications(&self) -> Vec<Replay> {
        let mut out = Vec::new();
        for (i, block) in self.blocks.iter().enumerate() {
            for entry in &block.entries {
                if entry.kind != EntryKind::VerificationResult {
                    continue;
                }
                let Ok(p) = canonical::from_value::<VerificationPayload>(&entry.payload) else {
                    out.push(Replay {
                        entry_id: entry.entry_id,
                        recorded: false,
                        recomputed: None,
                    });
                    continue;
                };
                let prefix = self.prefix(i);
                let recomputed = if p.statement.is_null() {
                    Some(false)
                } else {
                    prefix
                        .check_with_validator(&p.validator_id, &p.statement, &p.proof)
                        .ok()
                        .map(|v| v.verdict)
                };
                out.push(Replay {
                    entry_id: entry.entry_id,
                    recorded: p.verdict,
                    recomputed,
                });
            }
        }
        out
    }

    /// The ledger truncated to its first `n` blocks.
    pub fn prefix(&self, n: usize) -> LedgerState {
        let blocks: Vec<Arc<Block>> = self.blocks.iter().take(n).cloned().collect();
        let mut derived = Derived::default();
        for b in &blocks {
            // prefixes of an audited ledger always derive cleanly
            let _ = derived.apply_block(b);
        }
        LedgerState {
            blocks,
            derived,
            verifiers: self.verifiers.clone(),
        }
    }

    /// True iff hash links, entry roots, entry ids and the lookup indexes
    /// all recompute from the stored blocks.
    pub fn audit_chain(&self) -> bool {
        self.audit().is_ok()
    }

    pub fn audit(&self) -> Result<(), AuditFailure> {
        let mut derived = Derived::default();
        let mut prev: Option<&Block> = None;
        for (i, block) in self.blocks().enumerate() {
            let fail = |reason: &str| AuditFailure {
                block: i as u64,
                reason: reason.to_string(),
            };
            if block.index != i as u64 {
                return Err(fail("index out of sequence"));
            }
            let expected_prev = prev.map_or(Digest::ZERO, |p| p.block_hash);
            if block.prev_hash != expected_prev {
                return Err(fail("prev_hash does not link to the previous block"));
            }
            if let Some(p) = prev {
                if block.timestamp < p.timestamp {
                    return Err(fail("timestamp regression"));
                }
            }
            if block.entries.is_empty() {
                return Err(fail("empty block"));
            }
            if let Some(bad) = block.entries.iter().find(|e| !e.is_consistent()) {
                return Err(fail(&format!("entry {} does not match its content", bad.entry_id)));
            }
            match Block::entries_root_of(&block.entries) {
                Ok(root) if root == block.entries_root => {}
                _ => return Err(fail("entries_root mismatch")),
            }
            let header = Block::header_hash(block.index, &block.prev_hash, block.timestamp, &block.entries_root);
            if header != block.block_hash {
                return Err(fail("block_hash mismatch"));
            }
            derived
                .apply_block(block)
                .map_err(|e| fail(&format!("invalid entry: {e}")))?;
            prev = Some(block);
        }
        if derived != self.derived {
            return Err(AuditFailure {
                block: self.blocks.len() as u64,
                reason: "lookup indexes disagree with block contents".into(),
            });
        }
        if let Some(id) = self.verifiers.keys().find(|id| !derived.validators.contains_key(*id)) {
            return Err(AuditFailure {
                block: self.blocks.len() as u64,
                reason: format!("verifier `{id}` bound without an on-ledger registration"),
            });
        }
        Ok(())
    }

    /// One canonical-JSON block per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for block in self.blocks() {
            out.push_str(&canonical::to_string(block)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses exported blocks and rebinds verifiers through `resolve`.
    ///
    /// Only structural parsing can fail here; integrity problems surface
    /// through [`LedgerState::audit_chain`].
    pub fn from_jsonl(
        text: &str,
        resolve: impl Fn(&ValidatorDescriptor) -> Option<VerifyFn>,
    ) -> Result<LedgerState> {
        let blocks = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<Block>(l).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        let mut derived = Derived::default();
        for b in &blocks {
            let mut attempt = derived.clone();
            if attempt.apply_block(b).is_ok() {
                derived = attempt;
            }
        }
        let verifiers = derived
            .validators
            .values()
            .filter_map(|d| resolve(d).map(|f| (d.id.clone(), f)))
            .collect();
        Ok(LedgerState {
            blocks: blocks.into_iter().map(Arc::new).collect(),
            derived,
            verifiers,
        })
    }
}
