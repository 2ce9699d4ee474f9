//! The zero-knowledge computation units: each takes the owner's openings and
//! emits shared data (the statement's `outputs`) together with a proof.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::records::{field_blinding, field_commitment, Inclusion, PreservedCommitment};
use super::{GEQ_VALIDATOR, REVEAL_VALIDATOR, SUM_VALIDATOR};
use crate::canonical::{self, hex_array, hex_uint};
use crate::crypto::{prove_geq, Commitment, RangeProof};
use crate::error::{Error, Result};
use crate::hash::Digest;

use super::records::FieldValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Reveal,
    Geq,
    Sum,
}

impl UnitKind {
    pub fn validator_id(self) -> &'static str {
        match self {
            UnitKind::Reveal => REVEAL_VALIDATOR,
            UnitKind::Geq => GEQ_VALIDATOR,
            UnitKind::Sum => SUM_VALIDATOR,
        }
    }
}

/// Public statement of a bundle. `outputs` is the shared data itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub unit: UnitKind,
    pub anchor: Digest,
    pub owner: String,
    pub params_id: Digest,
    pub field: String,
    pub records: Vec<String>,
    pub outputs: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct RevealProof {
    pub statement_digest: Digest,
    #[serde(with = "hex_array")]
    pub salt: [u8; 16],
    pub inclusion: Inclusion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct GeqProof {
    pub statement_digest: Digest,
    pub commitment: Commitment,
    pub inclusion: Inclusion,
    pub range: RangeProof,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct SumItem {
    pub commitment: Commitment,
    pub inclusion: Inclusion,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct SumProof {
    pub statement_digest: Digest,
    pub items: Vec<SumItem>,
    #[serde(with = "hex_uint")]
    pub blinding_sum: BigUint,
}

/// Shared data plus proof, addressed to a registered validator. Stored as
/// canonical JSON in `.zkb` files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZkLinkBundle {
    pub statement: Value,
    pub proof: Value,
    pub validator_id: String,
}

impl ZkLinkBundle {
    fn assemble<P: Serialize>(statement: &Statement, make_proof: impl FnOnce(Digest) -> P) -> Result<Self> {
        let statement_value = serde_json::to_value(statement)?;
        let digest = canonical::digest(&statement_value)?;
        Ok(ZkLinkBundle {
            statement: statement_value,
            proof: serde_json::to_value(make_proof(digest))?,
            validator_id: statement.unit.validator_id().to_string(),
        })
    }

    pub fn parse_statement(&self) -> Result<Statement> {
        canonical::from_value(&self.statement)
    }

    /// Digest of the shared outputs; a proof-chain entity carrying this
    /// bundle's data must have this payload digest.
    pub fn shared_digest(&self) -> Result<Digest> {
        let outputs = self
            .statement
            .get("outputs")
            .ok_or_else(|| Error::Encoding("statement has no outputs".into()))?;
        canonical::digest(outputs)
    }

    pub fn to_canonical(&self) -> Result<Vec<u8>> {
        canonical::to_vec(self)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        canonical::from_slice(bytes)
    }
}

fn base_statement(pc: &PreservedCommitment, unit: UnitKind, field: &str, records: Vec<String>, outputs: Value) -> Statement {
    Statement {
        unit,
        anchor: pc.anchor(),
        owner: pc.owner().to_string(),
        params_id: pc.params().id(),
        field: field.to_string(),
        records,
        outputs,
    }
}

/// Selective disclosure of one field: reveals `(salt, name, value)` and the
/// Merkle paths up to the anchored root, nothing else.
pub fn zkcu_reveal_field(pc: &PreservedCommitment, record_id: &str, field: &str) -> Result<ZkLinkBundle> {
    let (ri, fi) = pc.locate(record_id, field)?;
    let f = pc.field_at(ri, fi);
    let inclusion = pc.inclusion(ri, fi)?;
    let statement = base_statement(
        pc,
        UnitKind::Reveal,
        field,
        vec![record_id.to_string()],
        json!({ "value": f.value }),
    );
    ZkLinkBundle::assemble(&statement, |statement_digest| RevealProof {
        statement_digest,
        salt: f.salt,
        inclusion,
    })
}

/// Proves `field >= threshold` for one record without revealing the value.
pub fn zkcu_predicate_geq(
    pc: &PreservedCommitment,
    record_id: &str,
    field: &str,
    threshold: &BigUint,
    n_bits: u32,
    rng_seed: &[u8],
) -> Result<ZkLinkBundle> {
    let params = pc.params();
    let (ri, fi) = pc.locate(record_id, field)?;
    let f = pc.field_at(ri, fi);
    let FieldValue::Int(v) = &f.value else {
        return Err(Error::Parameter(format!("field `{field}` is not numeric")));
    };
    let commitment = field_commitment(f, &params)?;
    let r = field_blinding(&f.salt, &f.name, &params);
    let range = prove_geq(&commitment, v, &r, threshold, n_bits, rng_seed, &params)?;
    let statement = base_statement(
        pc,
        UnitKind::Geq,
        field,
        vec![record_id.to_string()],
        json!({
            "threshold": canonical::encode_uint(threshold),
            "n_bits": canonical::encode_u64(u64::from(n_bits)),
        }),
    );
    let inclusion = pc.inclusion(ri, fi)?;
    ZkLinkBundle::assemble(&statement, |statement_digest| GeqProof {
        statement_digest,
        commitment,
        inclusion,
        range,
    })
}

/// Claims `sum(field over record_ids) = claimed_total`. The bundle reveals
/// the per-record commitments and the sum of their blinding factors; the
/// individual values and blindings stay hidden.
pub fn zkcu_aggregate_sum(
    pc: &PreservedCommitment,
    record_ids: &[&str],
    field: &str,
    claimed_total: &BigUint,
) -> Result<ZkLinkBundle> {
    let params = pc.params();
    if record_ids.is_empty() {
        return Err(Error::Parameter("aggregate over zero records".into()));
    }
    if !params.is_scalar(claimed_total) {
        return Err(Error::Parameter("claimed total is not below the group order".into()));
    }
    let mut seen = BTreeSet::new();
    let mut items = Vec::with_capacity(record_ids.len());
    let mut blinding_sum = BigUint::default();
    for id in record_ids {
        if !seen.insert(*id) {
            return Err(Error::Parameter(format!("record `{id}` listed twice")));
        }
        let (ri, fi) = pc
            .locate(id, field)
            .map_err(|_| Error::Parameter(format!("record `{id}` has no field `{field}`")))?;
        let f = pc.field_at(ri, fi);
        let commitment = field_commitment(f, &params)?;
        blinding_sum = params.scalar_add(&blinding_sum, &field_blinding(&f.salt, &f.name, &params));
        items.push(SumItem {
            commitment,
            inclusion: pc.inclusion(ri, fi)?,
        });
    }
    let statement = base_statement(
        pc,
        UnitKind::Sum,
        field,
        record_ids.iter().map(|s| s.to_string()).collect(),
        json!({
            "total": canonical::encode_uint(claimed_total),
            "count": canonical::encode_u64(record_ids.len() as u64),
        }),
    );
    ZkLinkBundle::assemble(&statement, |statement_digest| SumProof {
        statement_digest,
        items,
        blinding_sum,
    })
}
