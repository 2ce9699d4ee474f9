use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::de::DeserializeOwned;
use serde_json::Value;

use super::records::{
    field_blinding, numeric_leaf_payload, text_leaf_payload, FieldValue, Inclusion,
};
use super::units::{GeqProof, RevealProof, Statement, SumProof, UnitKind, ZkLinkBundle};
use crate::canonical;
use crate::crypto::{check_geq, pedersen_commit, GroupParams};
use crate::error::Result;
use crate::ledger::{LedgerState, Validator, ValidatorDescriptor, VerificationResult, Verdict};

use super::{GEQ_VALIDATOR, REVEAL_VALIDATOR, SUM_VALIDATOR};

const VALIDATOR_VERSION: &str = "1";

fn verify_reveal(statement: &Value, proof: &Value, ledger: &LedgerState) -> Verdict {
    verify_unit(UnitKind::Reveal, statement, proof, ledger).unwrap_or_else(|v| v)
}

fn verify_geq(statement: &Value, proof: &Value, ledger: &LedgerState) -> Verdict {
    verify_unit(UnitKind::Geq, statement, proof, ledger).unwrap_or_else(|v| v)
}

fn verify_sum(statement: &Value, proof: &Value, ledger: &LedgerState) -> Verdict {
    verify_unit(UnitKind::Sum, statement, proof, ledger).unwrap_or_else(|v| v)
}

/// The validators for the built-in units. A new unit registers the same
/// way: a descriptor plus a pure verifier function.
pub fn builtin_validators() -> Vec<Validator> {
    let make = |id: &str, schema: &str, verify| Validator {
        descriptor: ValidatorDescriptor {
            id: id.to_string(),
            version: VALIDATOR_VERSION.to_string(),
            statement_schema: schema.to_string(),
        },
        verify,
    };
    vec![
        make(REVEAL_VALIDATOR, "reveal-field/v1", verify_reveal),
        make(GEQ_VALIDATOR, "predicate-geq/v1", verify_geq),
        make(SUM_VALIDATOR, "aggregate-sum/v1", verify_sum),
    ]
}

/// Rebinds a built-in verifier to an on-ledger descriptor after import.
pub fn resolve_builtin(descriptor: &ValidatorDescriptor) -> Option<crate::ledger::VerifyFn> {
    builtin_validators()
        .into_iter()
        .find(|v| v.descriptor == *descriptor)
        .map(|v| v.verify)
}

pub fn register_builtin_validators(
    ledger: &LedgerState,
    author: &str,
    timestamp: u64,
) -> Result<LedgerState> {
    ledger.register_validators(author, &builtin_validators(), timestamp)
}

/// Pure validation of a bundle against the ledger; nothing is recorded.
pub fn check_bundle(ledger: &LedgerState, bundle: &ZkLinkBundle) -> Verdict {
    match ledger.check_with_validator(&bundle.validator_id, &bundle.statement, &bundle.proof) {
        Ok(v) => v,
        Err(_) => Verdict::reject("unknown-validator"),
    }
}

/// Validates a bundle through its registered validator and records the
/// verdict on the ledger.
pub fn validate_shared(
    ledger: &LedgerState,
    bundle: &ZkLinkBundle,
    timestamp: u64,
) -> Result<(LedgerState, VerificationResult)> {
    ledger.invoke_validator(&bundle.validator_id, &bundle.statement, &bundle.proof, timestamp)
}

type Check<T> = std::result::Result<T, Verdict>;

fn parse<T: DeserializeOwned>(value: &Value, reason: &str) -> Check<T> {
    canonical::from_value(value).map_err(|_| Verdict::reject(reason))
}

fn ensure(cond: bool, reason: &str) -> Check<()> {
    if cond {
        Ok(())
    } else {
        Err(Verdict::reject(reason))
    }
}

fn out_uint(outputs: &Value, key: &str) -> Check<BigUint> {
    outputs
        .get(key)
        .and_then(Value::as_str)
        .and_then(|s| canonical::decode_uint(s).ok())
        .ok_or_else(|| Verdict::reject("malformed-outputs"))
}

fn verify_unit(unit: UnitKind, statement: &Value, proof: &Value, ledger: &LedgerState) -> Check<Verdict> {
    let stmt: Statement = parse(statement, "malformed-statement")?;
    ensure(stmt.unit == unit, "unit-mismatch")?;
    let digest = canonical::digest(statement).map_err(|_| Verdict::reject("malformed-statement"))?;
    let params = GroupParams::by_id(&stmt.params_id).ok_or_else(|| Verdict::reject("unknown-params"))?;

    // right data source: the anchor must be a digest committed by the owner
    let record = ledger
        .commitment_record(&stmt.anchor)
        .ok_or_else(|| Verdict::reject("unanchored"))?;
    ensure(record.author == stmt.owner, "owner-mismatch")?;
    let root = record.value.digest().ok_or_else(|| Verdict::reject("unanchored"))?;
    let included = |record_id: &str, inclusion: &Inclusion, leaf: &[u8]| {
        ensure(inclusion.set_root(record_id, leaf) == root, "source-mismatch")
    };

    match unit {
        UnitKind::Reveal => {
            let p: RevealProof = parse(proof, "malformed-proof")?;
            ensure(p.statement_digest == digest, "statement-digest-mismatch")?;
            let [record_id] = stmt.records.as_slice() else {
                return Err(Verdict::reject("malformed-statement"));
            };
            let value: FieldValue = stmt
                .outputs
                .get("value")
                .ok_or_else(|| Verdict::reject("malformed-outputs"))
                .and_then(|v| parse(v, "malformed-outputs"))?;
            let leaf = match &value {
                FieldValue::Int(v) => {
                    let r = field_blinding(&p.salt, &stmt.field, &params);
                    let c = pedersen_commit(v, &r, &params)
                        .map_err(|_| Verdict::reject("malformed-outputs"))?;
                    numeric_leaf_payload(&stmt.field, &c, &params)
                }
                FieldValue::Text(s) => text_leaf_payload(&stmt.field, s, &p.salt),
            };
            included(record_id, &p.inclusion, &leaf)?;
        }
        UnitKind::Geq => {
            let p: GeqProof = parse(proof, "malformed-proof")?;
            ensure(p.statement_digest == digest, "statement-digest-mismatch")?;
            let [record_id] = stmt.records.as_slice() else {
                return Err(Verdict::reject("malformed-statement"));
            };
            let threshold = out_uint(&stmt.outputs, "threshold")?;
            let n_bits = u32::try_from(out_uint(&stmt.outputs, "n_bits")?)
                .map_err(|_| Verdict::reject("malformed-outputs"))?;
            ensure(p.commitment.is_well_formed(&params), "malformed-proof")?;
            included(
                record_id,
                &p.inclusion,
                &numeric_leaf_payload(&stmt.field, &p.commitment, &params),
            )?;
            check_geq(&p.commitment, &threshold, n_bits, &p.range, &params)
                .map_err(|r| Verdict::reject(r.code()))?;
        }
        UnitKind::Sum => {
            let p: SumProof = parse(proof, "malformed-proof")?;
            ensure(p.statement_digest == digest, "statement-digest-mismatch")?;
            let total = out_uint(&stmt.outputs, "total")?;
            let count = out_uint(&stmt.outputs, "count")?;
            ensure(!stmt.records.is_empty(), "malformed-statement")?;
            ensure(
                count == BigUint::from(stmt.records.len()) && p.items.len() == stmt.records.len(),
                "count-mismatch",
            )?;
            let distinct: BTreeSet<&String> = stmt.records.iter().collect();
            ensure(distinct.len() == stmt.records.len(), "duplicate-record")?;
            ensure(
                params.is_scalar(&total) && params.is_scalar(&p.blinding_sum),
                "malformed-outputs",
            )?;
            let mut product = BigUint::one();
            for (record_id, item) in stmt.records.iter().zip(&p.items) {
                ensure(item.commitment.is_well_formed(&params), "malformed-proof")?;
                included(
                    record_id,
                    &item.inclusion,
                    &numeric_leaf_payload(&stmt.field, &item.commitment, &params),
                )?;
                product = params.mul(&product, &item.commitment.value);
            }
            let expected = pedersen_commit(&total, &p.blinding_sum, &params)
                .map_err(|_| Verdict::reject("malformed-outputs"))?;
            ensure(expected.value == product, "aggregate-mismatch")?;
        }
    }
    Ok(Verdict::accept())
}
