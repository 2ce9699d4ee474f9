//! Zero-knowledge links: private records are anchored on the ledger as a
//! Merkle root over per-field commitments; computation units derive shared
//! data with proofs; validators check that the shared data comes from the
//! anchored source and from the claimed computation.

mod records;
mod units;
mod validate;

pub use records::{
    commit_preserved, derive_salt, field_blinding, field_commitment, field_leaf_payload,
    numeric_leaf_payload, positioned, record_leaf_payload, text_leaf_payload, Field, FieldValue, Inclusion,
    OpeningsFile, PreservedCommitment, PreservedRecord,
};
pub use units::{
    zkcu_aggregate_sum, zkcu_predicate_geq, zkcu_reveal_field, Statement, UnitKind, ZkLinkBundle,
};
pub use validate::{
    builtin_validators, check_bundle, register_builtin_validators, resolve_builtin,
    validate_shared,
};

pub const REVEAL_VALIDATOR: &str = "zkcu.reveal";
pub const GEQ_VALIDATOR: &str = "zkcu.geq";
pub const SUM_VALIDATOR: &str = "zkcu.sum";

/// Default bit width for threshold predicates.
pub const DEFAULT_PREDICATE_BITS: u32 = 8;
