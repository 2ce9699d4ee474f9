//! Fixtures shared by the benchmarks.

use num_bigint::BigUint;
use proofchain_core::crypto::{group_params, pedersen_commit, Commitment, GroupParams, Profile};
use proofchain_core::ledger::LedgerState;
use proofchain_core::zk_link::{commit_preserved, register_builtin_validators, PreservedCommitment, PreservedRecord};

pub fn params() -> GroupParams {
    group_params(Profile::Test)
}

/// A committed small value with a fixed blinding factor.
pub fn committed(v: u64, params: &GroupParams) -> (Commitment, BigUint, BigUint) {
    let v = BigUint::from(v);
    let r = BigUint::from(0x9e37_79b9_7f4a_7c15u64);
    let c = pedersen_commit(&v, &r, params).expect("scalars are in range");
    (c, v, r)
}

/// `n` records with one numeric field each, anchored on a fresh ledger.
pub fn record_set(n: usize, params: &GroupParams) -> (LedgerState, PreservedCommitment) {
    let ledger = register_builtin_validators(&LedgerState::new(), "operator", 0).expect("fresh ledger");
    let records = (0..n)
        .map(|i| PreservedRecord::seeded(&format!("r{i}"), vec![("amount", (100 + i as u64).into())], b"bench"))
        .collect();
    commit_preserved(records, "bench", "set", &ledger, 1, params).expect("records are well formed")
}
