//! Prime-order group arithmetic and the sigma protocols built on it:
//! Pedersen commitments, proofs of opening, bit-decomposition range proofs
//! and Schnorr signatures, all made non-interactive with Fiat–Shamir.

mod group;
mod opening;
mod pedersen;
mod range;
mod signature;
mod transcript;

use thiserror::Error;

pub use group::{group_params, GroupParams, Profile};
pub use opening::{check_opening, prove_opening, verify_opening, OpeningProof, OPENING_TAG};
pub use pedersen::{pedersen_commit, Commitment};
pub use range::{
    check_geq, check_range, prove_geq, prove_range, verify_range, BitProof, RangeProof,
    RANGE_BIT_TAG,
};
pub use signature::{
    check_signature, public_key, sign_message, verify_signature, Signature, SIGNATURE_TAG,
};
pub use transcript::{NonceStream, Transcript};

/// Why a verifier rejected a transcript. Structural problems
/// (`NotInSubgroup`, `ScalarOutOfRange`, ...) are reported separately from a
/// failed verification equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("params-mismatch")]
    ParamsMismatch,
    #[error("not-in-subgroup")]
    NotInSubgroup,
    #[error("scalar-out-of-range")]
    ScalarOutOfRange,
    #[error("domain-tag-mismatch")]
    DomainTag,
    #[error("length-mismatch")]
    LengthMismatch,
    #[error("challenge-split-mismatch")]
    ChallengeSplit,
    #[error("equation-failed")]
    Equation,
    #[error("recombination-failed")]
    Recombination,
}

impl Rejection {
    pub fn code(&self) -> &'static str {
        match self {
            Rejection::ParamsMismatch => "params-mismatch",
            Rejection::NotInSubgroup => "not-in-subgroup",
            Rejection::ScalarOutOfRange => "scalar-out-of-range",
            Rejection::DomainTag => "domain-tag-mismatch",
            Rejection::LengthMismatch => "length-mismatch",
            Rejection::ChallengeSplit => "challenge-split-mismatch",
            Rejection::Equation => "equation-failed",
            Rejection::Recombination => "recombination-failed",
        }
    }

    /// Malformed input as opposed to an honest-looking transcript that fails.
    pub fn is_structural(&self) -> bool {
        !matches!(
            self,
            Rejection::Equation | Rejection::ChallengeSplit | Rejection::Recombination
        )
    }
}

/// Hash-to-scalar helper used for deterministic key and blinding derivation.
pub fn hash_to_scalar(tag: &str, parts: &[&[u8]], params: &GroupParams) -> num_bigint::BigUint {
    let mut stream = {
        let mut joined = Vec::new();
        for p in parts {
            joined.extend_from_slice(&(p.len() as u64).to_be_bytes());
            joined.extend_from_slice(p);
        }
        NonceStream::new(tag, &joined, &[], &[])
    };
    stream.next_scalar(params)
}
