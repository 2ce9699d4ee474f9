use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::group::GroupParams;
use super::pedersen::Commitment;
use super::transcript::{NonceStream, Transcript};
use super::Rejection;
use crate::canonical::{self, hex_uint};
use crate::error::{Error, Result};

pub const OPENING_TAG: &str = "proofchain/opening/v1";

/// Non-interactive proof of knowledge of `(v, r)` with `C = g^v h^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpeningProof {
    #[serde(with = "hex_uint")]
    pub t: BigUint,
    #[serde(with = "hex_uint")]
    pub z1: BigUint,
    #[serde(with = "hex_uint")]
    pub z2: BigUint,
    pub domain_tag: String,
}

fn statement(c: &Commitment) -> Value {
    json!({ "commitment": canonical::encode_uint(&c.value) })
}

fn challenge(c: &Commitment, t: &BigUint, params: &GroupParams) -> BigUint {
    let mut tr = Transcript::new(OPENING_TAG, params);
    tr.append_json(&statement(c));
    tr.append_json(&json!({ "t": canonical::encode_uint(t) }));
    tr.challenge(params)
}

pub fn prove_opening(
    c: &Commitment,
    v: &BigUint,
    r: &BigUint,
    rng_seed: &[u8],
    params: &GroupParams,
) -> Result<OpeningProof> {
    if !c.opens_to(v, r, params) {
        return Err(Error::ProofGeneration(
            "opening does not match the commitment".into(),
        ));
    }
    let stmt = canonical::value_to_vec(&statement(c))?;
    let mut nonces = NonceStream::new(OPENING_TAG, rng_seed, &stmt, &[v, r]);
    let a = nonces.next_scalar(params);
    let b = nonces.next_scalar(params);
    let t = params.mul(&params.g_pow(&a), &params.h_pow(&b));
    let e = challenge(c, &t, params);
    Ok(OpeningProof {
        z1: params.scalar_add(&a, &params.scalar_mul(&e, v)),
        z2: params.scalar_add(&b, &params.scalar_mul(&e, r)),
        t,
        domain_tag: OPENING_TAG.to_string(),
    })
}

/// Checks `g^z1 · h^z2 = t · C^e` with `e` recomputed from the transcript.
pub fn check_opening(
    c: &Commitment,
    proof: &OpeningProof,
    params: &GroupParams,
) -> Result<(), Rejection> {
    if c.params_id != params.id() {
        return Err(Rejection::ParamsMismatch);
    }
    if proof.domain_tag != OPENING_TAG {
        return Err(Rejection::DomainTag);
    }
    if !params.is_element(&c.value) || !params.is_element(&proof.t) {
        return Err(Rejection::NotInSubgroup);
    }
    if !params.is_scalar(&proof.z1) || !params.is_scalar(&proof.z2) {
        return Err(Rejection::ScalarOutOfRange);
    }
    let e = challenge(c, &proof.t, params);
    let lhs = params.mul(&params.g_pow(&proof.z1), &params.h_pow(&proof.z2));
    let rhs = params.mul(&proof.t, &params.pow(&c.value, &e));
    if lhs == rhs {
        Ok(())
    } else {
        Err(Rejection::Equation)
    }
}

pub fn verify_opening(c: &Commitment, proof: &OpeningProof, params: &GroupParams) -> bool {
    check_opening(c, proof, params).is_ok()
}
