use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::group::GroupParams;
use super::transcript::{NonceStream, Transcript};
use super::Rejection;
use crate::canonical::{self, hex_uint};
use crate::error::{Error, Result};

pub const SIGNATURE_TAG: &str = "proofchain/signature/v1";

/// Schnorr signature `(R, s)` with `g^s = R · pk^e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    #[serde(rename = "R", with = "hex_uint")]
    pub nonce_point: BigUint,
    #[serde(with = "hex_uint")]
    pub s: BigUint,
    #[serde(with = "hex_uint")]
    pub signer_key: BigUint,
}

pub fn public_key(secret_key: &BigUint, params: &GroupParams) -> BigUint {
    params.g_pow(secret_key)
}

fn challenge(pk: &BigUint, nonce_point: &BigUint, message: &[u8], params: &GroupParams) -> BigUint {
    let mut tr = Transcript::new(SIGNATURE_TAG, params);
    tr.append_json(&json!({ "public_key": canonical::encode_uint(pk) }));
    tr.append_json(&json!({ "R": canonical::encode_uint(nonce_point) }));
    tr.append_bytes(message);
    tr.challenge(params)
}

pub fn sign_message(
    secret_key: &BigUint,
    message: &[u8],
    rng_seed: &[u8],
    params: &GroupParams,
) -> Result<Signature> {
    if secret_key.is_zero() || !params.is_scalar(secret_key) {
        return Err(Error::Parameter("secret key must lie in (0, q)".into()));
    }
    let pk = public_key(secret_key, params);
    let mut nonces = NonceStream::new(SIGNATURE_TAG, rng_seed, message, &[secret_key]);
    let k = nonces.next_scalar(params);
    let nonce_point = params.g_pow(&k);
    let e = challenge(&pk, &nonce_point, message, params);
    Ok(Signature {
        s: params.scalar_add(&k, &params.scalar_mul(&e, secret_key)),
        nonce_point,
        signer_key: pk,
    })
}

pub fn check_signature(
    sig: &Signature,
    message: &[u8],
    params: &GroupParams,
) -> Result<(), Rejection> {
    if !params.is_element(&sig.nonce_point) || !params.is_element(&sig.signer_key) {
        return Err(Rejection::NotInSubgroup);
    }
    if !params.is_scalar(&sig.s) {
        return Err(Rejection::ScalarOutOfRange);
    }
    let e = challenge(&sig.signer_key, &sig.nonce_point, message, params);
    let rhs = params.mul(&sig.nonce_point, &params.pow(&sig.signer_key, &e));
    if params.g_pow(&sig.s) == rhs {
        Ok(())
    } else {
        Err(Rejection::Equation)
    }
}

pub fn verify_signature(sig: &Signature, message: &[u8], params: &GroupParams) -> bool {
    check_signature(sig, message, params).is_ok()
}
