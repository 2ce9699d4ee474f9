use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::group::GroupParams;
use crate::canonical::hex_uint;
use crate::error::{Error, Result};
use crate::hash::Digest;

/// A Pedersen commitment `g^v · h^r mod p`, tagged with the parameter set it
/// lives in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Commitment {
    #[serde(with = "hex_uint")]
    pub value: BigUint,
    pub params_id: Digest,
}

pub fn pedersen_commit(v: &BigUint, r: &BigUint, params: &GroupParams) -> Result<Commitment> {
    if !params.is_scalar(v) {
        return Err(Error::Range(format!("committed value {v} is not below q")));
    }
    if !params.is_scalar(r) {
        return Err(Error::Range("blinding factor is not below q".into()));
    }
    Ok(Commitment {
        value: params.mul(&params.g_pow(v), &params.h_pow(r)),
        params_id: params.id(),
    })
}

impl Commitment {
    pub fn from_value(value: BigUint, params: &GroupParams) -> Self {
        Commitment {
            value,
            params_id: params.id(),
        }
    }

    /// Homomorphic addition: the product commits to the sums of the openings.
    pub fn combine(&self, other: &Commitment, params: &GroupParams) -> Commitment {
        Commitment::from_value(params.mul(&self.value, &other.value), params)
    }

    /// `self / g^t`, a commitment to `v - t` under the same blinding factor.
    pub fn shift_down(&self, t: &BigUint, params: &GroupParams) -> Commitment {
        let gt = params.g_pow(&(t % params.q()));
        Commitment::from_value(params.div(&self.value, &gt), params)
    }

    pub fn is_well_formed(&self, params: &GroupParams) -> bool {
        self.params_id == params.id() && params.is_element(&self.value)
    }

    pub fn opens_to(&self, v: &BigUint, r: &BigUint, params: &GroupParams) -> bool {
        pedersen_commit(v, r, params).is_ok_and(|c| c == *self)
    }

    pub fn to_bytes(&self, params: &GroupParams) -> Vec<u8> {
        params.element_bytes(&self.value)
    }
}
