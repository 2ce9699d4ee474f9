use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::group::GroupParams;
use super::pedersen::Commitment;
use super::transcript::{NonceStream, Transcript};
use super::Rejection;
use crate::canonical::{self, hex_u32, hex_uint};
use crate::error::{Error, Result};

pub const RANGE_BIT_TAG: &str = "proofchain/range-bit/v1";

/// OR-proof that a bit commitment opens to 0 or to 1: either `C = h^x` or
/// `C/g = h^x`. One branch is real, the other simulated, and `c0 + c1`
/// equals the Fiat–Shamir challenge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitProof {
    #[serde(with = "hex_uint")]
    pub t0: BigUint,
    #[serde(with = "hex_uint")]
    pub t1: BigUint,
    #[serde(with = "hex_uint")]
    pub c0: BigUint,
    #[serde(with = "hex_uint")]
    pub c1: BigUint,
    #[serde(with = "hex_uint")]
    pub s0: BigUint,
    #[serde(with = "hex_uint")]
    pub s1: BigUint,
}

/// Proof that a commitment opens to a value in `[0, 2^n_bits)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeProof {
    #[serde(with = "hex_u32")]
    pub n_bits: u32,
    pub bit_commitments: Vec<Commitment>,
    pub bit_proofs: Vec<BitProof>,
    pub domain_tag: String,
}

fn bit_challenge(
    target: &Commitment,
    bit: &BigUint,
    index: usize,
    n_bits: u32,
    t0: &BigUint,
    t1: &BigUint,
    params: &GroupParams,
) -> BigUint {
    let mut tr = Transcript::new(RANGE_BIT_TAG, params);
    tr.append_json(&json!({
        "target": canonical::encode_uint(&target.value),
        "bit": canonical::encode_uint(bit),
        "index": canonical::encode_u64(index as u64),
        "n_bits": canonical::encode_u64(u64::from(n_bits)),
    }));
    tr.append_json(&json!({
        "t0": canonical::encode_uint(t0),
        "t1": canonical::encode_uint(t1),
    }));
    tr.challenge(params)
}

fn check_bits_param(n_bits: u32, params: &GroupParams) -> Result<()> {
    if n_bits == 0 {
        return Err(Error::Parameter("n_bits must be positive".into()));
    }
    if n_bits > params.max_range_bits() {
        return Err(Error::Parameter(format!(
            "2^{n_bits} exceeds the group order"
        )));
    }
    Ok(())
}

pub fn prove_range(
    c: &Commitment,
    v: &BigUint,
    r: &BigUint,
    n_bits: u32,
    rng_seed: &[u8],
    params: &GroupParams,
) -> Result<RangeProof> {
    check_bits_param(n_bits, params)?;
    if v.bits() > u64::from(n_bits) {
        return Err(Error::ProofGeneration(format!(
            "value does not fit in {n_bits} bits"
        )));
    }
    if !c.opens_to(v, r, params) {
        return Err(Error::ProofGeneration(
            "opening does not match the commitment".into(),
        ));
    }

    let stmt = canonical::value_to_vec(&json!({
        "target": canonical::encode_uint(&c.value),
        "n_bits": canonical::encode_u64(u64::from(n_bits)),
    }))?;
    let mut nonces = NonceStream::new(RANGE_BIT_TAG, rng_seed, &stmt, &[v, r]);

    // Split r so that sum(2^i * r_i) = r (mod q); the top blinding factor
    // absorbs the remainder.
    let n = n_bits as usize;
    let mut blindings: Vec<BigUint> = (0..n - 1).map(|_| nonces.next_scalar(params)).collect();
    let mut weighted = BigUint::default();
    for (i, ri) in blindings.iter().enumerate() {
        weighted = params.scalar_add(&weighted, &params.scalar_mul(&(BigUint::one() << i), ri));
    }
    let top_weight_inv = params.scalar_inv(&((BigUint::one() << (n - 1)) % params.q()));
    blindings.push(params.scalar_mul(&params.scalar_sub(r, &weighted), &top_weight_inv));

    let mut bit_commitments = Vec::with_capacity(n);
    let mut bit_proofs = Vec::with_capacity(n);
    for (i, ri) in blindings.iter().enumerate() {
        let bit = v.bit(i as u64);
        let ci = params.mul(
            &params.g_pow(&BigUint::from(u8::from(bit))),
            &params.h_pow(ri),
        );
        let y = [ci.clone(), params.div(&ci, params.g())];
        let real = usize::from(bit);
        let fake = 1 - real;

        let k = nonces.next_scalar(params);
        let c_fake = nonces.next_scalar(params);
        let s_fake = nonces.next_scalar(params);

        let mut t = [BigUint::default(), BigUint::default()];
        t[real] = params.h_pow(&k);
        t[fake] = params.div(&params.h_pow(&s_fake), &params.pow(&y[fake], &c_fake));

        let e = bit_challenge(c, &ci, i, n_bits, &t[0], &t[1], params);
        let c_real = params.scalar_sub(&e, &c_fake);
        let s_real = params.scalar_add(&k, &params.scalar_mul(&c_real, ri));

        let (mut cs, mut ss) = (
            [BigUint::default(), BigUint::default()],
            [BigUint::default(), BigUint::default()],
        );
        cs[real] = c_real;
        cs[fake] = c_fake;
        ss[real] = s_real;
        ss[fake] = s_fake;
        let [t0, t1] = t;
        let [c0, c1] = cs;
        let [s0, s1] = ss;
        bit_commitments.push(Commitment::from_value(ci, params));
        bit_proofs.push(BitProof {
            t0,
            t1,
            c0,
            c1,
            s0,
            s1,
        });
    }

    Ok(RangeProof {
        n_bits,
        bit_commitments,
        bit_proofs,
        domain_tag: RANGE_BIT_TAG.to_string(),
    })
}

pub fn check_range(
    c: &Commitment,
    proof: &RangeProof,
    n_bits: u32,
    params: &GroupParams,
) -> Result<(), Rejection> {
    if c.params_id != params.id() {
        return Err(Rejection::ParamsMismatch);
    }
    if proof.domain_tag != RANGE_BIT_TAG {
        return Err(Rejection::DomainTag);
    }
    let n = n_bits as usize;
    if n_bits == 0
        || n_bits > params.max_range_bits()
        || proof.n_bits != n_bits
        || proof.bit_commitments.len() != n
        || proof.bit_proofs.len() != n
    {
        return Err(Rejection::LengthMismatch);
    }
    if !params.is_element(&c.value) {
        return Err(Rejection::NotInSubgroup);
    }

    let mut recombined = BigUint::one();
    for (i, (ci, bp)) in proof
        .bit_commitments
        .iter()
        .zip(&proof.bit_proofs)
        .enumerate()
    {
        if ci.params_id != params.id() {
            return Err(Rejection::ParamsMismatch);
        }
        if ![&ci.value, &bp.t0, &bp.t1]
            .into_iter()
            .all(|x| params.is_element(x))
        {
            return Err(Rejection::NotInSubgroup);
        }
        if ![&bp.c0, &bp.c1, &bp.s0, &bp.s1]
            .into_iter()
            .all(|x| params.is_scalar(x))
        {
            return Err(Rejection::ScalarOutOfRange);
        }
        let e = bit_challenge(c, &ci.value, i, n_bits, &bp.t0, &bp.t1, params);
        if params.scalar_add(&bp.c0, &bp.c1) != e {
            return Err(Rejection::ChallengeSplit);
        }
        let y0 = &ci.value;
        let y1 = params.div(&ci.value, params.g());
        let branch0 = params.h_pow(&bp.s0) == params.mul(&bp.t0, &params.pow(y0, &bp.c0));
        let branch1 = params.h_pow(&bp.s1) == params.mul(&bp.t1, &params.pow(&y1, &bp.c1));
        if !(branch0 && branch1) {
            return Err(Rejection::Equation);
        }
        let weight = (BigUint::one() << i) % params.q();
        recombined = params.mul(&recombined, &params.pow(&ci.value, &weight));
    }
    if recombined == c.value {
        Ok(())
    } else {
        Err(Rejection::Recombination)
    }
}

pub fn verify_range(c: &Commitment, proof: &RangeProof, n_bits: u32, params: &GroupParams) -> bool {
    check_range(c, proof, n_bits, params).is_ok()
}

fn check_threshold_param(t: &BigUint, n_bits: u32, params: &GroupParams) -> Result<()> {
    check_bits_param(n_bits, params)?;
    if t + (BigUint::one() << n_bits) > *params.q() {
        return Err(Error::Parameter(format!(
            "threshold plus 2^{n_bits} exceeds the group order"
        )));
    }
    Ok(())
}

/// Proves `v >= t` as a range proof for `v - t` on `C / g^t`.
pub fn prove_geq(
    c: &Commitment,
    v: &BigUint,
    r: &BigUint,
    t: &BigUint,
    n_bits: u32,
    rng_seed: &[u8],
    params: &GroupParams,
) -> Result<RangeProof> {
    check_threshold_param(t, n_bits, params)?;
    if v < t {
        return Err(Error::ProofGeneration(
            "committed value is below the threshold".into(),
        ));
    }
    if !c.opens_to(v, r, params) {
        return Err(Error::ProofGeneration(
            "opening does not match the commitment".into(),
        ));
    }
    prove_range(&c.shift_down(t, params), &(v - t), r, n_bits, rng_seed, params)
}

pub fn check_geq(
    c: &Commitment,
    t: &BigUint,
    n_bits: u32,
    proof: &RangeProof,
    params: &GroupParams,
) -> Result<(), Rejection> {
    if check_threshold_param(t, n_bits, params).is_err() {
        return Err(Rejection::LengthMismatch);
    }
    if c.params_id != params.id() {
        return Err(Rejection::ParamsMismatch);
    }
    if !params.is_element(&c.value) {
        return Err(Rejection::NotInSubgroup);
    }
    check_range(&c.shift_down(t, params), proof, n_bits, params)
}
