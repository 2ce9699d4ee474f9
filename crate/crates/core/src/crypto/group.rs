use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::canonical;
use crate::error::{Error, Result};
use crate::hash::{sha256, Digest};

/// Which compiled-in parameter set to use.
///
/// `Toy` is a schoolbook group (p = 23) meant only for brute-force tests.
/// It offers no security whatsoever.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Toy,
    Test,
}

impl Profile {
    pub const ALL: [Profile; 2] = [Profile::Toy, Profile::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Toy => "toy",
            Profile::Test => "test",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "toy" => Ok(Profile::Toy),
            "test" => Ok(Profile::Test),
            other => Err(Error::Parameter(format!("unknown profile `{other}`"))),
        }
    }
}

// 256-bit safe prime p = 2q + 1, found by scanning upward from
// SHA-256("proofchain/p/v1") for the first q with q and 2q+1 both prime.
const TEST_P: &str = "cb6cf531e2ecaa30a961f24e075ae038f31010d215279aab511f7c113f532e6f";
const TEST_Q: &str = "65b67a98f176551854b0f92703ad701c798808690a93cd55a88fbe089fa99737";
const TEST_G: u32 = 4;

const H_SEED: &[u8] = b"proofchain/h/v1";

/// A safe-prime group `Z_p^*` restricted to its order-`q` subgroup, with two
/// generators `g` and `h` whose relative discrete log is unknown.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    h: BigUint,
    profile: Profile,
    id: Digest,
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("profile", &self.profile)
            .field("id", &self.id)
            .finish()
    }
}

/// Deterministic parameters for `profile`.
pub fn group_params(profile: Profile) -> GroupParams {
    GroupParams::new(profile)
}

impl GroupParams {
    pub fn new(profile: Profile) -> Self {
        let (p, q, g, h) = match profile {
            Profile::Toy => (
                BigUint::from(23u32),
                BigUint::from(11u32),
                BigUint::from(2u32),
                BigUint::from(3u32),
            ),
            Profile::Test => {
                let p = BigUint::parse_bytes(TEST_P.as_bytes(), 16).expect("constant");
                let q = BigUint::parse_bytes(TEST_Q.as_bytes(), 16).expect("constant");
                let g = BigUint::from(TEST_G);
                let h = derive_second_generator(&p, &g);
                (p, q, g, h)
            }
        };
        let id = canonical::digest(&json!({
            "p": canonical::encode_uint(&p),
            "q": canonical::encode_uint(&q),
            "g": canonical::encode_uint(&g),
            "h": canonical::encode_uint(&h),
            "profile": profile.as_str(),
        }))
        .expect("params encode canonically");
        GroupParams {
            p,
            q,
            g,
            h,
            profile,
            id,
        }
    }

    /// Looks up the compiled-in parameter set with the given digest.
    pub fn by_id(id: &Digest) -> Option<GroupParams> {
        Profile::ALL
            .into_iter()
            .map(GroupParams::new)
            .find(|params| params.id == *id)
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }
    pub fn q(&self) -> &BigUint {
        &self.q
    }
    pub fn g(&self) -> &BigUint {
        &self.g
    }
    pub fn h(&self) -> &BigUint {
        &self.h
    }
    pub fn profile(&self) -> Profile {
        self.profile
    }
    pub fn id(&self) -> Digest {
        self.id
    }

    /// Member of the order-q subgroup: 1 <= x < p and x^q = 1.
    pub fn is_element(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && x.modpow(&self.q, &self.p).is_one()
    }

    pub fn is_scalar(&self, x: &BigUint) -> bool {
        x < &self.q
    }

    pub fn pow(&self, base: &BigUint, e: &BigUint) -> BigUint {
        base.modpow(e, &self.p)
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.p
    }

    /// Inverse in Z_p^* via Fermat.
    pub fn inv(&self, a: &BigUint) -> BigUint {
        a.modpow(&(&self.p - 2u32), &self.p)
    }

    pub fn div(&self, a: &BigUint, b: &BigUint) -> BigUint {
        self.mul(a, &self.inv(b))
    }

    pub fn g_pow(&self, e: &BigUint) -> BigUint {
        self.pow(&self.g, e)
    }

    pub fn h_pow(&self, e: &BigUint) -> BigUint {
        self.pow(&self.h, e)
    }

    pub fn scalar_add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % &self.q
    }

    pub fn scalar_sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        ((a % &self.q) + &self.q - (b % &self.q)) % &self.q
    }

    pub fn scalar_mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.q
    }

    pub fn scalar_inv(&self, a: &BigUint) -> BigUint {
        a.modpow(&(&self.q - 2u32), &self.q)
    }

    /// Fixed-width big-endian encoding of a group element.
    pub fn element_bytes(&self, x: &BigUint) -> Vec<u8> {
        let width = self.p.bits().div_ceil(8) as usize;
        let raw = x.to_bytes_be();
        let mut out = vec![0u8; width.saturating_sub(raw.len())];
        out.extend_from_slice(&raw);
        out
    }

    /// Largest `n` with `2^n <= q`.
    pub fn max_range_bits(&self) -> u32 {
        (self.q.bits() - 1) as u32
    }
}

/// Squares a hash-derived integer into the quadratic residues (the order-q
/// subgroup of a safe-prime group), retrying with a counter on 0, 1 or g.
fn derive_second_generator(p: &BigUint, g: &BigUint) -> BigUint {
    (0u32..)
        .map(|counter| {
            let mut input = H_SEED.to_vec();
            input.extend_from_slice(&counter.to_be_bytes());
            let x = BigUint::from_bytes_be(sha256(&input).as_bytes()) % p;
            (&x * &x) % p
        })
        .find(|h| !h.is_zero() && !h.is_one() && h != g)
        .expect("a suitable h exists")
}
