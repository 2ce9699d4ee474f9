//! Canonical JSON: UTF-8, object keys sorted bytewise, no insignificant
//! whitespace, and no JSON numbers. Integers travel as lowercase hex strings
//! without leading zeros (zero is `"0"`).
//!
//! The same byte form feeds every Fiat–Shamir transcript and every
//! content-addressed digest in the crate, so it must be stable.

use num_bigint::BigUint;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hash::{sha256, Digest};

/// Serializes `v` to canonical JSON bytes.
pub fn to_vec<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>> {
    let value = serde_json::to_value(v)?;
    value_to_vec(&value)
}

pub fn to_string<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    // the writer only ever emits valid UTF-8
    Ok(String::from_utf8(to_vec(v)?).expect("canonical JSON is UTF-8"))
}

pub fn value_to_vec(value: &Value) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_value(value, &mut out)?;
    Ok(out)
}

/// SHA-256 of the canonical encoding.
pub fn digest<T: Serialize + ?Sized>(v: &T) -> Result<Digest> {
    Ok(sha256(&to_vec(v)?))
}

pub fn from_slice<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn from_value<T: DeserializeOwned>(value: &Value) -> Result<T> {
    Ok(serde_json::from_value(value.clone())?)
}

/// True iff `bytes` parse as JSON and re-encode to exactly the same bytes.
pub fn is_canonical(bytes: &[u8]) -> bool {
    serde_json::from_slice::<Value>(bytes)
        .ok()
        .and_then(|v| value_to_vec(&v).ok())
        .is_some_and(|re| re == bytes)
}

fn write_value(value: &Value, out: &mut Vec<u8>) -> Result<()> {
    match value {
        Value::Null => out.extend_from_slice(b"null"),
        Value::Bool(true) => out.extend_from_slice(b"true"),
        Value::Bool(false) => out.extend_from_slice(b"false"),
        Value::Number(n) => {
            return Err(Error::Encoding(format!(
                "raw JSON number {n} is not canonical; integers must be hex strings"
            )))
        }
        Value::String(s) => out.extend_from_slice(serde_json::to_string(s)?.as_bytes()),
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out)?;
            }
            out.push(b']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort_unstable_by(|a, b| a.as_bytes().cmp(b.as_bytes()));
            out.push(b'{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                out.extend_from_slice(serde_json::to_string(key)?.as_bytes());
                out.push(b':');
                write_value(&map[key], out)?;
            }
            out.push(b'}');
        }
    }
    Ok(())
}

pub fn encode_uint(n: &BigUint) -> String {
    n.to_str_radix(16)
}

pub fn decode_uint(s: &str) -> Result<BigUint> {
    check_hex_int(s)?;
    BigUint::parse_bytes(s.as_bytes(), 16)
        .ok_or_else(|| Error::Encoding(format!("invalid hex integer `{s}`")))
}

pub fn encode_u64(n: u64) -> String {
    format!("{n:x}")
}

pub fn decode_u64(s: &str) -> Result<u64> {
    check_hex_int(s)?;
    u64::from_str_radix(s, 16).map_err(|e| Error::Encoding(format!("`{s}`: {e}")))
}

fn check_hex_int(s: &str) -> Result<()> {
    let ok = !s.is_empty()
        && s.bytes().all(|c| matches!(c, b'0'..=b'9' | b'a'..=b'f'))
        && (s == "0" || !s.starts_with('0'));
    if ok {
        Ok(())
    } else {
        Err(Error::Encoding(format!("`{s}` is not a canonical hex integer")))
    }
}

/// `#[serde(with = "hex_uint")]` for [`BigUint`] fields.
pub mod hex_uint {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_uint(n))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        super::decode_uint(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "hex_u64")]` for machine-word integers.
pub mod hex_u64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_u64(*n))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        super::decode_u64(&s).map_err(serde::de::Error::custom)
    }
}

pub mod hex_u32 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &u32, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::encode_u64(u64::from(*n)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
        let s = String::deserialize(d)?;
        let n = super::decode_u64(&s).map_err(serde::de::Error::custom)?;
        u32::try_from(n).map_err(serde::de::Error::custom)
    }
}

/// Fixed-width byte arrays as lowercase hex.
pub mod hex_array {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(b: &[u8; N], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::hash::hex_encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        d: D,
    ) -> Result<[u8; N], D::Error> {
        let s = String::deserialize(d)?;
        let bytes = crate::hash::hex_decode(&s).map_err(serde::de::Error::custom)?;
        bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom(format!("expected {N} bytes")))
    }
}

pub mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::hash::hex_encode(b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        crate::hash::hex_decode(&s).map_err(serde::de::Error::custom)
    }
}
