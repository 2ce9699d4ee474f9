//! Binary SHA-256 Merkle trees with leaf/node domain separation.
//!
//! Leaves hash as `H(0x00 ‖ payload)` and internal nodes as
//! `H(0x01 ‖ left ‖ right)`. An unpaired node at the end of a level is
//! carried up unchanged rather than duplicated.

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::canonical::hex_u64;
use crate::error::{Error, Result};
use crate::hash::Digest;

const LEAF_PREFIX: u8 = 0x00;
const NODE_PREFIX: u8 = 0x01;

pub fn leaf_hash(payload: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update([LEAF_PREFIX]);
    h.update(payload);
    Digest(h.finalize().into())
}

pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    let mut h = Sha256::new();
    h.update([NODE_PREFIX]);
    h.update(left.as_bytes());
    h.update(right.as_bytes());
    Digest(h.finalize().into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sibling {
    pub side: Side,
    pub digest: Digest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerklePath {
    #[serde(with = "hex_u64")]
    pub leaf_index: u64,
    pub siblings: Vec<Sibling>,
}

pub fn build_tree<P: AsRef<[u8]>>(leaf_payloads: &[P]) -> Result<MerkleTree> {
    if leaf_payloads.is_empty() {
        return Err(Error::Parameter("a Merkle tree needs at least one leaf".into()));
    }
    let leaves: Vec<Digest> = leaf_payloads.iter().map(|p| leaf_hash(p.as_ref())).collect();
    let mut levels = vec![leaves];
    while levels.last().map_or(0, Vec::len) > 1 {
        let next = levels
            .last()
            .expect("non-empty")
            .chunks(2)
            .map(|pair| match pair {
                [l, r] => node_hash(l, r),
                [carried] => *carried,
                _ => unreachable!(),
            })
            .collect();
        levels.push(next);
    }
    Ok(MerkleTree { levels })
}

impl MerkleTree {
    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn leaves(&self) -> &[Digest] {
        &self.levels[0]
    }

    pub fn levels(&self) -> &[Vec<Digest>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn prove_membership(&self, index: usize) -> Result<MerklePath> {
        if index >= self.len() {
            return Err(Error::Parameter(format!(
                "leaf index {index} out of bounds for {} leaves",
                self.len()
            )));
        }
        let mut siblings = Vec::new();
        let mut idx = index;
        for level in &self.levels[..self.levels.len() - 1] {
            let sib = idx ^ 1;
            if sib < level.len() {
                let side = if idx % 2 == 1 { Side::Left } else { Side::Right };
                siblings.push(Sibling {
                    side,
                    digest: level[sib],
                });
            }
            idx /= 2;
        }
        Ok(MerklePath {
            leaf_index: index as u64,
            siblings,
        })
    }
}

pub fn prove_membership(tree: &MerkleTree, index: usize) -> Result<MerklePath> {
    tree.prove_membership(index)
}

impl MerklePath {
    /// Folds the siblings over a leaf digest, yielding the implied root.
    pub fn root_from_leaf_digest(&self, leaf: Digest) -> Digest {
        self.siblings.iter().fold(leaf, |acc, s| match s.side {
            Side::Left => node_hash(&s.digest, &acc),
            Side::Right => node_hash(&acc, &s.digest),
        })
    }

    pub fn root_from_payload(&self, payload: &[u8]) -> Digest {
        self.root_from_leaf_digest(leaf_hash(payload))
    }
}

pub fn verify_membership(root: &Digest, leaf_payload: &[u8], path: &MerklePath) -> bool {
    path.root_from_payload(leaf_payload) == *root
}
