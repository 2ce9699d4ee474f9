//! Proof-chain verification for systems that keep only part of their
//! business data on a ledger.

pub mod canonical;
pub mod crypto;
pub mod error;
pub mod graph;
pub mod hash;
pub mod ledger;
pub mod merkle;
pub mod scenarios;
pub mod zk_link;

pub use crypto::{Commitment, GroupParams, Profile};
pub use error::{BuildError, Error, Result};
pub use graph::{ChainReport, DataEntity, ProofGraph, ProofLink, Strength};
pub use hash::Digest;
pub use ledger::LedgerState;
pub use zk_link::{PreservedCommitment, ZkLinkBundle};
