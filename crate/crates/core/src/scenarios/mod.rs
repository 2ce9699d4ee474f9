//! The three worked case studies (identity, audit, supply chain) as
//! deterministic runs. Each produces a transcript that can be stored as a
//! golden file and replayed.

mod audit;
mod identity;
mod supplychain;

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::{self, hex_u32, hex_u64};
use crate::crypto::{group_params, GroupParams, Profile};
use crate::error::{Error, Result};
use crate::graph::{lint_chain, verify_chain, ChainReport, LintWarning, ProofGraph};
use crate::hash::{sha256, Digest};
use crate::ledger::LedgerState;
use crate::zk_link::{register_builtin_validators, resolve_builtin};

pub use audit::run_audit_scenario;
pub use identity::run_identity_scenario;
pub use supplychain::run_supplychain_scenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Identity,
    Audit,
    Supplychain,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::Identity, ScenarioKind::Audit, ScenarioKind::Supplychain];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Identity => "identity",
            ScenarioKind::Audit => "audit",
            ScenarioKind::Supplychain => "supplychain",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(with = "canonical::hex_bytes")]
    pub seed: Vec<u8>,
    pub profile: Profile,
    #[serde(with = "hex_u64")]
    pub age: u64,
    #[serde(with = "hex_u64")]
    pub threshold: u64,
    #[serde(with = "hex_u32")]
    pub days: u32,
    #[serde(with = "hex_u32")]
    pub shipments: u32,
    #[serde(with = "hex_u32")]
    pub range_bits: u32,
    pub tamper: bool,
    pub corrupt_ecosystem: bool,
}

pub const DEFAULT_SEED: &[u8] = b"proofchain-golden";

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: DEFAULT_SEED.to_vec(),
            profile: Profile::Test,
            age: 34,
            threshold: 18,
            days: 30,
            shipments: 12,
            range_bits: 8,
            tamper: false,
            corrupt_ecosystem: false,
        }
    }
}

impl ScenarioConfig {
    pub fn with_seed(seed: &[u8]) -> Self {
        ScenarioConfig {
            seed: seed.to_vec(),
            ..Self::default()
        }
    }

    pub fn tampered(mut self) -> Self {
        self.tamper = true;
        self
    }

    fn validate(&self, params: &GroupParams) -> Result<()> {
        if self.days == 0 || self.shipments == 0 {
            return Err(Error::Parameter("days and shipments must be at least 1".into()));
        }
        if self.range_bits == 0 || self.range_bits > params.max_range_bits() {
            return Err(Error::Parameter(format!(
                "range_bits must lie in 1..={}",
                params.max_range_bits()
            )));
        }
        let span = BigUint::from(self.threshold) + (BigUint::one() << self.range_bits);
        if &span > params.q() || !params.is_scalar(&BigUint::from(self.age)) {
            return Err(Error::Parameter(format!(
                "age and threshold do not fit the {} group",
                params.profile().as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub subject: String,
    pub verdict: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub actor: String,
    pub action: String,
    /// Tip block hash after the step, when the step wrote to the ledger.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ledger_delta: Option<Digest>,
    pub verdicts: Vec<StepVerdict>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioTranscript {
    pub scenario: ScenarioKind,
    pub config: ScenarioConfig,
    pub steps: Vec<Step>,
    pub reports: Vec<ChainReport>,
    pub lint: Vec<LintWarning>,
    pub notes: Vec<String>,
    pub final_verdict: bool,
}

impl ScenarioTranscript {
    pub fn to_canonical(&self) -> Result<Vec<u8>> {
        canonical::to_vec(self)
    }
}

/// A finished run: the transcript plus the ledger and graph it describes.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub transcript: ScenarioTranscript,
    pub ledger: LedgerState,
    pub graph: ProofGraph,
    targets: Vec<String>,
}

impl ScenarioRun {
    /// Recomputes reports, lint and the final verdict against `ledger`
    /// (typically an imported copy), keeping the recorded steps.
    pub fn recheck(&self, ledger: &LedgerState) -> Result<ScenarioTranscript> {
        let mut t = self.transcript.clone();
        let (reports, lint) = analyse(&self.graph, &self.targets, ledger)?;
        t.final_verdict = final_verdict(&t.steps, &reports);
        t.reports = reports;
        t.lint = lint;
        Ok(t)
    }

    /// Ledger export followed by import through the built-in resolver.
    pub fn reimported_ledger(&self) -> Result<LedgerState> {
        LedgerState::from_jsonl(&self.ledger.to_jsonl()?, resolve_builtin)
    }
}

pub fn run_scenario(kind: ScenarioKind, config: &ScenarioConfig) -> Result<ScenarioRun> {
    match kind {
        ScenarioKind::Identity => run_identity_scenario(config),
        ScenarioKind::Audit => run_audit_scenario(config),
        ScenarioKind::Supplychain => run_supplychain_scenario(config),
    }
}

fn analyse(
    graph: &ProofGraph,
    targets: &[String],
    ledger: &LedgerState,
) -> Result<(Vec<ChainReport>, Vec<LintWarning>)> {
    let reports = targets
        .iter()
        .map(|t| verify_chain(graph, t, ledger))
        .collect::<Result<Vec<_>>>()?;
    Ok((reports, lint_chain(graph, ledger)))
}

fn final_verdict(steps: &[Step], reports: &[ChainReport]) -> bool {
    steps.iter().flat_map(|s| &s.verdicts).all(|v| v.verdict) && reports.iter().all(|r| r.verified)
}

/// Shared bookkeeping for a run: the evolving ledger, a logical clock and
/// the step log.
struct Session {
    kind: ScenarioKind,
    config: ScenarioConfig,
    params: GroupParams,
    ledger: LedgerState,
    tick: u64,
    steps: Vec<Step>,
    notes: Vec<String>,
}

impl Session {
    fn start(kind: ScenarioKind, config: &ScenarioConfig) -> Result<Self> {
        let params = group_params(config.profile);
        config.validate(&params)?;
        let ledger = register_builtin_validators(&LedgerState::new(), "operator", 0)?;
        let mut s = Session {
            kind,
            config: config.clone(),
            params,
            ledger,
            tick: 0,
            steps: Vec::new(),
            notes: Vec::new(),
        };
        s.record("operator", "register built-in validators", true, Vec::new());
        Ok(s)
    }

    fn next_tick(&mut self) -> u64 {
        self.tick += 1;
        self.tick
    }

    /// Independent RNG stream for one purpose, derived from the seed.
    fn rng(&self, purpose: &str) -> ChaCha20Rng {
        let mut material = self.config.seed.clone();
        material.extend_from_slice(b"/");
        material.extend_from_slice(purpose.as_bytes());
        ChaCha20Rng::from_seed(sha256(&material).0)
    }

    fn derived_seed(&self, purpose: &str) -> Vec<u8> {
        let mut bytes = [0u8; 32];
        self.rng(purpose).fill(&mut bytes);
        bytes.to_vec()
    }

    fn secret_key(&self, purpose: &str) -> BigUint {
        let mut bytes = [0u8; 64];
        self.rng(purpose).fill(&mut bytes);
        BigUint::from_bytes_be(&bytes) % (self.params.q() - 1u8) + 1u8
    }

    fn record(&mut self, actor: &str, action: &str, wrote: bool, verdicts: Vec<StepVerdict>) {
        let ledger_delta = if wrote {
            self.ledger.tip().map(|b| b.block_hash)
        } else {
            None
        };
        self.steps.push(Step {
            actor: actor.to_string(),
            action: action.to_string(),
            ledger_delta,
            verdicts,
        });
    }

    fn finish(self, graph: ProofGraph, targets: Vec<String>) -> Result<ScenarioRun> {
        let (reports, lint) = analyse(&graph, &targets, &self.ledger)?;
        let transcript = ScenarioTranscript {
            scenario: self.kind,
            config: self.config,
            final_verdict: final_verdict(&self.steps, &reports),
            steps: self.steps,
            reports,
            lint,
            notes: self.notes,
        };
        Ok(ScenarioRun {
            transcript,
            ledger: self.ledger,
            graph,
            targets,
        })
    }
}

fn verdict(subject: &str, v: &crate::ledger::Verdict) -> StepVerdict {
    StepVerdict {
        subject: subject.to_string(),
        verdict: v.verdict,
        reason: v.reason.clone(),
    }
}
