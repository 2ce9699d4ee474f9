use serde::{Deserialize, Serialize};

use super::{verify_chain, Domain, Granularity, LinkKind, ProofGraph, Strength};
use crate::ledger::LedgerState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LintCode {
    /// A public entity with no verified path to any anchor.
    W1,
    /// A transactional source with no anchor feeds other entities; its
    /// input is cheap to fake.
    W2,
    /// A zero-knowledge link whose source is already public.
    W3,
    /// A public entity whose every anchor path runs through a statistical
    /// link.
    W4,
}

impl LintCode {
    pub fn name(self) -> &'static str {
        match self {
            LintCode::W1 => "no-anchor",
            LintCode::W2 => "free-to-fake-source",
            LintCode::W3 => "needless-zk",
            LintCode::W4 => "weak-link-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LintWarning {
    pub code: LintCode,
    pub subject: String,
    pub message: String,
}

pub fn lint_chain(graph: &ProofGraph, ledger: &LedgerState) -> Vec<LintWarning> {
    let mut out = Vec::new();
    let mut warn = |code: LintCode, subject: &str, message: String| {
        out.push(LintWarning {
            code,
            subject: subject.to_string(),
            message,
        })
    };

    for entity in graph.entities() {
        if entity.domain == Domain::Public {
            let strength = verify_chain(graph, &entity.id, ledger)
                .map(|r| r.chain_strength)
                .unwrap_or(Strength::None);
            match strength {
                Strength::None => warn(
                    LintCode::W1,
                    &entity.id,
                    "public entity has no verified path to a ledger anchor or authority".into(),
                ),
                Strength::Weak => warn(
                    LintCode::W4,
                    &entity.id,
                    "every anchor path of this public entity includes a statistical link".into(),
                ),
                _ => {}
            }
        }

        let is_root = graph.in_links(&entity.id).next().is_none();
        let feeds = graph.out_links(&entity.id).next().is_some();
        let attests = graph.out_links(&entity.id).any(|l| l.kind == LinkKind::Authority);
        if is_root
            && feeds
            && !attests
            && entity.granularity == Granularity::Transactional
            && entity.anchor.is_none()
        {
            warn(
                LintCode::W2,
                &entity.id,
                "transactional source is neither anchored nor attested".into(),
            );
        }
    }

    for link in graph.links() {
        let public_source = graph
            .entity(&link.source)
            .is_some_and(|s| s.domain == Domain::Public);
        if link.kind == LinkKind::ZeroKnowledge && public_source {
            warn(
                LintCode::W3,
                &link.id,
                "zero-knowledge link starts from public data; a logical link would do".into(),
            );
        }
    }

    out.sort();
    out
}
