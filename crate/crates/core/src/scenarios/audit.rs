use num_bigint::BigUint;
use rand::Rng;

use super::{ScenarioConfig, ScenarioKind, ScenarioRun, Session, StepVerdict};
use crate::error::Result;
use crate::graph::{DataEntity, Domain, Evidence, Granularity, ProofGraph, ProofLink};
use crate::zk_link::{commit_preserved, validate_shared, zkcu_aggregate_sum, PreservedRecord};

const AUDITEE: &str = "acme-books";
const LABEL: &str = "books/period-1";

/// The auditee anchors its books every day; at the end of the period the
/// auditor receives a total with a proof that it sums the anchored records.
pub fn run_audit_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let mut s = Session::start(ScenarioKind::Audit, config)?;
    let params = s.params.clone();
    let salt_seed = s.derived_seed("book-salts");
    let mut amounts = s.rng("daily-amounts");

    let mut records = Vec::new();
    let mut plain_total = 0u64;
    let mut anchored = None;
    for day in 0..config.days {
        let amount: u64 = amounts.gen_range(50..500);
        plain_total += amount;
        records.push(PreservedRecord::seeded(
            &format!("day-{day:03}"),
            vec![("amount", amount.into())],
            &salt_seed,
        ));
        // the whole period so far is re-anchored; the latest root wins
        let t = s.next_tick();
        let (ledger, pc) = commit_preserved(records.clone(), AUDITEE, LABEL, &s.ledger, t, &params)?;
        s.ledger = ledger;
        s.record(AUDITEE, &format!("anchor books through day {}", day + 1), true, Vec::new());
        anchored = Some(pc);
    }
    let pc = anchored.expect("at least one day");

    s.record("auditor", "request period total", false, Vec::new());
    let claimed = if config.tamper { plain_total + 1 } else { plain_total };
    let ids: Vec<&str> = pc.records().iter().map(|r| r.record_id.as_str()).collect();
    let bundle = zkcu_aggregate_sum(&pc, &ids, "amount", &BigUint::from(claimed))?;
    s.record(AUDITEE, "report total with proof", false, Vec::new());

    let t = s.next_tick();
    let (ledger, result) = validate_shared(&s.ledger, &bundle, t)?;
    s.ledger = ledger;
    s.record(
        "validator",
        "validate period total",
        true,
        vec![StepVerdict {
            subject: "period-sum".into(),
            verdict: result.verdict,
            reason: result.reason,
        }],
    );

    let daily = DataEntity::digest_only("daily-records", Domain::Private, Granularity::Transactional, pc.root(), pc.timestamp())
        .with_anchor(pc.anchor());
    let report = DataEntity::disclosed(
        "total-report",
        Domain::Public,
        Granularity::Digest,
        bundle.statement["outputs"].clone(),
        s.tick,
    )?;
    let graph = ProofGraph::new()
        .add_entity(daily)?
        .add_entity(report)?
        .add_link(ProofLink::new("period-sum", "daily-records", "total-report", Evidence::ZeroKnowledge { bundle }))?;

    s.finish(graph, vec!["total-report".into()])
}
