use num_bigint::BigUint;
use rand::Rng;
use serde_json::{json, Value};

use super::{verdict, ScenarioConfig, ScenarioKind, ScenarioRun, Session, StepVerdict};
use crate::error::Result;
use crate::graph::{
    concat_hash, verify_link, DataEntity, Domain, Evidence, Granularity, LintCode, ProofGraph,
    ProofLink, Recipe,
};
use crate::ledger::AnchorValue;
use crate::zk_link::{commit_preserved, validate_shared, zkcu_aggregate_sum, PreservedRecord};

const MANUFACTURER: &str = "northwind-mfg";
const CARRIERS: [&str; 3] = ["blue-anchor", "polar-freight", "kestrel"];
const ROUTE: [&str; 4] = ["shenzhen", "singapore", "rotterdam", "hamburg"];

pub const ECOSYSTEM_CAVEAT: &str = "every proof in this run verifies, but the proof chain only binds \
data to what its producers anchored; if the whole ecosystem colludes on the anchored inputs, no \
link in the chain can detect it";

/// Shipment details stay private behind a zero-knowledge total, while the
/// route plan is public and linked by plain recomputation.
pub fn run_supplychain_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let mut s = Session::start(ScenarioKind::Supplychain, config)?;
    let params = s.params.clone();
    let salt_seed = s.derived_seed("shipment-salts");
    let mut rng = s.rng("shipments");

    let mut total = 0u64;
    let records: Vec<PreservedRecord> = (0..config.shipments)
        .map(|i| {
            let units: u64 = rng.gen_range(10..200);
            total += units;
            let carrier = CARRIERS[rng.gen_range(0..CARRIERS.len())];
            PreservedRecord::seeded(
                &format!("shipment-{i:03}"),
                vec![("units", units.into()), ("carrier", carrier.into())],
                &salt_seed,
            )
        })
        .collect();
    let t = s.next_tick();
    let (ledger, pc) = commit_preserved(records, MANUFACTURER, "shipments/month-1", &s.ledger, t, &params)?;
    s.ledger = ledger;
    s.record(MANUFACTURER, "anchor private shipment records", true, Vec::new());

    let route: Vec<Value> = ROUTE.iter().map(|r| json!(r)).collect();
    let route_list = DataEntity::disclosed("route-list", Domain::Public, Granularity::Transactional, Value::Array(route.clone()), t)?;
    let t = s.next_tick();
    let (ledger, route_entry) = s.ledger.register_commitment(
        MANUFACTURER,
        AnchorValue::Digest(route_list.payload_digest),
        "routes/month-1",
        t,
    )?;
    s.ledger = ledger;
    s.record(MANUFACTURER, "anchor public route list", true, Vec::new());

    let ids: Vec<&str> = pc.records().iter().map(|r| r.record_id.as_str()).collect();
    let bundle = zkcu_aggregate_sum(&pc, &ids, "units", &BigUint::from(total))?;
    s.record(MANUFACTURER, "prove monthly shipped total", false, Vec::new());
    let t = s.next_tick();
    let (ledger, result) = validate_shared(&s.ledger, &bundle, t)?;
    s.ledger = ledger;
    s.record(
        "regulator",
        "validate monthly shipped total",
        true,
        vec![StepVerdict {
            subject: "monthly-sum".into(),
            verdict: result.verdict,
            reason: result.reason,
        }],
    );

    // the published digest always reflects the anchored route; the tampered
    // variant swaps one stop in the list shown to the public afterwards
    let route_digest = DataEntity::digest_only("route-digest", Domain::Public, Granularity::Digest, concat_hash(&route)?, t);
    let shown_route = if config.tamper {
        let mut altered = route.clone();
        altered[1] = json!("colombo");
        DataEntity::disclosed("route-list", Domain::Public, Granularity::Transactional, Value::Array(altered), route_list.created_at)?
    } else {
        route_list
    }
    .with_anchor(route_entry);

    let shipments = DataEntity::digest_only("shipments", Domain::Private, Granularity::Transactional, pc.root(), pc.timestamp())
        .with_anchor(pc.anchor());
    let monthly = DataEntity::disclosed(
        "monthly-total",
        Domain::Public,
        Granularity::Digest,
        bundle.statement["outputs"].clone(),
        t,
    )?;
    let graph = ProofGraph::new()
        .add_entity(shipments)?
        .add_entity(monthly)?
        .add_entity(shown_route)?
        .add_entity(route_digest)?
        .add_link(ProofLink::new("monthly-sum", "shipments", "monthly-total", Evidence::ZeroKnowledge { bundle }))?
        .add_link(ProofLink::new(
            "route-hash",
            "route-list",
            "route-digest",
            Evidence::Logical { recipe: Recipe::ConcatHash },
        ))?;

    let route_check = verify_link(&graph, graph.link("route-hash").expect("just added"), &s.ledger);
    s.record("public", "recompute route digest", false, vec![verdict("route-hash", &route_check)]);

    let needless_zk = crate::graph::lint_chain(&graph, &s.ledger)
        .iter()
        .any(|w| w.code == LintCode::W3 && w.subject == "route-hash");
    s.notes.push(format!(
        "route-hash is a logical link from public data; {} raised for it",
        if needless_zk { "W3 was" } else { "no W3 warning was" }
    ));
    if config.corrupt_ecosystem {
        s.notes.push(ECOSYSTEM_CAVEAT.to_string());
    }

    s.finish(graph, vec!["monthly-total".into(), "route-digest".into()])
}
