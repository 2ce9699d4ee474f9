use num_bigint::BigUint;
use serde_json::json;

use super::{verdict, ScenarioConfig, ScenarioKind, ScenarioRun, Session, StepVerdict};
use crate::canonical;
use crate::crypto::{public_key, sign_message};
use crate::error::Result;
use crate::graph::{DataEntity, Domain, Evidence, Granularity, ProofGraph, ProofLink};
use crate::ledger::Verdict;
use crate::zk_link::{
    commit_preserved, validate_shared, zkcu_predicate_geq, FieldValue, PreservedRecord,
};

const AUTHORITY: &str = "civil-registry";
const SUBJECT: &str = "citizen-7";

/// An archive manager anchors a personal archive and attests it; a service
/// provider later learns only that the holder is at least `threshold` years
/// old.
pub fn run_identity_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    let mut s = Session::start(ScenarioKind::Identity, config)?;
    let params = s.params.clone();

    let sk = s.secret_key("authority-key");
    let pk = public_key(&sk, &params);
    let t = s.next_tick();
    s.ledger = s.ledger.register_authority(AUTHORITY, &pk, &params, t)?.0;
    s.record(AUTHORITY, "register signing key", true, Vec::new());

    let salt_seed = s.derived_seed("archive-salts");
    let archive_fields = |age: u64| {
        vec![
            ("name", FieldValue::from("Jordan Rivers")),
            ("age", age.into()),
            ("region", "north".into()),
        ]
    };
    let record = PreservedRecord::seeded(SUBJECT, archive_fields(config.age), &salt_seed);
    let t = s.next_tick();
    let (ledger, pc) = commit_preserved(vec![record], AUTHORITY, "archive/citizen-7", &s.ledger, t, &params)?;
    s.ledger = ledger;
    s.record(AUTHORITY, "anchor archive root", true, Vec::new());

    let signature = sign_message(&sk, pc.root().as_bytes(), &s.derived_seed("attestation"), &params)?;
    s.record(AUTHORITY, "sign archive root", false, Vec::new());

    // the holder proves from their copy of the openings; the tampered
    // variant edits the archive after it was anchored
    let holder_copy = if config.tamper {
        let forged_age = if config.age == config.threshold + 1 {
            config.threshold + 2
        } else {
            config.threshold + 1
        };
        pc.with_records_unanchored(vec![PreservedRecord::seeded(SUBJECT, archive_fields(forged_age), &salt_seed)])?
    } else {
        pc.clone()
    };
    let threshold = BigUint::from(config.threshold);
    s.record(
        "service-provider",
        &format!("request proof of age >= {}", config.threshold),
        false,
        Vec::new(),
    );
    let proved = zkcu_predicate_geq(
        &holder_copy,
        SUBJECT,
        "age",
        &threshold,
        config.range_bits,
        &s.derived_seed("predicate-nonces"),
    );

    let bundle = match proved {
        Ok(bundle) => {
            s.record("holder", "prove age predicate", false, Vec::new());
            let t = s.next_tick();
            let (ledger, result) = validate_shared(&s.ledger, &bundle, t)?;
            s.ledger = ledger;
            s.record(
                "validator",
                "validate age predicate",
                true,
                vec![StepVerdict {
                    subject: "age-proof".into(),
                    verdict: result.verdict,
                    reason: result.reason,
                }],
            );
            Some(bundle)
        }
        Err(e) => {
            let refusal = Verdict::reject(format!("refused: {e}"));
            s.record("holder", "prove age predicate", false, vec![verdict("age-proof", &refusal)]);
            None
        }
    };

    let authority_entity = DataEntity::disclosed(
        AUTHORITY,
        Domain::Public,
        Granularity::Digest,
        json!({ "authority": AUTHORITY, "public_key": canonical::encode_uint(&pk) }),
        1,
    )?;
    let archive = DataEntity::digest_only("archive", Domain::Private, Granularity::Transactional, pc.root(), 2)
        .with_anchor(pc.anchor());
    let claim = DataEntity::disclosed(
        "age-claim",
        Domain::Public,
        Granularity::Digest,
        json!({
            "threshold": canonical::encode_uint(&threshold),
            "n_bits": canonical::encode_u64(u64::from(config.range_bits)),
        }),
        s.tick,
    )?;
    let mut graph = ProofGraph::new()
        .add_entity(authority_entity)?
        .add_entity(archive)?
        .add_entity(claim)?
        .add_link(ProofLink::new(
            "attestation",
            AUTHORITY,
            "archive",
            Evidence::Authority { authority: AUTHORITY.into(), signature },
        ))?;
    if let Some(bundle) = bundle {
        graph = graph.add_link(ProofLink::new("age-proof", "archive", "age-claim", Evidence::ZeroKnowledge { bundle }))?;
    }

    s.finish(graph, vec!["age-claim".into()])
}
