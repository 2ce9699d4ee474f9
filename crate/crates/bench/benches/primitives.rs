use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;

use proofchain_bench::{committed, params, record_set};
use proofchain_core::crypto::{
    prove_opening, prove_range, public_key, sign_message, verify_opening, verify_range, verify_signature,
};
use proofchain_core::graph::{lint_chain, verify_chain};
use proofchain_core::ledger::{AnchorValue, LedgerState};
use proofchain_core::merkle::build_tree;
use proofchain_core::scenarios::{run_scenario, ScenarioConfig, ScenarioKind};
use proofchain_core::zk_link::{check_bundle, zkcu_aggregate_sum, zkcu_predicate_geq};
use proofchain_core::Digest;

fn sigma(c: &mut Criterion) {
    let params = params();
    let (com, v, r) = committed(42, &params);
    c.bench_function("commit", |b| b.iter(|| committed(black_box(42), &params)));
    let proof = prove_opening(&com, &v, &r, b"bench", &params).unwrap();
    c.bench_function("opening/prove", |b| b.iter(|| prove_opening(&com, &v, &r, black_box(b"bench"), &params)));
    c.bench_function("opening/verify", |b| b.iter(|| verify_opening(&com, black_box(&proof), &params)));

    let sk = BigUint::from(0x5eedu32);
    assert_eq!(public_key(&sk, &params), sign_message(&sk, b"m", b"s", &params).unwrap().signer_key);
    let sig = sign_message(&sk, b"message", b"bench", &params).unwrap();
    c.bench_function("signature/sign", |b| b.iter(|| sign_message(&sk, black_box(b"message"), b"bench", &params)));
    c.bench_function("signature/verify", |b| b.iter(|| verify_signature(black_box(&sig), b"message", &params)));
}

fn range(c: &mut Criterion) {
    let params = params();
    let (com, v, r) = committed(200, &params);
    let mut group = c.benchmark_group("range");
    for bits in [8u32, 16, 32] {
        let proof = prove_range(&com, &v, &r, bits, b"bench", &params).unwrap();
        group.bench_with_input(BenchmarkId::new("prove", bits), &bits, |b, &bits| {
            b.iter(|| prove_range(&com, &v, &r, bits, b"bench", &params))
        });
        group.bench_with_input(BenchmarkId::new("verify", bits), &bits, |b, &bits| {
            b.iter(|| verify_range(&com, black_box(&proof), bits, &params))
        });
    }
    group.finish();
}

fn structures(c: &mut Criterion) {
    let leaves: Vec<Vec<u8>> = (0..1024u32).map(|i| i.to_be_bytes().to_vec()).collect();
    c.bench_function("merkle/build-1024", |b| b.iter(|| build_tree(black_box(&leaves))));

    c.bench_function("ledger/append-100", |b| {
        b.iter(|| {
            (0..100u64).fold(LedgerState::new(), |l, t| {
                l.register_commitment("a", AnchorValue::Digest(Digest::ZERO), &format!("l{t}"), t).unwrap().0
            })
        })
    });
    let ledger = (0..100u64).fold(LedgerState::new(), |l, t| {
        l.register_commitment("a", AnchorValue::Digest(Digest::ZERO), &format!("l{t}"), t).unwrap().0
    });
    c.bench_function("ledger/audit-100", |b| b.iter(|| black_box(&ledger).audit_chain()));
}

fn units(c: &mut Criterion) {
    let params = params();
    let mut group = c.benchmark_group("zk-link");
    group.sample_size(20);
    for n in [8usize, 64] {
        let (ledger, pc) = record_set(n, &params);
        let ids: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let total: u64 = (0..n as u64).map(|i| 100 + i).sum();
        let bundle = zkcu_aggregate_sum(&pc, &refs, "amount", &BigUint::from(total)).unwrap();
        group.bench_with_input(BenchmarkId::new("sum/check", n), &n, |b, _| b.iter(|| check_bundle(&ledger, &bundle)));
    }
    let (ledger, pc) = record_set(4, &params);
    let bundle = zkcu_predicate_geq(&pc, "r1", "amount", &BigUint::from(18u8), 8, b"bench").unwrap();
    group.bench_function("geq/prove", |b| {
        b.iter(|| zkcu_predicate_geq(&pc, "r1", "amount", &BigUint::from(18u8), 8, b"bench"))
    });
    group.bench_function("geq/check", |b| b.iter(|| check_bundle(&ledger, &bundle)));
    group.finish();
}

fn chains(c: &mut Criterion) {
    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    for kind in ScenarioKind::ALL {
        let run = run_scenario(kind, &ScenarioConfig::default()).unwrap();
        let target = run.transcript.reports[0].target.clone();
        group.bench_function(BenchmarkId::new("run", kind.as_str()), |b| {
            b.iter(|| run_scenario(kind, &ScenarioConfig::default()))
        });
        group.bench_function(BenchmarkId::new("verify-chain", kind.as_str()), |b| {
            b.iter(|| verify_chain(&run.graph, &target, &run.ledger))
        });
        group.bench_function(BenchmarkId::new("lint", kind.as_str()), |b| b.iter(|| lint_chain(&run.graph, &run.ledger)));
    }
    group.finish();
}

criterion_group!(benches, sigma, range, structures, units, chains);
criterion_main!(benches);
