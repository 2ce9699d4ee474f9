use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use rand::RngCore;
use serde::Deserialize;
use serde_json::{json, Value};

use proofchain_core::canonical;
use proofchain_core::crypto::group_params;
use proofchain_core::graph::{lint_chain, verify_chain, ProofGraph};
use proofchain_core::hash::{hex_encode, sha256};
use proofchain_core::ledger::{AnchorValue, LedgerState};
use proofchain_core::scenarios::{run_scenario, ScenarioConfig};
use proofchain_core::zk_link::{
    check_bundle, commit_preserved, register_builtin_validators, resolve_builtin, validate_shared,
    zkcu_aggregate_sum, zkcu_predicate_geq, zkcu_reveal_field, FieldValue, PreservedCommitment,
    PreservedRecord, ZkLinkBundle,
};
use proofchain_core::{Digest, Error};

use crate::{ChainCmd, Cli, Command, LedgerCmd, ProveCmd, ScenarioCmd, EXIT_FALSE, EXIT_OK, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    /// The prover declined because the statement is false.
    Refused(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Refused(_) => EXIT_FALSE,
            _ => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Usage(m) => f.write_str(m),
            CliError::Refused(m) => write!(f, "refused: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ProofGeneration(m) => CliError::Refused(m),
            other => CliError::Core(other),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_ledger(path: &Path) -> CliResult<LedgerState> {
    let text = String::from_utf8(read(path)?).map_err(|_| CliError::Io(format!("{}: not UTF-8", path.display())))?;
    Ok(LedgerState::from_jsonl(&text, resolve_builtin)?)
}

fn save_ledger(path: &Path, ledger: &LedgerState) -> CliResult<()> {
    write(path, ledger.to_jsonl()?.as_bytes())
}

fn load_graph(path: &Path) -> CliResult<ProofGraph> {
    Ok(ProofGraph::from_slice(&read(path)?)?)
}

fn next_time(ledger: &LedgerState, explicit: Option<u64>) -> u64 {
    explicit.unwrap_or_else(|| ledger.tip_timestamp().map_or(0, |t| t + 1))
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Prints `value` canonically under `--json`, otherwise the human text.
    fn emit(&mut self, value: Value, human: impl FnOnce() -> String) -> CliResult<()> {
        let text = if self.cli.json { canonical::to_string(&value)? } else { human() };
        writeln!(self.out, "{text}").map_err(|e| CliError::Io(e.to_string()))
    }

    fn seed(&mut self) -> Vec<u8> {
        if let Some(seed) = &self.cli.seed {
            return seed.0.clone();
        }
        let mut seed = vec![0u8; 16];
        rand::rngs::OsRng.fill_bytes(&mut seed);
        let _ = writeln!(self.err, "seed: {}", hex_encode(&seed));
        seed
    }
}

fn verdict_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_FALSE
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let mut ctx = Ctx { cli, out, err };
    match &cli.command {
        Command::Ledger(cmd) => ledger(&mut ctx, cmd),
        Command::Commit(args) => commit(&mut ctx, args),
        Command::Prove(cmd) => prove(&mut ctx, cmd),
        Command::Verify(args) => verify(&mut ctx, args),
        Command::Chain(cmd) => chain(&mut ctx, cmd),
        Command::Scenario(cmd) => scenario(&mut ctx, cmd),
    }
}

fn ledger(ctx: &mut Ctx, cmd: &LedgerCmd) -> CliResult<i32> {
    match cmd {
        LedgerCmd::Init { ledger, force } => {
            if ledger.exists() && !force {
                return Err(CliError::Usage(format!("{} already exists (use --force)", ledger.display())));
            }
            let state = register_builtin_validators(&LedgerState::new(), "operator", 0)?;
            save_ledger(ledger, &state)?;
            let tip = state.tip().expect("validators were registered").block_hash;
            ctx.emit(json!({"height": canonical::encode_u64(state.height() as u64), "tip": tip}), || {
                format!("initialised {} ({} block, tip {tip})", ledger.display(), state.height())
            })?;
        }
        LedgerCmd::Append { ledger, author, label, digest, file, time } => {
            let state = load_ledger(ledger)?;
            let digest = match (digest, file) {
                (Some(hex), _) => Digest::from_hex(hex).map_err(|e| CliError::Usage(format!("--digest: {e}")))?,
                (None, Some(path)) => sha256(&read(path)?),
                (None, None) => unreachable!("clap requires one of --digest/--file"),
            };
            let t = next_time(&state, *time);
            let (state, entry) = state.register_commitment(author, AnchorValue::Digest(digest), label, t)?;
            save_ledger(ledger, &state)?;
            ctx.emit(json!({"entry": entry, "digest": digest, "height": canonical::encode_u64(state.height() as u64)}), || {
                format!("anchored {digest} as {author}/{label}: entry {entry}")
            })?;
        }
        LedgerCmd::Export { ledger, out } => {
            let text = load_ledger(ledger)?.to_jsonl()?;
            match out {
                Some(path) => write(path, text.as_bytes())?,
                None => ctx.out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
            }
        }
        LedgerCmd::Import { from, ledger } => {
            let state = load_ledger(from)?;
            if let Err(failure) = state.audit() {
                ctx.emit(json!({"imported": false, "block": canonical::encode_u64(failure.block), "reason": failure.reason}), || {
                    format!("not imported: {failure}")
                })?;
                return Ok(EXIT_FALSE);
            }
            save_ledger(ledger, &state)?;
            ctx.emit(json!({"imported": true, "height": canonical::encode_u64(state.height() as u64)}), || {
                format!("imported {} blocks into {}", state.height(), ledger.display())
            })?;
        }
        LedgerCmd::Audit { ledger } => {
            let state = load_ledger(ledger)?;
            let result = state.audit();
            let value = match &result {
                Ok(()) => json!({"ok": true, "height": canonical::encode_u64(state.height() as u64)}),
                Err(f) => json!({"ok": false, "block": canonical::encode_u64(f.block), "reason": f.reason}),
            };
            ctx.emit(value, || match &result {
                Ok(()) => format!("ok: {} blocks", state.height()),
                Err(f) => format!("audit failed: {f}"),
            })?;
            return Ok(verdict_code(result.is_ok()));
        }
    }
    Ok(EXIT_OK)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordInput {
    record_id: String,
    fields: BTreeMap<String, FieldValue>,
}

fn commit(ctx: &mut Ctx, args: &crate::CommitArgs) -> CliResult<i32> {
    let inputs: Vec<RecordInput> = serde_json::from_slice(&read(&args.records)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.records.display())))?;
    let seed = ctx.seed();
    let records = inputs
        .into_iter()
        .map(|r| {
            let fields = r.fields.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            PreservedRecord::seeded(&r.record_id, fields, &seed)
        })
        .collect();
    let state = load_ledger(&args.ledger)?;
    let t = next_time(&state, args.time);
    let params = group_params(ctx.cli.profile);
    let (state, pc) = commit_preserved(records, &args.owner, &args.label, &state, t, &params)?;
    write(&args.out, &canonical::to_vec(&pc)?)?;
    save_ledger(&args.ledger, &state)?;
    ctx.emit(json!({"anchor": pc.anchor(), "root": pc.root()}), || {
        format!("committed {} records: root {}, entry {}", pc.records().len(), pc.root(), pc.anchor())
    })?;
    Ok(EXIT_OK)
}

fn prove(ctx: &mut Ctx, cmd: &ProveCmd) -> CliResult<i32> {
    let common = match cmd {
        ProveCmd::Reveal { common, .. } | ProveCmd::Geq { common, .. } | ProveCmd::Sum { common, .. } => common,
    };
    let pc: PreservedCommitment = canonical::from_slice(&read(&common.openings)?)?;
    let bundle = match cmd {
        ProveCmd::Reveal { record, .. } => zkcu_reveal_field(&pc, record, &common.field)?,
        ProveCmd::Geq { record, threshold, bits, .. } => {
            let seed = ctx.seed();
            zkcu_predicate_geq(&pc, record, &common.field, &BigUint::from(*threshold), *bits, &seed)?
        }
        ProveCmd::Sum { records, total, .. } => {
            let ids: Vec<&str> = records.iter().map(String::as_str).collect();
            zkcu_aggregate_sum(&pc, &ids, &common.field, &BigUint::from(*total))?
        }
    };
    write(&common.out, &canonical::to_vec(&bundle)?)?;
    let outputs = bundle.statement["outputs"].clone();
    ctx.emit(json!({"validator": bundle.validator_id, "outputs": outputs}), || {
        format!("wrote {} bundle to {}", bundle.validator_id, common.out.display())
    })?;
    Ok(EXIT_OK)
}

fn verify(ctx: &mut Ctx, args: &crate::VerifyArgs) -> CliResult<i32> {
    let raw: Value = serde_json::from_slice(&read(&args.file)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.file.display())))?;
    let state = load_ledger(&args.ledger)?;
    // a file that parses as JSON but not as a bundle is a failed verification
    let (verdict, reason, entry) = match canonical::from_value::<ZkLinkBundle>(&raw) {
        Err(_) => (false, "malformed-bundle".to_string(), None),
        Ok(bundle) if args.record => {
            let t = next_time(&state, args.time);
            let (state, result) = validate_shared(&state, &bundle, t)?;
            save_ledger(&args.ledger, &state)?;
            (result.verdict, result.reason, Some(result.entry_id))
        }
        Ok(bundle) => {
            let v = check_bundle(&state, &bundle);
            (v.verdict, v.reason, None)
        }
    };
    let mut value = json!({"verdict": verdict, "reason": reason});
    if let Some(entry) = entry {
        value["entry"] = json!(entry);
    }
    ctx.emit(value, || {
        if verdict {
            "verdict: accepted".to_string()
        } else {
            format!("verdict: rejected ({reason})")
        }
    })?;
    Ok(verdict_code(verdict))
}

fn chain(ctx: &mut Ctx, cmd: &ChainCmd) -> CliResult<i32> {
    match cmd {
        ChainCmd::Build { file, out } => {
            let graph = load_graph(file)?;
            if let Err(e) = graph.validate() {
                ctx.emit(json!({"valid": false, "reason": e.to_string()}), || format!("invalid graph: {e}"))?;
                return Ok(EXIT_FALSE);
            }
            let bytes = graph.to_canonical()?;
            match out {
                Some(path) => {
                    write(path, &bytes)?;
                    let (n, m) = (graph.entities().count(), graph.links().len());
                    ctx.emit(
                        json!({"valid": true, "entities": canonical::encode_u64(n as u64), "links": canonical::encode_u64(m as u64)}),
                        || format!("graph ok: {n} entities, {m} links"),
                    )?;
                }
                None => {
                    ctx.out.write_all(&bytes).and_then(|_| writeln!(ctx.out)).map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
            Ok(EXIT_OK)
        }
        ChainCmd::Verify { file, target, ledger } => {
            let graph = load_graph(file)?;
            let state = load_ledger(ledger)?;
            let report = verify_chain(&graph, target, &state)?;
            let verified = report.verified;
            ctx.emit(serde_json::to_value(&report).map_err(Error::from)?, || {
                let mut s = format!(
                    "{}: {} (strength {}, length {})",
                    report.target,
                    if verified { "verified" } else { "not verified" },
                    report.chain_strength.as_str(),
                    report.chain_length
                );
                for f in &report.failures {
                    s.push_str(&format!("\n  {}: {}", f.subject, f.reason));
                }
                s
            })?;
            Ok(verdict_code(verified))
        }
        ChainCmd::Lint { file, ledger, deny_warnings } => {
            let graph = load_graph(file)?;
            let state = match ledger {
                Some(path) => load_ledger(path)?,
                None => LedgerState::new(),
            };
            let warnings = lint_chain(&graph, &state);
            let clean = warnings.is_empty();
            ctx.emit(json!({"warnings": warnings}), || {
                if clean {
                    return "no warnings".to_string();
                }
                warnings
                    .iter()
                    .map(|w| format!("{} {}: {}", w.code.name(), w.subject, w.message))
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(if *deny_warnings { verdict_code(clean) } else { EXIT_OK })
        }
    }
}

fn scenario(ctx: &mut Ctx, cmd: &ScenarioCmd) -> CliResult<i32> {
    let ScenarioCmd::Run { kind, out, tamper, ledger_out, graph_out } = cmd;
    let seed = ctx.seed();
    let mut config = ScenarioConfig::with_seed(&seed);
    config.profile = ctx.cli.profile;
    config.tamper = *tamper;
    let run = run_scenario(*kind, &config)?;
    let bytes = run.transcript.to_canonical()?;
    write(out, &bytes)?;
    if let Some(path) = ledger_out {
        save_ledger(path, &run.ledger)?;
    }
    if let Some(path) = graph_out {
        write(path, &run.graph.to_canonical()?)?;
    }
    let ok = run.transcript.final_verdict;
    ctx.emit(
        json!({"scenario": kind.as_str(), "final_verdict": ok, "transcript_digest": sha256(&bytes)}),
        || format!("{}: final verdict {ok}, transcript written to {}", kind.as_str(), out.display()),
    )?;
    Ok(verdict_code(ok))
}
