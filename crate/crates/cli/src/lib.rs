//! The `proofchain` command-line tool.
//!
//! Exit codes: 0 when the command succeeds and every verdict is true, 1 when
//! a verification fails or a prover refuses a false statement, 2 for usage
//! and I/O errors.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use proofchain_core::crypto::Profile;
use proofchain_core::scenarios::ScenarioKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "proofchain", version, about = "Anchor private records, prove things about them and verify proof chains")]
pub struct Cli {
    /// Group parameter profile.
    #[arg(long, global = true, env = "PROOFCHAIN_PROFILE", default_value = "test", value_parser = parse_profile)]
    pub profile: Profile,

    /// Print machine output as canonical JSON.
    #[arg(long, global = true)]
    pub json: bool,

    /// Hex seed for every random choice. A fresh one is drawn and printed
    /// to stderr when omitted.
    #[arg(long, global = true, value_parser = parse_hex)]
    pub seed: Option<Seed>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Manage a JSON-lines ledger file.
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Commit a set of private records and anchor their root.
    Commit(CommitArgs),
    /// Produce a zero-knowledge link bundle from an openings file.
    #[command(subcommand)]
    Prove(ProveCmd),
    /// Check a bundle against a ledger.
    Verify(VerifyArgs),
    /// Build, verify and lint proof-chain graphs.
    #[command(subcommand)]
    Chain(ChainCmd),
    /// Run the bundled end-to-end scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
}

#[derive(Debug, Subcommand)]
pub enum LedgerCmd {
    /// Create a ledger with the built-in validators registered.
    Init {
        #[arg(long)]
        ledger: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Append a commitment record.
    Append {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        author: String,
        #[arg(long)]
        label: String,
        /// Digest to anchor, as 64 hex characters.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        digest: Option<String>,
        /// Anchor the SHA-256 of this file instead.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Block timestamp; defaults to one past the tip.
        #[arg(long)]
        time: Option<u64>,
    },
    /// Write the ledger as canonical JSON lines.
    Export {
        #[arg(long)]
        ledger: PathBuf,
        /// Destination file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load an exported ledger, audit it, and store it.
    Import {
        /// Exported JSON-lines file.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Re-derive every block and check the hash chain.
    Audit {
        #[arg(long)]
        ledger: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommitArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    /// JSON array of `{"record_id", "fields": {name: {"int": hex} | {"text": s}}}`.
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long)]
    pub owner: String,
    #[arg(long)]
    pub label: String,
    /// Where to write the openings (keep this private).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub time: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ProveCommon {
    /// Openings file written by `commit`.
    #[arg(long)]
    pub openings: PathBuf,
    #[arg(long)]
    pub field: String,
    /// Bundle destination (`.zkb`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ProveCmd {
    /// Disclose one field with its inclusion path.
    Reveal {
        #[command(flatten)]
        common: ProveCommon,
        #[arg(long)]
        record: String,
    },
    /// Prove a numeric field is at least a threshold without revealing it.
    Geq {
        #[command(flatten)]
        common: ProveCommon,
        #[arg(long)]
        record: String,
        #[arg(long)]
        threshold: u64,
        #[arg(long, default_value_t = 8)]
        bits: u32,
    },
    /// Prove the sum of a field over several records.
    Sum {
        #[command(flatten)]
        common: ProveCommon,
        /// Comma-separated record ids.
        #[arg(long, value_delimiter = ',', required = true)]
        records: Vec<String>,
        #[arg(long)]
        total: u64,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Bundle file.
    #[arg(short = 'f', long = "file")]
    pub file: PathBuf,
    #[arg(long)]
    pub ledger: PathBuf,
    /// Also record the verdict on the ledger.
    #[arg(long)]
    pub record: bool,
    #[arg(long, requires = "record")]
    pub time: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum ChainCmd {
    /// Check a graph file against the build rules and rewrite it canonically.
    Build {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify the chain behind one target entity.
    Verify {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Report structural warnings.
    Lint {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Ledger used to evaluate chain strength; an empty one when omitted.
        #[arg(long)]
        ledger: Option<PathBuf>,
        /// Exit with 1 when any warning is raised.
        #[arg(long)]
        deny_warnings: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Run one scenario and write its transcript.
    Run {
        #[arg(value_parser = parse_kind)]
        kind: ScenarioKind,
        #[arg(long)]
        out: PathBuf,
        /// Run the tampered variant.
        #[arg(long)]
        tamper: bool,
        /// Also write the final ledger here.
        #[arg(long)]
        ledger_out: Option<PathBuf>,
        /// Also write the proof graph here.
        #[arg(long)]
        graph_out: Option<PathBuf>,
    },
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: proofchain_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: proofchain_core::Error| e.to_string())
}

/// Seed bytes given on the command line as hex.
#[derive(Clone, Debug)]
pub struct Seed(pub Vec<u8>);

fn parse_hex(s: &str) -> Result<Seed, String> {
    proofchain_core::hash::hex_decode(s).map(Seed).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    match commands::dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
