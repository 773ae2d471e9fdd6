use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Horn-logic reasoning, abductive repair, flux-balance analysis and revision
/// tracking for genome-scale metabolic models.
#[derive(Debug, Parser)]
#[command(name = "gemlogic", version, about, long_about = None)]
pub struct Cli {
    /// Worker threads for knockout screens and hypothesis search; 1 runs
    /// everything sequentially. Results never depend on this value.
    #[arg(long, global = true, default_value_t = default_workers(), value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,

    #[command(subcommand)]
    pub command: Command,
}

fn default_workers() -> u32 {
    std::thread::available_parallelism().map_or(1, |n| n.get() as u32)
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a model to Horn clauses and print the clause counts.
    Compile(CompileArgs),
    /// Check a model's structural invariants.
    Validate(ModelArgs),
    /// Predict growth for one medium and genotype.
    Growth(ExperimentArgs),
    /// Single-gene knockout screen.
    Essentiality(EssentialityArgs),
    /// Propose minimal model repairs for false no-growth predictions.
    Abduce(AbduceArgs),
    /// Flux-balance analysis, optionally constrained by the logic model.
    Fba(FbaArgs),
    /// Record, replay and inspect model revisions.
    #[command(subcommand)]
    Revise(ReviseCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Sbml,
    Native,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Model format; guessed from the extension when omitted (`.xml` and
    /// `.sbml` are SBML, anything else native JSON).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Biomass goal species, replacing the model's own (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub goal: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory for output files; results go to standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Medium file: one exchange species id per line. Defaults to every
    /// exchange species of the model.
    #[arg(long)]
    pub medium: Option<PathBuf>,
    /// Knocked-out genes (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub ko: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct EssentialityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Medium file (see `growth`).
    #[arg(long)]
    pub medium: Option<PathBuf>,
    /// Screen only these genes (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub genes: Option<Vec<String>>,
    /// Observed essentiality, `gene<TAB>ESSENTIAL|NON_ESSENTIAL` per line;
    /// adds a confusion matrix.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    /// Write per-knockout wall-clock times instead of `NA`. Makes the output
    /// irreproducible.
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct AbduceArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Observations, `medium<TAB>knockouts<TAB>GROWTH|NO_GROWTH` per line.
    /// Every observed growth predicted as no growth is repaired, and all
    /// observations are used for filtering. Without this file the
    /// `--medium`/`--ko` experiment is taken as observed growth.
    #[arg(long)]
    pub observations: Option<PathBuf>,
    /// Abducible kinds (comma-separated): gene-function, metabolite-source,
    /// reaction-exists. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    pub kinds: Option<Vec<String>>,
    /// Reference model whose reactions are REACTION_EXISTS candidates.
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Format of the reference model.
    #[arg(long, value_enum)]
    pub candidates_format: Option<Format>,
    /// Restrict METABOLITE_SOURCE candidates to these compartments.
    #[arg(long, value_delimiter = ',')]
    pub compartments: Option<Vec<String>>,
    /// Restrict GENE_FUNCTION candidates to these genes.
    #[arg(long, value_delimiter = ',')]
    pub genes: Option<Vec<String>>,
    /// Largest hypothesis size.
    #[arg(long, default_value_t = 2)]
    pub max_card: usize,
    /// Reject hypotheses without biomass flux under logic-constrained FBA.
    #[arg(long)]
    pub fba: bool,
    /// Record every accepted hypothesis in the ledger.
    #[arg(long, requires = "ledger")]
    pub record: bool,
    #[command(flatten)]
    pub meta: MetaArgs,
}

#[derive(Debug, Args)]
pub struct MetaArgs {
    /// Ledger directory.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Author recorded with new revisions.
    #[arg(long, default_value = "gemlogic")]
    pub author: String,
    /// Timestamp recorded with new revisions. The fixed default keeps
    /// ledgers reproducible; pass the real time for curation work.
    #[arg(long, default_value = "1970-01-01T00:00:00Z")]
    pub timestamp: String,
}

#[derive(Debug, Args)]
pub struct FbaArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Close every reaction the logic model cannot activate.
    #[arg(long)]
    pub logic: bool,
}

#[derive(Debug, Subcommand)]
pub enum ReviseCommand {
    /// Record the change from the parent revision to a model.
    Record(RecordArgs),
    /// Rebuild the model at a revision.
    Replay(SelectArgs),
    /// List the revisions from the root to a revision.
    History(SelectArgs),
    /// Human-readable changelog from the root to a revision.
    Changelog(SelectArgs),
    /// Canonical changeset turning one model into another.
    Diff(DiffArgs),
}

#[derive(Debug, Args)]
pub struct RecordArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Parent revision; defaults to the model's latest revision, or a new
    /// root when the ledger has none.
    #[arg(long)]
    pub parent: Option<String>,
    /// ABDUCTION_ACCEPTED, CURATION, EXTERNAL_UPDATE or SIMULATED.
    #[arg(long, default_value = "CURATION")]
    pub reason: String,
    #[arg(long, default_value = "")]
    pub description: String,
    #[command(flatten)]
    pub meta: MetaArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Ledger directory.
    #[arg(long)]
    pub ledger: PathBuf,
    /// Revision id (a unique prefix suffices).
    #[arg(long, conflicts_with = "model_id", required_unless_present = "model_id")]
    pub revision: Option<String>,
    /// Latest revision of this model.
    #[arg(long)]
    pub model_id: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model to diff against.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_enum)]
    pub target_format: Option<Format>,
    #[command(flatten)]
    pub out: OutArgs,
}
