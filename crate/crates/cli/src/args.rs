use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "projectnet",
    version,
    about = "Joint word and knowledge-graph embeddings: vocabulary, statistics, training, evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count tokens, merge lexicon phrases and write a vocabulary file.
    BuildVocab(BuildVocabArgs),
    /// Heads-per-tail and tails-per-head statistics of a triple file.
    Stats(StatsArgs),
    /// Train a model; writes a checkpoint, an embedding export and a loss report.
    Train(TrainArgs),
    /// Word-analogy accuracy of a checkpoint.
    EvalAnalogy(EvalAnalogyArgs),
    /// Spearman correlation of cosine similarity against human scores.
    EvalSimilarity(EvalSimilarityArgs),
    /// Train one model per (left rank, right rank) pair and score each on analogies.
    RankSweep(RankSweepArgs),
    /// Write the input vectors of a checkpoint as text.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct BuildVocabArgs {
    /// key=value file supplying defaults for any flag below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Multi-word names, one per line
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// head<TAB>relation<TAB>tail file
    #[arg(long)]
    pub triples: PathBuf,
    /// Write here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Projectnet,
    Rnet,
    Transh,
    Se,
    Transr,
    /// Skip-gram only; forces alpha = 0 and makes the triple file optional
    Sg,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// key=value file supplying defaults for any flag below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Multi-word names, one per line; ignored when --vocab is given
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Existing vocabulary file; built from the corpus when absent
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Used when the vocabulary is built from the corpus
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    /// head<TAB>relation<TAB>tail file
    #[arg(long)]
    pub triples: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HyperArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Projectnet)]
    pub variant: VariantArg,
    /// Embedding size
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Head projection rank (m_L)
    #[arg(long, default_value_t = 50)]
    pub left_rank: usize,
    /// Tail projection rank (m_R)
    #[arg(long, default_value_t = 90)]
    pub right_rank: usize,
    /// Ranking-loss margin
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    /// Knowledge-loss weight in [0, 1]; values explored in experiments: 0.01, 0.05, 0.1, 0.2, 0.5
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Initial learning rate, decayed linearly
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
    /// Context half-width
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Negative samples per context pair
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (ignored in deterministic mode)
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Serialize updates on one worker for bitwise reproducible runs
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub deterministic: bool,
    /// Frequent-token subsampling threshold (off by default)
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Exponent of the unigram noise distribution
    #[arg(long, default_value_t = 0.75)]
    pub negative_power: f64,
    #[arg(long, default_value_t = 10_000_000)]
    pub negative_table_size: usize,
    /// Also corrupt the relation of golden triples
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub corrupt_relations: bool,
    /// Micro-steps per epoch (default: number of context pairs)
    #[arg(long)]
    pub steps_per_epoch: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Receives model.ckpt, embeddings.txt, report.tsv and run.cfg
    #[arg(long, short)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalogyMode {
    /// Relation-aware inference when the model supports it, vector offset otherwise
    Auto,
    /// Vector offset, 3CosAdd
    Offset,
    /// Two-step relation-aware inference
    Relational,
}

#[derive(Debug, Args)]
pub struct EvalAnalogyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// `: relation` sections of `a b c d` lines
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long, value_enum, default_value_t = AnalogyMode::Auto)]
    pub mode: AnalogyMode,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalSimilarityArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// word1<TAB>word2<TAB>score files; repeat for several datasets
    #[arg(long, required = true, num_args = 1..)]
    pub pairs: Vec<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankSweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub questions: PathBuf,
    /// Head ranks to try
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,95,100")]
    pub left_ranks: Vec<usize>,
    /// Tail ranks to try
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50,60,70,80,90,95,100")]
    pub right_ranks: Vec<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
}
