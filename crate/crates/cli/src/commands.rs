use std::io::Write;
use std::path::Path;

use projectnet::checkpoint::Checkpoint;
use projectnet::corpus::{build_vocabulary_from_path, Corpus, PhraseLexicon, Vocabulary};
use projectnet::eval::{
    load_questions, load_similarity_pairs, rank_sweep, run_analogy_suite, run_similarity_suite, write_sweep_tsv,
    AnalogyPredictor, CosAdd, Relational, SimilarityReport, SweepInputs,
};
use projectnet::kg::{compute_mapping_stats, load_triples, TripleSet};
use projectnet::model::{ModelConfig, Variant};
use projectnet::trainer::{initial_model, train_from, TrainConfig};
use projectnet::{export, Error, Real, Result};

use crate::args::*;
use crate::config::render_config;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: e }
}

/// Runs `body` against the file at `path`, or stdout.
fn write_output(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(io_err(p))?;
            let mut w = std::io::BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(io_err(p))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|_| w.flush()).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        })
    }
}

pub fn build_vocab(args: &BuildVocabArgs) -> Result<()> {
    require_file(&args.corpus)?;
    if let Some(p) = &args.lexicon {
        require_file(p)?;
    }
    let lexicon = match &args.lexicon {
        Some(p) => PhraseLexicon::load(p)?,
        None => PhraseLexicon::new(),
    };
    let vocab = build_vocabulary_from_path(&args.corpus, args.min_count, &lexicon)?;
    vocab.save(&args.output)?;
    eprintln!("{} tokens written to {}", vocab.len(), args.output.display());
    Ok(())
}

pub fn stats(args: &StatsArgs) -> Result<()> {
    let set = load_triples(&args.triples, None)?;
    let stats = compute_mapping_stats(&set);
    write_output(args.output.as_deref(), |w| {
        writeln!(w, "# triples={} entities={} relations={}", set.len(), set.num_entities(), set.num_relations())?;
        stats.write_tsv(w)
    })
}

struct Prepared {
    vocab: Vocabulary,
    corpus: Corpus,
    triples: Option<TripleSet>,
    model: ModelConfig,
    train: TrainConfig,
}

fn configs(hyper: &HyperArgs) -> Result<(ModelConfig, TrainConfig)> {
    let variant = match hyper.variant {
        VariantArg::Projectnet => Variant::ProjectNet,
        // No triples are loaded, so the knowledge model is never used.
        VariantArg::Rnet | VariantArg::Sg => Variant::RNet,
        VariantArg::Transh => Variant::TransH,
        VariantArg::Se => Variant::SE,
        VariantArg::Transr => Variant::TransR,
    };
    let model = ModelConfig {
        variant,
        dim: hyper.dim,
        left_rank: hyper.left_rank,
        right_rank: hyper.right_rank,
        margin: hyper.margin as Real,
    };
    let train = TrainConfig {
        alpha: if hyper.variant == VariantArg::Sg { 0.0 } else { hyper.alpha },
        initial_lr: hyper.lr,
        epochs: hyper.epochs,
        window: hyper.window,
        negatives: hyper.negatives,
        seed: hyper.seed,
        workers: hyper.workers,
        deterministic: hyper.deterministic,
        subsample: hyper.subsample,
        negative_power: hyper.negative_power,
        negative_table_size: hyper.negative_table_size,
        corrupt_relations: hyper.corrupt_relations,
        steps_per_epoch: hyper.steps_per_epoch,
    };
    model.validate()?;
    train.validate()?;
    Ok((model, train))
}

fn prepare(data: &DataArgs, hyper: &HyperArgs) -> Result<Prepared> {
    let (model, train) = configs(hyper)?;
    let needs_kg = train.alpha > 0.0;
    if needs_kg && data.triples.is_none() {
        return Err(Error::Config("--triples is required unless --variant sg or --alpha 0".into()));
    }
    require_file(&data.corpus)?;
    for p in [&data.lexicon, &data.vocab, &data.triples].into_iter().flatten() {
        require_file(p)?;
    }

    let (vocab, lexicon) = match &data.vocab {
        Some(p) => {
            let vocab = Vocabulary::load(p)?;
            let lexicon = PhraseLexicon::from_names(vocab.phrases())?;
            (vocab, lexicon)
        }
        None => {
            let lexicon = match &data.lexicon {
                Some(p) => PhraseLexicon::load(p)?,
                None => PhraseLexicon::new(),
            };
            (build_vocabulary_from_path(&data.corpus, data.min_count, &lexicon)?, lexicon)
        }
    };
    let corpus = Corpus::from_path(&data.corpus, &vocab, &lexicon)?;
    let triples = match &data.triples {
        Some(p) if needs_kg || hyper.variant != VariantArg::Sg => Some(load_triples(p, Some(&vocab))?),
        _ => None,
    };
    Ok(Prepared { vocab, corpus, triples, model, train })
}

fn run_header(hyper: &HyperArgs, train: &TrainConfig, with_ranks: bool) -> String {
    let variant = clap::ValueEnum::to_possible_value(&hyper.variant).map(|v| v.get_name().to_string()).unwrap_or_default();
    let ranks = if with_ranks {
        format!(" left_rank={} right_rank={}", hyper.left_rank, hyper.right_rank)
    } else {
        String::new()
    };
    format!(
        "# variant={variant} d={} lr={} margin={} alpha={}{ranks} epochs={} window={} negatives={} seed={} deterministic={}",
        hyper.dim,
        hyper.lr,
        hyper.margin,
        train.alpha,
        hyper.epochs,
        hyper.window,
        hyper.negatives,
        hyper.seed,
        hyper.deterministic
    )
}

fn hyper_has_ranks(hyper: &HyperArgs) -> bool {
    hyper.variant == VariantArg::Projectnet
}

pub fn train(args: &TrainArgs) -> Result<()> {
    std::fs::create_dir_all(&args.output_dir).map_err(io_err(&args.output_dir))?;
    let p = prepare(&args.data, &args.hyper)?;
    eprintln!(
        "vocabulary {} tokens, corpus {} tokens, {} triples",
        p.vocab.len(),
        p.corpus.len(),
        p.triples.as_ref().map_or(0, |t| t.len())
    );
    let model = initial_model(&p.vocab, p.triples.as_ref(), &p.model, &p.train)?;
    let out = train_from(model, &p.corpus, p.triples.as_ref(), &p.train, |e| {
        eprintln!(
            "epoch {}: combined {:.6} text {:.6} knowledge {:.6} ({:.1}s)",
            e.epoch, e.combined_loss, e.text_loss, e.knowledge_loss, e.seconds
        );
    })?;
    out.model.check_finite()?;

    let dir = &args.output_dir;
    let config_path = dir.join("run.cfg");
    std::fs::write(&config_path, render_config(&args.data, &args.hyper)).map_err(io_err(&config_path))?;
    let report_path = dir.join("report.tsv");
    let header = run_header(&args.hyper, &p.train, hyper_has_ranks(&args.hyper));
    write_output(Some(&report_path), |w| {
        writeln!(w, "{header}")?;
        out.report.write_tsv(w)
    })?;
    let checkpoint = Checkpoint { model: out.model, train_config: p.train };
    checkpoint.save(&dir.join("model.ckpt"))?;
    export::export_embeddings(&checkpoint.model, &dir.join("embeddings.txt"))?;
    eprintln!("wrote model.ckpt, embeddings.txt, report.tsv and run.cfg to {}", dir.display());
    Ok(())
}

fn checkpoint_header(path: &Path, c: &Checkpoint) -> String {
    format!(
        "# checkpoint={} variant={} d={} alpha={} seed={}",
        path.display(),
        c.model.config.variant,
        c.model.config.dim,
        c.train_config.alpha,
        c.train_config.seed
    )
}

pub fn eval_analogy(args: &EvalAnalogyArgs) -> Result<()> {
    require_file(&args.checkpoint)?;
    require_file(&args.questions)?;
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let questions = load_questions(&args.questions)?;
    let model = &checkpoint.model;
    let relational = match args.mode {
        AnalogyMode::Offset => false,
        AnalogyMode::Auto => model.config.variant.supports_relational_analogy() && !model.relations.is_empty(),
        AnalogyMode::Relational => {
            if !model.config.variant.supports_relational_analogy() || model.relations.is_empty() {
                return Err(Error::Config(format!(
                    "relation-aware analogies need a projectnet or transh model with relations, got {}",
                    model.config.variant
                )));
            }
            true
        }
    };
    let predictor: Box<dyn AnalogyPredictor + '_> = if relational {
        Box::new(Relational::new(model))
    } else {
        Box::new(CosAdd::new(&model.embeddings.input))
    };
    let report = run_analogy_suite(&questions, &model.vocab, predictor.as_ref());
    let header = checkpoint_header(&args.checkpoint, &checkpoint);
    let mode = if relational { "relational" } else { "offset" };
    write_output(args.output.as_deref(), |w| {
        writeln!(w, "{header} mode={mode}")?;
        report.write_tsv(w)
    })
}

pub fn eval_similarity(args: &EvalSimilarityArgs) -> Result<()> {
    require_file(&args.checkpoint)?;
    for p in &args.pairs {
        require_file(p)?;
    }
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let model = &checkpoint.model;
    let mut reports = Vec::new();
    for path in &args.pairs {
        let pairs = load_similarity_pairs(path)?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        reports.push(run_similarity_suite(&name, &pairs, &model.vocab, &model.embeddings.input)?);
    }
    let header = checkpoint_header(&args.checkpoint, &checkpoint);
    write_output(args.output.as_deref(), |w| {
        writeln!(w, "{header}")?;
        SimilarityReport::write_tsv(&reports, w)
    })
}

pub fn rank_sweep_cmd(args: &RankSweepArgs) -> Result<()> {
    if args.hyper.variant != VariantArg::Projectnet {
        return Err(Error::Config("rank sweeps train projectnet models; drop --variant".into()));
    }
    require_file(&args.questions)?;
    // Base ranks are replaced on every run; any valid pair passes validation.
    let mut hyper = args.hyper.clone();
    hyper.left_rank = hyper.dim.min(hyper.left_rank).max(1);
    hyper.right_rank = hyper.dim.min(hyper.right_rank).max(1);
    let p = prepare(&args.data, &hyper)?;
    let questions = load_questions(&args.questions)?;
    let triples = p.triples.as_ref().ok_or(Error::EmptyKnowledgeGraph)?;
    let inputs = SweepInputs { corpus: &p.corpus, vocab: &p.vocab, triples, questions: &questions };
    let rows = rank_sweep(&inputs, &p.model, &p.train, &args.left_ranks, &args.right_ranks, |row| {
        eprintln!(
            "run {}: left {} right {} accuracy {:.4}",
            row.run, row.left_rank, row.right_rank, row.accuracy
        );
    })?;
    let header = run_header(&args.hyper, &p.train, false);
    write_output(args.output.as_deref(), |w| {
        writeln!(w, "{header}")?;
        write_sweep_tsv(&rows, w)
    })
}

pub fn export_cmd(args: &ExportArgs) -> Result<()> {
    require_file(&args.checkpoint)?;
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    export::export_embeddings(&checkpoint.model, &args.output)
}
