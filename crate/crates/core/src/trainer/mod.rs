//! Joint stochastic gradient descent over the text and knowledge losses.
//!
//! Each micro-step flips a coin: with probability `alpha` it takes one
//! knowledge step (a golden triple plus one filtered corruption under the
//! margin ranking loss), otherwise one skip-gram step (a window pair plus
//! sampled negatives). An epoch is as many micro-steps as the corpus has
//! window pairs, so `alpha = 0` reproduces the plain skip-gram schedule.

mod report;
mod shared;

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use report::{EpochStats, TrainReport};
use shared::{SharedBuffer, SharedMatrix};

use crate::corpus::{
    build_negative_table, ContextPair, ContextPairs, Corpus, NegativeSampler, Subsampler,
    Vocabulary, DEFAULT_POWER, DEFAULT_TABLE_SIZE,
};
use crate::kg::{corrupt_triple, CorruptionMode, Triple, TripleSet};
use crate::model::{
    knowledge_loss_grad, skipgram_ns_loss_grad, Model, ModelConfig, RelationParams, TripleVectors,
};
use crate::{Error, Real, Result};

/// Learning rate never decays below this fraction of its initial value.
pub const MIN_LR_FRACTION: f64 = 1e-4;

/// Linearly decayed learning rate, floored at `initial_lr × 1e-4`.
pub fn lr_at(step: u64, total_steps: u64, initial_lr: f64) -> f64 {
    if total_steps == 0 {
        return initial_lr;
    }
    let progress = step.min(total_steps) as f64 / total_steps as f64;
    initial_lr * (1.0 - progress).max(MIN_LR_FRACTION)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Weight of the knowledge loss: the probability that a micro-step is a
    /// knowledge step. `0` is plain skip-gram, `1` trains only on triples.
    pub alpha: f64,
    pub initial_lr: f64,
    pub epochs: usize,
    /// Half-width of the context window.
    pub window: usize,
    /// Negative samples per skip-gram pair.
    pub negatives: usize,
    pub seed: u64,
    pub workers: usize,
    /// Single worker, serialized updates, bitwise reproducible.
    pub deterministic: bool,
    /// Frequent-token subsampling threshold; off when `None`.
    pub subsample: Option<f64>,
    pub negative_power: f64,
    pub negative_table_size: usize,
    /// Also corrupt the relation slot of golden triples.
    pub corrupt_relations: bool,
    /// Overrides the micro-steps per epoch (defaults to the number of window
    /// pairs, or the number of triples when there is no corpus).
    pub steps_per_epoch: Option<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            initial_lr: 0.025,
            epochs: 1,
            window: 5,
            negatives: 5,
            seed: 1,
            workers: 1,
            deterministic: true,
            subsample: None,
            negative_power: DEFAULT_POWER,
            negative_table_size: DEFAULT_TABLE_SIZE,
            corrupt_relations: false,
            steps_per_epoch: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.initial_lr)));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.negatives == 0 {
            return Err(Error::Config("negatives must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if let Some(rate) = self.subsample {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::Config(format!("subsample rate {rate} must be positive")));
            }
        }
        Ok(())
    }

    fn effective_workers(&self) -> usize {
        if self.deterministic {
            1
        } else {
            self.workers
        }
    }

    fn corruption_mode(&self) -> CorruptionMode {
        if self.corrupt_relations {
            CorruptionMode::AnySlot
        } else {
            CorruptionMode::Either
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub report: TrainReport,
}

/// Initializes a model from `train_config.seed` and trains it.
pub fn train(
    corpus: &Corpus,
    vocab: &Vocabulary,
    triples: Option<&TripleSet>,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<TrainOutcome> {
    let model = initial_model(vocab, triples, model_config, train_config)?;
    train_from(model, corpus, triples, train_config, |_| {})
}

/// The model [`train`] starts from.
pub fn initial_model(
    vocab: &Vocabulary,
    triples: Option<&TripleSet>,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<Model> {
    let relation_names = triples.map(|t| t.relations().to_vec()).unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);
    Model::init(model_config.clone(), vocab.clone(), relation_names, &mut rng)
}

/// Trains an existing model, calling `on_epoch` after every epoch.
pub fn train_from(
    model: Model,
    corpus: &Corpus,
    triples: Option<&TripleSet>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    config.validate()?;
    model.config.validate()?;
    let alpha = config.alpha;
    let uses_text = alpha < 1.0;
    let uses_kg = alpha > 0.0;

    let window_pairs = corpus.pair_count(config.window);
    if uses_text && window_pairs == 0 {
        return Err(Error::Config(format!(
            "alpha = {alpha} needs a corpus with at least two in-vocabulary tokens"
        )));
    }
    let kg = match triples {
        Some(set) if !set.is_empty() => Some(KgView::new(set, &model)?),
        _ if uses_kg => {
            return Err(Error::Config(format!("alpha = {alpha} needs a non-empty knowledge graph")))
        }
        _ => None,
    };
    if kg.as_ref().is_some_and(|k| k.set.num_entities() < 2) && uses_kg {
        return Err(Error::Config("knowledge graph needs at least two entities".into()));
    }

    let sampler = if uses_text {
        Some(build_negative_table(
            &model.vocab,
            config.negative_power,
            config.negative_table_size.max(model.vocab.len()),
        )?)
    } else {
        None
    };
    let subsampler = match (uses_text, config.subsample) {
        (true, Some(rate)) => Some(Subsampler::new(&model.vocab, rate)?),
        _ => None,
    };

    let steps_per_epoch = config.steps_per_epoch.unwrap_or(match window_pairs {
        0 => kg.as_ref().map_or(0, |k| k.set.len() as u64),
        n => n,
    });
    let total_steps = steps_per_epoch * config.epochs as u64;

    let shared = SharedModel::new(&model);
    let ctx = StepContext {
        shared: &shared,
        kg: kg.as_ref(),
        sampler: sampler.as_ref(),
        subsampler: subsampler.as_ref(),
        config,
        margin: model.config.margin,
        total_steps,
        global_step: AtomicU64::new(0),
    };

    let worker_count = config.effective_workers();
    let segments = split_segments(corpus.ids(), worker_count, config.window);
    let mut base_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut workers: Vec<Worker> = (0..worker_count)
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(base_rng.random());
            rng.set_stream(w as u64 + 1);
            Worker::new(rng, segments.get(w).copied().unwrap_or(&[]), &model, &ctx)
        })
        .collect();

    let mut report = TrainReport::new(alpha, total_steps);
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let per_worker = split_steps(steps_per_epoch, worker_count);
        let sums = if worker_count == 1 {
            vec![workers[0].run(per_worker[0], &ctx)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = workers
                    .iter_mut()
                    .zip(&per_worker)
                    .map(|(w, &steps)| {
                        let ctx = &ctx;
                        s.spawn(move || w.run(steps, ctx))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };
        let sums = sums.into_iter().collect::<Result<Vec<_>>>()?;
        if !shared.all_finite() {
            return Err(Error::NonFinite(format!("parameters after epoch {}", epoch + 1)));
        }
        let stats = EpochStats::from_sums(epoch + 1, alpha, &sums, started.elapsed().as_secs_f64());
        on_epoch(&stats);
        report.push(stats);
    }

    let model = shared.into_model(model);
    model.check_finite()?;
    Ok(TrainOutcome { model, report })
}

fn split_steps(total: u64, workers: usize) -> Vec<u64> {
    let w = workers as u64;
    (0..w).map(|i| total / w + u64::from(i < total % w)).collect()
}

/// Contiguous corpus chunks, one per worker, each long enough to hold a
/// window pair.
fn split_segments(ids: &[u32], workers: usize, window: usize) -> Vec<&[u32]> {
    if ids.len() < 2 {
        return vec![ids];
    }
    let usable = workers.min(ids.len() / (window + 1).max(2)).max(1);
    let chunk = ids.len().div_ceil(usable);
    ids.chunks(chunk).collect()
}

/// Triple set with entity indices resolved to vocabulary rows.
struct KgView<'a> {
    set: &'a TripleSet,
    entity_rows: Vec<usize>,
}

impl<'a> KgView<'a> {
    fn new(set: &'a TripleSet, model: &Model) -> Result<Self> {
        let entity_rows = set
            .entities()
            .iter()
            .map(|name| {
                model.vocab.get(name).ok_or_else(|| {
                    Error::Config(format!("entity {name:?} is missing from the vocabulary"))
                })
            })
            .collect::<Result<_>>()?;
        if model.relation_names.as_slice() != set.relations() {
            return Err(Error::Config(
                "model relations do not match the knowledge graph".into(),
            ));
        }
        Ok(Self { set, entity_rows })
    }
}

struct SharedModel {
    input: SharedMatrix,
    output: SharedMatrix,
    relation_vectors: SharedMatrix,
    relation_params: Vec<SharedBuffer>,
}

impl SharedModel {
    fn new(model: &Model) -> Self {
        Self {
            input: SharedMatrix::from_dense(&model.embeddings.input),
            output: SharedMatrix::from_dense(&model.embeddings.output),
            relation_vectors: SharedMatrix::from_dense(&model.embeddings.relations),
            relation_params: model
                .relations
                .iter()
                .map(|p| SharedBuffer::from_slice(&p.flatten()))
                .collect(),
        }
    }

    fn all_finite(&self) -> bool {
        self.input.all_finite()
            && self.output.all_finite()
            && self.relation_vectors.all_finite()
            && self.relation_params.iter().all(|p| p.all_finite())
    }

    fn into_model(self, mut model: Model) -> Model {
        model.embeddings.input = self.input.to_dense();
        model.embeddings.output = self.output.to_dense();
        model.embeddings.relations = self.relation_vectors.to_dense();
        for (params, shared) in model.relations.iter_mut().zip(&self.relation_params) {
            params.load_flat(&shared.to_vec());
        }
        model
    }
}

struct StepContext<'a> {
    shared: &'a SharedModel,
    kg: Option<&'a KgView<'a>>,
    sampler: Option<&'a NegativeSampler>,
    subsampler: Option<&'a Subsampler>,
    config: &'a TrainConfig,
    margin: Real,
    total_steps: u64,
    global_step: AtomicU64,
}

/// Loss sums one worker accumulates over one epoch.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LossSums {
    pub text_loss: f64,
    pub text_steps: u64,
    pub knowledge_loss: f64,
    pub knowledge_steps: u64,
    pub skipped_corruptions: u64,
}

struct Worker<'a> {
    rng: ChaCha8Rng,
    segment: &'a [u32],
    pairs: Option<ContextPairs<'a>>,
    triple_order: Vec<usize>,
    triple_cursor: usize,
    scratch: Scratch,
}

struct Scratch {
    a: Vec<Real>,
    b: Vec<Real>,
    c: Vec<Real>,
    d: Vec<Real>,
    r1: Vec<Real>,
    r2: Vec<Real>,
    negatives: Vec<Vec<Real>>,
    negative_ids: Vec<usize>,
    flat: Vec<Real>,
    params: Vec<RelationParams>,
}

impl<'a> Worker<'a> {
    fn new(rng: ChaCha8Rng, segment: &'a [u32], model: &Model, ctx: &StepContext) -> Self {
        let dim = model.embeddings.dim();
        let params = model.relations.clone();
        Self {
            rng,
            segment,
            pairs: None,
            triple_order: ctx.kg.map(|k| (0..k.set.len()).collect()).unwrap_or_default(),
            triple_cursor: usize::MAX,
            scratch: Scratch {
                a: vec![0.0; dim],
                b: vec![0.0; dim],
                c: vec![0.0; dim],
                d: vec![0.0; dim],
                r1: vec![0.0; dim],
                r2: vec![0.0; dim],
                negatives: vec![vec![0.0; dim]; ctx.config.negatives],
                negative_ids: Vec::with_capacity(ctx.config.negatives),
                flat: Vec::new(),
                params,
            },
        }
    }

    fn run(&mut self, steps: u64, ctx: &StepContext) -> Result<LossSums> {
        let mut sums = LossSums::default();
        let alpha = ctx.config.alpha;
        for _ in 0..steps {
            let step = ctx.global_step.fetch_add(1, Ordering::Relaxed);
            let lr = lr_at(step, ctx.total_steps, ctx.config.initial_lr) as Real;
            let knowledge = alpha >= 1.0 || (alpha > 0.0 && self.rng.random::<f64>() < alpha);
            if knowledge {
                match self.knowledge_step(lr, ctx)? {
                    Some(loss) => {
                        sums.knowledge_loss += loss as f64;
                        sums.knowledge_steps += 1;
                    }
                    None => sums.skipped_corruptions += 1,
                }
            } else {
                let loss = self.text_step(lr, ctx);
                sums.text_loss += loss as f64;
                sums.text_steps += 1;
            }
        }
        Ok(sums)
    }

    fn next_pair(&mut self, ctx: &StepContext) -> ContextPair {
        loop {
            if let Some(pair) = self.pairs.as_mut().and_then(Iterator::next) {
                return pair;
            }
            let ids: std::borrow::Cow<'a, [u32]> = match ctx.subsampler {
                Some(s) => s.filter(self.segment, &mut self.rng).into(),
                None => self.segment.into(),
            };
            self.pairs = Some(ContextPairs::new(ids, ctx.config.window));
        }
    }

    fn text_step(&mut self, lr: Real, ctx: &StepContext) -> Real {
        let pair = self.next_pair(ctx);
        let sampler = ctx.sampler.expect("text steps need a negative sampler");
        let s = &mut self.scratch;
        s.negative_ids.clear();
        for _ in 0..ctx.config.negatives {
            // Redraw a few times when the noise token is the true context.
            let mut neg = sampler.sample(&mut self.rng);
            for _ in 0..8 {
                if neg != pair.context {
                    break;
                }
                neg = sampler.sample(&mut self.rng);
            }
            if neg != pair.context {
                s.negative_ids.push(neg);
            }
        }
        if s.negative_ids.is_empty() {
            return 0.0;
        }
        let shared = ctx.shared;
        shared.input.read_row(pair.center, &mut s.a);
        shared.output.read_row(pair.context, &mut s.b);
        for (buf, &id) in s.negatives.iter_mut().zip(&s.negative_ids) {
            shared.output.read_row(id, buf);
        }
        let negs: Vec<&[Real]> = s.negatives[..s.negative_ids.len()].iter().map(|v| v.as_slice()).collect();
        let g = skipgram_ns_loss_grad(&s.a, &s.b, &negs);
        shared.input.add_row(pair.center, -lr, &g.center);
        shared.output.add_row(pair.context, -lr, &g.context);
        for (grad, &id) in g.negatives.iter().zip(&s.negative_ids) {
            shared.output.add_row(id, -lr, grad);
        }
        g.loss
    }

    fn next_triple(&mut self, kg: &KgView) -> Triple {
        if self.triple_cursor >= self.triple_order.len() {
            self.triple_order.shuffle(&mut self.rng);
            self.triple_cursor = 0;
        }
        let t = kg.set.triples()[self.triple_order[self.triple_cursor]];
        self.triple_cursor += 1;
        t
    }

    /// Returns `None` when no corruption could be drawn.
    fn knowledge_step(&mut self, lr: Real, ctx: &StepContext) -> Result<Option<Real>> {
        let kg = ctx.kg.expect("knowledge steps need a knowledge graph");
        let golden = self.next_triple(kg);
        let corrupted = match corrupt_triple(golden, kg.set, ctx.config.corruption_mode(), &mut self.rng) {
            Ok(c) => c,
            Err(Error::CorruptionExhausted { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let shared = ctx.shared;
        let rows = |t: Triple| (kg.entity_rows[t.head], kg.entity_rows[t.tail]);
        let (gh, gt) = rows(golden);
        let (ch, ct) = rows(corrupted);
        let s = &mut self.scratch;
        shared.input.read_row(gh, &mut s.a);
        shared.input.read_row(gt, &mut s.b);
        shared.input.read_row(ch, &mut s.c);
        shared.input.read_row(ct, &mut s.d);
        shared.relation_vectors.read_row(golden.relation, &mut s.r1);
        shared.relation_vectors.read_row(corrupted.relation, &mut s.r2);
        s.load_params(shared, golden.relation);
        if corrupted.relation != golden.relation {
            s.load_params(shared, corrupted.relation);
        }

        let k = knowledge_loss_grad(
            ctx.margin,
            &TripleVectors {
                params: &s.params[golden.relation],
                head: &s.a,
                relation: &s.r1,
                tail: &s.b,
            },
            &TripleVectors {
                params: &s.params[corrupted.relation],
                head: &s.c,
                relation: &s.r2,
                tail: &s.d,
            },
        )?;
        if !k.active {
            return Ok(Some(k.loss));
        }
        shared.input.add_row(gh, -lr, &k.golden.head);
        shared.input.add_row(gt, -lr, &k.golden.tail);
        shared.input.add_row(ch, -lr, &k.corrupted.head);
        shared.input.add_row(ct, -lr, &k.corrupted.tail);
        if s.params[golden.relation].variant().uses_translation() {
            shared.relation_vectors.add_row(golden.relation, -lr, &k.golden.relation);
            shared.relation_vectors.add_row(corrupted.relation, -lr, &k.corrupted.relation);
        }
        for (relation, grad) in [(golden.relation, &k.golden.params), (corrupted.relation, &k.corrupted.params)] {
            let target = &shared.relation_params[relation];
            if target.len() == 0 {
                continue;
            }
            s.flat.clear();
            for slice in grad.slices() {
                s.flat.extend_from_slice(slice);
            }
            target.add_scaled(0, -lr, &s.flat);
        }
        for relation in [golden.relation, corrupted.relation] {
            if matches!(s.params[relation], RelationParams::TransH { .. }) {
                s.load_params(shared, relation);
                s.params[relation].project_constraints();
                shared.relation_params[relation].write(0, &s.params[relation].flatten());
            }
        }
        Ok(Some(k.loss))
    }
}

impl Scratch {
    fn load_params(&mut self, shared: &SharedModel, relation: usize) {
        let buf = &shared.relation_params[relation];
        self.flat.resize(buf.len(), 0.0);
        buf.read(0, &mut self.flat);
        self.params[relation].load_flat(&self.flat);
    }
}

