//! Python bindings: vocabularies, triple sets, training, evaluation and
//! checkpoints.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use projectnet::checkpoint::Checkpoint;
use projectnet::corpus::{build_vocabulary, Corpus, PhraseLexicon};
use projectnet::eval::{
    read_questions, read_similarity_pairs, run_analogy_suite, run_similarity_suite, AnalogyPredictor, CosAdd,
    Relational,
};
use projectnet::kg::compute_mapping_stats;
use projectnet::linalg::DenseMatrix;
use projectnet::model::{ModelConfig, Variant};
use projectnet::synthetic::{FixtureConfig, PeopleFixture};
use projectnet::trainer::{initial_model, train_from, TrainConfig};
use projectnet::{Error, Real};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::NonFinite(_) => PyArithmeticError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&v| v as f64).collect()).collect()
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().map(|&x| x as Real).collect()
}

#[pyclass(name = "Vocabulary", module = "projectnet_py", frozen)]
struct PyVocabulary {
    inner: projectnet::corpus::Vocabulary,
}

#[pymethods]
impl PyVocabulary {
    /// Counts tokens of `text`, merging the multi-word names in `lexicon`.
    #[staticmethod]
    #[pyo3(signature = (text, min_count=5, lexicon=None))]
    fn build(text: &str, min_count: u64, lexicon: Option<Vec<String>>) -> PyResult<Self> {
        let lexicon = PhraseLexicon::from_names(lexicon.unwrap_or_default()).map_err(py_err)?;
        let inner = build_vocabulary(text.as_bytes(), min_count, &lexicon).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: projectnet::corpus::Vocabulary::load(&path).map_err(py_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(py_err)
    }

    #[getter]
    fn tokens(&self) -> Vec<String> {
        self.inner.tokens().to_vec()
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.inner.counts().to_vec()
    }

    fn index(&self, token: &str) -> PyResult<usize> {
        self.inner.get(token).ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, token: &str) -> bool {
        self.inner.contains(token)
    }
}

#[pyclass(name = "TripleSet", module = "projectnet_py", frozen)]
struct PyTripleSet {
    inner: projectnet::kg::TripleSet,
}

#[pymethods]
impl PyTripleSet {
    /// Parses `head<TAB>relation<TAB>tail` lines, keeping only triples whose
    /// entities are in `vocab` when one is given.
    #[staticmethod]
    #[pyo3(signature = (text, vocab=None))]
    fn parse(text: &str, vocab: Option<&PyVocabulary>) -> PyResult<Self> {
        let inner = projectnet::kg::TripleSet::read_from(text.as_bytes(), "<string>", vocab.map(|v| &v.inner))
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, vocab=None))]
    fn load(path: PathBuf, vocab: Option<&PyVocabulary>) -> PyResult<Self> {
        let inner = projectnet::kg::load_triples(&path, vocab.map(|v| &v.inner)).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn entities(&self) -> Vec<String> {
        self.inner.entities().to_vec()
    }

    #[getter]
    fn relations(&self) -> Vec<String> {
        self.inner.relations().to_vec()
    }

    fn triples(&self) -> Vec<(String, String, String)> {
        self.inner
            .triples()
            .iter()
            .map(|t| {
                (
                    self.inner.entity_name(t.head).to_string(),
                    self.inner.relation_name(t.relation).to_string(),
                    self.inner.entity_name(t.tail).to_string(),
                )
            })
            .collect()
    }

    /// Per-relation mapping counts plus the four aggregate numbers.
    fn mapping_stats(&self, py: Python<'_>) -> PyResult<BTreeMap<String, Py<PyAny>>> {
        let s = compute_mapping_stats(&self.inner);
        let mut out = BTreeMap::new();
        let per: Vec<(String, usize, usize, usize, f64, f64)> = s
            .per_relation
            .iter()
            .map(|r| (r.relation.clone(), r.triples, r.distinct_heads, r.distinct_tails, r.tails_per_head, r.heads_per_tail))
            .collect();
        out.insert("per_relation".into(), per.into_pyobject(py)?.into_any().unbind());
        for (k, v) in [
            ("tails_per_head_mean", s.tails_per_head.mean),
            ("tails_per_head_std", s.tails_per_head.std_dev),
            ("heads_per_tail_mean", s.heads_per_tail.mean),
            ("heads_per_tail_std", s.heads_per_tail.std_dev),
        ] {
            out.insert(k.into(), v.into_pyobject(py)?.into_any().unbind());
        }
        Ok(out)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Model", module = "projectnet_py", frozen)]
struct PyModel {
    checkpoint: Checkpoint,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { checkpoint: Checkpoint::load(&path).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        Ok(Self { checkpoint: Checkpoint::from_bytes(data).map_err(py_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.checkpoint.save(&path).map_err(py_err)
    }

    fn to_bytes(&self) -> Vec<u8> {
        self.checkpoint.to_bytes()
    }

    /// Text export: header line, then one `token v_1 ... v_d` line per token.
    fn export(&self, path: PathBuf) -> PyResult<()> {
        projectnet::export::export_embeddings(&self.checkpoint.model, &path).map_err(py_err)
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.checkpoint.model.config.variant.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.checkpoint.model.config.dim
    }

    #[getter]
    fn vocabulary(&self) -> PyVocabulary {
        PyVocabulary { inner: self.checkpoint.model.vocab.clone() }
    }

    #[getter]
    fn relations(&self) -> Vec<String> {
        self.checkpoint.model.relation_names.clone()
    }

    fn word_vector(&self, token: &str) -> PyResult<Vec<f64>> {
        self.checkpoint
            .model
            .word_vector(token)
            .map(|v| v.iter().map(|&x| x as f64).collect())
            .ok_or_else(|| PyKeyError::new_err(token.to_string()))
    }

    /// Triple score under the model's knowledge model; lower is more plausible.
    fn score(&self, head: &str, relation: &str, tail: &str) -> PyResult<f64> {
        let m = &self.checkpoint.model;
        let r = m.relation_index(relation).ok_or_else(|| PyKeyError::new_err(relation.to_string()))?;
        let h = m.word_vector(head).ok_or_else(|| PyKeyError::new_err(head.to_string()))?;
        let t = m.word_vector(tail).ok_or_else(|| PyKeyError::new_err(tail.to_string()))?;
        projectnet::model::score_triple(&m.relations[r], h, m.embeddings.relations.row(r), t)
            .map(|s| s as f64)
            .map_err(py_err)
    }

    /// Analogy accuracy on question text (`: relation` sections of `a b c d`
    /// lines). `mode` is `auto`, `offset` or `relational`.
    #[pyo3(signature = (questions, mode="auto"))]
    fn eval_analogy(&self, py: Python<'_>, questions: &str, mode: &str) -> PyResult<BTreeMap<String, (usize, usize, usize, f64)>> {
        let questions = read_questions(questions.as_bytes(), "<string>").map_err(py_err)?;
        let model = &self.checkpoint.model;
        let can_relate = model.config.variant.supports_relational_analogy() && !model.relations.is_empty();
        let relational = match mode {
            "auto" => can_relate,
            "offset" => false,
            "relational" if can_relate => true,
            "relational" => return Err(PyValueError::new_err("model does not support relation-aware analogies")),
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let report = py.detach(|| {
            let predictor: Box<dyn AnalogyPredictor + '_> = if relational {
                Box::new(Relational::new(model))
            } else {
                Box::new(CosAdd::new(&model.embeddings.input))
            };
            run_analogy_suite(&questions, &model.vocab, predictor.as_ref())
        });
        let mut out: BTreeMap<String, _> = report
            .per_relation
            .iter()
            .map(|r| (r.relation.clone(), (r.answered, r.correct, r.skipped, r.accuracy())))
            .collect();
        out.insert("total".into(), (report.answered, report.correct, report.skipped, report.accuracy()));
        Ok(out)
    }

    /// `(pairs, skipped, rho)` for `word1<TAB>word2<TAB>score` text.
    fn eval_similarity(&self, pairs: &str) -> PyResult<(usize, usize, f64)> {
        let pairs = read_similarity_pairs(pairs.as_bytes(), "<string>").map_err(py_err)?;
        let m = &self.checkpoint.model;
        let r = run_similarity_suite("<string>", &pairs, &m.vocab, &m.embeddings.input).map_err(py_err)?;
        Ok((r.pairs, r.skipped, r.rho))
    }
}

/// Trains a model. `corpus` is raw text, tokenized with the vocabulary's
/// phrases. Returns the model and per-epoch
/// `(text_loss, knowledge_loss, combined_loss)` tuples.
#[pyfunction]
#[pyo3(signature = (
    corpus, vocab, triples=None, *, variant="projectnet", dim=100, left_rank=50, right_rank=90, margin=1.0,
    alpha=0.2, lr=0.025, epochs=1, window=5, negatives=5, seed=1, workers=1, deterministic=true,
    steps_per_epoch=None
))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    corpus: &str,
    vocab: &PyVocabulary,
    triples: Option<&PyTripleSet>,
    variant: &str,
    dim: usize,
    left_rank: usize,
    right_rank: usize,
    margin: f64,
    alpha: f64,
    lr: f64,
    epochs: usize,
    window: usize,
    negatives: usize,
    seed: u64,
    workers: usize,
    deterministic: bool,
    steps_per_epoch: Option<u64>,
) -> PyResult<(PyModel, Vec<(f64, f64, f64)>)> {
    let variant: Variant = variant.parse().map_err(py_err)?;
    let mc = ModelConfig { variant, dim, left_rank, right_rank, margin: margin as Real };
    let tc = TrainConfig {
        alpha,
        initial_lr: lr,
        epochs,
        window,
        negatives,
        seed,
        workers,
        deterministic,
        steps_per_epoch,
        ..TrainConfig::default()
    };
    let vocab = &vocab.inner;
    let kg = triples.map(|t| &t.inner);
    let outcome = py
        .detach(|| {
            let lexicon = PhraseLexicon::from_names(vocab.phrases())?;
            let corpus = Corpus::from_reader(corpus.as_bytes(), vocab, &lexicon)?;
            let model = initial_model(vocab, kg, &mc, &tc)?;
            let out = train_from(model, &corpus, kg, &tc, |_| {})?;
            out.model.check_finite()?;
            Ok::<_, Error>(out)
        })
        .map_err(py_err)?;
    let losses = outcome.report.epochs.iter().map(|e| (e.text_loss, e.knowledge_loss, e.combined_loss)).collect();
    Ok((PyModel { checkpoint: Checkpoint { model: outcome.model, train_config: tc } }, losses))
}

/// Spearman rank correlation with tied values sharing their mean rank.
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    projectnet::eval::spearman_rho(&x, &y).map_err(py_err)
}

#[pyfunction]
fn fractional_ranks(values: Vec<f64>) -> Vec<f64> {
    projectnet::eval::fractional_ranks(&values)
}

/// Dense form of a random diagonal 0/1 projection with `rank` ones.
#[pyfunction]
#[pyo3(signature = (dim, rank, seed=0))]
fn init_projection(dim: usize, rank: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let p = projectnet::model::init_projection(dim, rank, &mut rng).map_err(py_err)?;
    Ok(rows(&p.materialize()))
}

/// Head and tail projections, as dense matrices, equivalent to the
/// hyperplane with unit normal `normal`.
#[pyfunction]
fn transh_to_projectnet(normal: Vec<f64>) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (l, r) = projectnet::model::transh_to_projectnet(&reals(&normal)).map_err(py_err)?;
    Ok((rows(&l.materialize()), rows(&r.materialize())))
}

/// The people fixture as a dict of file contents.
#[pyfunction]
#[pyo3(signature = (seed=7, corpus_tokens=50_000, questions=20))]
fn people_fixture(seed: u64, corpus_tokens: usize, questions: usize) -> BTreeMap<&'static str, String> {
    let f = PeopleFixture::generate(&FixtureConfig { seed, corpus_tokens, questions, ..FixtureConfig::default() });
    BTreeMap::from([
        ("corpus", f.corpus),
        ("lexicon", f.lexicon),
        ("triples", f.triples),
        ("questions", f.questions),
    ])
}

#[pymodule]
fn projectnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVocabulary>()?;
    m.add_class::<PyTripleSet>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(fractional_ranks, m)?)?;
    m.add_function(wrap_pyfunction!(init_projection, m)?)?;
    m.add_function(wrap_pyfunction!(transh_to_projectnet, m)?)?;
    m.add_function(wrap_pyfunction!(people_fixture, m)?)?;
    Ok(())
}
