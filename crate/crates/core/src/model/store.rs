use rand::Rng;

use super::relation::RelationParams;
use super::ModelConfig;
use crate::corpus::Vocabulary;
use crate::linalg::DenseMatrix;
use crate::{Error, Real, Result};

/// Word/entity and relation vectors.
///
/// Input vectors double as entity vectors for the knowledge model; output
/// vectors are only used by the text model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    pub input: DenseMatrix,
    pub output: DenseMatrix,
    pub relations: DenseMatrix,
}

impl EmbeddingStore {
    /// Input and relation vectors uniform on `[-0.5/d, 0.5/d]`, output
    /// vectors zero.
    pub fn random<R: Rng + ?Sized>(vocab_size: usize, relations: usize, dim: usize, rng: &mut R) -> Self {
        let bound = 0.5 / dim as Real;
        let mut uniform = |n: usize| -> Vec<Real> {
            (0..n).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        Self {
            input: DenseMatrix::from_vec(vocab_size, dim, uniform(vocab_size * dim)),
            relations: DenseMatrix::from_vec(relations, dim, uniform(relations * dim)),
            output: DenseMatrix::zeros(vocab_size, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.input.cols()
    }

    pub fn all_finite(&self) -> bool {
        [&self.input, &self.output, &self.relations]
            .iter()
            .all(|m| crate::linalg::all_finite(m.as_slice()))
    }
}

/// A complete trained model: configuration, vocabulary, vectors and
/// per-relation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub relation_names: Vec<String>,
    pub embeddings: EmbeddingStore,
    pub relations: Vec<RelationParams>,
}

impl Model {
    /// Freshly initialized model over `vocab` and the named relations.
    pub fn init<R: Rng + ?Sized>(
        config: ModelConfig,
        vocab: Vocabulary,
        relation_names: Vec<String>,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let embeddings = EmbeddingStore::random(vocab.len(), relation_names.len(), config.dim, rng);
        let relations = relation_names
            .iter()
            .map(|_| RelationParams::init(&config, rng))
            .collect::<Result<_>>()?;
        Ok(Self {
            config,
            vocab,
            relation_names,
            embeddings,
            relations,
        })
    }

    pub fn word_vector(&self, token: &str) -> Option<&[Real]> {
        self.vocab.get(token).map(|i| self.embeddings.input.row(i))
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relation_names.iter().position(|n| n == name)
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.embeddings.all_finite() {
            return Err(Error::NonFinite("embedding vectors".into()));
        }
        if let Some(r) = self.relations.iter().position(|p| !p.all_finite()) {
            return Err(Error::NonFinite(format!(
                "parameters of relation {:?}",
                self.relation_names[r]
            )));
        }
        Ok(())
    }
}
