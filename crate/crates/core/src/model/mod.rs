//! Embedding parameters, triple scoring functions, losses and their
//! analytic gradients.

mod projection;
mod relation;
mod score;
mod skipgram;
mod store;

use std::fmt;
use std::str::FromStr;

pub use projection::{init_projection, transh_to_projectnet, LowRankProjection};
pub use relation::RelationParams;
pub use score::{knowledge_loss_grad, score_triple, score_with_grad, KnowledgeGrad, TripleGrad, TripleVectors};
pub use skipgram::{sigmoid, skipgram_ns_loss_grad, SkipGramGrad, LOGIT_CLAMP};
pub use store::{EmbeddingStore, Model};

use crate::{Error, Real, Result};

/// Knowledge-model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `‖L_r h + r − R_r t‖²` with rank-bounded `L_r`, `R_r`.
    ProjectNet,
    /// `‖h + r − t‖²`
    RNet,
    /// `‖h⊥ + r − t⊥‖²` on a relation hyperplane.
    TransH,
    /// `‖L_r h − R_r t‖₁` with full matrices.
    SE,
    /// `‖M_r h + r − M_r t‖²`
    TransR,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::ProjectNet,
        Variant::RNet,
        Variant::TransH,
        Variant::SE,
        Variant::TransR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::ProjectNet => "projectnet",
            Variant::RNet => "rnet",
            Variant::TransH => "transh",
            Variant::SE => "se",
            Variant::TransR => "transr",
        }
    }

    /// Whether triples carry a trained translation vector.
    pub fn uses_translation(self) -> bool {
        self != Variant::SE
    }

    /// Whether two-step relational analogy inference applies.
    pub fn supports_relational_analogy(self) -> bool {
        matches!(self, Variant::ProjectNet | Variant::TransH)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub variant: Variant,
    pub dim: usize,
    /// Rank bound of head projections (ProjectNet only).
    pub left_rank: usize,
    /// Rank bound of tail projections (ProjectNet only).
    pub right_rank: usize,
    pub margin: Real,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::ProjectNet,
            dim: 100,
            left_rank: 50,
            right_rank: 90,
            margin: 1.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if self.variant == Variant::ProjectNet {
            for (name, rank) in [("left", self.left_rank), ("right", self.right_rank)] {
                if rank == 0 || rank > self.dim {
                    return Err(Error::Config(format!(
                        "{name} rank {rank} must lie in [1, {}]",
                        self.dim
                    )));
                }
            }
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::Config(format!("margin {} must be positive", self.margin)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("transe".parse::<Variant>().is_err());
    }

    #[test]
    fn config_rejects_rank_above_dim() {
        let c = ModelConfig { dim: 10, left_rank: 11, ..ModelConfig::default() };
        assert!(c.validate().is_err());
        let c = ModelConfig { dim: 10, left_rank: 11, variant: Variant::RNet, ..ModelConfig::default() };
        assert!(c.validate().is_ok());
        assert!(ModelConfig { margin: 0.0, ..ModelConfig::default() }.validate().is_err());
    }
}
