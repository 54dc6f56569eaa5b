//! Analogy and word-similarity evaluation, and the projection-rank sweep.

mod analogy;
mod similarity;
mod sweep;

use std::io::Write;

pub use analogy::{
    analogy_3cosadd, default_predictor, load_questions, read_questions, run_analogy_suite,
    AnalogyPredictor, AnalogyQuestion, AnalogyReport, CosAdd, RelationAccuracy, Relational,
};
pub use similarity::{
    fractional_ranks, load_similarity_pairs, read_similarity_pairs, run_similarity_suite,
    spearman_rho, SimilarityPair, SimilarityReport,
};
pub use sweep::{rank_sweep, write_sweep_row, write_sweep_tsv, SweepInputs, SweepRow, DEFAULT_RANK_GRID, SWEEP_TSV_HEADER};

/// Everything one evaluation run produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub analogy: Option<AnalogyReport>,
    pub similarity: Vec<SimilarityReport>,
}

impl EvalReport {
    /// Analogy table, then a blank line, then the similarity table.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if let Some(a) = &self.analogy {
            a.write_tsv(&mut out)?;
        }
        if !self.similarity.is_empty() {
            if self.analogy.is_some() {
                writeln!(out)?;
            }
            SimilarityReport::write_tsv(&self.similarity, &mut out)?;
        }
        Ok(())
    }
}
