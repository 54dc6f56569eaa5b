use std::io::Write;

use super::analogy::{run_analogy_suite, AnalogyQuestion, Relational};
use crate::corpus::{Corpus, Vocabulary};
use crate::kg::TripleSet;
use crate::model::{ModelConfig, Variant};
use crate::trainer::{train, TrainConfig};
use crate::{Error, Result};

/// Head and tail rank grid used when none is given.
pub const DEFAULT_RANK_GRID: [usize; 11] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 100];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// 1-based position in the sweep.
    pub run: usize,
    pub left_rank: usize,
    pub right_rank: usize,
    pub accuracy: f64,
    pub answered: usize,
    /// Cumulative training micro-steps after this run.
    pub steps: u64,
}

pub struct SweepInputs<'a> {
    pub corpus: &'a Corpus,
    pub vocab: &'a Vocabulary,
    pub triples: &'a TripleSet,
    pub questions: &'a [AnalogyQuestion],
}

/// Trains one ProjectNet model per `(m_L, m_R)` pair, everything else held
/// fixed, and scores each with relation-aware analogy inference.
pub fn rank_sweep(
    inputs: &SweepInputs,
    base: &ModelConfig,
    train_config: &TrainConfig,
    left_ranks: &[usize],
    right_ranks: &[usize],
    mut on_row: impl FnMut(&SweepRow),
) -> Result<Vec<SweepRow>> {
    if left_ranks.is_empty() || right_ranks.is_empty() {
        return Err(Error::Config("rank lists must not be empty".into()));
    }
    for &m in left_ranks.iter().chain(right_ranks) {
        if m == 0 || m > base.dim {
            return Err(Error::Config(format!("rank {m} must lie in [1, {}]", base.dim)));
        }
    }
    let mut rows = Vec::with_capacity(left_ranks.len() * right_ranks.len());
    let mut steps = 0;
    for &left_rank in left_ranks {
        for &right_rank in right_ranks {
            let config = ModelConfig {
                variant: Variant::ProjectNet,
                left_rank,
                right_rank,
                ..base.clone()
            };
            let out = train(inputs.corpus, inputs.vocab, Some(inputs.triples), &config, train_config)?;
            steps += out.report.total_steps;
            let report = run_analogy_suite(inputs.questions, &out.model.vocab, &Relational::new(&out.model));
            let row = SweepRow {
                run: rows.len() + 1,
                left_rank,
                right_rank,
                accuracy: report.accuracy(),
                answered: report.answered,
                steps,
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub const SWEEP_TSV_HEADER: &str = "left_rank\tright_rank\taccuracy\tanswered\tsteps\trun";

pub fn write_sweep_row<W: Write>(row: &SweepRow, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{}\t{}\t{:.4}\t{}\t{}\t{}",
        row.left_rank, row.right_rank, row.accuracy, row.answered, row.steps, row.run
    )
}

pub fn write_sweep_tsv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_TSV_HEADER}")?;
    for row in rows {
        write_sweep_row(row, &mut out)?;
    }
    Ok(())
}
