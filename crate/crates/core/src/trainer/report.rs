use std::io::Write;
use std::path::Path;

use super::LossSums;
use crate::{Error, Result};

/// Losses and throughput of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean skip-gram loss per text step.
    pub text_loss: f64,
    /// Mean margin loss per knowledge step.
    pub knowledge_loss: f64,
    /// `(1 - alpha) * text_loss + alpha * knowledge_loss`
    pub combined_loss: f64,
    pub text_steps: u64,
    pub knowledge_steps: u64,
    /// Knowledge steps skipped because no corruption could be drawn.
    pub skipped_corruptions: u64,
    pub seconds: f64,
}

impl EpochStats {
    pub(crate) fn from_sums(epoch: usize, alpha: f64, sums: &[LossSums], seconds: f64) -> Self {
        let mut total = LossSums::default();
        for s in sums {
            total.text_loss += s.text_loss;
            total.text_steps += s.text_steps;
            total.knowledge_loss += s.knowledge_loss;
            total.knowledge_steps += s.knowledge_steps;
            total.skipped_corruptions += s.skipped_corruptions;
        }
        let mean = |sum: f64, n: u64| if n == 0 { 0.0 } else { sum / n as f64 };
        let text_loss = mean(total.text_loss, total.text_steps);
        let knowledge_loss = mean(total.knowledge_loss, total.knowledge_steps);
        Self {
            epoch,
            text_loss,
            knowledge_loss,
            combined_loss: (1.0 - alpha) * text_loss + alpha * knowledge_loss,
            text_steps: total.text_steps,
            knowledge_steps: total.knowledge_steps,
            skipped_corruptions: total.skipped_corruptions,
            seconds,
        }
    }

    pub fn steps(&self) -> u64 {
        self.text_steps + self.knowledge_steps + self.skipped_corruptions
    }

    /// Fraction of micro-steps that were text steps.
    pub fn text_fraction(&self) -> f64 {
        match self.steps() {
            0 => 0.0,
            n => self.text_steps as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub alpha: f64,
    pub total_steps: u64,
    pub epochs: Vec<EpochStats>,
}

impl TrainReport {
    pub(crate) fn new(alpha: f64, total_steps: u64) -> Self {
        Self {
            alpha,
            total_steps,
            epochs: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, stats: EpochStats) {
        self.epochs.push(stats);
    }

    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }

    pub const TSV_HEADER: &'static str =
        "epoch\ttext_loss\tknowledge_loss\tcombined_loss\ttext_steps\tknowledge_steps\tskipped\tseconds";

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", Self::TSV_HEADER)?;
        for e in &self.epochs {
            writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{:.3}",
                e.epoch,
                e.text_loss,
                e.knowledge_loss,
                e.combined_loss,
                e.text_steps,
                e.knowledge_steps,
                e.skipped_corruptions,
                e.seconds
            )?;
        }
        Ok(())
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }
}
