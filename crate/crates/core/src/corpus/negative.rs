use rand::Rng;

use super::Vocabulary;
use crate::{Error, Result};

/// Draws noise tokens with probability proportional to `count^power`.
///
/// Backed by a lookup table whose slots are apportioned by largest
/// remainder, so each token's table share is within `1 / table_size` of its
/// exact probability. Zero-count tokens never occupy a slot.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    table: Vec<u32>,
    probabilities: Vec<f64>,
}

pub const DEFAULT_TABLE_SIZE: usize = 10_000_000;
pub const DEFAULT_POWER: f64 = 0.75;

pub fn build_negative_table(
    vocab: &Vocabulary,
    power: f64,
    table_size: usize,
) -> Result<NegativeSampler> {
    NegativeSampler::from_counts(vocab.counts(), power, table_size)
}

impl NegativeSampler {
    pub fn from_counts(counts: &[u64], power: f64, table_size: usize) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidArgument("vocabulary is empty".into()));
        }
        if !(0.0..=1.0).contains(&power) {
            return Err(Error::InvalidArgument(format!("power {power} outside [0, 1]")));
        }
        if table_size < counts.len() {
            return Err(Error::InvalidArgument(format!(
                "table size {table_size} smaller than vocabulary ({})",
                counts.len()
            )));
        }
        if u32::try_from(counts.len()).is_err() {
            return Err(Error::InvalidArgument("vocabulary too large for sampler".into()));
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| if c == 0 { 0.0 } else { (c as f64).powf(power) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateDistribution(
                "every token has zero count".into(),
            ));
        }
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();

        let quotas: Vec<f64> = probabilities.iter().map(|p| p * table_size as f64).collect();
        let mut slots: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let assigned: usize = slots.iter().sum();
        let mut by_remainder: Vec<usize> = (0..counts.len()).filter(|&i| weights[i] > 0.0).collect();
        by_remainder.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in by_remainder.iter().take(table_size.saturating_sub(assigned)) {
            slots[i] += 1;
        }

        let mut table = Vec::with_capacity(table_size);
        for (i, &n) in slots.iter().enumerate() {
            table.extend(std::iter::repeat_n(i as u32, n));
        }
        Ok(Self {
            table,
            probabilities,
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table[rng.random_range(0..self.table.len())] as usize
    }

    /// Exact target probability of drawing `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    /// Probability realized by the lookup table.
    pub fn table_probability(&self, index: usize) -> f64 {
        let n = self.table.iter().filter(|&&t| t as usize == index).count();
        n as f64 / self.table.len() as f64
    }

    pub fn table_size(&self) -> usize {
        self.table.len()
    }
}
