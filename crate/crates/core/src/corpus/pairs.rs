use std::borrow::Cow;
use std::io::BufRead;

use rand::Rng;

use super::phrase::PhraseLexicon;
use super::vocab::{line_tokens, Vocabulary};
use crate::{Error, Result};

/// A training corpus as a stream of in-vocabulary token indices.
///
/// Out-of-vocabulary tokens are removed when the corpus is built, so
/// windows are formed over the remaining tokens only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    ids: Vec<u32>,
}

impl Corpus {
    pub fn from_ids(ids: Vec<u32>) -> Self {
        Self { ids }
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Self {
        let ids = tokens
            .iter()
            .filter_map(|t| vocab.get(t.as_ref()))
            .map(|i| i as u32)
            .collect();
        Self { ids }
    }

    /// Tokenizes and phrase-merges `text`, keeping in-vocabulary tokens.
    pub fn from_reader<R: BufRead>(
        text: R,
        vocab: &Vocabulary,
        lexicon: &PhraseLexicon,
    ) -> Result<Self> {
        let mut ids = Vec::new();
        for line in text.lines() {
            let line = line.map_err(|e| Error::io("<corpus>", e))?;
            ids.extend(
                line_tokens(&line, lexicon)
                    .iter()
                    .filter_map(|t| vocab.get(t))
                    .map(|i| i as u32),
            );
        }
        Ok(Self { ids })
    }

    pub fn from_path(
        path: &std::path::Path,
        vocab: &Vocabulary,
        lexicon: &PhraseLexicon,
    ) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file), vocab, lexicon).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of (center, context) pairs one pass emits without subsampling.
    pub fn pair_count(&self, window: usize) -> u64 {
        count_context_pairs(self.ids.len(), window)
    }
}

/// Closed-form count of window pairs over a stream of `len` tokens.
pub fn count_context_pairs(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|k| (k.min(window) + (len - 1 - k).min(window)) as u64)
        .sum()
}

/// One skip-gram training example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContextPair {
    pub center: usize,
    pub context: usize,
    /// Offset of `center` in the (filtered) token stream.
    pub position: usize,
}

/// Frequent-token subsampling with the usual `sqrt` keep rule.
#[derive(Debug, Clone)]
pub struct Subsampler {
    keep: Vec<f64>,
}

impl Subsampler {
    /// `rate` is the threshold frequency, e.g. `1e-3`.
    pub fn new(vocab: &Vocabulary, rate: f64) -> Result<Self> {
        if rate <= 0.0 || !rate.is_finite() {
            return Err(Error::InvalidArgument(format!("subsampling rate {rate} must be positive")));
        }
        let total = vocab.total_count() as f64;
        let keep = vocab
            .counts()
            .iter()
            .map(|&c| {
                if c == 0 {
                    1.0
                } else {
                    let f = c as f64 / (rate * total);
                    ((f.sqrt() + 1.0) / f).min(1.0)
                }
            })
            .collect();
        Ok(Self { keep })
    }

    pub fn keep_probability(&self, id: usize) -> f64 {
        self.keep[id]
    }

    pub fn filter<R: Rng + ?Sized>(&self, ids: &[u32], rng: &mut R) -> Vec<u32> {
        ids.iter()
            .copied()
            .filter(|&id| {
                let p = self.keep[id as usize];
                p >= 1.0 || rng.random::<f64>() < p
            })
            .collect()
    }
}

/// Iterator over all window pairs of a token stream.
///
/// For every position `k` it yields `(p_k, p_{k+j})` for
/// `j = -M..=-1, 1..=M`, skipping offsets that fall outside the stream.
#[derive(Debug, Clone)]
pub struct ContextPairs<'a> {
    ids: Cow<'a, [u32]>,
    window: isize,
    position: usize,
    offset: isize,
}

impl<'a> ContextPairs<'a> {
    pub fn new(ids: impl Into<Cow<'a, [u32]>>, window: usize) -> Self {
        assert!(window >= 1, "window must be at least 1");
        let window = window as isize;
        Self {
            ids: ids.into(),
            window,
            position: 0,
            offset: -window,
        }
    }

    pub fn stream_len(&self) -> usize {
        self.ids.len()
    }
}

impl Iterator for ContextPairs<'_> {
    type Item = ContextPair;

    fn next(&mut self) -> Option<ContextPair> {
        let len = self.ids.len() as isize;
        while (self.position as isize) < len {
            let k = self.position as isize;
            while self.offset <= self.window {
                let j = self.offset;
                self.offset += 1;
                let target = k + j;
                if j == 0 || target < 0 || target >= len {
                    continue;
                }
                return Some(ContextPair {
                    center: self.ids[k as usize] as usize,
                    context: self.ids[target as usize] as usize,
                    position: k as usize,
                });
            }
            self.position += 1;
            self.offset = -self.window;
        }
        None
    }
}

/// Maps `tokens` to vocabulary indices, optionally subsamples, and streams
/// their window pairs.
pub fn stream_context_pairs<S, R>(
    tokens: &[S],
    vocab: &Vocabulary,
    window: usize,
    subsampler: Option<&Subsampler>,
    rng: &mut R,
) -> ContextPairs<'static>
where
    S: AsRef<str>,
    R: Rng + ?Sized,
{
    let corpus = Corpus::from_tokens(tokens, vocab);
    let ids = match subsampler {
        Some(s) => s.filter(corpus.ids(), rng),
        None => corpus.ids,
    };
    ContextPairs::new(ids, window)
}
