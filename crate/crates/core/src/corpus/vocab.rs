use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use super::phrase::PhraseLexicon;
use super::tokenize::{is_numeric_token, tokenize, PHRASE_SEPARATOR};
use crate::{Error, Result};

/// Token inventory shared by words and knowledge-graph entities.
///
/// Tokens are ordered by descending count, ties broken lexicographically.
/// Lexicon names that never reach `min_count` in the corpus are kept with a
/// count of zero: they get vectors but are never drawn as negatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
    phrases: BTreeSet<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from already-counted tokens.
    ///
    /// Numeric tokens are dropped, tokens below `min_count` are dropped,
    /// and every lexicon name is present afterwards.
    pub fn from_counts(
        counts: HashMap<String, u64>,
        min_count: u64,
        lexicon: &PhraseLexicon,
    ) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidArgument("min_count must be at least 1".into()));
        }
        let mut entries: HashMap<String, u64> = counts
            .into_iter()
            .filter(|(tok, count)| *count >= min_count && !is_numeric_token(tok))
            .collect();
        for name in lexicon.names() {
            entries.entry(name.clone()).or_insert(0);
        }
        let mut entries: Vec<(String, u64)> = entries.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let phrases = lexicon
            .names()
            .iter()
            .filter(|n| n.contains(PHRASE_SEPARATOR))
            .cloned()
            .collect();
        Ok(Self::from_entries(entries, min_count, phrases))
    }

    /// Reassembles a vocabulary from stored parts, in the given order.
    pub fn from_parts(
        entries: Vec<(String, u64)>,
        min_count: u64,
        phrases: BTreeSet<String>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(entries.len());
        for (tok, _) in &entries {
            if tok.is_empty() || !seen.insert(tok.as_str()) {
                return Err(Error::InvalidArgument(format!("empty or duplicate token {tok:?}")));
            }
        }
        if min_count == 0 {
            return Err(Error::InvalidArgument("min_count must be at least 1".into()));
        }
        Ok(Self::from_entries(entries, min_count, phrases))
    }

    fn from_entries(entries: Vec<(String, u64)>, min_count: u64, phrases: BTreeSet<String>) -> Self {
        let (tokens, counts): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Self {
            tokens,
            counts,
            index,
            min_count,
            phrases,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Multi-word names kept as single tokens.
    pub fn phrases(&self) -> &BTreeSet<String> {
        &self.phrases
    }

    /// Total corpus frequency of all tokens.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes the `#vocab <size>` header followed by `token<TAB>count` lines.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#vocab {}", self.len())?;
        for (tok, count) in self.tokens.iter().zip(&self.counts) {
            writeln!(out, "{tok}\t{count}")?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_from<R: BufRead>(reader: R, source: &str) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(source, e))?,
            None => return Err(Error::parse(format!("{source}:1"), "missing #vocab header")),
        };
        let size: usize = header
            .strip_prefix("#vocab ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(format!("{source}:1"), "expected `#vocab <size>` header"))?;

        let mut entries = Vec::with_capacity(size);
        let mut seen = std::collections::HashSet::with_capacity(size);
        for (lineno, line) in lines {
            let line = line.map_err(|e| Error::io(source, e))?;
            if line.is_empty() {
                continue;
            }
            let loc = || format!("{source}:{}", lineno + 1);
            let (tok, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(loc(), "expected `token<TAB>count`"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(loc(), format!("bad count {count:?}")))?;
            if tok.is_empty() || !seen.insert(tok.to_owned()) {
                return Err(Error::parse(loc(), format!("empty or duplicate token {tok:?}")));
            }
            entries.push((tok.to_owned(), count));
        }
        if entries.len() != size {
            return Err(Error::parse(
                source.to_owned(),
                format!("header declares {size} tokens, found {}", entries.len()),
            ));
        }
        let min_count = entries.iter().map(|e| e.1).filter(|&c| c > 0).min().unwrap_or(1);
        let phrases = entries
            .iter()
            .filter(|e| e.0.contains(PHRASE_SEPARATOR))
            .map(|e| e.0.clone())
            .collect();
        Ok(Self::from_entries(entries, min_count, phrases))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file), &path.display().to_string())
    }
}

/// Tokenizes and phrase-merges one line of text.
pub fn line_tokens(line: &str, lexicon: &PhraseLexicon) -> Vec<String> {
    let base: Vec<String> = tokenize(line).collect();
    if lexicon.is_empty() {
        base
    } else {
        lexicon.merge(&base)
    }
}

/// Counts merged tokens in a text stream and builds the vocabulary.
pub fn build_vocabulary<R: BufRead>(
    text: R,
    min_count: u64,
    lexicon: &PhraseLexicon,
) -> Result<Vocabulary> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0u64;
    for line in text.lines() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        for tok in line_tokens(&line, lexicon) {
            *counts.entry(tok).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Vocabulary::from_counts(counts, min_count, lexicon)
}

/// [`build_vocabulary`] over a file.
pub fn build_vocabulary_from_path(
    path: &Path,
    min_count: u64,
    lexicon: &PhraseLexicon,
) -> Result<Vocabulary> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    build_vocabulary(std::io::BufReader::new(file), min_count, lexicon).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}
