use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use super::tokenize::{join_words, tokenize};
use crate::{Error, Result};

/// Longest multi-word name the lexicon accepts, in base tokens.
pub const MAX_PHRASE_WORDS: usize = 8;

/// Entity names that must be kept as single embedding units.
///
/// Single-word names are kept too: they never trigger a merge, but the
/// vocabulary still reserves a slot for them.
#[derive(Debug, Clone, Default)]
pub struct PhraseLexicon {
    names: Vec<String>,
    multiword: HashSet<String>,
    max_words: usize,
}

impl PhraseLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from raw names (words separated by spaces).
    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lexicon = Self::new();
        for name in names {
            lexicon.insert(name.as_ref())?;
        }
        Ok(lexicon)
    }

    /// Reads one name per line. Blank lines are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lexicon = Self::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            lexicon.insert(&line).map_err(|e| match e {
                Error::InvalidArgument(msg) => {
                    Error::parse(format!("{}:{}", path.display(), lineno + 1), msg)
                }
                other => other,
            })?;
        }
        Ok(lexicon)
    }

    /// Adds a name. Returns `false` if it normalizes to nothing or already exists.
    pub fn insert(&mut self, name: &str) -> Result<bool> {
        let words: Vec<String> = tokenize(name).collect();
        if words.is_empty() {
            return Ok(false);
        }
        if words.len() > MAX_PHRASE_WORDS {
            return Err(Error::InvalidArgument(format!(
                "phrase {name:?} has {} words, at most {MAX_PHRASE_WORDS} are supported",
                words.len()
            )));
        }
        let joined = join_words(&words);
        if self.names.contains(&joined) {
            return Ok(false);
        }
        if words.len() > 1 {
            self.multiword.insert(joined.clone());
            self.max_words = self.max_words.max(words.len());
        }
        self.names.push(joined);
        Ok(true)
    }

    /// All names in token form, in insertion order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains_phrase(&self, joined: &str) -> bool {
        self.multiword.contains(joined)
    }

    /// Greedy longest-match, left-to-right replacement of lexicon phrases.
    pub fn merge<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        merge_phrases(tokens, self)
    }
}

/// Replaces every lexicon phrase in `tokens` by its joined token.
///
/// At each position the longest phrase starting there wins; unmatched tokens
/// pass through unchanged.
pub fn merge_phrases<S: AsRef<str>>(tokens: &[S], lexicon: &PhraseLexicon) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let longest = lexicon.max_words.min(tokens.len() - i);
        let matched = (2..=longest)
            .rev()
            .map(|len| (len, join_words(&tokens[i..i + len])))
            .find(|(_, joined)| lexicon.multiword.contains(joined));
        match matched {
            Some((len, joined)) => {
                out.push(joined);
                i += len;
            }
            None => {
                out.push(tokens[i].as_ref().to_owned());
                i += 1;
            }
        }
    }
    out
}
