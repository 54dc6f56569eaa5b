//! Text ingestion: tokenization, phrase merging, vocabulary, negative
//! sampling and skip-gram window pairs.

mod negative;
mod pairs;
mod phrase;
mod tokenize;
mod vocab;

pub use negative::{build_negative_table, NegativeSampler, DEFAULT_POWER, DEFAULT_TABLE_SIZE};
pub use pairs::{
    count_context_pairs, stream_context_pairs, ContextPair, ContextPairs, Corpus, Subsampler,
};
pub use phrase::{merge_phrases, PhraseLexicon, MAX_PHRASE_WORDS};
pub use tokenize::{is_numeric_token, normalize_name, tokenize, PHRASE_SEPARATOR};
pub use vocab::{build_vocabulary, build_vocabulary_from_path, line_tokens, Vocabulary};
