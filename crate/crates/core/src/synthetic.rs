//! Small generated datasets for smoke runs, tests and demos.
//!
//! [`PeopleFixture`] is a corpus plus knowledge graph about invented people
//! with two-word names. Every relation is many-to-one (many people share a
//! city, a country, ...). The corpus mentions people and attribute values
//! among filler words but never pairs a person with their attributes, so
//! the relational facts live only in the graph.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{build_vocabulary, Corpus, PhraseLexicon, Vocabulary};
use crate::kg::TripleSet;
use crate::{Error, Result};

const FIRST_NAMES: [&str; 10] = [
    "anna", "boris", "clara", "dmitri", "elena", "felix", "greta", "hugo", "irene", "jonas",
];
const LAST_NAMES: [&str; 5] = ["berg", "moreau", "tanaka", "okafor", "silva"];

const RELATIONS: [(&str, [&str; 5]); 4] = [
    ("born_in", ["paris", "lima", "oslo", "cairo", "quito"]),
    ("citizen_of", ["france", "peru", "norway", "egypt", "ecuador"]),
    ("profession", ["painter", "surgeon", "pilot", "chemist", "farmer"]),
    ("plays", ["violin", "cello", "flute", "piano", "drums"]),
];

#[derive(Debug, Clone)]
pub struct FixtureConfig {
    pub seed: u64,
    /// Approximate corpus length in base tokens.
    pub corpus_tokens: usize,
    pub filler_words: usize,
    pub questions: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            corpus_tokens: 50_000,
            filler_words: 300,
            questions: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeopleFixture {
    /// One sentence per line, person names written as two words.
    pub corpus: String,
    /// Person names, one per line, words separated by a space.
    pub lexicon: String,
    /// `head<TAB>relation<TAB>tail` lines.
    pub triples: String,
    /// Analogy questions drawn from the graph, `: relation` sections.
    pub questions: String,
}

impl PeopleFixture {
    pub fn generate(config: &FixtureConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let people: Vec<String> = FIRST_NAMES
            .iter()
            .flat_map(|f| LAST_NAMES.iter().map(move |l| format!("{f} {l}")))
            .collect();

        // Each value of each relation gets exactly ten people.
        let mut facts: Vec<Vec<usize>> = Vec::new();
        for _ in RELATIONS {
            let mut values: Vec<usize> = (0..people.len()).map(|i| i % 5).collect();
            rand::seq::SliceRandom::shuffle(values.as_mut_slice(), &mut rng);
            facts.push(values);
        }

        let mut triples = String::new();
        for (p, person) in people.iter().enumerate() {
            for (r, (name, values)) in RELATIONS.iter().enumerate() {
                writeln!(triples, "{person}\t{name}\t{}", values[facts[r][p]]).unwrap();
            }
        }

        let mut questions = String::new();
        let mut by_relation: Vec<Vec<String>> = vec![Vec::new(); RELATIONS.len()];
        for _ in 0..config.questions {
            let r = rng.random_range(0..RELATIONS.len());
            let (a, c) = loop {
                let a = rng.random_range(0..people.len());
                let c = rng.random_range(0..people.len());
                if a != c && facts[r][a] != facts[r][c] {
                    break (a, c);
                }
            };
            let values = RELATIONS[r].1;
            let joined = |p: usize| people[p].replace(' ', "_");
            by_relation[r].push(format!(
                "{} {} {} {}",
                joined(a),
                values[facts[r][a]],
                joined(c),
                values[facts[r][c]]
            ));
        }
        for (r, lines) in by_relation.iter().enumerate() {
            if lines.is_empty() {
                continue;
            }
            writeln!(questions, ": {}", RELATIONS[r].0).unwrap();
            for l in lines {
                writeln!(questions, "{l}").unwrap();
            }
        }

        let fillers: Vec<String> = (0..config.filler_words).map(filler_word).collect();
        // Zipf-like filler frequencies.
        let weights: Vec<f64> = (1..=fillers.len()).map(|k| 1.0 / k as f64).collect();
        let dist = rand::distr::weighted::WeightedIndex::new(&weights).expect("positive weights");
        let values: Vec<&str> = RELATIONS.iter().flat_map(|(_, v)| v.iter().copied()).collect();
        let mut corpus = String::new();
        let mut written = 0;
        let mut line = Vec::new();
        while written < config.corpus_tokens {
            line.clear();
            let len = rng.random_range(8..16);
            for _ in 0..len {
                line.push(fillers[rng.sample(&dist)].as_str());
            }
            let slot = rng.random_range(0..line.len());
            if rng.random_bool(0.5) {
                line.insert(slot, people.choose(&mut rng).unwrap());
                written += 1;
            } else {
                line.insert(slot, values.choose(&mut rng).unwrap());
            }
            written += line.len();
            corpus.push_str(&line.join(" "));
            corpus.push('\n');
        }

        let lexicon = people.iter().map(|p| format!("{p}\n")).collect();
        Self {
            corpus,
            lexicon,
            triples,
            questions,
        }
    }

    pub fn phrase_lexicon(&self) -> PhraseLexicon {
        PhraseLexicon::from_names(self.lexicon.lines()).expect("fixture names are short")
    }

    /// Vocabulary, corpus and graph built the way the command-line pipeline
    /// builds them.
    pub fn build(&self, min_count: u64) -> Result<(Vocabulary, Corpus, TripleSet)> {
        let lexicon = self.phrase_lexicon();
        let vocab = build_vocabulary(self.corpus.as_bytes(), min_count, &lexicon)?;
        let corpus = Corpus::from_reader(self.corpus.as_bytes(), &vocab, &lexicon)?;
        let triples = TripleSet::read_from(self.triples.as_bytes(), "fixture", Some(&vocab))?;
        Ok((vocab, corpus, triples))
    }

    /// Writes `corpus.txt`, `lexicon.txt`, `triples.tsv` and
    /// `questions.txt` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        for (name, content) in [
            ("corpus.txt", &self.corpus),
            ("lexicon.txt", &self.lexicon),
            ("triples.tsv", &self.triples),
            ("questions.txt", &self.questions),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, content).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

/// Pronounceable made-up word, distinct for every index.
fn filler_word(index: usize) -> String {
    const C: &[u8] = b"bdfgklmnprstvz";
    const V: &[u8] = b"aeiou";
    let mut n = index;
    let mut out = String::new();
    for _ in 0..3 {
        out.push(C[n % C.len()] as char);
        n /= C.len();
        out.push(V[n % V.len()] as char);
        n /= V.len();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shape() {
        let f = PeopleFixture::generate(&FixtureConfig::default());
        let (vocab, corpus, triples) = f.build(1).unwrap();
        assert_eq!(triples.len(), 200);
        assert_eq!(triples.num_relations(), 4);
        assert!(vocab.contains("anna_berg"));
        assert!(corpus.len() >= 45_000, "{}", corpus.len());
        let questions = crate::eval::read_questions(f.questions.as_bytes(), "q").unwrap();
        assert_eq!(questions.len(), 20);
        assert!(questions.iter().all(|q| q.indices(&vocab).is_some()));
    }

    #[test]
    fn filler_words_are_distinct() {
        let words: std::collections::HashSet<String> = (0..1000).map(filler_word).collect();
        assert_eq!(words.len(), 1000);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = PeopleFixture::generate(&FixtureConfig::default());
        let b = PeopleFixture::generate(&FixtureConfig::default());
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.questions, b.questions);
    }
}
