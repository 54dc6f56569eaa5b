//! Knowledge-graph triples: loading, mapping statistics and corruption.

mod corrupt;
mod stats;

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

pub use corrupt::{corrupt_triple, CorruptionMode, MAX_CORRUPTION_ATTEMPTS};
pub use stats::{compute_mapping_stats, MappingStats, RelationStats, Summary};

use crate::corpus::{normalize_name, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub fn new(head: usize, relation: usize, tail: usize) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// Deduplicated `(head, relation, tail)` facts over indexed names.
///
/// Entities and relations are indexed in order of first appearance.
/// Entity names are stored in corpus token form (lowercased, words joined
/// by the phrase separator) so they can be looked up in a [`Vocabulary`].
#[derive(Debug, Clone, Default)]
pub struct TripleSet {
    triples: Vec<Triple>,
    members: HashSet<Triple>,
    entities: Vec<String>,
    entity_index: HashMap<String, usize>,
    relations: Vec<String>,
    relation_index: HashMap<String, usize>,
}

impl PartialEq for TripleSet {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
            && self.entities == other.entities
            && self.relations == other.relations
    }
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a fact by name. Names are used as given; returns `false` for a
    /// duplicate.
    pub fn insert(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        let h = intern(&mut self.entities, &mut self.entity_index, head);
        let r = intern(&mut self.relations, &mut self.relation_index, relation);
        let t = intern(&mut self.entities, &mut self.entity_index, tail);
        self.insert_indexed(Triple::new(h, r, t))
    }

    fn insert_indexed(&mut self, triple: Triple) -> bool {
        if self.members.insert(triple) {
            self.triples.push(triple);
            true
        } else {
            false
        }
    }

    /// Parses `head<TAB>relation<TAB>tail` lines.
    ///
    /// Blank lines and lines starting with `#` are skipped. With a filter,
    /// only triples whose head and tail are both vocabulary tokens survive.
    pub fn read_from<R: BufRead>(
        reader: R,
        source: &str,
        filter: Option<&Vocabulary>,
    ) -> Result<Self> {
        let mut set = Self::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(source, e))?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let loc = || format!("{source}:{}", lineno + 1);
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let [head, relation, tail] = fields[..] else {
                return Err(Error::parse(
                    loc(),
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            };
            let head = normalize_name(head).ok_or_else(|| Error::parse(loc(), "empty head entity"))?;
            let tail = normalize_name(tail).ok_or_else(|| Error::parse(loc(), "empty tail entity"))?;
            let relation = relation.trim();
            if relation.is_empty() {
                return Err(Error::parse(loc(), "empty relation"));
            }
            if let Some(vocab) = filter {
                if !vocab.contains(&head) || !vocab.contains(&tail) {
                    continue;
                }
            }
            set.insert(&head, relation, &tail);
        }
        if set.is_empty() {
            return Err(Error::EmptyKnowledgeGraph);
        }
        Ok(set)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.triples {
            writeln!(
                out,
                "{}\t{}\t{}",
                self.entities[t.head], self.relations[t.relation], self.entities[t.tail]
            )?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.members.contains(triple)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn entity_name(&self, index: usize) -> &str {
        &self.entities[index]
    }

    pub fn relation_name(&self, index: usize) -> &str {
        &self.relations[index]
    }

    pub fn entity(&self, name: &str) -> Option<usize> {
        self.entity_index.get(name).copied()
    }

    pub fn relation(&self, name: &str) -> Option<usize> {
        self.relation_index.get(name).copied()
    }
}

fn intern(names: &mut Vec<String>, index: &mut HashMap<String, usize>, name: &str) -> usize {
    if let Some(&i) = index.get(name) {
        return i;
    }
    let i = names.len();
    names.push(name.to_owned());
    index.insert(name.to_owned(), i);
    i
}

/// Loads a triple file, optionally keeping only vocabulary-covered entities.
pub fn load_triples(path: &Path, entity_filter: Option<&Vocabulary>) -> Result<TripleSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    TripleSet::read_from(
        std::io::BufReader::new(file),
        &path.display().to_string(),
        entity_filter,
    )
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::{build_vocabulary, PhraseLexicon};

    fn parse(text: &str) -> Result<TripleSet> {
        TripleSet::read_from(text.as_bytes(), "t.tsv", None)
    }

    #[test]
    fn duplicates_are_removed() {
        let set = parse("a\tr\tb\na\tr\tb\n").unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn filter_drops_uncovered_entities() {
        let vocab = build_vocabulary("a a c".as_bytes(), 1, &PhraseLexicon::new()).unwrap();
        let set = TripleSet::read_from("a\tr\tc\na\tr\tb\nb\ts\tc\n".as_bytes(), "t", Some(&vocab))
            .unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.entities(), ["a", "c"]);
        assert_eq!(set.relations(), ["r"]);
    }

    #[test]
    fn relations_indexed_in_order() {
        let set = parse("a\tborn_in\tb\nc\tdied_in\tb\nc\tborn_in\td\n").unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.relations(), ["born_in", "died_in"]);
        assert_eq!(set.triples()[2], Triple::new(2, 0, 3));
    }

    #[test]
    fn names_are_normalized_to_tokens() {
        let set = parse("John F Kennedy\tcause of death\tAssassination\n").unwrap();
        assert_eq!(set.entities(), ["john_f_kennedy", "assassination"]);
        assert_eq!(set.relations(), ["cause of death"]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("a\tr\tb\n\na\tr\n").unwrap_err();
        assert!(err.to_string().starts_with("t.tsv:3"), "{err}");
    }

    #[test]
    fn empty_after_filter_is_an_error() {
        let vocab = build_vocabulary("zzz".as_bytes(), 1, &PhraseLexicon::new()).unwrap();
        let r = TripleSet::read_from("a\tr\tb\n".as_bytes(), "t", Some(&vocab));
        assert!(matches!(r, Err(Error::EmptyKnowledgeGraph)));
    }

    proptest! {
        #[test]
        fn save_load_is_identity(raw in prop::collection::vec((0u8..8, 0u8..3, 0u8..8), 1..40)) {
            let mut set = TripleSet::new();
            for (h, r, t) in raw {
                set.insert(&format!("e{h}"), &format!("r{r}"), &format!("e{t}"));
            }
            let mut buf = Vec::new();
            set.write_to(&mut buf).unwrap();
            let back = TripleSet::read_from(buf.as_slice(), "mem", None).unwrap();
            prop_assert_eq!(back, set);
        }
    }
}
