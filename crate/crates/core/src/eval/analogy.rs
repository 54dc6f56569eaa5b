use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::corpus::{normalize_name, Vocabulary};
use crate::linalg::{dot, norm, DenseMatrix};
use crate::model::{Model, RelationParams};
use crate::{Error, Real, Result};

/// `a : b :: c : d`, grouped under a relation label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub relation: String,
}

impl AnalogyQuestion {
    pub fn new(relation: &str, words: [&str; 4]) -> Result<Self> {
        let norm = |w: &str| {
            normalize_name(w).ok_or_else(|| Error::InvalidArgument(format!("empty analogy token {w:?}")))
        };
        let [a, b, c, d] = [norm(words[0])?, norm(words[1])?, norm(words[2])?, norm(words[3])?];
        let all = [&a, &b, &c, &d];
        for i in 0..4 {
            for j in i + 1..4 {
                if all[i] == all[j] {
                    return Err(Error::InvalidArgument(format!(
                        "analogy tokens must be distinct, {:?} repeats",
                        all[i]
                    )));
                }
            }
        }
        Ok(Self { a, b, c, d, relation: relation.to_string() })
    }

    /// Vocabulary rows of `a, b, c, d`, or `None` if any is missing.
    pub fn indices(&self, vocab: &Vocabulary) -> Option<[usize; 4]> {
        Some([
            vocab.get(&self.a)?,
            vocab.get(&self.b)?,
            vocab.get(&self.c)?,
            vocab.get(&self.d)?,
        ])
    }
}

/// Reads the `: section` / `a b c d` question format.
pub fn read_questions<R: BufRead>(reader: R, source: &str) -> Result<Vec<AnalogyQuestion>> {
    let mut relation = String::from("default");
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            relation = name.trim().to_string();
            continue;
        }
        let loc = || format!("{source}:{}", lineno + 1);
        let words: Vec<&str> = line.split_whitespace().collect();
        let words: [&str; 4] = words
            .try_into()
            .map_err(|_| Error::parse(loc(), "expected 4 whitespace-separated tokens"))?;
        out.push(AnalogyQuestion::new(&relation, words).map_err(|e| Error::parse(loc(), e.to_string()))?);
    }
    Ok(out)
}

pub fn load_questions(path: &Path) -> Result<Vec<AnalogyQuestion>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_questions(std::io::BufReader::new(file), &path.display().to_string())
}

/// Anything that answers `a : b :: c : ?` by vocabulary row.
pub trait AnalogyPredictor: Sync {
    fn predict(&self, a: usize, b: usize, c: usize) -> Option<usize>;
}

/// Vector-offset inference: the word whose vector is closest in cosine to
/// `b - a + c`.
pub struct CosAdd<'a> {
    vectors: &'a DenseMatrix,
    norms: Vec<Real>,
}

impl<'a> CosAdd<'a> {
    pub fn new(vectors: &'a DenseMatrix) -> Self {
        let norms = (0..vectors.rows()).map(|i| norm(vectors.row(i))).collect();
        Self { vectors, norms }
    }
}

impl AnalogyPredictor for CosAdd<'_> {
    fn predict(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        analogy_3cosadd_with(self.vectors, &self.norms, a, b, c)
    }
}

/// `argmax_{w ∉ {a,b,c}} cos(b - a + c, w)`, ties to the lowest index.
pub fn analogy_3cosadd(vectors: &DenseMatrix, a: usize, b: usize, c: usize) -> Option<usize> {
    let norms: Vec<Real> = (0..vectors.rows()).map(|i| norm(vectors.row(i))).collect();
    analogy_3cosadd_with(vectors, &norms, a, b, c)
}

fn analogy_3cosadd_with(vectors: &DenseMatrix, norms: &[Real], a: usize, b: usize, c: usize) -> Option<usize> {
    let query: Vec<Real> = (0..vectors.cols())
        .map(|k| vectors.row(b)[k] - vectors.row(a)[k] + vectors.row(c)[k])
        .collect();
    let qn = norm(&query);
    let mut best: Option<(usize, Real)> = None;
    for w in 0..vectors.rows() {
        if w == a || w == b || w == c {
            continue;
        }
        let denom = qn * norms[w];
        let cos = if denom > 0.0 { dot(&query, vectors.row(w)) / denom } else { 0.0 };
        if best.is_none_or(|(_, s)| cos > s) {
            best = Some((w, cos));
        }
    }
    best.map(|(w, _)| w)
}

/// Two-step inference: pick the relation that best explains `(a, b)`, then
/// the tail that best completes `(c, r*, ?)` under that relation.
pub struct Relational<'a> {
    model: &'a Model,
    /// Projected tail vectors of every vocabulary row, built per relation on
    /// first use.
    tails: Vec<OnceLock<Vec<Real>>>,
}

impl<'a> Relational<'a> {
    pub fn new(model: &'a Model) -> Self {
        Self {
            model,
            tails: (0..model.relations.len()).map(|_| OnceLock::new()).collect(),
        }
    }

    fn projected_tails(&self, r: usize) -> &[Real] {
        self.tails[r].get_or_init(|| {
            let params = &self.model.relations[r];
            let input = &self.model.embeddings.input;
            (0..input.rows()).flat_map(|w| params.project_tail(input.row(w))).collect()
        })
    }

    /// `argmin_r f(a, r, b)`, ties to the lowest relation index.
    pub fn best_relation(&self, a: usize, b: usize) -> Option<usize> {
        let input = &self.model.embeddings.input;
        let ha = input.row(a);
        let mut best: Option<(usize, Real)> = None;
        for (r, params) in self.model.relations.iter().enumerate() {
            let ph = params.project_head(ha);
            let pt = &self.projected_tails(r)[b * input.cols()..(b + 1) * input.cols()];
            let s = distance(params, &ph, self.model.embeddings.relations.row(r), pt);
            if best.is_none_or(|(_, v)| s < v) {
                best = Some((r, s));
            }
        }
        best.map(|(r, _)| r)
    }
}

impl AnalogyPredictor for Relational<'_> {
    fn predict(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        let r = self.best_relation(a, b)?;
        let params = &self.model.relations[r];
        let input = &self.model.embeddings.input;
        let dim = input.cols();
        let ph = params.project_head(input.row(c));
        let rv = self.model.embeddings.relations.row(r);
        let tails = self.projected_tails(r);
        let mut best: Option<(usize, Real)> = None;
        for w in 0..input.rows() {
            if w == a || w == b || w == c {
                continue;
            }
            let s = distance(params, &ph, rv, &tails[w * dim..(w + 1) * dim]);
            if best.is_none_or(|(_, v)| s < v) {
                best = Some((w, s));
            }
        }
        best.map(|(w, _)| w)
    }
}

/// Score of already-projected head and tail vectors.
fn distance(params: &RelationParams, head: &[Real], relation: &[Real], tail: &[Real]) -> Real {
    match params {
        RelationParams::SE { .. } => head.iter().zip(tail).map(|(h, t)| (h - t).abs()).sum(),
        _ => head
            .iter()
            .zip(relation)
            .zip(tail)
            .map(|((h, r), t)| {
                let e = h + r - t;
                e * e
            })
            .sum(),
    }
}

/// Relation-aware predictor when the model supports it, vector offset
/// otherwise.
pub fn default_predictor(model: &Model) -> Box<dyn AnalogyPredictor + '_> {
    if model.config.variant.supports_relational_analogy() && !model.relations.is_empty() {
        Box::new(Relational::new(model))
    } else {
        Box::new(CosAdd::new(&model.embeddings.input))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationAccuracy {
    pub relation: String,
    pub answered: usize,
    pub correct: usize,
    pub skipped: usize,
}

impl RelationAccuracy {
    /// `correct / answered`, 0 when nothing was answered.
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalogyReport {
    /// In order of first appearance in the question list.
    pub per_relation: Vec<RelationAccuracy>,
    pub answered: usize,
    pub correct: usize,
    /// Questions with at least one out-of-vocabulary token.
    pub skipped: usize,
}

impl AnalogyReport {
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "relation\tquestions\tcorrect\tskipped\taccuracy")?;
        for r in &self.per_relation {
            writeln!(out, "{}\t{}\t{}\t{}\t{:.4}", r.relation, r.answered, r.correct, r.skipped, r.accuracy())?;
        }
        writeln!(out, "total\t{}\t{}\t{}\t{:.4}", self.answered, self.correct, self.skipped, self.accuracy())
    }
}

/// Scores every question in parallel; aggregation does not depend on
/// scheduling.
pub fn run_analogy_suite(
    questions: &[AnalogyQuestion],
    vocab: &Vocabulary,
    predictor: &dyn AnalogyPredictor,
) -> AnalogyReport {
    let outcomes: Vec<Option<bool>> = questions
        .par_iter()
        .map(|q| {
            let [a, b, c, d] = q.indices(vocab)?;
            Some(predictor.predict(a, b, c) == Some(d))
        })
        .collect();
    let mut report = AnalogyReport::default();
    for (q, outcome) in questions.iter().zip(outcomes) {
        let pos = match report.per_relation.iter().position(|r| r.relation == q.relation) {
            Some(p) => p,
            None => {
                report.per_relation.push(RelationAccuracy {
                    relation: q.relation.clone(),
                    answered: 0,
                    correct: 0,
                    skipped: 0,
                });
                report.per_relation.len() - 1
            }
        };
        let entry = &mut report.per_relation[pos];
        match outcome {
            None => {
                entry.skipped += 1;
                report.skipped += 1;
            }
            Some(ok) => {
                entry.answered += 1;
                report.answered += 1;
                if ok {
                    entry.correct += 1;
                    report.correct += 1;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EmbeddingStore, LowRankProjection, ModelConfig, Variant};

    fn matrix(rows: &[&[Real]]) -> DenseMatrix {
        DenseMatrix::from_vec(rows.len(), rows[0].len(), rows.concat())
    }

    #[test]
    fn exact_offset_wins() {
        // a=e0, b=e0+e1, c=e2, d=e1+e2; distractors orthogonal to the offset.
        let m = matrix(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[1.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(analogy_3cosadd(&m, 0, 1, 2), Some(3));
    }

    #[test]
    fn degenerate_offset_is_nearest_neighbor_of_c() {
        let m = matrix(&[&[1.0, 0.0], &[0.0, 1.0], &[0.6, 0.8], &[-1.0, 0.0]]);
        // a = b = 0 in index space is not allowed by questions, but the
        // operation itself treats b - a + c = c.
        assert_eq!(analogy_3cosadd(&m, 0, 0, 1), Some(2));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let m = matrix(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(analogy_3cosadd(&m, 0, 1, 2), Some(3));
    }

    #[test]
    fn relational_picks_fitting_relation() {
        let vocab = Vocabulary::from_parts(
            ["a", "b", "c", "d", "x"].iter().map(|t| (t.to_string(), 1)).collect(),
            1,
            Default::default(),
        )
        .unwrap();
        let input = matrix(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 5.0], &[1.0, 5.0], &[0.0, 6.0]]);
        let relations = matrix(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let params = RelationParams::ProjectNet {
            head: LowRankProjection::identity(2),
            tail: LowRankProjection::identity(2),
        };
        let model = Model {
            config: ModelConfig { variant: Variant::ProjectNet, dim: 2, left_rank: 2, right_rank: 2, margin: 1.0 },
            vocab,
            relation_names: vec!["up".into(), "right".into()],
            embeddings: EmbeddingStore { output: DenseMatrix::zeros(5, 2), input, relations },
            relations: vec![params.clone(), params],
        };
        let p = Relational::new(&model);
        assert_eq!(p.best_relation(0, 1), Some(1));
        assert_eq!(p.predict(0, 1, 2), Some(3));
    }

    #[test]
    fn parse_sections_and_reject_repeats() {
        let text = ": capital\nAthens Greece Berlin Germany\n\n: family\nboy girl brother sister\n";
        let qs = read_questions(text.as_bytes(), "q").unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(qs[0].relation, "capital");
        assert_eq!(qs[0].a, "athens");
        assert_eq!(qs[1].relation, "family");
        assert!(read_questions("a b a c\n".as_bytes(), "q").is_err());
        assert!(read_questions("a b c\n".as_bytes(), "q").is_err());
    }

    #[test]
    fn empty_suite_has_no_division_by_zero() {
        let vocab = Vocabulary::from_parts(vec![("a".into(), 1)], 1, Default::default()).unwrap();
        let m = matrix(&[&[1.0]]);
        let r = run_analogy_suite(&[], &vocab, &CosAdd::new(&m));
        assert_eq!(r.accuracy(), 0.0);
        assert!(r.per_relation.is_empty());
    }
}
