use std::io::{BufRead, Write};
use std::path::Path;

use crate::corpus::{normalize_name, Vocabulary};
use crate::linalg::{cosine, DenseMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub w1: String,
    pub w2: String,
    pub score: f64,
}

/// Reads `word1<TAB>word2<TAB>score` lines. Lines without tabs are split on
/// whitespace. A first line whose score does not parse is taken as a column
/// header.
pub fn read_similarity_pairs<R: BufRead>(reader: R, source: &str) -> Result<Vec<SimilarityPair>> {
    let mut out = Vec::new();
    let mut first = true;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let loc = || format!("{source}:{}", lineno + 1);
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let is_first = std::mem::replace(&mut first, false);
        if fields.len() < 3 {
            return Err(Error::parse(loc(), "expected `word1<TAB>word2<TAB>score`"));
        }
        let score: f64 = match fields[2].parse() {
            Ok(s) => s,
            Err(_) if is_first => continue,
            Err(_) => return Err(Error::parse(loc(), format!("bad score {:?}", fields[2]))),
        };
        if !score.is_finite() {
            return Err(Error::parse(loc(), "score must be finite"));
        }
        let word = |w: &str| normalize_name(w).ok_or_else(|| Error::parse(loc(), "empty word"));
        out.push(SimilarityPair {
            w1: word(fields[0])?,
            w2: word(fields[1])?,
            score,
        });
    }
    Ok(out)
}

pub fn load_similarity_pairs(path: &Path) -> Result<Vec<SimilarityPair>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_similarity_pairs(std::io::BufReader::new(file), &path.display().to_string())
}

/// 1-based ranks in ascending order; tied values share the mean of the
/// positions they occupy.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of fractional ranks.
pub fn spearman_rho(model_scores: &[f64], human_scores: &[f64]) -> Result<f64> {
    if model_scores.len() != human_scores.len() {
        return Err(Error::InvalidArgument(format!(
            "score lists differ in length ({} vs {})",
            model_scores.len(),
            human_scores.len()
        )));
    }
    if model_scores.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 pairs, got {}",
            model_scores.len()
        )));
    }
    if model_scores.iter().chain(human_scores).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("similarity scores".into()));
    }
    let x = fractional_ranks(model_scores);
    let y = fractional_ranks(human_scores);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a score list is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityReport {
    pub dataset: String,
    /// Pairs with both words in the vocabulary.
    pub pairs: usize,
    pub skipped: usize,
    pub rho: f64,
}

impl SimilarityReport {
    pub fn write_tsv<W: Write>(reports: &[SimilarityReport], mut out: W) -> std::io::Result<()> {
        writeln!(out, "dataset\tpairs\tskipped\trho")?;
        for r in reports {
            writeln!(out, "{}\t{}\t{}\t{:.4}", r.dataset, r.pairs, r.skipped, r.rho)?;
        }
        Ok(())
    }
}

/// Cosine similarity of each in-vocabulary pair against the human scores.
pub fn run_similarity_suite(
    dataset: &str,
    pairs: &[SimilarityPair],
    vocab: &Vocabulary,
    vectors: &DenseMatrix,
) -> Result<SimilarityReport> {
    let mut model_scores = Vec::with_capacity(pairs.len());
    let mut human = Vec::with_capacity(pairs.len());
    for p in pairs {
        if let (Some(a), Some(b)) = (vocab.get(&p.w1), vocab.get(&p.w2)) {
            model_scores.push(cosine(vectors.row(a), vectors.row(b)) as f64);
            human.push(p.score);
        }
    }
    let rho = spearman_rho(&model_scores, &human)?;
    Ok(SimilarityReport {
        dataset: dataset.to_string(),
        pairs: model_scores.len(),
        skipped: pairs.len() - model_scores.len(),
        rho,
    })
}
