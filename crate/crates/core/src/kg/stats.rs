use std::collections::HashSet;
use std::io::Write;

use super::TripleSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                mean: 0.0,
                std_dev: 0.0,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std_dev: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationStats {
    pub relation: String,
    pub triples: usize,
    pub distinct_heads: usize,
    pub distinct_tails: usize,
    /// Mean over distinct heads of the number of tails they connect to.
    pub tails_per_head: f64,
    /// Mean over distinct tails of the number of heads pointing at them.
    pub heads_per_tail: f64,
}

/// Mapping-cardinality profile of a knowledge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingStats {
    pub per_relation: Vec<RelationStats>,
    pub tails_per_head: Summary,
    pub heads_per_tail: Summary,
}

/// Per-relation tails-per-head and heads-per-tail, plus unweighted
/// mean and population standard deviation across relations.
pub fn compute_mapping_stats(set: &TripleSet) -> MappingStats {
    let mut heads = vec![HashSet::new(); set.num_relations()];
    let mut tails = vec![HashSet::new(); set.num_relations()];
    let mut triples = vec![0usize; set.num_relations()];
    for t in set.triples() {
        heads[t.relation].insert(t.head);
        tails[t.relation].insert(t.tail);
        triples[t.relation] += 1;
    }
    // Triples are unique, so a head's distinct-tail count is its triple count.
    let per_relation: Vec<RelationStats> = (0..set.num_relations())
        .filter(|&r| triples[r] > 0)
        .map(|r| RelationStats {
            relation: set.relation_name(r).to_owned(),
            triples: triples[r],
            distinct_heads: heads[r].len(),
            distinct_tails: tails[r].len(),
            tails_per_head: triples[r] as f64 / heads[r].len() as f64,
            heads_per_tail: triples[r] as f64 / tails[r].len() as f64,
        })
        .collect();
    let tph: Vec<f64> = per_relation.iter().map(|s| s.tails_per_head).collect();
    let hpt: Vec<f64> = per_relation.iter().map(|s| s.heads_per_tail).collect();
    MappingStats {
        tails_per_head: Summary::of(&tph),
        heads_per_tail: Summary::of(&hpt),
        per_relation,
    }
}

impl MappingStats {
    /// Per-relation rows, then an aggregate block with the four summary
    /// numbers (tails-per-head mean/std, heads-per-tail mean/std).
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "relation\ttriples\theads\ttails\ttails_per_head\theads_per_tail")?;
        for s in &self.per_relation {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
                s.relation, s.triples, s.distinct_heads, s.distinct_tails, s.tails_per_head, s.heads_per_tail
            )?;
        }
        writeln!(out)?;
        writeln!(
            out,
            "tails_per_head_mean\ttails_per_head_std\theads_per_tail_mean\theads_per_tail_std"
        )?;
        writeln!(
            out,
            "{:.2}\t{:.2}\t{:.2}\t{:.2}",
            self.tails_per_head.mean,
            self.tails_per_head.std_dev,
            self.heads_per_tail.mean,
            self.heads_per_tail.std_dev
        )
    }
}
