use nalgebra::DMatrix;
use proptest::prelude::*;

use projectnet::eval::{fractional_ranks, run_analogy_suite, spearman_rho, AnalogyPredictor, AnalogyQuestion};
use projectnet::corpus::Vocabulary;
use projectnet::model::{knowledge_loss_grad, LowRankProjection, RelationParams, TripleVectors};
use projectnet::Real;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<Real>> {
    prop::collection::vec(-2.0..2.0 as Real, n)
}

fn projection_strategy() -> impl Strategy<Value = LowRankProjection> {
    (1usize..10, 1usize..10).prop_flat_map(|(dim, m)| {
        (vec_strategy(m), vec_strategy(m * dim), vec_strategy(m * dim))
            .prop_map(move |(w, p, q)| LowRankProjection::new(dim, w, p, q).unwrap())
    })
}

proptest! {
    #[test]
    fn factored_apply_matches_dense(proj in projection_strategy(), seed in any::<u64>()) {
        let dim = proj.dim();
        let v: Vec<Real> = (0..dim).map(|i| ((seed.rotate_left(i as u32) % 1000) as Real) / 250.0 - 2.0).collect();
        let fast = proj.apply(&v);
        let dense = proj.materialize().mul_vec(&v);
        let scale = dense.iter().fold(1.0 as Real, |m, x| m.max(x.abs()));
        for (a, b) in fast.iter().zip(&dense) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn numerical_rank_never_exceeds_factor_count(proj in projection_strategy()) {
        let m = proj.materialize();
        let data: Vec<f64> = m.as_slice().iter().map(|&v| v as f64).collect();
        let mut s: Vec<f64> = DMatrix::from_row_slice(m.rows(), m.cols(), &data).singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let k = proj.rank_bound();
        if k < s.len() && s[0] > 0.0 {
            prop_assert!(s[k] <= 1e-8 * s[0]);
        }
    }

    #[test]
    fn margin_loss_bounds(h in vec_strategy(6), r in vec_strategy(6), t in vec_strategy(6), ch in vec_strategy(6), margin in 0.1..5.0 as Real) {
        let p = RelationParams::RNet;
        let golden = TripleVectors { params: &p, head: &h, relation: &r, tail: &t };
        let corrupted = TripleVectors { params: &p, head: &ch, relation: &r, tail: &t };
        let k = knowledge_loss_grad(margin, &golden, &corrupted).unwrap();
        prop_assert!(k.loss >= 0.0);
        prop_assert!(k.loss <= margin + k.golden_score + 1e-12);
    }

    #[test]
    fn spearman_invariant_under_increasing_transform(x in prop::collection::vec(-100i32..100, 2..40), y in prop::collection::vec(-100i32..100, 2..40)) {
        let n = x.len().min(y.len());
        let x: Vec<f64> = x[..n].iter().map(|&v| v as f64).collect();
        let y: Vec<f64> = y[..n].iter().map(|&v| v as f64).collect();
        let Ok(rho) = spearman_rho(&x, &y) else { return Ok(()); };
        let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp() + 3.0 * v).collect();
        let ty: Vec<f64> = y.iter().map(|v| v * v * v + 7.0).collect();
        let rho2 = spearman_rho(&tx, &ty).unwrap();
        prop_assert!((rho - rho2).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&rho));
    }

    #[test]
    fn ranks_are_a_fractional_permutation(x in prop::collection::vec(0u8..5, 1..30)) {
        let v: Vec<f64> = x.iter().map(|&b| b as f64).collect();
        let ranks = fractional_ranks(&v);
        let n = v.len() as f64;
        prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }
}

struct Fixed(Vec<Option<usize>>);

impl AnalogyPredictor for Fixed {
    fn predict(&self, a: usize, _b: usize, _c: usize) -> Option<usize> {
        self.0[a]
    }
}

#[test]
fn suite_matches_manual_tally() {
    // 14 words; question i uses a = i and expects d = 10 + i % 4.
    let names: Vec<String> = (0..14).map(|i| format!("w{i}")).collect();
    let vocab = Vocabulary::from_parts(names.iter().map(|n| (n.clone(), 1)).collect(), 1, Default::default()).unwrap();
    let mut questions = Vec::new();
    for i in 0..10 {
        let rel = if i < 6 { "first" } else { "second" };
        let b = if i == 9 { 0 } else { i + 1 };
        let c = (i + 2) % 10;
        let d = 10 + i % 4;
        questions.push(AnalogyQuestion::new(rel, [&names[i], &names[b], &names[c], &names[d]]).unwrap());
    }
    questions.push(AnalogyQuestion::new("second", ["w1", "w2", "w3", "unknown"]).unwrap());
    // Correct on questions 0, 1, 4 (first) and 7 (second).
    let answers: Vec<Option<usize>> = (0..14)
        .map(|i| match i {
            0 | 1 | 4 | 7 => Some(10 + i % 4),
            2 => None,
            _ => Some(13 - i % 4),
        })
        .collect();
    let report = run_analogy_suite(&questions, &vocab, &Fixed(answers));
    assert_eq!(report.answered, 10);
    assert_eq!(report.skipped, 1);
    assert_eq!(report.correct, 4);
    assert_eq!(report.per_relation[0].relation, "first");
    assert_eq!((report.per_relation[0].answered, report.per_relation[0].correct), (6, 3));
    assert_eq!((report.per_relation[1].answered, report.per_relation[1].correct, report.per_relation[1].skipped), (4, 1, 1));
    assert!((report.accuracy() - 0.4).abs() < 1e-15);
}
