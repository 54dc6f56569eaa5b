use projectnet::eval::{rank_sweep, read_questions, run_analogy_suite, write_sweep_tsv, Relational, SweepInputs};
use projectnet::model::{ModelConfig, Variant};
use projectnet::synthetic::{FixtureConfig, PeopleFixture};
use projectnet::trainer::{train, TrainConfig};

#[test]
fn grid_rows_and_degenerate_sweep() {
    let fixture = PeopleFixture::generate(&FixtureConfig { corpus_tokens: 3_000, ..FixtureConfig::default() });
    let (vocab, corpus, triples) = fixture.build(1).unwrap();
    let questions = read_questions(fixture.questions.as_bytes(), "q").unwrap();
    let inputs = SweepInputs { corpus: &corpus, vocab: &vocab, triples: &triples, questions: &questions };
    let base = ModelConfig { variant: Variant::ProjectNet, dim: 8, left_rank: 8, right_rank: 8, margin: 1.0 };
    let tc = TrainConfig { alpha: 0.3, ..TrainConfig::default() };

    let rows = rank_sweep(&inputs, &base, &tc, &[2, 6], &[4, 8], |_| {}).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows.iter().map(|r| (r.left_rank, r.right_rank)).collect::<Vec<_>>(),
        vec![(2, 4), (2, 8), (6, 4), (6, 8)]
    );
    assert!(rows.windows(2).all(|w| w[1].steps > w[0].steps));
    let mut buf = Vec::new();
    write_sweep_tsv(&rows, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);

    let single = rank_sweep(&inputs, &base, &tc, &[8], &[8], |_| {}).unwrap();
    let out = train(&corpus, &vocab, Some(&triples), &base, &tc).unwrap();
    let direct = run_analogy_suite(&questions, &out.model.vocab, &Relational::new(&out.model));
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].accuracy, direct.accuracy());
    assert_eq!(single[0].steps, out.report.total_steps);

    assert!(rank_sweep(&inputs, &base, &tc, &[9], &[8], |_| {}).is_err());
}
