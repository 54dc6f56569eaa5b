use projectnet::corpus::{Corpus, Vocabulary};
use projectnet::kg::TripleSet;
use projectnet::model::{ModelConfig, Variant};
use projectnet::synthetic::{FixtureConfig, PeopleFixture};
use projectnet::trainer::{initial_model, lr_at, train, train_from, TrainConfig};
use projectnet::Error;

fn small_fixture() -> (Vocabulary, Corpus, TripleSet) {
    PeopleFixture::generate(&FixtureConfig { corpus_tokens: 4_000, ..FixtureConfig::default() })
        .build(1)
        .unwrap()
}

fn config() -> ModelConfig {
    ModelConfig { variant: Variant::ProjectNet, dim: 12, left_rank: 6, right_rank: 10, margin: 1.0 }
}

#[test]
fn learning_rate_schedule() {
    assert_eq!(lr_at(0, 1000, 0.025), 0.025);
    assert!((lr_at(500, 1000, 0.025) - 0.0125).abs() < 1e-15);
    assert!((lr_at(1000, 1000, 0.025) - 0.025e-4).abs() < 1e-18);
}

#[test]
fn pure_skipgram_leaves_knowledge_parameters_untouched() {
    let (vocab, corpus, triples) = small_fixture();
    let tc = TrainConfig { alpha: 0.0, seed: 3, ..TrainConfig::default() };
    let init = initial_model(&vocab, Some(&triples), &config(), &tc).unwrap();
    let out = train_from(init.clone(), &corpus, Some(&triples), &tc, |_| {}).unwrap();
    assert_eq!(out.model.relations, init.relations);
    assert_eq!(out.model.embeddings.relations, init.embeddings.relations);
    assert_ne!(out.model.embeddings.output, init.embeddings.output);
    assert_eq!(out.report.last().unwrap().knowledge_steps, 0);
}

#[test]
fn pure_knowledge_leaves_output_vectors_untouched() {
    let (vocab, corpus, triples) = small_fixture();
    let tc = TrainConfig { alpha: 1.0, seed: 3, ..TrainConfig::default() };
    let init = initial_model(&vocab, Some(&triples), &config(), &tc).unwrap();
    let out = train_from(init.clone(), &corpus, Some(&triples), &tc, |_| {}).unwrap();
    assert_eq!(out.model.embeddings.output, init.embeddings.output);
    assert_ne!(out.model.relations, init.relations);
    assert_eq!(out.report.last().unwrap().text_steps, 0);
}

#[test]
fn missing_inputs_are_configuration_errors() {
    let (vocab, corpus, triples) = small_fixture();
    let tc = TrainConfig { alpha: 0.5, ..TrainConfig::default() };
    let err = train(&Corpus::default(), &vocab, Some(&triples), &config(), &tc).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let err = train(&corpus, &vocab, None, &config(), &tc).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    let bad = TrainConfig { alpha: 1.5, ..TrainConfig::default() };
    assert!(matches!(train(&corpus, &vocab, Some(&triples), &config(), &bad), Err(Error::Config(_))));
    // Pure skip-gram needs no graph, pure knowledge no corpus.
    let sg = TrainConfig { alpha: 0.0, ..TrainConfig::default() };
    train(&corpus, &vocab, None, &config(), &sg).unwrap();
    let kg = TrainConfig { alpha: 1.0, ..TrainConfig::default() };
    train(&Corpus::default(), &vocab, Some(&triples), &config(), &kg).unwrap();
}

/// Entities on a grid where `h + r = t` holds exactly for some placement.
fn exact_translation_graph() -> (Vocabulary, TripleSet) {
    let mut set = TripleSet::new();
    for i in 0..8 {
        for (rel, step) in [("right", 1), ("down", 8)] {
            for j in 0..8 {
                let h = j * 8 + i;
                let t = h + step;
                if (rel == "right" && i < 7) || (rel == "down" && j < 7) {
                    set.insert(&format!("n{h}"), rel, &format!("n{t}"));
                }
            }
        }
    }
    let vocab = Vocabulary::from_parts(set.entities().iter().map(|e| (e.clone(), 1)).collect(), 1, Default::default()).unwrap();
    (vocab, set)
}

#[test]
fn translation_model_fits_exact_translation_data() {
    let (vocab, set) = exact_translation_graph();
    // A corpus over the same tokens lets alpha = 0.5 mix both tasks.
    let ids: Vec<u32> = (0..20_000).map(|i| (i * 7 % vocab.len()) as u32).collect();
    let corpus = Corpus::from_ids(ids);
    let model_config = ModelConfig { variant: Variant::RNet, dim: 8, ..ModelConfig::default() };
    let tc = TrainConfig { alpha: 0.5, epochs: 5, initial_lr: 0.05, seed: 1, ..TrainConfig::default() };
    let out = train(&corpus, &vocab, Some(&set), &model_config, &tc).unwrap();
    let losses: Vec<f64> = out.report.epochs.iter().map(|e| e.knowledge_loss).collect();
    assert!(*losses.last().unwrap() < 0.01 * model_config.margin, "{losses:?}");
    let combined: Vec<f64> = out.report.epochs.iter().map(|e| e.combined_loss).collect();
    for w in combined.windows(2) {
        assert!(w[1] <= w[0] * 1.01, "combined loss rose: {combined:?}");
    }
}

#[test]
fn racy_workers_train_to_finite_parameters() {
    let (vocab, corpus, triples) = small_fixture();
    let tc = TrainConfig { alpha: 0.3, epochs: 3, workers: 4, deterministic: false, seed: 8, ..TrainConfig::default() };
    let out = train(&corpus, &vocab, Some(&triples), &config(), &tc).unwrap();
    out.model.check_finite().unwrap();
    let total: u64 = out.report.epochs.iter().map(|e| e.steps()).sum();
    assert_eq!(total, out.report.total_steps);
    let first = out.report.epochs[0].combined_loss;
    let last = out.report.last().unwrap().combined_loss;
    assert!(last <= first * 1.01, "{first} -> {last}");
}

#[test]
fn every_variant_trains() {
    let (vocab, corpus, triples) = small_fixture();
    for variant in Variant::ALL {
        let mc = ModelConfig { variant, ..config() };
        let tc = TrainConfig { alpha: 0.5, seed: 2, ..TrainConfig::default() };
        let out = train(&corpus, &vocab, Some(&triples), &mc, &tc).unwrap();
        out.model.check_finite().unwrap();
        if variant == Variant::TransH {
            for p in &out.model.relations {
                let projectnet::model::RelationParams::TransH { normal } = p else { unreachable!() };
                let n: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn report_tsv_has_one_row_per_epoch() {
    let (vocab, corpus, triples) = small_fixture();
    let tc = TrainConfig { alpha: 0.2, epochs: 2, ..TrainConfig::default() };
    let mut seen = Vec::new();
    let model = initial_model(&vocab, Some(&triples), &config(), &tc).unwrap();
    let out = train_from(model, &corpus, Some(&triples), &tc, |e| seen.push(e.epoch)).unwrap();
    assert_eq!(seen, vec![1, 2]);
    let mut buf = Vec::new();
    out.report.write_tsv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("epoch\ttext_loss"));
}
