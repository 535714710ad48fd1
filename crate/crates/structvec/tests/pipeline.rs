//! End-to-end library test: corpus -> vocabulary -> PPMI -> training ->
//! structure and evaluation, on a corpus small enough to inspect.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use structvec::cooccur::{count_cooccurrences, CountParams};
use structvec::corpus::{Slice, SlicedCorpus};
use structvec::dendrogram::dendrogram;
use structvec::eval::nearest_neighbors;
use structvec::ppmi::{compute_ppmi, PpmiParams, PpmiSet};
use structvec::structure::{chain_prior, distance_matrix, recall_at_k, update_affinity};
use structvec::trainer::{train, LrStage, Mode, TrainingConfig};
use structvec::vocab::{build_vocabulary, VocabParams};

/// Two topic groups of words; slices 0-1 prefer group A, slices 2-3 group B.
fn topic_corpus(seed: u64) -> SlicedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..20).map(|i| format!("w{i:02}")).collect();
    let mut slices = Vec::new();
    for t in 0..4usize {
        let bias_group = if t < 2 { 0 } else { 1 };
        let mut documents = Vec::new();
        for _ in 0..30 {
            let mut doc = Vec::new();
            let mut group = bias_group;
            for _ in 0..50 {
                // tokens come in same-group runs; a new run is drawn from the
                // slice's biased group distribution
                if rng.gen::<f64>() < 0.2 {
                    group = if rng.gen::<f64>() < 0.8 {
                        bias_group
                    } else {
                        1 - bias_group
                    };
                }
                let word = 10 * group + rng.gen_range(0..10);
                doc.push(vocab[word].clone());
            }
            documents.push(doc);
        }
        slices.push(Slice {
            id: format!("s{t}"),
            documents,
        });
    }
    SlicedCorpus::new(slices).unwrap()
}

#[test]
fn full_pipeline_recovers_the_slice_split() {
    let corpus = topic_corpus(11);
    let vocab = build_vocabulary(
        &corpus,
        &VocabParams {
            global_top_k: 20,
            slice_top_k: 20,
            min_slices: 3,
            stopword_top: 0,
        },
    )
    .unwrap();
    assert_eq!(vocab.len(), 20);

    let params = CountParams {
        window: 5,
        distance_weighting: false,
    };
    let matrices: Vec<_> = corpus
        .slices()
        .iter()
        .map(|slice| {
            let counts = count_cooccurrences(slice, &vocab, &params).unwrap();
            compute_ppmi(&counts, &PpmiParams::default()).unwrap()
        })
        .collect();
    let ppmis = PpmiSet::new(matrices, Some(vocab.fingerprint())).unwrap();

    let config = TrainingConfig {
        mode: Mode::Pred,
        lambda: 8.0,
        tau: 16.0,
        dim: 10,
        epochs: 120,
        lr_schedule: vec![
            LrStage { lr: 0.1, until_epoch: Some(60) },
            LrStage { lr: 0.05, until_epoch: None },
        ],
        seed: 5,
        ..TrainingConfig::default()
    };
    let result = train(&ppmis, None, &config).unwrap();
    assert_eq!(
        result.embeddings.vocab_fingerprint(),
        Some(vocab.fingerprint().as_str())
    );

    // the learned distances should group s0/s1 against s2/s3
    let distances = distance_matrix(&result.embeddings);
    let within = distances.get(0, 1).max(distances.get(2, 3));
    let across = distances
        .get(0, 2)
        .min(distances.get(0, 3))
        .min(distances.get(1, 2))
        .min(distances.get(1, 3));
    assert!(
        within < across,
        "within-pair distance {within} should undercut cross-pair {across}"
    );

    // planted truth: a chain 0-1, 2-3 is wrong; use the block structure
    let mut truth = ndarray::Array2::zeros((4, 4));
    for (a, b) in [(0usize, 1usize), (2, 3)] {
        truth[[a, b]] = 1.0;
        truth[[b, a]] = 1.0;
    }
    let truth = structvec::structure::AffinityMatrix::from_parts(
        corpus.labels(),
        truth,
    )
    .unwrap();
    let truth_d = structvec::structure::affinity_to_distance(&truth).unwrap();
    let recall = recall_at_k(&truth_d, &distances, 1).unwrap();
    assert_eq!(recall, 1.0, "block structure should be fully recovered");

    // estimated affinity mirrors the same grouping
    let affinity = update_affinity(&distances, 1e-8).unwrap();
    assert!(affinity.get(0, 1) > affinity.get(0, 2));
    assert!(affinity.get(2, 3) > affinity.get(1, 2));

    // dendrogram merges the two pairs first
    let tree = dendrogram(&distances).unwrap();
    let first_two: Vec<(usize, usize)> = tree.merges[..2]
        .iter()
        .map(|m| (m.left.min(m.right), m.left.max(m.right)))
        .collect();
    assert!(first_two.contains(&(0, 1)));
    assert!(first_two.contains(&(2, 3)));

    // topic words stay close to their group
    let averaged = result.embeddings.average();
    let neighbors = nearest_neighbors(&averaged, &vocab, "w03", 5).unwrap();
    let in_group = neighbors
        .iter()
        .filter(|(w, _)| w.as_str() < "w10")
        .count();
    assert!(
        in_group >= 4,
        "expected group-A neighbors for w03, got {neighbors:?}"
    );
}

#[test]
fn ppmi_set_round_trip_preserves_training_input() {
    let corpus = topic_corpus(13);
    let vocab = build_vocabulary(
        &corpus,
        &VocabParams {
            global_top_k: 20,
            slice_top_k: 20,
            min_slices: 3,
            stopword_top: 0,
        },
    )
    .unwrap();
    let matrices: Vec<_> = corpus
        .slices()
        .iter()
        .map(|slice| {
            let counts = count_cooccurrences(slice, &vocab, &CountParams::default()).unwrap();
            compute_ppmi(&counts, &PpmiParams::default()).unwrap()
        })
        .collect();
    let ppmis = PpmiSet::new(matrices, Some(vocab.fingerprint())).unwrap();

    let dir = tempfile::tempdir().unwrap();
    for format in [
        structvec::ppmi::PpmiFileFormat::Tsv,
        structvec::ppmi::PpmiFileFormat::Bin,
    ] {
        ppmis.save_dir(dir.path(), format).unwrap();
        let loaded = PpmiSet::load_dir(dir.path()).unwrap();
        assert_eq!(loaded.labels(), ppmis.labels());
        for t in 0..ppmis.len() {
            assert_eq!(loaded.matrix(t).nnz(), ppmis.matrix(t).nnz());
            for ((i, j, x), (i2, j2, y)) in ppmis
                .matrix(t)
                .iter_entries()
                .zip(loaded.matrix(t).iter_entries())
            {
                assert_eq!((i, j), (i2, j2));
                assert_eq!(x, y, "slice {t} entry ({i}, {j})");
            }
        }

        // training from the round-tripped set is identical
        let config = TrainingConfig {
            mode: Mode::Constr,
            lambda: 1.0,
            tau: 0.01,
            dim: 4,
            epochs: 10,
            lr_schedule: vec![LrStage { lr: 0.1, until_epoch: None }],
            seed: 2,
            ..TrainingConfig::default()
        };
        let prior = chain_prior(4).unwrap().relabel(corpus.labels()).unwrap();
        let a = train(&ppmis, Some(&prior), &config).unwrap();
        let b = train(&loaded, Some(&prior), &config).unwrap();
        for t in 0..4 {
            assert_eq!(a.embeddings.matrix(t), b.embeddings.matrix(t));
        }
    }
}
