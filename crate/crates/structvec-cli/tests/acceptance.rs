//! Acceptance suite. Each test covers one exit criterion and prints one
//! pass/fail line (visible with `--nocapture`); the assertions pin the
//! documented tolerances.

use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use structvec::cooccur::{count_cooccurrences, CountParams};
use structvec::corpus::{Slice, SlicedCorpus};
use structvec::dendrogram::dendrogram;
use structvec::embedding::{init_embeddings, EmbeddingSet};
use structvec::eval::{
    analogy_ranks, burrows_delta, drift_timeline, pearson, AnalogyProtocol, AnalogySection,
    AnalogyTestSet,
};
use structvec::ppmi::{compute_ppmi, PpmiMatrix, PpmiParams, PpmiSet};
use structvec::structure::{
    affinity_to_distance, chain_prior, distance_matrix, recall_at_k, update_affinity,
    AffinityMatrix, DistanceMatrix,
};
use structvec::trainer::{gradient, objective, train, Mode, TrainingConfig};
use structvec::vocab::{build_vocabulary, VocabParams};

fn pass(name: &str) {
    println!("criterion {name}: PASS");
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Dense symmetric positive matrix wrapped as a PPMI matrix.
fn dense_symmetric_ppmi(v: usize, rng: &mut ChaCha8Rng) -> PpmiMatrix {
    let mut dense = Array2::zeros((v, v));
    for i in 0..v {
        for j in i..v {
            let x = rng.gen::<f64>() * 2.0 + 0.05;
            dense[[i, j]] = x;
            dense[[j, i]] = x;
        }
    }
    let rows = (0..v)
        .map(|i| (0..v).map(|j| (j as u32, dense[[i, j]])).collect())
        .collect();
    PpmiMatrix::new("0", v, rows).unwrap()
}

fn random_embeddings(t: usize, v: usize, d: usize, seed: u64) -> EmbeddingSet {
    init_embeddings(t, v, d, seed).unwrap()
}

/// Central finite differences of the total slice objective.
fn fd_gradient(
    e: &EmbeddingSet,
    y: &PpmiMatrix,
    w: &AffinityMatrix,
    t: usize,
    lambda: f64,
    tau: f64,
    step: f64,
) -> Array2<f64> {
    let (v, d) = e.matrix(t).dim();
    let mut out = Array2::zeros((v, d));
    for i in 0..v {
        for k in 0..d {
            let eval = |delta: f64| {
                let mut matrices: Vec<Array2<f64>> =
                    (0..e.len()).map(|s| e.matrix(s).clone()).collect();
                matrices[t][[i, k]] += delta;
                let shifted =
                    EmbeddingSet::new(e.labels().to_vec(), matrices, None).unwrap();
                objective(&shifted, y, w, t, lambda, tau).unwrap().total
            };
            out[[i, k]] = (eval(step) - eval(-step)) / (2.0 * step);
        }
    }
    out
}

#[test]
fn criterion_1_gradient_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let w = chain_prior(3).unwrap();
    let mut worst = 0.0f64;
    for instance in 0..10 {
        let y = dense_symmetric_ppmi(20, &mut rng);
        let e = random_embeddings(3, 20, 4, 1000 + instance);
        for lambda in [0.0, 1.0, 8.0] {
            for tau in [0.0, 1.0, 8.0] {
                for t in 0..3 {
                    let analytic = gradient(&e, &y, &w, t, lambda, tau).unwrap();
                    let numeric = fd_gradient(&e, &y, &w, t, lambda, tau, 1e-5);
                    for (&a, &b) in analytic.iter().zip(numeric.iter()) {
                        let rel = (a - b).abs() / a.abs().max(b.abs()).max(1.0);
                        worst = worst.max(rel);
                        assert!(
                            rel < 1e-4,
                            "instance {instance}, lambda={lambda}, tau={tau}, t={t}: \
                             relative error {rel} (analytic {a}, numeric {b})"
                        );
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "gradient oracle took {elapsed:?}"
    );
    pass(&format!(
        "1 (gradient oracle, max rel err {worst:.2e}, {elapsed:.2?})"
    ));
}

#[test]
fn criterion_2_hand_oracle_equalities() {
    // PPMI on the [a,b,a,b] fixture
    let counts = structvec::cooccur::CooccurrenceCounts::from_triplets(
        "t",
        2,
        &[(0, 1, 3.0), (1, 0, 3.0)],
    )
    .unwrap();
    let ppmi = compute_ppmi(&counts, &PpmiParams::default()).unwrap();
    assert!((ppmi.get(0, 1) - std::f64::consts::LN_2).abs() < 1e-12);

    // affinity update on D = [[0, 2], [2, 0]]
    let d = DistanceMatrix::from_parts(labels(2), ndarray::array![[0.0, 2.0], [2.0, 0.0]])
        .unwrap();
    let w = update_affinity(&d, 1e-8).unwrap();
    assert!((w.get(0, 1) - 0.5).abs() < 1e-12);
    assert!((w.get(1, 0) - 0.5).abs() < 1e-12);

    // V=2/d=1/T=2 objective fixture equals 2 + sqrt(2)
    let e = EmbeddingSet::new(
        labels(2),
        vec![ndarray::array![[1.0], [0.0]], ndarray::array![[0.0], [0.0]]],
        None,
    )
    .unwrap();
    let y = PpmiMatrix::new("0", 2, vec![Vec::new(), Vec::new()]).unwrap();
    let loss = objective(&e, &y, &chain_prior(2).unwrap(), 0, 1.0, 1.0).unwrap();
    assert!((loss.total - (2.0 + std::f64::consts::SQRT_2)).abs() < 1e-12);

    // pearson on the hand fixture
    let (r, _) = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
    assert!((r - 0.8).abs() < 1e-12);

    pass("2 (hand-oracle equalities)");
}

#[test]
fn criterion_3_dw2v_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for t_count in [2usize, 4, 7] {
        let e = random_embeddings(t_count, 15, 4, 300 + t_count as u64);
        let w = chain_prior(t_count).unwrap();
        let y = dense_symmetric_ppmi(15, &mut rng);
        for t in 0..t_count {
            let loss = objective(&e, &y, &w, t, 1.0, 0.0).unwrap();
            let mut diachronic = 0.0;
            if t > 0 {
                diachronic += (e.matrix(t - 1) - e.matrix(t)).mapv(|x| x * x).sum();
            }
            if t + 1 < t_count {
                diachronic += (e.matrix(t) - e.matrix(t + 1)).mapv(|x| x * x).sum();
            }
            assert!(
                (loss.structure - diachronic).abs() < 1e-10,
                "T={t_count}, t={t}: L_S {} vs diachronic sum {diachronic}",
                loss.structure
            );
        }
    }
    pass("3 (DW2V equivalence of the structure term under the chain prior)");
}

/// The planted low-rank fixture shared by criteria 4 and 8.
fn planted_ppmi_set() -> PpmiSet {
    let a = init_embeddings(1, 50, 5, 404).unwrap();
    let dense = a.matrix(0).dot(&a.matrix(0).t());
    let matrices = (0..4)
        .map(|t| {
            let rows = (0..50)
                .map(|i| {
                    (0..50)
                        .filter(|&j| dense[[i, j]] > 0.0)
                        .map(|j| (j as u32, dense[[i, j]]))
                        .collect()
                })
                .collect();
            PpmiMatrix::new(t.to_string(), 50, rows).unwrap()
        })
        .collect();
    PpmiSet::new(matrices, None).unwrap()
}

fn planted_config(lambda: f64) -> TrainingConfig {
    TrainingConfig {
        mode: Mode::Constr,
        lambda,
        tau: 0.01,
        dim: 5,
        epochs: 1000,
        seed: 17,
        ..TrainingConfig::default()
    }
}

fn fidelity_ratio(embeddings: &EmbeddingSet, ppmis: &PpmiSet) -> f64 {
    let mut total = 0.0;
    for t in 0..ppmis.len() {
        let u = embeddings.matrix(t);
        let reconstructed = u.dot(&u.t());
        let mut residual_sq = 0.0;
        let mut norm_sq = 0.0;
        for i in 0..ppmis.v() {
            for j in 0..ppmis.v() {
                let y = ppmis.matrix(t).get(i, j);
                let r = y - reconstructed[[i, j]];
                residual_sq += r * r;
                norm_sq += y * y;
            }
        }
        total += residual_sq / norm_sq;
    }
    total / ppmis.len() as f64
}

#[test]
fn criterion_4_low_rank_fidelity() {
    let start = Instant::now();
    let ppmis = planted_ppmi_set();
    let prior = chain_prior(4).unwrap();
    let result = train(&ppmis, Some(&prior), &planted_config(1.0)).unwrap();
    let ratio = fidelity_ratio(&result.embeddings, &ppmis);
    let elapsed = start.elapsed();
    assert!(ratio < 0.05, "mean relative fidelity {ratio}");
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "planted run took {elapsed:?}"
    );
    pass(&format!(
        "4 (low-rank fidelity {ratio:.4} < 0.05, {elapsed:.2?})"
    ));
}

#[test]
fn criterion_8_lambda_alignment_trend() {
    let ppmis = planted_ppmi_set();
    let prior = chain_prior(4).unwrap();
    let max_offdiag = |lambda: f64| {
        let result = train(&ppmis, Some(&prior), &planted_config(lambda)).unwrap();
        let d = distance_matrix(&result.embeddings);
        let mut max = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    max = max.max(d.get(i, j));
                }
            }
        }
        max
    };
    let loose = max_offdiag(0.0);
    let tight = max_offdiag(4096.0);
    assert!(
        tight <= 0.1 * loose,
        "max off-diagonal distance {tight} at lambda=2^12 vs {loose} at lambda=0"
    );
    pass(&format!(
        "8 (lambda alignment trend: {tight:.3e} <= 0.1 * {loose:.3e})"
    ));
}

const GEN_V: usize = 300;
const GEN_GROUP: usize = 10;

/// Bigram generator: from word w, stay inside w's group with probability
/// 0.7, otherwise jump uniformly. The two generators use different
/// partitions of the vocabulary into groups of 10, so their unigram
/// distributions agree while their co-occurrence structure differs.
struct BigramGenerator {
    groups: Vec<Vec<usize>>,
    group_of: Vec<usize>,
}

impl BigramGenerator {
    fn new(generator_id: usize) -> Self {
        let mut order: Vec<usize> = (0..GEN_V).collect();
        if generator_id == 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(909);
            // Fisher-Yates
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
        }
        let mut groups = vec![Vec::new(); GEN_V / GEN_GROUP];
        let mut group_of = vec![0; GEN_V];
        for (pos, &word) in order.iter().enumerate() {
            let g = pos / GEN_GROUP;
            groups[g].push(word);
            group_of[word] = g;
        }
        BigramGenerator { groups, group_of }
    }

    fn slice(&self, id: &str, seed: u64, documents: usize, doc_len: usize) -> Slice {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut docs = Vec::with_capacity(documents);
        for _ in 0..documents {
            let mut doc = Vec::with_capacity(doc_len);
            let mut word = rng.gen_range(0..GEN_V);
            for _ in 0..doc_len {
                doc.push(format!("w{word:03}"));
                word = if rng.gen::<f64>() < 0.7 {
                    let members = &self.groups[self.group_of[word]];
                    members[rng.gen_range(0..members.len())]
                } else {
                    rng.gen_range(0..GEN_V)
                };
            }
            docs.push(doc);
        }
        Slice {
            id: id.to_owned(),
            documents: docs,
        }
    }
}

fn two_generator_corpus() -> SlicedCorpus {
    let gen_a = BigramGenerator::new(0);
    let gen_b = BigramGenerator::new(1);
    let mut slices = Vec::new();
    for t in 0..8 {
        let generator = if t < 4 { &gen_a } else { &gen_b };
        // 50 documents x 1000 tokens = 50k tokens per slice
        slices.push(generator.slice(&format!("s{t}"), 7000 + t as u64, 50, 1000));
    }
    SlicedCorpus::new(slices).unwrap()
}

fn planted_block_truth(corpus_labels: Vec<String>) -> DistanceMatrix {
    let mut w = Array2::zeros((8, 8));
    for i in 0..8 {
        for j in 0..8 {
            if i != j && (i < 4) == (j < 4) {
                w[[i, j]] = 1.0;
            }
        }
    }
    let affinity = AffinityMatrix::from_parts(corpus_labels, w).unwrap();
    affinity_to_distance(&affinity).unwrap()
}

#[test]
fn criterion_5_structure_recovery() {
    let start = Instant::now();
    let corpus = two_generator_corpus();
    let vocab = build_vocabulary(
        &corpus,
        &VocabParams {
            global_top_k: GEN_V,
            slice_top_k: GEN_V,
            min_slices: 3,
            stopword_top: 0,
        },
    )
    .unwrap();
    assert!(vocab.len() >= 295, "vocabulary lost words: {}", vocab.len());

    let count_params = CountParams::default();
    let matrices: Vec<PpmiMatrix> = corpus
        .slices()
        .iter()
        .map(|slice| {
            let counts = count_cooccurrences(slice, &vocab, &count_params).unwrap();
            compute_ppmi(&counts, &PpmiParams::default()).unwrap()
        })
        .collect();
    let ppmis = PpmiSet::new(matrices, Some(vocab.fingerprint())).unwrap();

    // W2VPred with the default hyperparameters (lambda=512, tau=1024, d=50,
    // the full 1000-epoch schedule)
    let config = TrainingConfig::default();
    assert_eq!(config.mode, Mode::Pred);
    assert_eq!(config.lambda, 512.0);
    assert_eq!(config.tau, 1024.0);
    let result = train(&ppmis, None, &config).unwrap();

    let truth = planted_block_truth(corpus.labels());
    let predicted = distance_matrix(&result.embeddings);
    let recall_pred = recall_at_k(&truth, &predicted, 3).unwrap();

    let burrows = burrows_delta(&corpus, 100, 300).unwrap();
    let recall_burrows = recall_at_k(&truth, &burrows.delta, 3).unwrap();

    let elapsed = start.elapsed();
    assert!(
        recall_pred >= 0.75,
        "structure recovery recall@3 = {recall_pred}"
    );
    assert!(
        recall_pred > recall_burrows,
        "recall@3 {recall_pred} does not beat Burrows baseline {recall_burrows}"
    );
    assert!(
        elapsed.as_secs_f64() < 600.0,
        "structure recovery took {elapsed:?}"
    );
    pass(&format!(
        "5 (structure recovery: recall@3 {recall_pred:.3} >= 0.75 and > Burrows {recall_burrows:.3}, {elapsed:.2?})"
    ));
}

fn random_distance(t: usize, rng: &mut ChaCha8Rng) -> DistanceMatrix {
    let mut values = Array2::zeros((t, t));
    for i in 0..t {
        for j in i + 1..t {
            let x = rng.gen::<f64>() * 100.0;
            values[[i, j]] = x;
            values[[j, i]] = x;
        }
    }
    DistanceMatrix::from_parts(labels(t), values).unwrap()
}

/// Random orthogonal matrix from Gram-Schmidt over a Gaussian draw.
fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let gaussian = |rng: &mut ChaCha8Rng| {
        let u1: f64 = rng.gen::<f64>().max(1e-12);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(d);
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        for existing in &q {
            let dot: f64 = v.iter().zip(existing).map(|(a, b)| a * b).sum();
            for (x, e) in v.iter_mut().zip(existing) {
                *x -= dot * e;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    Array2::from_shape_vec((d, d), q.into_iter().flatten().collect()).unwrap()
}

#[test]
fn criterion_6_invariant_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);

    // update_affinity on 100 random distance matrices
    for _ in 0..100 {
        let t = rng.gen_range(2..10);
        let d = random_distance(t, &mut rng);
        let w = update_affinity(&d, 1e-8).unwrap();
        for i in 0..t {
            assert_eq!(w.get(i, i), 0.0);
            for j in 0..t {
                assert!(w.get(i, j).is_finite() && w.get(i, j) >= 0.0);
                assert_eq!(w.get(i, j).to_bits(), w.get(j, i).to_bits());
            }
        }
    }

    // recall of a structure against itself on 50 random matrices
    for _ in 0..50 {
        let t = rng.gen_range(3..12);
        let d = random_distance(t, &mut rng);
        let k = rng.gen_range(1..t);
        assert_eq!(recall_at_k(&d, &d, k).unwrap(), 1.0);
    }

    // dendrogram merge heights are non-decreasing
    for _ in 0..25 {
        let t = rng.gen_range(2..12);
        let d = random_distance(t, &mut rng);
        let tree = dendrogram(&d).unwrap();
        for pair in tree.merges.windows(2) {
            assert!(pair[0].height <= pair[1].height);
        }
    }

    // analogy hit sets survive a global rotation plus uniform scaling
    {
        let v = 200;
        let d = 10;
        let shared = {
            let gaussian = |rng: &mut ChaCha8Rng| {
                let u1: f64 = rng.gen::<f64>().max(1e-12);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            let data: Vec<f64> = (0..v * d).map(|_| gaussian(&mut rng)).collect();
            Array2::from_shape_vec((v, d), data).unwrap()
        };
        let words: Vec<String> = (0..v).map(|i| format!("w{i:03}")).collect();
        let corpus = SlicedCorpus::new(vec![
            Slice { id: "a".into(), documents: vec![words.clone()] },
            Slice { id: "b".into(), documents: vec![words.clone()] },
            Slice { id: "c".into(), documents: vec![words.clone()] },
        ])
        .unwrap();
        let vocab = build_vocabulary(
            &corpus,
            &VocabParams {
                global_top_k: v,
                slice_top_k: v,
                min_slices: 3,
                stopword_top: 0,
            },
        )
        .unwrap();
        let mut quadruples = Vec::new();
        for _ in 0..50 {
            let mut picks = std::collections::HashSet::new();
            while picks.len() < 4 {
                picks.insert(rng.gen_range(0..v));
            }
            let picks: Vec<usize> = picks.into_iter().collect();
            quadruples.push([
                vocab.word(picks[0]).to_owned(),
                vocab.word(picks[1]).to_owned(),
                vocab.word(picks[2]).to_owned(),
                vocab.word(picks[3]).to_owned(),
            ]);
        }
        let tests = AnalogyTestSet {
            sections: vec![AnalogySection { name: "r".into(), quadruples }],
        };
        let protocol = AnalogyProtocol::default();
        let base = analogy_ranks(&shared, &vocab, &tests, &protocol).unwrap();
        let rotation = random_orthogonal(d, &mut rng);
        let transformed = shared.dot(&rotation) * 2.5;
        let rotated = analogy_ranks(&transformed, &vocab, &tests, &protocol).unwrap();
        for n in [1usize, 5, 10] {
            let hits = |ranks: &[Option<usize>]| -> Vec<bool> {
                ranks.iter().map(|r| r.is_some_and(|r| r <= n)).collect()
            };
            assert_eq!(
                hits(&base),
                hits(&rotated),
                "hit set changed under rotation at n={n}"
            );
        }
    }

    // Burrows is invariant to duplicating every document of one slice
    {
        let corpus = two_small_slices(&mut rng);
        let base = burrows_delta(&corpus, 0, 8).unwrap();
        let mut slices = corpus.slices().to_vec();
        let doubled = slices[1].documents.clone();
        slices[1].documents.extend(doubled);
        let duplicated = SlicedCorpus::new(slices).unwrap();
        let dup = burrows_delta(&duplicated, 0, 8).unwrap();
        // duplication can permute the feature rank order, so the per-feature
        // sums may round differently; the values are mathematically equal
        for (a, b) in base.delta.values().iter().zip(dup.delta.values()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    // drift timeline values stay in [-1, 1]
    {
        let e = random_embeddings(5, 40, 6, 660);
        let words: Vec<String> = (0..40).map(|i| format!("w{i:02}")).collect();
        let corpus = SlicedCorpus::new(vec![
            Slice { id: "a".into(), documents: vec![words.clone()] },
            Slice { id: "b".into(), documents: vec![words.clone()] },
            Slice { id: "c".into(), documents: vec![words.clone()] },
        ])
        .unwrap();
        let vocab = build_vocabulary(
            &corpus,
            &VocabParams {
                global_top_k: 40,
                slice_top_k: 40,
                min_slices: 3,
                stopword_top: 0,
            },
        )
        .unwrap();
        let neighbors: Vec<String> = (1..6).map(|i| format!("w{i:02}")).collect();
        let table = drift_timeline(&e, &vocab, "w00", &neighbors).unwrap();
        assert!(table
            .values
            .iter()
            .all(|&x| (-1.0..=1.0).contains(&x)));
    }

    pass("6 (invariant suites)");
}

fn two_small_slices(rng: &mut ChaCha8Rng) -> SlicedCorpus {
    let words = ["u", "v", "w", "x", "y", "z", "p", "q"];
    let mut slices = Vec::new();
    for t in 0..3 {
        let documents: Vec<Vec<String>> = (0..5)
            .map(|_| {
                (0..30)
                    .map(|_| words[rng.gen_range(0..words.len())].to_owned())
                    .collect()
            })
            .collect();
        slices.push(Slice {
            id: format!("s{t}"),
            documents,
        });
    }
    SlicedCorpus::new(slices).unwrap()
}

/// Recursively collect (relative name, bytes) for every file under a root.
fn dir_contents(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = std::fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap())
        .collect();
    entries.sort_by_key(|e| e.file_name());
    entries
        .into_iter()
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_7_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    // small corpus for a fast training run
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut jsonl = String::new();
    for t in 0..3 {
        for _ in 0..20 {
            let tokens: Vec<String> =
                (0..50).map(|_| format!("\"w{}\"", rng.gen_range(0..30))).collect();
            jsonl.push_str(&format!(
                "{{\"slice\":\"y{t}\",\"tokens\":[{}]}}\n",
                tokens.join(",")
            ));
        }
    }
    std::fs::write(root.join("corpus.jsonl"), jsonl).unwrap();

    let bin = env!("CARGO_BIN_EXE_structvec");
    let run = |args: &[&str]| {
        let output = std::process::Command::new(bin)
            .args(args)
            .current_dir(root)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "structvec {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    run(&[
        "vocab", "--corpus", "corpus.jsonl", "--out", "vocab.tsv", "--global-top-k", "30",
        "--slice-top-k", "30", "--min-slices", "2", "--stopword-top", "1",
    ]);
    run(&["ppmi", "--corpus", "corpus.jsonl", "--vocab", "vocab.tsv", "--out", "ppmi"]);
    let train_args = [
        "train", "--ppmi-dir", "ppmi", "--mode", "constr", "--chain-prior", "--lambda", "2",
        "--tau", "0.05", "--dim", "5", "--epochs", "60", "--seed", "9", "--threads", "1",
    ];
    run(&[&train_args[..], &["--out", "emb1"]].concat());
    run(&[&train_args[..], &["--out", "emb2"]].concat());

    let first = dir_contents(&root.join("emb1"));
    let second = dir_contents(&root.join("emb2"));
    assert_eq!(first.len(), second.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(second.iter()) {
        assert_eq!(name_a, name_b);
        assert_eq!(
            bytes_a, bytes_b,
            "archive file {name_a} differs between identical runs"
        );
    }
    pass("7 (byte-identical archives across identical runs)");
}
