//! Command implementations. Each reads its inputs, delegates to the library,
//! and writes artifacts atomically.

use std::io::BufRead;
use std::path::{Path, PathBuf};

use log::info;

use structvec::cooccur::count_cooccurrences;
use structvec::corpus::{ingest_corpus, CorpusFormat, SlicedCorpus};
use structvec::dendrogram::dendrogram;
use structvec::embedding::EmbeddingSet;
use structvec::eval::{
    auto_drift_neighbors, burrows_delta, drift_timeline, evaluate_analogies,
    evaluate_cross_slice, grid_search, nearest_neighbors, similarity_correlation,
    AnalogyProtocol, AnalogyTestSet, CellScore, CrossSliceAnalogySet, SimilarityDataset,
    GRID_NS,
};
use structvec::ppmi::{compute_ppmi, PpmiMatrix, PpmiSet};
use structvec::report::Report;
use structvec::structure::{
    affinity_to_distance, chain_prior, distance_matrix, recall_at_k, tree_prior,
    update_affinity, AffinityMatrix, DistanceMatrix, Hierarchy, MATRIX_HEADER_PREFIX,
};
use structvec::trainer::{train, TrainingConfig};
use structvec::vocab::{build_vocabulary, file_fingerprint, Vocabulary};
use structvec::{Error, Result};

use crate::config::{require_exists, required};
use crate::util::{atomic_dir, atomic_file};
use crate::{
    App, EvalArgs, EvalWhich, GridArgs, NeighborsArgs, PpmiArgs, PredictArgs, TimelineArgs,
    TrainArgs, VocabArgs,
};

fn load_corpus(
    app: &App,
    corpus: &Option<PathBuf>,
    format: &Option<String>,
) -> Result<SlicedCorpus> {
    let path = required(corpus, &app.config.paths.corpus, "corpus path")?;
    require_exists(&path, "corpus")?;
    let format: CorpusFormat = match format {
        Some(s) => s.parse()?,
        None => app.config.corpus_format()?,
    };
    let corpus = ingest_corpus(&path, format)?;
    info!(
        "corpus: {} slices, {} tokens",
        corpus.len(),
        corpus.slices().iter().map(|s| s.token_count()).sum::<usize>()
    );
    Ok(corpus)
}

/// Load the archive and the vocabulary it was trained against, refusing when
/// the fingerprints disagree.
fn load_archive_and_vocab(
    app: &App,
    embeddings: &Option<PathBuf>,
    vocab: &Option<PathBuf>,
) -> Result<(EmbeddingSet, Vocabulary)> {
    let dir = required(embeddings, &app.config.paths.embeddings_dir, "embeddings dir")?;
    require_exists(&dir, "embeddings dir")?;
    let (set, _) = EmbeddingSet::load_archive(&dir)?;

    let vocab_path = required(vocab, &app.config.paths.vocab, "vocabulary path")?;
    require_exists(&vocab_path, "vocabulary")?;
    let fp = file_fingerprint(&vocab_path)?;
    match set.vocab_fingerprint() {
        Some(have) if have == fp => {}
        Some(_) => {
            return Err(Error::Fingerprint(format!(
                "{} was not the vocabulary this archive was trained on",
                vocab_path.display()
            )))
        }
        None => {
            return Err(Error::Fingerprint(
                "embedding archive carries no vocabulary fingerprint".into(),
            ))
        }
    }
    let vocabulary = Vocabulary::load(&vocab_path)?;
    if vocabulary.len() != set.v() {
        return Err(Error::Validation(format!(
            "vocabulary has {} words but the archive has V={}",
            vocabulary.len(),
            set.v()
        )));
    }
    Ok((set, vocabulary))
}

/// Load a structure TSV as a distance matrix, converting affinities by
/// max-minus (the rank-reversing map).
fn load_structure_as_distance(path: &Path) -> Result<DistanceMatrix> {
    let file = std::fs::File::open(path)?;
    let first = std::io::BufReader::new(file)
        .lines()
        .next()
        .transpose()?
        .unwrap_or_default();
    let kind = first
        .strip_prefix(MATRIX_HEADER_PREFIX)
        .and_then(|rest| rest.strip_prefix(" kind="))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("not a structure matrix file: {first:?}"),
        })?;
    match kind {
        "affinity" => affinity_to_distance(&AffinityMatrix::load(path)?),
        "distance" => DistanceMatrix::load(path),
        other => Err(Error::Validation(format!(
            "unknown structure kind {other:?} in {}",
            path.display()
        ))),
    }
}

/// Prior affinity from (in order) an explicit file, the configured file, the
/// chain over the slice order, or an inline tree.
fn resolve_prior(
    app: &App,
    prior_flag: &Option<PathBuf>,
    chain_flag: bool,
    labels: &[String],
) -> Result<Option<AffinityMatrix>> {
    if let Some(path) = prior_flag.clone().or(app.config.paths.prior_affinity.clone()) {
        require_exists(&path, "prior affinity")?;
        return Ok(Some(AffinityMatrix::load(&path)?));
    }
    if chain_flag || app.config.prior.chain {
        return Ok(Some(chain_prior(labels.len())?.relabel(labels.to_vec())?));
    }
    if let Some(edges) = &app.config.prior.tree {
        let hierarchy = Hierarchy::new(edges.clone());
        return Ok(Some(tree_prior(&hierarchy, labels)?));
    }
    Ok(None)
}

fn report_out_path(app: &App, out: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    if let Some(path) = out {
        return Ok(path.clone());
    }
    if let Some(dir) = &app.config.paths.reports_dir {
        return Ok(dir.join(format!("{name}.csv")));
    }
    Err(Error::Config(format!(
        "report output required: pass --out or set paths.reports_dir ({name})"
    )))
}

/// Stamp and write a report (atomically for files, plainly for stdout).
fn finish_report(app: &App, mut report: Report, out: Option<&Path>) -> Result<()> {
    if !app.no_timestamp {
        report.comment(format!(
            "generated {}",
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        ));
    }
    match out {
        Some(path) => {
            atomic_file(path, |tmp| report.save(tmp))?;
            info!("report written to {}", path.display());
            Ok(())
        }
        None => {
            print!("{}", report.to_csv());
            Ok(())
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn cmd_vocab(app: &App, args: &VocabArgs) -> Result<()> {
    let corpus = load_corpus(app, &args.corpus, &args.format)?;
    let out = required(&args.out, &app.config.paths.vocab, "vocabulary output path")?;

    let mut params = app.config.vocab.clone();
    if let Some(v) = args.global_top_k {
        params.global_top_k = v;
    }
    if let Some(v) = args.slice_top_k {
        params.slice_top_k = v;
    }
    if let Some(v) = args.min_slices {
        params.min_slices = v;
    }
    if let Some(v) = args.stopword_top {
        params.stopword_top = v;
    }

    let vocab = build_vocabulary(&corpus, &params)?;
    atomic_file(&out, |tmp| vocab.save(tmp))?;
    println!("vocabulary: {} words -> {}", vocab.len(), out.display());
    Ok(())
}

pub fn cmd_ppmi(app: &App, args: &PpmiArgs) -> Result<()> {
    let corpus = load_corpus(app, &args.corpus, &args.format)?;
    let vocab_path = required(&args.vocab, &app.config.paths.vocab, "vocabulary path")?;
    require_exists(&vocab_path, "vocabulary")?;
    let vocab = Vocabulary::load(&vocab_path)?;
    let fingerprint = file_fingerprint(&vocab_path)?;
    let out = required(&args.out, &app.config.paths.ppmi_dir, "ppmi output dir")?;

    let mut count_params = app.config.cooccurrence.count_params();
    if let Some(w) = args.window {
        count_params.window = w;
    }
    let ppmi_params = app.config.cooccurrence.ppmi_params();
    let format = match &args.ppmi_format {
        Some(s) => s.parse()?,
        None => app.config.cooccurrence.format,
    };

    let build = |slice: &structvec::corpus::Slice| -> Result<PpmiMatrix> {
        let counts = count_cooccurrences(slice, &vocab, &count_params)?;
        compute_ppmi(&counts, &ppmi_params)
    };
    // Slices are independent; parallelism changes nothing about the values.
    let matrices: Vec<PpmiMatrix> = if app.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(app.threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            corpus.slices().par_iter().map(build).collect::<Result<Vec<_>>>()
        })?
    } else {
        corpus.slices().iter().map(build).collect::<Result<Vec<_>>>()?
    };

    let set = PpmiSet::new(matrices, Some(fingerprint))?;
    atomic_dir(&out, |tmp| set.save_dir(tmp, format))?;
    println!(
        "ppmi: {} slices, V={}, {} stored entries -> {}",
        set.len(),
        set.v(),
        set.matrices().iter().map(|m| m.nnz()).sum::<usize>(),
        out.display()
    );
    Ok(())
}

fn effective_training_config(app: &App, args: &TrainArgs) -> Result<TrainingConfig> {
    let mut config = app.config.training.clone();
    if let Some(mode) = &args.mode {
        config.mode = mode.parse()?;
    }
    if let Some(lambda) = args.lambda {
        config.lambda = lambda;
    }
    if let Some(tau) = args.tau {
        config.tau = tau;
    }
    if let Some(dim) = args.dim {
        config.dim = dim;
    }
    if let Some(epochs) = args.epochs {
        config.epochs = epochs;
    }
    if let Some(seed) = app.seed {
        config.seed = seed;
    }
    Ok(config)
}

pub fn cmd_train(app: &App, args: &TrainArgs) -> Result<()> {
    let ppmi_dir = required(&args.ppmi_dir, &app.config.paths.ppmi_dir, "ppmi dir")?;
    require_exists(&ppmi_dir, "ppmi dir")?;
    let out = required(&args.out, &app.config.paths.embeddings_dir, "embeddings output dir")?;
    let ppmis = PpmiSet::load_dir(&ppmi_dir)?;
    let config = effective_training_config(app, args)?;
    let prior = resolve_prior(app, &args.prior, args.chain_prior, ppmis.labels())?;

    info!(
        "training: mode={:?}, T={}, V={}, d={}, {} epochs",
        config.mode,
        ppmis.len(),
        ppmis.v(),
        config.dim,
        config.epochs
    );
    let result = train(&ppmis, prior.as_ref(), &config)?;

    let config_json = serde_json::to_value(&config)
        .map_err(|e| Error::Config(format!("config serialization: {e}")))?;
    atomic_dir(&out, |tmp| {
        result.embeddings.save_archive(tmp, &config_json)?;
        result.final_affinity.save(&tmp.join("final_affinity.tsv"))?;
        result.trace.save_csv(&tmp.join("trace.csv"))?;
        for (epoch, w) in &result.trace.w_snapshots {
            w.save(&tmp.join(format!("affinity_epoch_{epoch:05}.tsv")))?;
        }
        Ok(())
    })?;

    let last = result.trace.epochs.last().expect("at least one epoch");
    let total: f64 = last.slices.iter().map(|l| l.total).sum();
    println!(
        "trained {} slices for {} epochs (final total loss {total:.6e}) -> {}",
        ppmis.len(),
        config.epochs,
        out.display()
    );
    Ok(())
}

pub fn cmd_predict_structure(app: &App, args: &PredictArgs) -> Result<()> {
    let dir = required(&args.embeddings, &app.config.paths.embeddings_dir, "embeddings dir")?;
    require_exists(&dir, "embeddings dir")?;
    let out = required(&args.out, &app.config.paths.structure_dir, "structure output dir")?;
    let (set, _) = EmbeddingSet::load_archive(&dir)?;

    let distances = distance_matrix(&set);
    let affinity = update_affinity(&distances, app.config.training.eps_clamp)?;
    let tree = dendrogram(&distances)?;

    atomic_dir(&out, |tmp| {
        affinity.save(&tmp.join("affinity.tsv"))?;
        distances.save(&tmp.join("distance.tsv"))?;
        std::fs::write(tmp.join("dendrogram.nwk"), tree.to_newick())?;
        std::fs::write(tmp.join("dendrogram.json"), tree.to_json())?;
        Ok(())
    })?;
    println!("structure for {} slices -> {}", set.len(), out.display());
    Ok(())
}

pub fn cmd_eval(app: &App, args: &EvalArgs) -> Result<()> {
    match args.which {
        EvalWhich::Analogy => eval_analogy(app, args),
        EvalWhich::CrossSlice => eval_cross_slice(app, args),
        EvalWhich::Similarity => eval_similarity(app, args),
        EvalWhich::Recall => eval_recall(app, args),
        EvalWhich::Burrows => eval_burrows(app, args),
    }
}

fn eval_analogy(app: &App, args: &EvalArgs) -> Result<()> {
    let (set, vocab) = load_archive_and_vocab(app, &args.embeddings, &args.vocab)?;
    let tests_path = required(&args.tests, &app.config.paths.analogy_tests, "analogy test set")?;
    let tests = AnalogyTestSet::load(&tests_path)?;
    let ns = &app.config.evaluation.analogy_ns;

    // general analogies are evaluated on the slice-averaged embedding
    let averaged = set.average();
    let outcome = evaluate_analogies(&averaged, &vocab, &tests, ns, &AnalogyProtocol::default())?;

    let mut report = Report::new(&["section", "n", "accuracy", "scored", "total", "coverage"]);
    report.comment(format!("embedding: slice average over T={}", set.len()));
    for (i, &n) in outcome.ns.iter().enumerate() {
        report.row(vec![
            "(all)".into(),
            n.to_string(),
            fmt(outcome.accuracy[i]),
            outcome.scored.to_string(),
            outcome.total.to_string(),
            fmt(outcome.coverage),
        ]);
    }
    for section in &outcome.sections {
        for (i, &n) in outcome.ns.iter().enumerate() {
            let coverage = if section.total == 0 {
                0.0
            } else {
                section.scored as f64 / section.total as f64
            };
            report.row(vec![
                section.name.clone(),
                n.to_string(),
                fmt(section.accuracy[i]),
                section.scored.to_string(),
                section.total.to_string(),
                fmt(coverage),
            ]);
        }
    }
    let out = report_out_path(app, &args.out, "analogy")?;
    finish_report(app, report, Some(&out))
}

fn eval_cross_slice(app: &App, args: &EvalArgs) -> Result<()> {
    let (set, vocab) = load_archive_and_vocab(app, &args.embeddings, &args.vocab)?;
    let tests_path = required(
        &args.tests,
        &app.config.paths.cross_slice_tests,
        "cross-slice test set",
    )?;
    let tests = CrossSliceAnalogySet::load(&tests_path)?;
    let ns = &app.config.evaluation.analogy_ns;
    let outcome = evaluate_cross_slice(&set, &vocab, &tests, ns)?;

    let mut report = Report::new(&["n", "accuracy", "scored", "total", "coverage"]);
    for (i, &n) in outcome.ns.iter().enumerate() {
        report.row(vec![
            n.to_string(),
            fmt(outcome.accuracy[i]),
            outcome.scored.to_string(),
            outcome.total.to_string(),
            fmt(outcome.coverage),
        ]);
    }
    let out = report_out_path(app, &args.out, "cross-slice")?;
    finish_report(app, report, Some(&out))
}

fn eval_similarity(app: &App, args: &EvalArgs) -> Result<()> {
    let (set, vocab) = load_archive_and_vocab(app, &args.embeddings, &args.vocab)?;
    let ds_path = required(
        &args.tests,
        &app.config.paths.similarity_dataset,
        "similarity dataset",
    )?;
    let dataset = SimilarityDataset::load(&ds_path)?;
    let method = match &args.method {
        Some(s) => s.parse()?,
        None => app.config.evaluation.similarity_method,
    };
    let averaged = set.average();
    let (coefficient, coverage) = similarity_correlation(&averaged, &vocab, &dataset, method)?;

    let mut report = Report::new(&["method", "coefficient", "coverage", "pairs"]);
    report.row(vec![
        format!("{method:?}").to_lowercase(),
        fmt(coefficient),
        fmt(coverage),
        dataset.pairs.len().to_string(),
    ]);
    let out = report_out_path(app, &args.out, "similarity")?;
    finish_report(app, report, Some(&out))
}

fn eval_recall(app: &App, args: &EvalArgs) -> Result<()> {
    // predicted structure: explicit file, else the embedding archive
    let pred = match args.pred.clone().or(app.config.evaluation.pred_structure.clone()) {
        Some(path) => {
            require_exists(&path, "predicted structure")?;
            load_structure_as_distance(&path)?
        }
        None => {
            let dir = required(&args.embeddings, &app.config.paths.embeddings_dir, "embeddings dir")?;
            require_exists(&dir, "embeddings dir")?;
            let (set, _) = EmbeddingSet::load_archive(&dir)?;
            distance_matrix(&set)
        }
    };

    let truth = match args.truth.clone().or(app.config.evaluation.truth_structure.clone()) {
        Some(path) => {
            require_exists(&path, "truth structure")?;
            load_structure_as_distance(&path)?
        }
        None => {
            let prior = resolve_prior(app, &None, false, pred.labels())?.ok_or_else(|| {
                Error::Config(
                    "recall needs a ground truth: --truth, evaluation.truth_structure, or a prior"
                        .into(),
                )
            })?;
            affinity_to_distance(&prior)?
        }
    };

    let k = args.k.unwrap_or(app.config.evaluation.recall_k);
    let recall = recall_at_k(&truth, &pred, k)?;

    let mut report = Report::new(&["k", "recall"]);
    report.row(vec![k.to_string(), fmt(recall)]);
    let out = report_out_path(app, &args.out, "recall")?;
    finish_report(app, report, Some(&out))
}

fn eval_burrows(app: &App, args: &EvalArgs) -> Result<()> {
    let corpus = load_corpus(app, &args.corpus, &args.format)?;
    let rank_lo = args.rank_lo.unwrap_or(app.config.evaluation.burrows_rank_lo);
    let rank_hi = args.rank_hi.unwrap_or(app.config.evaluation.burrows_rank_hi);
    let outcome = burrows_delta(&corpus, rank_lo, rank_hi)?;

    if let Some(matrix_out) = &args.matrix_out {
        atomic_file(matrix_out, |tmp| outcome.delta.save(tmp))?;
    }

    let mut report = Report::new(&["slice_a", "slice_b", "delta"]);
    report.comment(format!(
        "feature ranks [{rank_lo}, {rank_hi}); {} features used, {} dropped",
        outcome.features_used.len(),
        outcome.features_dropped.len()
    ));
    if !outcome.features_dropped.is_empty() {
        report.comment(format!(
            "dropped (zero variance): {}",
            outcome.features_dropped.join(" ")
        ));
    }
    let labels = outcome.delta.labels();
    for a in 0..labels.len() {
        for b in a + 1..labels.len() {
            report.row(vec![
                labels[a].clone(),
                labels[b].clone(),
                fmt(outcome.delta.get(a, b)),
            ]);
        }
    }
    let out = report_out_path(app, &args.out, "burrows")?;
    finish_report(app, report, Some(&out))
}

pub fn cmd_neighbors(app: &App, args: &NeighborsArgs) -> Result<()> {
    let (set, vocab) = load_archive_and_vocab(app, &args.embeddings, &args.vocab)?;
    let n = args.n.unwrap_or(app.config.evaluation.neighbors_n);
    let (matrix, source) = match &args.slice {
        Some(label) => {
            let t = set.label_index(label).ok_or_else(|| {
                Error::Validation(format!("unknown slice {label:?}"))
            })?;
            (set.matrix(t).clone(), label.clone())
        }
        None => (set.average(), "(average)".to_owned()),
    };
    let result = nearest_neighbors(&matrix, &vocab, &args.word, n)?;

    let mut report = Report::new(&["rank", "word", "cosine"]);
    report.comment(format!("word {:?} in slice {source}", args.word));
    for (rank, (word, sim)) in result.iter().enumerate() {
        report.row(vec![(rank + 1).to_string(), word.clone(), fmt(*sim)]);
    }
    finish_report(app, report, args.out.as_deref())
}

pub fn cmd_timeline(app: &App, args: &TimelineArgs) -> Result<()> {
    let (set, vocab) = load_archive_and_vocab(app, &args.embeddings, &args.vocab)?;
    let per_slice = app.config.evaluation.timeline_auto_per_slice;
    let neighbors: Vec<String> = if let Some(list) = &args.neighbors {
        list.clone()
    } else if args.auto {
        auto_drift_neighbors(&set, &vocab, &args.word, per_slice)?
    } else if let Some(list) = &app.config.evaluation.timeline_neighbors {
        list.clone()
    } else {
        auto_drift_neighbors(&set, &vocab, &args.word, per_slice)?
    };

    let table = drift_timeline(&set, &vocab, &args.word, &neighbors)?;
    let mut columns: Vec<&str> = vec!["slice"];
    columns.extend(table.neighbors.iter().map(String::as_str));
    let mut report = Report::new(&columns);
    report.comment(format!("target {:?}", args.word));
    for (t, slice) in table.slices.iter().enumerate() {
        let mut row = vec![slice.clone()];
        for j in 0..table.neighbors.len() {
            row.push(fmt(table.values[[t, j]]));
        }
        report.row(row);
    }
    finish_report(app, report, args.out.as_deref())
}

pub fn cmd_grid(app: &App, args: &GridArgs) -> Result<()> {
    let ppmi_dir = required(&args.ppmi_dir, &app.config.paths.ppmi_dir, "ppmi dir")?;
    require_exists(&ppmi_dir, "ppmi dir")?;
    let ppmis = PpmiSet::load_dir(&ppmi_dir)?;

    let vocab_path = required(&args.vocab, &app.config.paths.vocab, "vocabulary path")?;
    require_exists(&vocab_path, "vocabulary")?;
    let fp = file_fingerprint(&vocab_path)?;
    if ppmis.vocab_fingerprint() != Some(fp.as_str()) {
        return Err(Error::Fingerprint(format!(
            "{} was not the vocabulary the PPMI set was built from",
            vocab_path.display()
        )));
    }
    let vocab = Vocabulary::load(&vocab_path)?;

    let tests_path = required(&args.tests, &app.config.paths.analogy_tests, "analogy test set")?;
    let tests = AnalogyTestSet::load(&tests_path)?;

    let mut base = app.config.training.clone();
    if let Some(mode) = &args.mode {
        base.mode = mode.parse()?;
    }
    if let Some(epochs) = args.epochs {
        base.epochs = epochs;
    }
    if let Some(seed) = app.seed {
        base.seed = seed;
    }

    let prior = resolve_prior(app, &args.prior, args.chain_prior, ppmis.labels())?;
    let recall_k = args.recall_k.or(app.config.grid.recall_k);
    let truth = match (recall_k, &prior) {
        (Some(_), Some(prior)) => Some(affinity_to_distance(prior)?),
        (Some(_), None) => {
            return Err(Error::Config(
                "grid recall scoring needs a prior structure".into(),
            ))
        }
        (None, _) => None,
    };

    let lambdas = args
        .lambda_grid
        .clone()
        .unwrap_or_else(|| app.config.grid.lambda_grid.clone());
    let taus = args
        .tau_grid
        .clone()
        .unwrap_or_else(|| app.config.grid.tau_grid.clone());

    let protocol = AnalogyProtocol::default();
    let outcome = grid_search(&lambdas, &taus, |lambda, tau| {
        info!("grid cell lambda={lambda}, tau={tau}");
        let mut config = base.clone();
        config.lambda = lambda;
        config.tau = tau;
        let result = train(&ppmis, prior.as_ref(), &config)?;
        let averaged = result.embeddings.average();
        let scores = evaluate_analogies(&averaged, &vocab, &tests, &GRID_NS, &protocol)?;
        let recall = match (&truth, recall_k) {
            (Some(truth), Some(k)) => Some(recall_at_k(
                truth,
                &distance_matrix(&result.embeddings),
                k,
            )?),
            _ => None,
        };
        Ok(CellScore {
            accuracy: [scores.accuracy[0], scores.accuracy[1], scores.accuracy[2]],
            recall,
        })
    })?;

    let mut report = Report::new(&[
        "lambda", "tau", "status", "acc_n1", "acc_n5", "acc_n10", "rescaled_n1", "rescaled_n5",
        "rescaled_n10", "agg_mean", "agg_max", "recall", "selected", "error",
    ]);
    if let Some(cell) = outcome.selected_cell() {
        report.comment(format!("selected lambda={} tau={}", cell.lambda, cell.tau));
    }
    if let Some((r, p)) = outcome.quality_recall_correlation {
        report.comment(format!("pearson(acc_n10, recall): r={r} p={p}"));
    }
    for (i, cell) in outcome.cells.iter().enumerate() {
        let selected = outcome.selected == Some(i);
        let row = match &cell.score {
            Ok(score) => {
                let rescaled = cell.rescaled.unwrap();
                vec![
                    fmt(cell.lambda),
                    fmt(cell.tau),
                    "ok".into(),
                    fmt(score.accuracy[0]),
                    fmt(score.accuracy[1]),
                    fmt(score.accuracy[2]),
                    fmt(rescaled[0]),
                    fmt(rescaled[1]),
                    fmt(rescaled[2]),
                    fmt(cell.agg_mean.unwrap()),
                    fmt(cell.agg_max.unwrap()),
                    score.recall.map(fmt).unwrap_or_default(),
                    selected.to_string(),
                    String::new(),
                ]
            }
            Err(message) => vec![
                fmt(cell.lambda),
                fmt(cell.tau),
                "failed".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "false".into(),
                message.clone(),
            ],
        };
        report.row(row);
    }
    let out = report_out_path(app, &args.out, "grid")?;
    finish_report(app, report, Some(&out))
}
