//! JSON run configuration. Every command reads the same file; command-line
//! flags override individual values. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use structvec::cooccur::CountParams;
use structvec::corpus::CorpusFormat;
use structvec::eval::CorrelationMethod;
use structvec::ppmi::{PpmiFileFormat, PpmiParams};
use structvec::trainer::TrainingConfig;
use structvec::vocab::VocabParams;
use structvec::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub vocab: VocabParams,
    pub cooccurrence: CooccurrenceConfig,
    pub training: TrainingConfig,
    pub prior: PriorConfig,
    pub evaluation: EvalConfig,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    /// "jsonl" or "slice-dirs".
    pub corpus_format: Option<String>,
    pub vocab: Option<PathBuf>,
    pub ppmi_dir: Option<PathBuf>,
    pub embeddings_dir: Option<PathBuf>,
    pub prior_affinity: Option<PathBuf>,
    pub structure_dir: Option<PathBuf>,
    pub reports_dir: Option<PathBuf>,
    pub analogy_tests: Option<PathBuf>,
    pub cross_slice_tests: Option<PathBuf>,
    pub similarity_dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CooccurrenceConfig {
    pub window: usize,
    pub distance_weighting: bool,
    pub smoothing_alpha: Option<f64>,
    pub shift: Option<f64>,
    /// "tsv" or "bin".
    pub format: PpmiFileFormat,
}

impl Default for CooccurrenceConfig {
    fn default() -> Self {
        let counts = CountParams::default();
        CooccurrenceConfig {
            window: counts.window,
            distance_weighting: counts.distance_weighting,
            smoothing_alpha: None,
            shift: None,
            format: PpmiFileFormat::default(),
        }
    }
}

impl CooccurrenceConfig {
    pub fn count_params(&self) -> CountParams {
        CountParams {
            window: self.window,
            distance_weighting: self.distance_weighting,
        }
    }

    pub fn ppmi_params(&self) -> PpmiParams {
        PpmiParams {
            smoothing_alpha: self.smoothing_alpha,
            shift: self.shift,
        }
    }
}

/// Where the prior affinity comes from: an affinity TSV, the chain over the
/// slice order, or an inline parent/child tree.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub chain: bool,
    pub tree: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub analogy_ns: Vec<usize>,
    pub neighbors_n: usize,
    pub similarity_method: CorrelationMethod,
    pub recall_k: usize,
    pub burrows_rank_lo: usize,
    pub burrows_rank_hi: usize,
    pub timeline_neighbors: Option<Vec<String>>,
    pub timeline_auto_per_slice: usize,
    /// Predicted structure for `eval recall`, as a matrix file; when absent
    /// the embeddings archive provides the distances.
    pub pred_structure: Option<PathBuf>,
    /// Ground-truth structure for `eval recall`, as a matrix file; when
    /// absent the prior affinity is converted.
    pub truth_structure: Option<PathBuf>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            analogy_ns: vec![1, 5, 10],
            neighbors_n: 10,
            similarity_method: CorrelationMethod::default(),
            recall_k: 2,
            burrows_rank_lo: 100,
            burrows_rank_hi: 300,
            timeline_neighbors: None,
            timeline_auto_per_slice: 5,
            pred_structure: None,
            truth_structure: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lambda_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// Score each cell against the prior structure at this k.
    pub recall_k: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lambda_grid: structvec::eval::pow2_grid(-2, 12),
            tau_grid: structvec::eval::pow2_grid(4, 12),
            recall_k: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("{}: {e}", path.display()))
        })?;
        Ok(config)
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat> {
        match self.paths.corpus_format.as_deref() {
            None => Ok(CorpusFormat::Jsonl),
            Some(s) => s.parse(),
        }
    }
}

/// A value that must have been supplied by flag or config.
pub fn required<T: Clone>(flag: &Option<T>, config: &Option<T>, what: &str) -> Result<T> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| Error::Config(format!("{what} required (flag or config)")))
}

pub fn require_exists(path: &Path, what: &str) -> Result<()> {
    if !path.exists() {
        return Err(Error::Config(format!(
            "{what} {} does not exist",
            path.display()
        )));
    }
    Ok(())
}
