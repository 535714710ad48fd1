//! Slice embedding matrices and the on-disk archive format.
//!
//! An archive is a directory holding `manifest.json` plus one `<slice>.mat`
//! per slice: the V×d matrix as row-major little-endian 32-bit floats.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::validate_label;
use crate::error::{Error, Result};

const ARCHIVE_VERSION: &str = "structvec-embeddings v1";

/// T dense V×d matrices sharing one vector space and one vocabulary.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    labels: Vec<String>,
    matrices: Vec<Array2<f64>>,
    vocab_fingerprint: Option<String>,
}

impl EmbeddingSet {
    pub fn new(
        labels: Vec<String>,
        matrices: Vec<Array2<f64>>,
        vocab_fingerprint: Option<String>,
    ) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::validation("embedding set is empty"));
        }
        if labels.len() != matrices.len() {
            return Err(Error::validation(format!(
                "{} labels for {} matrices",
                labels.len(),
                matrices.len()
            )));
        }
        let shape = matrices[0].dim();
        for (label, m) in labels.iter().zip(&matrices) {
            validate_label(label)?;
            if m.dim() != shape {
                return Err(Error::validation(format!(
                    "slice {:?} has shape {:?}, expected {:?}",
                    label,
                    m.dim(),
                    shape
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "slice {label:?} contains non-finite entries"
                )));
            }
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::validation("duplicate slice labels"));
        }
        Ok(EmbeddingSet {
            labels,
            matrices,
            vocab_fingerprint,
        })
    }

    /// Number of slices T.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn v(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn matrix(&self, t: usize) -> &Array2<f64> {
        &self.matrices[t]
    }

    pub(crate) fn matrix_mut(&mut self, t: usize) -> &mut Array2<f64> {
        &mut self.matrices[t]
    }

    pub fn vocab_fingerprint(&self) -> Option<&str> {
        self.vocab_fingerprint.as_deref()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.matrices.len() {
            return Err(Error::validation(format!(
                "{} labels for {} matrices",
                labels.len(),
                self.matrices.len()
            )));
        }
        for label in &labels {
            validate_label(label)?;
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_fingerprint(mut self, fingerprint: Option<String>) -> Self {
        self.vocab_fingerprint = fingerprint;
        self
    }

    /// Arithmetic mean of the slice matrices.
    pub fn average(&self) -> Array2<f64> {
        let mut acc = self.matrices[0].clone();
        for m in &self.matrices[1..] {
            acc += m;
        }
        acc / self.matrices.len() as f64
    }

    pub fn save_archive(&self, dir: &Path, config: &serde_json::Value) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for label in &self.labels {
            if label.contains('/') || label.contains('\\') || label == "." || label == ".." {
                return Err(Error::validation(format!(
                    "slice label {label:?} is not usable as a file name"
                )));
            }
        }
        let manifest = ArchiveManifest {
            version: ARCHIVE_VERSION.to_owned(),
            t: self.len(),
            v: self.v(),
            d: self.dim(),
            labels: self.labels.clone(),
            vocab_fingerprint: self.vocab_fingerprint.clone(),
            config: config.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Validation(format!("manifest serialization failed: {e}")))?;
        std::fs::write(dir.join("manifest.json"), json)?;

        for (label, m) in self.labels.iter().zip(&self.matrices) {
            let mut file = std::io::BufWriter::new(std::fs::File::create(
                dir.join(format!("{label}.mat")),
            )?);
            for row in m.rows() {
                for &x in row {
                    file.write_all(&(x as f32).to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn load_archive(dir: &Path) -> Result<(Self, serde_json::Value)> {
        let manifest_path = dir.join("manifest.json");
        let json = std::fs::read_to_string(&manifest_path)?;
        let manifest: ArchiveManifest = serde_json::from_str(&json).map_err(|e| Error::Parse {
            path: manifest_path,
            line: 0,
            message: e.to_string(),
        })?;
        if manifest.version != ARCHIVE_VERSION {
            return Err(Error::validation(format!(
                "unexpected archive version {:?}",
                manifest.version
            )));
        }
        if manifest.labels.len() != manifest.t {
            return Err(Error::validation(format!(
                "manifest lists {} labels but t={}",
                manifest.labels.len(),
                manifest.t
            )));
        }
        let expected = manifest
            .v
            .checked_mul(manifest.d)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::validation("matrix size overflow"))?;
        let mut matrices = Vec::with_capacity(manifest.t);
        for label in &manifest.labels {
            let path = dir.join(format!("{label}.mat"));
            let mut bytes = Vec::with_capacity(expected);
            std::fs::File::open(&path)?.read_to_end(&mut bytes)?;
            if bytes.len() != expected {
                return Err(Error::validation(format!(
                    "{} holds {} bytes, expected {} for {}x{} f32",
                    path.display(),
                    bytes.len(),
                    expected,
                    manifest.v,
                    manifest.d
                )));
            }
            let data: Vec<f64> = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            let m = Array2::from_shape_vec((manifest.v, manifest.d), data)
                .map_err(|e| Error::Validation(e.to_string()))?;
            matrices.push(m);
        }
        let set = EmbeddingSet::new(manifest.labels, matrices, manifest.vocab_fingerprint)?;
        Ok((set, manifest.config))
    }
}

#[derive(Serialize, Deserialize)]
struct ArchiveManifest {
    version: String,
    t: usize,
    v: usize,
    d: usize,
    labels: Vec<String>,
    vocab_fingerprint: Option<String>,
    config: serde_json::Value,
}

/// Draw every entry i.i.d. uniform on `[0, 1)` from a ChaCha8 stream keyed by
/// `(seed, slice index)`; the same seed always produces the same set.
pub fn init_embeddings(t: usize, v: usize, d: usize, seed: u64) -> Result<EmbeddingSet> {
    if t == 0 || v == 0 || d == 0 {
        return Err(Error::validation("t, v and d must all be at least 1"));
    }
    let mut matrices = Vec::with_capacity(t);
    let mut labels = Vec::with_capacity(t);
    for slice in 0..t {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(slice as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        let data: Vec<f64> = (0..v * d).map(|_| rng.gen::<f64>()).collect();
        matrices.push(Array2::from_shape_vec((v, d), data).expect("shape matches data"));
        labels.push(slice.to_string());
    }
    EmbeddingSet::new(labels, matrices, None)
}

/// Squared Frobenius norm of `a - b`, accumulated in index order.
pub(crate) fn sq_frobenius_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| {
            let diff = x - y;
            diff * diff
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn init_is_deterministic_and_in_unit_interval() {
        let a = init_embeddings(3, 40, 5, 7).unwrap();
        let b = init_embeddings(3, 40, 5, 7).unwrap();
        for t in 0..3 {
            assert_eq!(a.matrix(t), b.matrix(t), "same seed, same bits");
            assert!(a.matrix(t).iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        let c = init_embeddings(3, 40, 5, 8).unwrap();
        assert_ne!(a.matrix(0), c.matrix(0));
    }

    #[test]
    fn init_mean_is_near_one_half() {
        let e = init_embeddings(1, 200, 50, 13).unwrap();
        let mean = e.matrix(0).mean().unwrap();
        assert!((mean - 0.5).abs() < 0.01, "mean {mean} too far from 0.5");
    }

    #[test]
    fn average_of_single_matrix_is_identity() {
        let m = array![[1.0, 2.0], [3.0, 4.0]];
        let e = EmbeddingSet::new(vec!["a".into()], vec![m.clone()], None).unwrap();
        assert_eq!(e.average(), m);
    }

    #[test]
    fn average_of_opposites_is_zero() {
        let m = array![[1.0, -2.0], [0.5, 4.0]];
        let e = EmbeddingSet::new(vec!["a".into(), "b".into()], vec![m.clone(), -m], None)
            .unwrap();
        assert_eq!(e.average(), Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn average_of_three_matches_hand_sum() {
        let m1 = array![[1.0, 2.0]];
        let m2 = array![[4.0, -1.0]];
        let m3 = array![[-2.0, 5.0]];
        let e = EmbeddingSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![m1, m2, m3],
            None,
        )
        .unwrap();
        // hand sum: (1+4-2)/3 = 1, (2-1+5)/3 = 2
        assert_eq!(e.average(), array![[1.0, 2.0]]);
    }

    #[test]
    fn archive_round_trip() {
        let e = init_embeddings(2, 6, 3, 42)
            .unwrap()
            .with_labels(vec!["1990".into(), "1991".into()])
            .unwrap()
            .with_fingerprint(Some("fp".into()));
        let dir = tempfile::tempdir().unwrap();
        e.save_archive(dir.path(), &serde_json::json!({"seed": 42}))
            .unwrap();
        let (loaded, config) = EmbeddingSet::load_archive(dir.path()).unwrap();
        assert_eq!(loaded.labels(), e.labels());
        assert_eq!(loaded.vocab_fingerprint(), Some("fp"));
        assert_eq!(config["seed"], 42);
        // values survive the f32 round trip at f32 precision
        for t in 0..2 {
            for (a, b) in e.matrix(t).iter().zip(loaded.matrix(t).iter()) {
                assert_eq!(*a as f32, *b as f32);
            }
        }
    }

    #[test]
    fn path_hostile_labels_are_rejected_at_save() {
        let e = init_embeddings(2, 2, 2, 0)
            .unwrap()
            .with_labels(vec!["ok".into(), "not/ok".into()])
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        assert!(e.save_archive(dir.path(), &serde_json::Value::Null).is_err());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let bad = EmbeddingSet::new(
            vec!["a".into(), "b".into()],
            vec![Array2::zeros((2, 2)), Array2::zeros((3, 2))],
            None,
        );
        assert!(bad.is_err());
    }
}
