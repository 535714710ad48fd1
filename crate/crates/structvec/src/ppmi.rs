//! Positive pointwise mutual information matrices.
//!
//! `PPMI(w, c) = max(0, ln(count(w,c) · |D| / (count(w) · count(c))))` with
//! natural logarithm; zero and nonpositive entries are not stored. The result
//! is the per-slice factorization target `Y_t`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cooccur::CooccurrenceCounts;
use crate::error::{Error, Result};

pub const PPMI_HEADER_PREFIX: &str = "#structvec-ppmi v1";
const SET_MANIFEST_VERSION: &str = "structvec-ppmi-set v1";

/// PPMI transform options, all off by default: plain PPMI is the contract.
///
/// * `smoothing_alpha` — raises both marginal distributions to the power
///   `alpha` (re-normalized) before taking the ratio; applied to both sides
///   so the matrix stays symmetric. `alpha = 1` is a no-op.
/// * `shift` — subtracts `ln(shift)` from the PMI before clipping at zero.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpmiParams {
    pub smoothing_alpha: Option<f64>,
    pub shift: Option<f64>,
}

impl PpmiParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(alpha) = self.smoothing_alpha {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::validation(format!(
                    "smoothing_alpha must be positive, got {alpha}"
                )));
            }
        }
        if let Some(shift) = self.shift {
            if !(shift.is_finite() && shift >= 1.0) {
                return Err(Error::validation(format!(
                    "shift must be at least 1, got {shift}"
                )));
            }
        }
        Ok(())
    }
}

/// Sparse symmetric V×V matrix of strictly positive reals; this is `Y_t`.
#[derive(Debug, Clone)]
pub struct PpmiMatrix {
    pub slice_id: String,
    v: usize,
    /// Per-row `(column, value)` pairs, sorted by column.
    rows: Vec<Vec<(u32, f64)>>,
}

impl PpmiMatrix {
    /// Wraps sorted rows after checking symmetry, positivity and finiteness.
    pub fn new(slice_id: impl Into<String>, v: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        if rows.len() != v {
            return Err(Error::validation(format!(
                "expected {v} rows, got {}",
                rows.len()
            )));
        }
        let m = PpmiMatrix {
            slice_id: slice_id.into(),
            v,
            rows,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let mut prev: Option<u32> = None;
            for &(j, x) in row {
                if j as usize >= self.v {
                    return Err(Error::validation(format!(
                        "column {j} out of range for V={}",
                        self.v
                    )));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(Error::validation(format!(
                        "row {i} columns not strictly increasing"
                    )));
                }
                prev = Some(j);
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::validation(format!(
                        "entry ({i}, {j}) must be finite and positive, got {x}"
                    )));
                }
                if self.get(j as usize, i) != x {
                    return Err(Error::validation(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.rows[i].binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, x)| (i, j as usize, x)))
    }

    /// Squared Frobenius norm of the (implicitly dense) matrix.
    pub fn frobenius_sq(&self) -> f64 {
        self.iter_entries().map(|(_, _, x)| x * x).sum()
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "{PPMI_HEADER_PREFIX} slice={} V={}",
            self.slice_id, self.v
        )?;
        for (i, j, x) in self.iter_entries() {
            writeln!(out, "{i}\t{j}\t{x:.16e}")?;
        }
        Ok(())
    }

    pub fn save_bin(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(
            out,
            "{PPMI_HEADER_PREFIX} slice={} V={}",
            self.slice_id, self.v
        )?;
        for (i, j, x) in self.iter_entries() {
            out.write_all(&(i as u32).to_le_bytes())?;
            out.write_all(&(j as u32).to_le_bytes())?;
            out.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut file = BufReader::new(File::open(path)?);
        let mut header = String::new();
        file.read_line(&mut header)?;
        let header = header.trim_end_matches('\n');
        let (slice_id, v) = parse_ppmi_header(header, path)?;

        // Sniff the body: the first binary (u32, u32, f64) record always has
        // a NUL among its index bytes (indices stay far below 2^24), while
        // TSV text never contains NUL. An empty body is valid either way.
        let mut body = Vec::new();
        file.read_to_end(&mut body)?;
        let is_binary = body.iter().take(16).any(|&b| b == 0);

        let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
        if is_binary {
            if body.len() % 16 != 0 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 2,
                    message: format!("binary body length {} is not a multiple of 16", body.len()),
                });
            }
            for chunk in body.chunks_exact(16) {
                let i = u32::from_le_bytes(chunk[0..4].try_into().unwrap());
                let j = u32::from_le_bytes(chunk[4..8].try_into().unwrap());
                let x = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
                triplets.push((i, j, x));
            }
        } else {
            let text = String::from_utf8(body).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: 2,
                message: format!("body is neither valid TSV nor 16-byte records: {e}"),
            })?;
            for (lineno, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let parse_err = |message: String| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 2,
                    message,
                };
                let mut parts = line.split('\t');
                let i: u32 = parts
                    .next()
                    .ok_or_else(|| parse_err("missing row index".into()))?
                    .parse()
                    .map_err(|e| parse_err(format!("bad row index: {e}")))?;
                let j: u32 = parts
                    .next()
                    .ok_or_else(|| parse_err("missing column index".into()))?
                    .parse()
                    .map_err(|e| parse_err(format!("bad column index: {e}")))?;
                let x: f64 = parts
                    .next()
                    .ok_or_else(|| parse_err("missing value".into()))?
                    .parse()
                    .map_err(|e| parse_err(format!("bad value: {e}")))?;
                triplets.push((i, j, x));
            }
        }

        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); v];
        for (i, j, x) in triplets {
            if i as usize >= v {
                return Err(Error::validation(format!(
                    "row index {i} out of range for V={v}"
                )));
            }
            rows[i as usize].push((j, x));
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
        }
        PpmiMatrix::new(slice_id, v, rows)
    }
}

fn parse_ppmi_header(header: &str, path: &Path) -> Result<(String, usize)> {
    let parse_err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message,
    };
    let rest = header
        .strip_prefix(PPMI_HEADER_PREFIX)
        .ok_or_else(|| parse_err(format!("unexpected header {header:?}")))?;
    let rest = rest
        .strip_prefix(" slice=")
        .ok_or_else(|| parse_err("header missing slice=".into()))?;
    // The slice id may contain spaces; V= is the last field.
    let v_pos = rest
        .rfind(" V=")
        .ok_or_else(|| parse_err("header missing V=".into()))?;
    let slice_id = rest[..v_pos].to_owned();
    let v: usize = rest[v_pos + 3..]
        .parse()
        .map_err(|e| parse_err(format!("bad V: {e}")))?;
    Ok((slice_id, v))
}

/// Convert pair counts into a PPMI matrix.
pub fn compute_ppmi(counts: &CooccurrenceCounts, params: &PpmiParams) -> Result<PpmiMatrix> {
    params.validate()?;
    let total = counts.total();
    if total <= 0.0 {
        return Err(Error::validation(format!(
            "empty slice {:?}: no co-occurrence pairs",
            counts.slice_id
        )));
    }
    let v = counts.v();

    // With smoothing, both marginals use the alpha-scaled distribution so the
    // output stays symmetric; alpha = 1 reproduces the plain formula.
    let log_shift = params.shift.map(f64::ln).unwrap_or(0.0);
    let log_marginal: Vec<f64> = match params.smoothing_alpha {
        Some(alpha) => {
            let z: f64 = counts.marginals().iter().map(|&m| m.powf(alpha)).sum();
            counts
                .marginals()
                .iter()
                .map(|&m| alpha * m.ln() - z.ln() + total.ln())
                .collect()
        }
        None => counts.marginals().iter().map(|&m| m.ln()).collect(),
    };

    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(v);
    for i in 0..v {
        let mut row = Vec::new();
        for &(j, n) in counts.row(i) {
            // marginal logs are added together first so the (i, j) and (j, i)
            // entries round identically and the matrix stays exactly symmetric
            let pmi = n.ln() + total.ln()
                - (log_marginal[i] + log_marginal[j as usize])
                - log_shift;
            if pmi.is_nan() {
                return Err(Error::NonFinite(format!(
                    "PMI for pair ({i}, {j}) in slice {:?} is NaN",
                    counts.slice_id
                )));
            }
            if pmi > 0.0 {
                row.push((j, pmi));
            }
        }
        rows.push(row);
    }
    PpmiMatrix::new(counts.slice_id.clone(), v, rows)
}

/// On-disk encoding for PPMI matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PpmiFileFormat {
    #[default]
    Tsv,
    Bin,
}

impl std::str::FromStr for PpmiFileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(PpmiFileFormat::Tsv),
            "bin" => Ok(PpmiFileFormat::Bin),
            other => Err(Error::Config(format!(
                "unknown ppmi format {other:?} (expected \"tsv\" or \"bin\")"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SetManifest {
    version: String,
    v: usize,
    labels: Vec<String>,
    files: Vec<String>,
    vocab_fingerprint: Option<String>,
}

/// Ordered collection of per-slice PPMI matrices over one vocabulary.
#[derive(Debug, Clone)]
pub struct PpmiSet {
    v: usize,
    labels: Vec<String>,
    matrices: Vec<PpmiMatrix>,
    vocab_fingerprint: Option<String>,
}

impl PpmiSet {
    pub fn new(matrices: Vec<PpmiMatrix>, vocab_fingerprint: Option<String>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::validation("PPMI set is empty"));
        }
        let v = matrices[0].v();
        let mut labels = Vec::with_capacity(matrices.len());
        let mut seen = HashMap::new();
        for m in &matrices {
            if m.v() != v {
                return Err(Error::validation(format!(
                    "slice {:?} has V={}, expected {v}",
                    m.slice_id,
                    m.v()
                )));
            }
            if seen.insert(m.slice_id.clone(), ()).is_some() {
                return Err(Error::validation(format!(
                    "duplicate slice id {:?}",
                    m.slice_id
                )));
            }
            labels.push(m.slice_id.clone());
        }
        Ok(PpmiSet {
            v,
            labels,
            matrices,
            vocab_fingerprint,
        })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    /// Number of slices T.
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self, t: usize) -> &PpmiMatrix {
        &self.matrices[t]
    }

    pub fn matrices(&self) -> &[PpmiMatrix] {
        &self.matrices
    }

    pub fn vocab_fingerprint(&self) -> Option<&str> {
        self.vocab_fingerprint.as_deref()
    }

    /// Write one file per slice plus a manifest into `dir`.
    pub fn save_dir(&self, dir: &Path, format: PpmiFileFormat) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let ext = match format {
            PpmiFileFormat::Tsv => "tsv",
            PpmiFileFormat::Bin => "bin",
        };
        let mut files = Vec::new();
        for (t, m) in self.matrices.iter().enumerate() {
            let name = format!("slice_{t:04}.{ext}");
            let path = dir.join(&name);
            match format {
                PpmiFileFormat::Tsv => m.save_tsv(&path)?,
                PpmiFileFormat::Bin => m.save_bin(&path)?,
            }
            files.push(name);
        }
        let manifest = SetManifest {
            version: SET_MANIFEST_VERSION.to_owned(),
            v: self.v,
            labels: self.labels.clone(),
            files,
            vocab_fingerprint: self.vocab_fingerprint.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Validation(format!("manifest serialization failed: {e}")))?;
        std::fs::write(dir.join("manifest.json"), json)?;
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let json = std::fs::read_to_string(&manifest_path)?;
        let manifest: SetManifest = serde_json::from_str(&json).map_err(|e| Error::Parse {
            path: manifest_path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        if manifest.version != SET_MANIFEST_VERSION {
            return Err(Error::validation(format!(
                "unexpected manifest version {:?}",
                manifest.version
            )));
        }
        if manifest.files.len() != manifest.labels.len() {
            return Err(Error::validation(
                "manifest files and labels differ in length",
            ));
        }
        let mut matrices = Vec::with_capacity(manifest.files.len());
        for (name, label) in manifest.files.iter().zip(&manifest.labels) {
            let m = PpmiMatrix::load(&dir.join(name))?;
            if &m.slice_id != label {
                return Err(Error::validation(format!(
                    "file {name} carries slice {:?} but manifest lists {:?}",
                    m.slice_id, label
                )));
            }
            if m.v() != manifest.v {
                return Err(Error::validation(format!(
                    "file {name} has V={}, manifest says {}",
                    m.v(),
                    manifest.v
                )));
            }
            matrices.push(m);
        }
        PpmiSet::new(matrices, manifest.vocab_fingerprint)
    }
}
