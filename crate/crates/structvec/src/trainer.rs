//! Block-coordinate training of slice embeddings.
//!
//! Each slice objective is `L_F + tau * L_RD + lambda * L_S` with
//!
//! * `L_F  = ||Y_t - U_t U_t'||_F^2` — fidelity to the PPMI matrix,
//! * `L_RD = ||D||_F` — unsquared Frobenius norm of the full T×T distance
//!   matrix (zero subgradient at D = 0),
//! * `L_S  = sum_j W[t,j] * D[t,j]` — the structure term over row t.
//!
//! One epoch updates every `U_t` once, in slice order, with one Adam step
//! each. In `pred` mode the affinity W is re-estimated from the distances
//! after every block update (or per epoch). The loop is sequential and all
//! randomness comes from the seed, so runs are bit-reproducible.

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::embedding::{init_embeddings, sq_frobenius_diff, EmbeddingSet};
use crate::error::{Error, Result};
use crate::ppmi::{PpmiMatrix, PpmiSet};
use crate::structure::{distance_matrix, update_affinity, AffinityMatrix, DistanceMatrix};

/// How the affinity W is obtained during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fixed prior affinity.
    Constr,
    /// W re-estimated from the embedding distances during training.
    Pred,
    /// Fixed human-denoised affinity (training-wise identical to `constr`).
    Den,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constr" => Ok(Mode::Constr),
            "pred" => Ok(Mode::Pred),
            "den" => Ok(Mode::Den),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected \"constr\", \"pred\" or \"den\")"
            ))),
        }
    }
}

/// When `pred` mode refreshes W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WUpdateGranularity {
    PerBlock,
    PerEpoch,
}

impl std::str::FromStr for WUpdateGranularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_block" => Ok(WUpdateGranularity::PerBlock),
            "per_epoch" => Ok(WUpdateGranularity::PerEpoch),
            other => Err(Error::Config(format!(
                "unknown granularity {other:?} (expected \"per_block\" or \"per_epoch\")"
            ))),
        }
    }
}

/// One learning-rate span; `until_epoch: None` covers the rest of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrStage {
    pub lr: f64,
    pub until_epoch: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub mode: Mode,
    pub lambda: f64,
    pub tau: f64,
    pub dim: usize,
    pub epochs: usize,
    pub lr_schedule: Vec<LrStage>,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub w_update: WUpdateGranularity,
    pub eps_clamp: f64,
    /// In `pred` mode, keep a copy of W every this many epochs.
    pub w_snapshot_every: Option<usize>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            mode: Mode::Pred,
            lambda: 512.0,
            tau: 1024.0,
            dim: 50,
            epochs: 1000,
            lr_schedule: vec![
                LrStage { lr: 0.1, until_epoch: Some(100) },
                LrStage { lr: 0.05, until_epoch: Some(500) },
                LrStage { lr: 0.01, until_epoch: None },
            ],
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            w_update: WUpdateGranularity::PerBlock,
            eps_clamp: 1e-8,
            w_snapshot_every: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be at least 1"));
        }
        if self.dim == 0 {
            return Err(Error::validation("dim must be at least 1"));
        }
        for (name, x) in [("lambda", self.lambda), ("tau", self.tau)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::validation(format!(
                    "{name} must be finite and nonnegative, got {x}"
                )));
            }
        }
        for (name, x) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::validation(format!(
                    "{name} must lie in [0, 1), got {x}"
                )));
            }
        }
        for (name, x) in [("adam_eps", self.adam_eps), ("eps_clamp", self.eps_clamp)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::validation(format!(
                    "{name} must be positive, got {x}"
                )));
            }
        }
        if self.lr_schedule.is_empty() {
            return Err(Error::validation("lr_schedule must not be empty"));
        }
        let mut prev: Option<usize> = None;
        for (i, stage) in self.lr_schedule.iter().enumerate() {
            if !(stage.lr.is_finite() && stage.lr > 0.0) {
                return Err(Error::validation(format!(
                    "learning rate must be positive, got {}",
                    stage.lr
                )));
            }
            match (stage.until_epoch, i + 1 == self.lr_schedule.len()) {
                (Some(until), _) => {
                    if prev.is_some_and(|p| until <= p) || until == 0 {
                        return Err(Error::validation(
                            "lr_schedule breakpoints must be strictly increasing",
                        ));
                    }
                    prev = Some(until);
                }
                (None, true) => {}
                (None, false) => {
                    return Err(Error::validation(
                        "only the last lr_schedule stage may be open-ended",
                    ));
                }
            }
        }
        if let Some(stage) = self.lr_schedule.last() {
            if let Some(until) = stage.until_epoch {
                if until < self.epochs {
                    return Err(Error::validation(format!(
                        "lr_schedule covers epochs up to {until} but the run has {}",
                        self.epochs
                    )));
                }
            }
        }
        if self.w_snapshot_every == Some(0) {
            return Err(Error::validation("w_snapshot_every must be positive"));
        }
        Ok(())
    }

    /// Learning rate for a zero-based epoch index.
    pub fn lr_at(&self, epoch: usize) -> f64 {
        for stage in &self.lr_schedule {
            match stage.until_epoch {
                Some(until) if epoch < until => return stage.lr,
                None => return stage.lr,
                _ => {}
            }
        }
        self.lr_schedule.last().expect("schedule is non-empty").lr
    }
}

/// Loss components of one slice objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossComponents {
    pub fidelity: f64,
    pub distance_reg: f64,
    pub structure: f64,
    pub total: f64,
}

/// Per-epoch loss record plus optional affinity snapshots.
#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub labels: Vec<String>,
    pub epochs: Vec<EpochTrace>,
    pub w_snapshots: Vec<(usize, AffinityMatrix)>,
}

#[derive(Debug, Clone)]
pub struct EpochTrace {
    /// One-based epoch number.
    pub epoch: usize,
    pub lr: f64,
    pub slices: Vec<LossComponents>,
}

impl TrainingTrace {
    /// CSV with columns epoch, slice, L_F, L_RD, L_S, total, lr.
    pub fn save_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "epoch,slice,L_F,L_RD,L_S,total,lr")?;
        for record in &self.epochs {
            for (label, loss) in self.labels.iter().zip(&record.slices) {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    record.epoch,
                    crate::report::csv_escape(label),
                    loss.fidelity,
                    loss.distance_reg,
                    loss.structure,
                    loss.total,
                    record.lr
                )?;
            }
        }
        Ok(())
    }
}

/// Result of a training run: the embeddings, the final affinity (equal to
/// the prior in `constr`/`den`), and the loss trace.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub embeddings: EmbeddingSet,
    pub final_affinity: AffinityMatrix,
    pub trace: TrainingTrace,
}

const FIDELITY_BLOCK_ROWS: usize = 256;

/// `||Y - U U'||_F^2` with Y densified implicitly (absent entries are zero),
/// evaluated in row blocks to bound memory at `BLOCK × V`.
fn fidelity_loss(u: &Array2<f64>, y: &PpmiMatrix) -> f64 {
    let v = u.nrows();
    let ut = u.t();
    let mut acc = 0.0;
    let mut start = 0;
    while start < v {
        let end = (start + FIDELITY_BLOCK_ROWS).min(v);
        let mut block = u.slice(s![start..end, ..]).dot(&ut);
        for i in start..end {
            for &(j, val) in y.row(i) {
                block[[i - start, j as usize]] -= val;
            }
        }
        acc += block.iter().map(|&x| x * x).sum::<f64>();
        start = end;
    }
    acc
}

/// Sparse-dense product `Y · U`.
fn ppmi_times_dense(y: &PpmiMatrix, u: &Array2<f64>) -> Array2<f64> {
    let (v, d) = u.dim();
    let mut out = Array2::zeros((v, d));
    for i in 0..v {
        let mut dst = out.row_mut(i);
        for &(j, val) in y.row(i) {
            dst.scaled_add(val, &u.row(j as usize));
        }
    }
    out
}

fn frobenius_norm(values: &Array2<f64>) -> f64 {
    values.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

fn check_labels(e: &EmbeddingSet, y: &PpmiMatrix, w: &AffinityMatrix, t: usize) -> Result<()> {
    if t >= e.len() {
        return Err(Error::validation(format!(
            "slice index {t} out of range for T={}",
            e.len()
        )));
    }
    if w.labels() != e.labels() {
        return Err(Error::validation(format!(
            "affinity labels {:?} do not match embedding labels {:?}",
            w.labels(),
            e.labels()
        )));
    }
    if y.v() != e.v() {
        return Err(Error::validation(format!(
            "PPMI matrix has V={}, embeddings have V={}",
            y.v(),
            e.v()
        )));
    }
    Ok(())
}

/// Slice objective for row `t` given all current embeddings.
pub fn objective(
    embeddings: &EmbeddingSet,
    y: &PpmiMatrix,
    affinity: &AffinityMatrix,
    t: usize,
    lambda: f64,
    tau: f64,
) -> Result<LossComponents> {
    check_labels(embeddings, y, affinity, t)?;
    let distances = distance_matrix(embeddings);
    objective_with_distances(embeddings, y, affinity, t, lambda, tau, distances.values())
}

fn objective_with_distances(
    embeddings: &EmbeddingSet,
    y: &PpmiMatrix,
    affinity: &AffinityMatrix,
    t: usize,
    lambda: f64,
    tau: f64,
    distances: &Array2<f64>,
) -> Result<LossComponents> {
    let fidelity = fidelity_loss(embeddings.matrix(t), y);
    if !fidelity.is_finite() {
        return Err(Error::NonFinite(format!("L_F diverged for slice {t}")));
    }
    let distance_reg = frobenius_norm(distances);
    if !distance_reg.is_finite() {
        return Err(Error::NonFinite(format!("L_RD diverged for slice {t}")));
    }
    let structure = (0..embeddings.len())
        .map(|j| affinity.get(t, j) * distances[[t, j]])
        .sum::<f64>();
    if !structure.is_finite() {
        return Err(Error::NonFinite(format!("L_S diverged for slice {t}")));
    }
    let total = fidelity + tau * distance_reg + lambda * structure;
    Ok(LossComponents {
        fidelity,
        distance_reg,
        structure,
        total,
    })
}

/// Analytic gradient of the slice objective with respect to `U_t`.
///
/// The fidelity part is `-4 (Y - U U') U`; the structure and distance parts
/// flow through every appearance of `U_t` in D, i.e. both row t and column t.
pub fn gradient(
    embeddings: &EmbeddingSet,
    y: &PpmiMatrix,
    affinity: &AffinityMatrix,
    t: usize,
    lambda: f64,
    tau: f64,
) -> Result<Array2<f64>> {
    check_labels(embeddings, y, affinity, t)?;
    let distances = distance_matrix(embeddings);
    gradient_with_distances(embeddings, y, affinity, t, lambda, tau, distances.values())
}

fn gradient_with_distances(
    embeddings: &EmbeddingSet,
    y: &PpmiMatrix,
    affinity: &AffinityMatrix,
    t: usize,
    lambda: f64,
    tau: f64,
    distances: &Array2<f64>,
) -> Result<Array2<f64>> {
    let u = embeddings.matrix(t);

    // d L_F / d U = -4 (Y U - U (U'U))
    let yu = ppmi_times_dense(y, u);
    let utu = u.t().dot(u);
    let mut grad = (yu - u.dot(&utu)) * -4.0;

    // Chain rule through D: with M = lambda * dL_S/dD + tau * dL_RD/dD,
    // the contribution is sum_j (M[t,j] + M[j,t]) * 2 (U_t - U_j), where
    // dL_S/dD has support only on row t and dL_RD/dD = D / ||D||_F
    // (subgradient 0 when D = 0).
    let norm = frobenius_norm(distances);
    {
        // Accumulating c_j * (U_t - U_j) keeps the contribution exactly zero
        // for coinciding embeddings (D = 0 subgradient).
        let u_flat = u.as_slice().expect("standard layout");
        let g_flat = grad.as_slice_mut().expect("standard layout");
        for j in 0..embeddings.len() {
            if j == t {
                continue;
            }
            let mut m_tj = lambda * affinity.get(t, j);
            let mut m_jt = 0.0;
            if norm > 0.0 {
                m_tj += tau * distances[[t, j]] / norm;
                m_jt += tau * distances[[j, t]] / norm;
            }
            let c = 2.0 * (m_tj + m_jt);
            if c != 0.0 {
                let other = embeddings.matrix(j).as_slice().expect("standard layout");
                for (e, g) in g_flat.iter_mut().enumerate() {
                    *g += c * (u_flat[e] - other[e]);
                }
            }
        }
    }

    if grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient diverged for slice {t}"
        )));
    }
    Ok(grad)
}

/// Adam moment state for one slice; persists across epochs.
struct AdamState {
    m: Array2<f64>,
    v: Array2<f64>,
    step: u64,
}

impl AdamState {
    fn new(shape: (usize, usize)) -> Self {
        AdamState {
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
            step: 0,
        }
    }

    fn apply(&mut self, u: &mut Array2<f64>, grad: &Array2<f64>, lr: f64, config: &TrainingConfig) {
        self.step += 1;
        let (b1, b2, eps) = (config.adam_beta1, config.adam_beta2, config.adam_eps);
        let bc1 = 1.0 - b1.powi(self.step as i32);
        let bc2 = 1.0 - b2.powi(self.step as i32);
        let u = u.as_slice_mut().expect("standard layout");
        let g = grad.as_slice().expect("standard layout");
        let m = self.m.as_slice_mut().expect("standard layout");
        let v = self.v.as_slice_mut().expect("standard layout");
        for i in 0..u.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            u[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

fn refresh_distances(distances: &mut Array2<f64>, embeddings: &EmbeddingSet, t: usize) {
    for j in 0..embeddings.len() {
        if j == t {
            continue;
        }
        let d = sq_frobenius_diff(embeddings.matrix(t), embeddings.matrix(j));
        distances[[t, j]] = d;
        distances[[j, t]] = d;
    }
}

fn affinity_from_distances(
    distances: &Array2<f64>,
    labels: &[String],
    eps: f64,
) -> Result<AffinityMatrix> {
    let d = DistanceMatrix::from_parts(labels.to_vec(), distances.clone())?;
    update_affinity(&d, eps)
}

/// Run the block-coordinate loop over all slices.
///
/// `constr` and `den` require a prior affinity whose labels match the PPMI
/// set; `pred` ignores any prior and bootstraps W from the initial
/// embeddings.
pub fn train(
    ppmis: &PpmiSet,
    prior: Option<&AffinityMatrix>,
    config: &TrainingConfig,
) -> Result<TrainOutput> {
    config.validate()?;
    let t_count = ppmis.len();
    if t_count < 2 {
        return Err(Error::validation(format!(
            "training needs at least 2 slices, got {t_count}"
        )));
    }
    let labels = ppmis.labels().to_vec();

    let mut embeddings = init_embeddings(t_count, ppmis.v(), config.dim, config.seed)?
        .with_labels(labels.clone())?
        .with_fingerprint(ppmis.vocab_fingerprint().map(str::to_owned));

    let mut distances = distance_matrix(&embeddings).values().clone();
    let mut affinity = match config.mode {
        Mode::Constr | Mode::Den => {
            let prior = prior.ok_or_else(|| {
                Error::Config("constr/den mode requires a prior affinity".into())
            })?;
            if prior.labels() != labels {
                return Err(Error::validation(format!(
                    "prior labels {:?} do not match PPMI slices {:?}",
                    prior.labels(),
                    labels
                )));
            }
            prior.clone()
        }
        Mode::Pred => affinity_from_distances(&distances, &labels, config.eps_clamp)?,
    };

    let mut adam: Vec<AdamState> = (0..t_count)
        .map(|_| AdamState::new((ppmis.v(), config.dim)))
        .collect();
    let mut epochs_trace = Vec::with_capacity(config.epochs);
    let mut w_snapshots = Vec::new();

    for epoch in 0..config.epochs {
        let lr = config.lr_at(epoch);
        for t in 0..t_count {
            let grad = gradient_with_distances(
                &embeddings,
                ppmis.matrix(t),
                &affinity,
                t,
                config.lambda,
                config.tau,
                &distances,
            )
            .map_err(|e| {
                Error::NonFinite(format!("epoch {}, slice {:?}: {e}", epoch + 1, labels[t]))
            })?;
            adam[t].apply(embeddings.matrix_mut(t), &grad, lr, config);
            refresh_distances(&mut distances, &embeddings, t);
            if config.mode == Mode::Pred && config.w_update == WUpdateGranularity::PerBlock {
                affinity = affinity_from_distances(&distances, &labels, config.eps_clamp)?;
            }
        }
        if config.mode == Mode::Pred && config.w_update == WUpdateGranularity::PerEpoch {
            affinity = affinity_from_distances(&distances, &labels, config.eps_clamp)?;
        }

        let mut slices = Vec::with_capacity(t_count);
        for t in 0..t_count {
            let loss = objective_with_distances(
                &embeddings,
                ppmis.matrix(t),
                &affinity,
                t,
                config.lambda,
                config.tau,
                &distances,
            )
            .map_err(|e| {
                Error::NonFinite(format!("epoch {}, slice {:?}: {e}", epoch + 1, labels[t]))
            })?;
            slices.push(loss);
        }
        epochs_trace.push(EpochTrace {
            epoch: epoch + 1,
            lr,
            slices,
        });

        if config.mode == Mode::Pred {
            if let Some(every) = config.w_snapshot_every {
                if (epoch + 1) % every == 0 {
                    w_snapshots.push((epoch + 1, affinity.clone()));
                }
            }
        }
    }

    Ok(TrainOutput {
        embeddings,
        final_affinity: affinity,
        trace: TrainingTrace {
            labels,
            epochs: epochs_trace,
            w_snapshots,
        },
    })
}
