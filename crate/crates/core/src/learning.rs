//! Behavior cloning of clause weights.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math::argmax;
use crate::optim::{adam_step, clip_gradient, Adam};
use crate::reasoner::{
    action_scores, backward, forward_tape, greedy_action, log_policy, policy_distribution,
    score_argmax_atoms, ClauseWeights, InferenceGraph, ReasonerConfig,
};

/// RNG stream used for the validation split, so that the split does not
/// depend on how many weights were drawn before it.
const SPLIT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearningError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("validation split is empty: {trajectories} trajectories cannot be split")]
    EmptyValidation { trajectories: usize },
    #[error("non-finite loss on frame {frame}")]
    NonFinite { frame: usize },
    #[error("frame {frame} has action {action} but the policy has {n_actions} actions")]
    BadAction {
        frame: usize,
        action: usize,
        n_actions: usize,
    },
    #[error("learning-rate grid is empty")]
    EmptyGrid,
    #[error("frame {frame} was marked for gaze training but carries no modulated valuation")]
    MissingGaze { frame: usize },
}

/// Hyperparameters of a training run.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub plateau_factor: f64,
    pub plateau_patience: usize,
    pub early_stopping_patience: usize,
    pub grad_clip_norm: f64,
    pub validation_fraction: f64,
    /// Smallest validation-loss decrease counted as an improvement.
    pub min_improvement: f64,
    pub seed: u64,
    pub lr_grid: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 32,
            max_epochs: 100,
            plateau_factor: 0.5,
            plateau_patience: 3,
            early_stopping_patience: 5,
            grad_clip_norm: 1.0,
            validation_fraction: 0.05,
            min_improvement: 1e-5,
            seed: 0,
            lr_grid: alloc::vec![0.02, 0.01, 0.001, 0.0005, 0.0001],
        }
    }
}

/// One demonstration frame: the unmodulated valuation, optionally its
/// gaze-modulated counterpart, the expert action and the trajectory it came
/// from.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub v0: Vec<f64>,
    pub vg: Option<Vec<f64>>,
    pub action: usize,
    pub trajectory: u64,
}

impl Frame {
    fn input(&self, use_gaze: bool) -> Option<&[f64]> {
        if use_gaze {
            self.vg.as_deref()
        } else {
            Some(&self.v0)
        }
    }
}

/// `−ln π_W(a | v)` for one frame.
pub fn frame_loss(v: &[f64], action: usize, w: &[f64], g: &InferenceGraph, cfg: &ReasonerConfig) -> f64 {
    let tape = forward_tape(v, w, g, cfg);
    -log_policy(&action_scores(tape.last(), g), action, cfg)
}

/// Loss of one frame and its gradient with respect to `w`, accumulated into
/// `dw` with factor `scale`.
pub fn frame_loss_grad(
    v: &[f64],
    action: usize,
    w: &[f64],
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
    scale: f64,
    dw: &mut [f64],
) -> f64 {
    let tape = forward_tape(v, w, g, cfg);
    let vt = tape.last();
    let s = action_scores(vt, g);
    let loss = -log_policy(&s, action, cfg);
    let pi = policy_distribution(&s, cfg);
    let mut d_out = alloc::vec![0.0; g.n_atoms];
    for (c, atom) in score_argmax_atoms(vt, g).into_iter().enumerate() {
        let Some(atom) = atom else { continue };
        // Scores floor at 0 for actions whose head atoms are all below it,
        // which cannot happen for valuations in [0, 1].
        let ind = if c == action { 1.0 } else { 0.0 };
        d_out[atom] += scale * (pi[c] - ind) / cfg.policy_temperature;
    }
    let mut local = alloc::vec![0.0; w.len()];
    backward(&tape, w, g, cfg, &d_out, &mut local);
    for (d, l) in dw.iter_mut().zip(local) {
        *d += l;
    }
    loss
}

fn check_batch(batch: &[(&[f64], usize)], g: &InferenceGraph) -> Result<(), LearningError> {
    if batch.is_empty() {
        return Err(LearningError::EmptyBatch);
    }
    for (frame, &(_, a)) in batch.iter().enumerate() {
        if a >= g.n_actions() {
            return Err(LearningError::BadAction {
                frame,
                action: a,
                n_actions: g.n_actions(),
            });
        }
    }
    Ok(())
}

/// Mean negative log-likelihood of the expert actions.
pub fn policy_loss(
    batch: &[(&[f64], usize)],
    w: &ClauseWeights,
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
) -> Result<f64, LearningError> {
    check_batch(batch, g)?;
    let mut total = 0.0;
    for (frame, &(v, a)) in batch.iter().enumerate() {
        let l = frame_loss(v, a, &w.0, g, cfg);
        if !l.is_finite() {
            return Err(LearningError::NonFinite { frame });
        }
        total += l;
    }
    Ok(total / batch.len() as f64)
}

/// Mean loss and its exact gradient with respect to the clause weights.
pub fn policy_loss_grad(
    batch: &[(&[f64], usize)],
    w: &ClauseWeights,
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
) -> Result<(f64, Vec<f64>), LearningError> {
    check_batch(batch, g)?;
    let n = batch.len() as f64;
    let mut dw = alloc::vec![0.0; w.len()];
    let mut total = 0.0;
    for (frame, &(v, a)) in batch.iter().enumerate() {
        let l = frame_loss_grad(v, a, &w.0, g, cfg, 1.0 / n, &mut dw);
        if !l.is_finite() {
            return Err(LearningError::NonFinite { frame });
        }
        total += l;
    }
    Ok((total / n, dw))
}

/// Gradient of [`policy_loss`].
pub fn policy_grad(
    batch: &[(&[f64], usize)],
    w: &ClauseWeights,
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
) -> Result<Vec<f64>, LearningError> {
    policy_loss_grad(batch, w, g, cfg).map(|(_, d)| d)
}

/// Fraction of frames whose greedy action equals the expert action.
pub fn accuracy(
    batch: &[(&[f64], usize)],
    w: &ClauseWeights,
    g: &InferenceGraph,
    cfg: &ReasonerConfig,
) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let hits = batch
        .iter()
        .filter(|&&(v, a)| {
            let tape = forward_tape(v, &w.0, g, cfg);
            greedy_action(&action_scores(tape.last(), g)) == a
        })
        .count();
    hits as f64 / batch.len() as f64
}

/// Greedy action for one valuation.
pub fn act(v: &[f64], w: &ClauseWeights, g: &InferenceGraph, cfg: &ReasonerConfig) -> usize {
    let tape = forward_tape(v, &w.0, g, cfg);
    argmax(&action_scores(tape.last(), g)).unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StopReason {
    ZeroEpochs,
    MaxEpochs,
    EarlyStopping,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub learning_rate: f64,
    pub improved: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub initial_weights: ClauseWeights,
    /// Weights with the lowest validation loss, the initial ones included.
    pub weights: ClauseWeights,
    pub initial_val_loss: f64,
    pub best_val_loss: f64,
    /// Epoch whose weights were returned; `None` for the initial weights.
    pub best_epoch: Option<usize>,
    pub stop_reason: StopReason,
    pub train_trajectories: Vec<u64>,
    pub val_trajectories: Vec<u64>,
    pub train_frames: usize,
    pub val_frames: usize,
    pub use_gaze: bool,
}

impl TrainReport {
    pub fn lr_trace(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.learning_rate).collect()
    }
}

/// Splits trajectory ids into `(train, validation)`: a seeded shuffle of the
/// distinct ids, with `ceil(fraction · n)` going to validation.
pub fn split_trajectories(
    frames: &[Frame],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<u64>, Vec<u64>), LearningError> {
    let mut ids: Vec<u64> = frames.iter().map(|f| f.trajectory).collect();
    ids.sort_unstable();
    ids.dedup();
    let n = ids.len();
    let n_val = libm::ceil(fraction * n as f64) as usize;
    if n < 2 || n_val == 0 || n_val >= n {
        return Err(LearningError::EmptyValidation { trajectories: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    ids.shuffle(&mut rng);
    let mut val = ids[..n_val].to_vec();
    let mut train = ids[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    Ok((train, val))
}

/// Trains clause weights by minibatch Adam on the behavior-cloning loss.
///
/// With `use_gaze` the training batches use the gaze-modulated valuations;
/// validation always uses the unmodulated ones, which is what the policy sees
/// at deployment.
pub fn train(
    frames: &[Frame],
    g: &InferenceGraph,
    rcfg: &ReasonerConfig,
    cfg: &TrainConfig,
    use_gaze: bool,
) -> Result<TrainReport, LearningError> {
    if frames.is_empty() {
        return Err(LearningError::EmptyDataset);
    }
    let (train_ids, val_ids) = split_trajectories(frames, cfg.validation_fraction, cfg.seed)?;
    let mut train_set: Vec<(&[f64], usize)> = Vec::new();
    let mut val_set: Vec<(&[f64], usize)> = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        if val_ids.binary_search(&f.trajectory).is_ok() {
            val_set.push((&f.v0, f.action));
        } else {
            let v = f.input(use_gaze).ok_or(LearningError::MissingGaze { frame: i })?;
            train_set.push((v, f.action));
        }
    }
    check_batch(&train_set, g)?;
    check_batch(&val_set, g)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = ClauseWeights::uniform(g.n_weights, &mut rng);
    let initial_val_loss = policy_loss(&val_set, &init, g, rcfg)?;
    let mut report = TrainReport {
        epochs: Vec::new(),
        initial_weights: init.clone(),
        weights: init.clone(),
        initial_val_loss,
        best_val_loss: initial_val_loss,
        best_epoch: None,
        stop_reason: StopReason::ZeroEpochs,
        train_trajectories: train_ids,
        val_trajectories: val_ids,
        train_frames: train_set.len(),
        val_frames: val_set.len(),
        use_gaze,
    };
    if cfg.max_epochs == 0 {
        return Ok(report);
    }

    let mut w = init;
    let mut adam = Adam::new(w.len());
    let mut lr = cfg.learning_rate;
    let mut since_improvement = 0;
    let mut since_lr_change = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let batch_size = cfg.batch_size.max(1);
    report.stop_reason = StopReason::MaxEpochs;
    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batch = Vec::with_capacity(batch_size);
        for chunk in order.chunks(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i]));
            let (loss, grad) = policy_loss_grad(&batch, &w, g, rcfg).map_err(|e| match e {
                LearningError::NonFinite { frame } => LearningError::NonFinite { frame: chunk[frame] },
                e => e,
            })?;
            epoch_loss += loss * chunk.len() as f64;
            let grad = clip_gradient(&grad, cfg.grad_clip_norm);
            adam_step(&mut w.0, &grad, &mut adam, lr);
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let val_loss = policy_loss(&val_set, &w, g, rcfg)?;
        let improved = val_loss < report.best_val_loss - cfg.min_improvement;
        report.epochs.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            learning_rate: lr,
            improved,
        });
        if improved {
            report.best_val_loss = val_loss;
            report.weights = w.clone();
            report.best_epoch = Some(epoch);
            since_improvement = 0;
            since_lr_change = 0;
        } else {
            since_improvement += 1;
            since_lr_change += 1;
            if since_lr_change >= cfg.plateau_patience {
                lr *= cfg.plateau_factor;
                since_lr_change = 0;
            }
            if since_improvement >= cfg.early_stopping_patience {
                report.stop_reason = StopReason::EarlyStopping;
                break;
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSearchResult {
    pub best_lr: f64,
    /// `(learning rate, best validation loss)` in grid order.
    pub scores: Vec<(f64, f64)>,
    pub best_report: TrainReport,
}

/// Trains once per grid learning rate and keeps the one with the lowest
/// validation loss; exact ties go to the lowest learning rate.
pub fn lr_grid_search(
    frames: &[Frame],
    g: &InferenceGraph,
    rcfg: &ReasonerConfig,
    cfg: &TrainConfig,
    use_gaze: bool,
) -> Result<GridSearchResult, LearningError> {
    if cfg.lr_grid.is_empty() {
        return Err(LearningError::EmptyGrid);
    }
    let mut scores = Vec::new();
    let mut best: Option<(f64, f64, TrainReport)> = None;
    for &lr in &cfg.lr_grid {
        let run = TrainConfig {
            learning_rate: lr,
            ..cfg.clone()
        };
        let rep = train(frames, g, rcfg, &run, use_gaze)?;
        scores.push((lr, rep.best_val_loss));
        let better = match &best {
            None => true,
            Some((bl, blr, _)) => {
                rep.best_val_loss < *bl || (rep.best_val_loss == *bl && lr < *blr)
            }
        };
        if better {
            best = Some((rep.best_val_loss, lr, rep));
        }
    }
    let (_, best_lr, best_report) = best.expect("grid is nonempty");
    Ok(GridSearchResult {
        best_lr,
        scores,
        best_report,
    })
}
