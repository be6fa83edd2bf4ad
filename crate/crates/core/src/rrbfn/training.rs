use rand::seq::SliceRandom;

use super::network::{forward, gradient, loss, Example, InitOptions, RrbfnParams};
use crate::error::{invalid, CacError, Result};
use crate::traffic::new_stream;

/// Fraction of the data kept for training; the rest is held out.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { epochs: 500, learning_rate: 0.05, batch_size: 8, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Parameters with the lowest held-out loss seen, including the initial ones.
    pub params: RrbfnParams,
    pub best_epoch: usize,
    pub best_heldout_loss: f64,
    pub heldout_accuracy: f64,
    pub train_loss: Vec<f64>,
    pub heldout_loss: Vec<f64>,
    pub train_len: usize,
    pub heldout_len: usize,
}

impl TrainReport {
    /// Running minimum of the held-out loss, epoch 0 being the initial parameters.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.heldout_loss
            .iter()
            .scan(f64::INFINITY, |best, &l| {
                *best = best.min(l);
                Some(*best)
            })
            .collect()
    }
}

/// Seeded 80/20 split of `n` indices into (train, held-out).
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut new_stream(seed ^ SPLIT_SALT));
    let cut = ((n as f64) * TRAIN_FRACTION).round() as usize;
    let held = idx.split_off(cut.min(n));
    (idx, held)
}

// split and minibatch order draw from different streams for the same seed
const SPLIT_SALT: u64 = 0x5EED_5B17;

/// Share of examples on which the thresholded output agrees with the label.
pub fn accuracy(params: &RrbfnParams, data: &[Example]) -> Result<f64> {
    if data.is_empty() {
        return Err(invalid("empty data"));
    }
    let fresh = params.fresh_state();
    let mut hits = 0usize;
    for e in data {
        let (out, _) = forward(&e.inputs, &fresh, params)?;
        if (out >= 0.5) == (e.target >= 0.5) {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

fn check_labels(part: &[Example], what: &str) -> Result<()> {
    if part.iter().any(|e| e.target != 0.0 && e.target != 1.0) {
        return Err(invalid("labels must be 0 or 1"));
    }
    let ones = part.iter().filter(|e| e.target == 1.0).count();
    if ones == 0 || ones == part.len() {
        return Err(invalid(format!("{what} split needs both labels ({ones} of {} positive)", part.len())));
    }
    Ok(())
}

fn partition(data: &[Example], seed: u64) -> Result<(Vec<Example>, Vec<Example>)> {
    let (tr, te) = split_indices(data.len(), seed);
    if tr.is_empty() || te.is_empty() {
        return Err(invalid(format!("{} examples are too few for a train/held-out split", data.len())));
    }
    let train: Vec<Example> = tr.iter().map(|&i| data[i].clone()).collect();
    let held: Vec<Example> = te.iter().map(|&i| data[i].clone()).collect();
    check_labels(&train, "training")?;
    check_labels(&held, "held-out")?;
    Ok((train, held))
}

/// Mini-batch gradient descent from `params`, keeping the checkpoint with the
/// best held-out loss.
pub fn train(params: RrbfnParams, data: &[Example], options: &TrainOptions) -> Result<TrainReport> {
    if !(options.learning_rate > 0.0) {
        return Err(invalid(format!("learning rate must be > 0, got {}", options.learning_rate)));
    }
    if options.batch_size == 0 {
        return Err(invalid("batch size must be positive"));
    }
    let (train_set, held_set) = partition(data, options.seed)?;

    let mut current = params;
    let mut best = current.clone();
    let mut best_loss = loss(&current, &held_set)?;
    let mut best_epoch = 0;
    let mut train_loss = vec![loss(&current, &train_set)?];
    let mut heldout_loss = vec![best_loss];
    if !best_loss.is_finite() {
        return Err(CacError::TrainingFailure { epoch: 0, reason: "initial loss is not finite".into() });
    }

    let mut rng = new_stream(options.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=options.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(options.batch_size) {
            let batch: Vec<Example> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let g = gradient(&current, &batch)?;
            current.apply_gradient(&g, options.learning_rate);
        }
        let tl = loss(&current, &train_set)?;
        let hl = loss(&current, &held_set)?;
        if !tl.is_finite() || !hl.is_finite() || current.trainable_values().iter().any(|v| !v.is_finite()) {
            return Err(CacError::TrainingFailure { epoch, reason: format!("loss became {tl}/{hl}") });
        }
        train_loss.push(tl);
        heldout_loss.push(hl);
        if hl < best_loss {
            best_loss = hl;
            best = current.clone();
            best_epoch = epoch;
        }
    }

    let heldout_accuracy = accuracy(&best, &held_set)?;
    Ok(TrainReport {
        params: best,
        best_epoch,
        best_heldout_loss: best_loss,
        heldout_accuracy,
        train_loss,
        heldout_loss,
        train_len: train_set.len(),
        heldout_len: held_set.len(),
    })
}

/// Initialises a network from the training split and trains it.
pub fn fit(
    data: &[Example],
    input_width: usize,
    hidden_width: usize,
    init: &InitOptions,
    options: &TrainOptions,
) -> Result<TrainReport> {
    let (train_set, _) = partition(data, options.seed)?;
    let params = RrbfnParams::initialize(input_width, hidden_width, &train_set, init, options.seed)?;
    train(params, data, options)
}
