//! Recurrent RBF network and the fuzzy-neural admission controller built on it.

mod features;
mod fncac;
mod network;
mod persist;
mod training;

pub use features::{generate_training_set, FncacFeatures, LabeledSample, TrainingSet, DEFAULT_TRAINING_SIZE};
pub use fncac::{fncac_decide, FncacController};
pub use network::{
    forward, gradient, loss, rbf_forward, recurrent_input, sigmoid, Example, InitOptions, ParamGradient, RrbfnParams,
    RrbfnState, MIN_WIDTH,
};
pub use persist::{read_params, write_params};
pub use training::{accuracy, fit, split_indices, train, TrainOptions, TrainReport, TRAIN_FRACTION};
