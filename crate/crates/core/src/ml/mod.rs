//! Cue-protocol datasets, the per-arm convolutional gesture classifier,
//! evaluation and gesture screening.

mod cnn;
mod dataset;
mod eval;
mod model_io;
mod screen;
mod train;

use thiserror::Error;

use crate::gesture::Gesture;

pub use cnn::{cross_entropy, softmax_rows, Arch, BatchStats, BnRunning, Cnn, Params, Real};
pub use dataset::{
    append_session, build_dataset, split, CueSchedule, CueTrial, Dataset, DatasetError, Sample,
    Split, TrialInfo, MIN_TRIALS_PER_GESTURE,
};
pub use eval::{argmax, evaluate, Evaluation, GestureClassifier};
pub use model_io::{
    load_model, read_model, save_model, write_model, ArmModel, MODEL_MAGIC, MODEL_VERSION,
};
pub use screen::{screen_gestures, similarity_matrix, Screening};
pub use train::{train, EpochReport, TrainConfig, TrainingReport};

#[derive(Debug, Error, PartialEq)]
pub enum MlError {
    #[error("heatmap has {found} cells, model expects {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("split is empty")]
    EmptySplit,
    #[error("dataset has not been split")]
    Unsplit,
    #[error("label {0} is not in the model vocabulary")]
    UnknownLabel(Gesture),
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("mean heatmap of `{0}` is all zero")]
    ZeroHeatmap(String),
    #[error("screening needs at least 2 gestures, got {0}")]
    TooFewGestures(usize),
    #[error("bad model file: {0}")]
    BadModel(String),
    #[error("io: {0}")]
    Io(String),
}
