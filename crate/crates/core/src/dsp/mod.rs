//! Preprocessing: the high-pass and notch filter chain, 80 ms / 40 ms
//! windowing, RMS heatmaps and MVC calibration.

mod calibration;
mod filter;
mod heatmap;
mod window;

use thiserror::Error;

use crate::gesture::Arm;

pub use calibration::{
    activation_level, calibrate_mvc, effort_fraction, CalibrationError, CalibrationProfile,
    MvcRecording, MvcReference,
};
pub use filter::{butterworth4_q, Biquad, BiquadState, FilterChain, FilterSpec};
pub use heatmap::{cosine_similarity, percentile_nearest_rank, rms_heatmap, Heatmap};
pub use window::{
    window_count, window_stream, Preprocessor, Window, WindowAssembler, WINDOW_LEN, WINDOW_STRIDE,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DspError {
    #[error("window starting at sample {0} spans a dropout")]
    InvalidWindow(u64),
    #[error("window carries no channels for the {0} arm")]
    MissingArm(Arm),
}
