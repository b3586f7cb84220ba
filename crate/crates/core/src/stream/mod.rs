//! Bimanual EMG sample streams: sleeve layout, wire framing, the synthetic
//! source, session files and TCP transport.

mod frame;
mod layout;
mod net;
mod session;
mod synth;

pub use frame::{
    decode_frame, encode_frame, read_frame, EmgFrame, FrameError, ReadFrameError, FRAME_MAGIC,
    HEADER_LEN,
};
pub use layout::{SleeveLayout, CHANNELS_PER_ARM, GRID_COLS, GRID_ROWS, TOTAL_CHANNELS};
pub use net::{
    consume_stream, serve_stream, FrameConsumer, Pacer, Pacing, ServeReport, StreamEvent,
};
pub use session::{playback, record_session, PlaybackError, SessionHeader, SessionReader};
pub use synth::{
    default_profiles, EffortSegment, GestureProfile, GestureSchedule, GestureSegment, NoiseSpec,
    ScheduleError, SyntheticSource, Template,
};

/// Acquisition rate per channel.
pub const SAMPLE_RATE_HZ: u32 = 4_000;
/// Samples per wire frame (10 ms).
pub const FRAME_SAMPLES: usize = 40;
/// Microvolts per ADC count.
pub const UV_PER_LSB: f64 = 0.195;
