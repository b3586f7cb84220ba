pub mod autonomy;
pub mod dsp;
pub mod gesture;
pub mod intent;
pub mod ml;
pub mod service;
pub mod sim;
pub mod stream;
