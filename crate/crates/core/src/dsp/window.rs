use crate::stream::{EmgFrame, TOTAL_CHANNELS};

use super::filter::{FilterChain, FilterSpec};

/// 80 ms at 4 kHz.
pub const WINDOW_LEN: usize = 320;
/// 40 ms at 4 kHz.
pub const WINDOW_STRIDE: usize = 160;

/// Number of complete windows over `n` contiguous samples.
pub fn window_count(n: u64) -> u64 {
    if n < WINDOW_LEN as u64 {
        0
    } else {
        (n - WINDOW_LEN as u64) / WINDOW_STRIDE as u64 + 1
    }
}

/// 320 consecutive multichannel samples, or a placeholder for a window that
/// overlapped missing data.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start_sample_index: u64,
    n_channels: usize,
    /// Sample-major, `WINDOW_LEN * n_channels` values; empty when invalid.
    samples: Vec<f64>,
}

impl Window {
    pub fn new(start_sample_index: u64, n_channels: usize, samples: Vec<f64>) -> Self {
        assert_eq!(samples.len(), WINDOW_LEN * n_channels);
        Self {
            start_sample_index,
            n_channels,
            samples,
        }
    }

    pub fn invalid(start_sample_index: u64, n_channels: usize) -> Self {
        Self {
            start_sample_index,
            n_channels,
            samples: Vec::new(),
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.samples.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Index one past the last sample.
    pub fn end_sample_index(&self) -> u64 {
        self.start_sample_index + WINDOW_LEN as u64
    }
}

/// Cuts a sample-contiguous multichannel stream into overlapping windows
/// aligned to multiples of the stride.
#[derive(Debug, Clone)]
pub struct WindowAssembler {
    n_channels: usize,
    buf: Vec<f64>,
    buf_start: u64,
    next_start: u64,
    started: bool,
}

fn align_up(i: u64) -> u64 {
    i.div_ceil(WINDOW_STRIDE as u64) * WINDOW_STRIDE as u64
}

impl WindowAssembler {
    pub fn new(n_channels: usize) -> Self {
        Self {
            n_channels,
            buf: Vec::new(),
            buf_start: 0,
            next_start: 0,
            started: false,
        }
    }

    fn buffered_end(&self) -> u64 {
        self.buf_start + (self.buf.len() / self.n_channels) as u64
    }

    /// Appends a sample-major block starting at `start_index`, returning the
    /// windows it completes. Windows that would span missing samples come
    /// back invalid.
    pub fn push(&mut self, start_index: u64, block: &[f64]) -> Vec<Window> {
        let n = self.n_channels;
        assert_eq!(block.len() % n, 0);
        let mut out = Vec::new();
        let mut block = block;
        let mut start_index = start_index;
        if !self.started {
            self.started = true;
            self.buf_start = start_index;
            self.next_start = align_up(start_index);
        } else {
            let expected = self.buffered_end();
            if start_index > expected {
                while self.next_start < start_index {
                    out.push(Window::invalid(self.next_start, n));
                    self.next_start += WINDOW_STRIDE as u64;
                }
                self.buf.clear();
                self.buf_start = start_index;
                self.next_start = self.next_start.max(align_up(start_index));
            } else if start_index < expected {
                let skip = ((expected - start_index) as usize).min(block.len() / n);
                block = &block[skip * n..];
                start_index += skip as u64;
            }
        }
        let _ = start_index;
        self.buf.extend_from_slice(block);

        while self.next_start + WINDOW_LEN as u64 <= self.buffered_end() {
            let off = (self.next_start - self.buf_start) as usize * n;
            out.push(Window::new(
                self.next_start,
                n,
                self.buf[off..off + WINDOW_LEN * n].to_vec(),
            ));
            self.next_start += WINDOW_STRIDE as u64;
        }
        if self.next_start > self.buf_start {
            let drop = ((self.next_start - self.buf_start) as usize).min(self.buf.len() / n);
            self.buf.drain(..drop * n);
            self.buf_start += drop as u64;
        }
        out
    }
}

/// Windows of a contiguous sample-major signal that starts at sample 0.
pub fn window_stream(n_channels: usize, samples: &[f64]) -> Vec<Window> {
    let mut asm = WindowAssembler::new(n_channels);
    asm.push(0, samples)
}

/// Raw frames to filtered, windowed microvolt data.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    filter: FilterChain,
    windows: WindowAssembler,
    scratch: Vec<f64>,
}

impl Preprocessor {
    pub fn new(spec: FilterSpec) -> Self {
        Self {
            filter: FilterChain::new(spec, TOTAL_CHANNELS),
            windows: WindowAssembler::new(TOTAL_CHANNELS),
            scratch: Vec::new(),
        }
    }

    pub fn push_frame(&mut self, frame: &EmgFrame) -> Vec<Window> {
        self.scratch.clear();
        self.scratch.extend(
            frame
                .raw()
                .iter()
                .map(|&v| v as f64 * crate::stream::UV_PER_LSB),
        );
        self.filter.process_block(&mut self.scratch);
        self.windows.push(frame.sample_index, &self.scratch)
    }
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::new(FilterSpec::default())
    }
}
