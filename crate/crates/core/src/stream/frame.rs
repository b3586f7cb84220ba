use std::io::{self, Read};

use thiserror::Error;

use super::layout::{CHANNELS_PER_ARM, TOTAL_CHANNELS};
use super::UV_PER_LSB;
use crate::gesture::Arm;

pub const FRAME_MAGIC: u32 = 0x454D_47F0;
/// magic u32, session u32, sample index u64, channel count u16, sample count u16.
pub const HEADER_LEN: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad magic 0x{found:08x} at byte {offset}")]
    BadMagic { offset: usize, found: u32 },
    #[error("short buffer at byte {offset}: need {needed} bytes, have {available}")]
    Short {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("channel count {found} at byte {offset}, expected 256")]
    ChannelCount { offset: usize, found: u16 },
    #[error("payload of {values} values is not a whole number of 256-channel samples")]
    Ragged { values: usize },
}

/// A block of consecutive 256-channel samples.
///
/// `samples` is sample-major: sample `s`, wire channel `c` lives at
/// `s * 256 + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmgFrame {
    pub session_id: u32,
    pub sample_index: u64,
    samples: Vec<i16>,
}

impl EmgFrame {
    pub fn new(session_id: u32, sample_index: u64, samples: Vec<i16>) -> Result<Self, FrameError> {
        if samples.len() % TOTAL_CHANNELS != 0 || samples.len() / TOTAL_CHANNELS > u16::MAX as usize
        {
            return Err(FrameError::Ragged {
                values: samples.len(),
            });
        }
        Ok(Self {
            session_id,
            sample_index,
            samples,
        })
    }

    pub fn zeroed(session_id: u32, sample_index: u64, n_samples: usize) -> Self {
        Self {
            session_id,
            sample_index,
            samples: vec![0; n_samples * TOTAL_CHANNELS],
        }
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len() / TOTAL_CHANNELS
    }

    /// Index one past the last sample of this frame.
    pub fn end_index(&self) -> u64 {
        self.sample_index + self.n_samples() as u64
    }

    pub fn raw(&self) -> &[i16] {
        &self.samples
    }

    pub fn raw_mut(&mut self) -> &mut [i16] {
        &mut self.samples
    }

    pub fn sample(&self, s: usize) -> &[i16] {
        &self.samples[s * TOTAL_CHANNELS..(s + 1) * TOTAL_CHANNELS]
    }

    /// Raw counts of one arm-local channel over the frame.
    pub fn channel(&self, arm: Arm, channel: usize) -> impl Iterator<Item = i16> + '_ {
        let wire = arm.index() * CHANNELS_PER_ARM + channel;
        self.samples
            .chunks_exact(TOTAL_CHANNELS)
            .map(move |s| s[wire])
    }

    /// Sample-major values in microvolts.
    pub fn to_microvolts(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|&v| v as f64 * UV_PER_LSB)
            .collect()
    }
}

pub fn encode_frame(frame: &EmgFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + frame.samples.len() * 2);
    out.extend_from_slice(&FRAME_MAGIC.to_le_bytes());
    out.extend_from_slice(&frame.session_id.to_le_bytes());
    out.extend_from_slice(&frame.sample_index.to_le_bytes());
    out.extend_from_slice(&(TOTAL_CHANNELS as u16).to_le_bytes());
    out.extend_from_slice(&(frame.n_samples() as u16).to_le_bytes());
    for v in &frame.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn parse_header(buf: &[u8], base: usize) -> Result<(u32, u64, usize), FrameError> {
    if buf.len() < HEADER_LEN {
        return Err(FrameError::Short {
            offset: base + buf.len(),
            needed: HEADER_LEN,
            available: buf.len(),
        });
    }
    let magic = u32::from_le_bytes(buf[0..4].try_into().unwrap());
    if magic != FRAME_MAGIC {
        return Err(FrameError::BadMagic {
            offset: base,
            found: magic,
        });
    }
    let session_id = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    let sample_index = u64::from_le_bytes(buf[8..16].try_into().unwrap());
    let n_channels = u16::from_le_bytes(buf[16..18].try_into().unwrap());
    if n_channels as usize != TOTAL_CHANNELS {
        return Err(FrameError::ChannelCount {
            offset: base + 16,
            found: n_channels,
        });
    }
    let n_samples = u16::from_le_bytes(buf[18..20].try_into().unwrap()) as usize;
    Ok((session_id, sample_index, n_samples))
}

/// Decodes one frame from the front of `buf`, returning it with the number
/// of bytes consumed.
pub fn decode_frame(buf: &[u8]) -> Result<(EmgFrame, usize), FrameError> {
    let (session_id, sample_index, n_samples) = parse_header(buf, 0)?;
    let payload = n_samples * TOTAL_CHANNELS * 2;
    let total = HEADER_LEN + payload;
    if buf.len() < total {
        return Err(FrameError::Short {
            offset: buf.len(),
            needed: total,
            available: buf.len(),
        });
    }
    let samples = buf[HEADER_LEN..total]
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]))
        .collect();
    Ok((
        EmgFrame {
            session_id,
            sample_index,
            samples,
        },
        total,
    ))
}

#[derive(Debug, Error)]
pub enum ReadFrameError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Reads one frame from a byte stream. Returns `Ok(None)` on a clean end of
/// stream at a frame boundary; a stream that ends mid-frame is a `Short`
/// error.
pub fn read_frame<R: Read>(
    reader: &mut R,
    base_offset: usize,
) -> Result<Option<EmgFrame>, ReadFrameError> {
    let mut header = [0u8; HEADER_LEN];
    let got = read_full(reader, &mut header)?;
    if got == 0 {
        return Ok(None);
    }
    if got < HEADER_LEN {
        return Err(FrameError::Short {
            offset: base_offset + got,
            needed: HEADER_LEN,
            available: got,
        }
        .into());
    }
    let (session_id, sample_index, n_samples) = parse_header(&header, base_offset)?;
    let mut payload = vec![0u8; n_samples * TOTAL_CHANNELS * 2];
    let got = read_full(reader, &mut payload)?;
    if got < payload.len() {
        return Err(FrameError::Short {
            offset: base_offset + HEADER_LEN + got,
            needed: HEADER_LEN + payload.len(),
            available: HEADER_LEN + got,
        }
        .into());
    }
    let samples = payload
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]))
        .collect();
    Ok(Some(EmgFrame {
        session_id,
        sample_index,
        samples,
    }))
}

fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}
