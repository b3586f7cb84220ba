//! Session files: one JSON header line followed by raw encoded frames.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frame::{encode_frame, read_frame, EmgFrame, ReadFrameError};
use super::net::Pacer;
use super::synth::GestureSchedule;
use super::SAMPLE_RATE_HZ;
use crate::ml::CueSchedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: u32,
    /// Wall-clock start, milliseconds since the Unix epoch.
    pub start_time_ms: u64,
    pub sample_rate_hz: u32,
    /// Ground-truth gesture timeline, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gesture_schedule: Option<GestureSchedule>,
    /// Cue protocol the session followed, when recorded for training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cues: Option<CueSchedule>,
}

impl SessionHeader {
    pub fn new(session_id: u32) -> Self {
        Self {
            session_id,
            start_time_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            sample_rate_hz: SAMPLE_RATE_HZ,
            gesture_schedule: None,
            cues: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PlaybackError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad session header: {0}")]
    Header(String),
    #[error("corrupt frame {index} at byte {offset}: {source}")]
    CorruptFrame {
        index: usize,
        offset: usize,
        #[source]
        source: ReadFrameError,
    },
}

/// Writes `header` and every frame to `path`; returns the frame count.
pub fn record_session<I>(frames: I, header: &SessionHeader, path: &Path) -> io::Result<usize>
where
    I: IntoIterator<Item = EmgFrame>,
{
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, header)?;
    out.write_all(b"\n")?;
    let mut count = 0;
    for frame in frames {
        out.write_all(&encode_frame(&frame))?;
        count += 1;
    }
    out.flush()?;
    Ok(count)
}

/// Streaming reader over a session file.
pub struct SessionReader {
    header: SessionHeader,
    reader: BufReader<File>,
    offset: usize,
    index: usize,
    pacer: Option<Pacer>,
    failed: bool,
}

pub fn playback(path: &Path) -> Result<SessionReader, PlaybackError> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut line = String::new();
    let n = reader.read_line(&mut line)?;
    if n == 0 || !line.ends_with('\n') {
        return Err(PlaybackError::Header("missing header line".into()));
    }
    let header: SessionHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| PlaybackError::Header(e.to_string()))?;
    Ok(SessionReader {
        header,
        reader,
        offset: n,
        index: 0,
        pacer: None,
        failed: false,
    })
}

impl SessionReader {
    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    /// Paces delivery at one frame per frame duration of wall-clock time.
    pub fn realtime(mut self) -> Self {
        self.pacer = Some(Pacer::default());
        self
    }

    /// Reads all remaining frames, failing on the first corrupt one.
    pub fn read_all(self) -> Result<Vec<EmgFrame>, PlaybackError> {
        self.collect()
    }
}

impl Iterator for SessionReader {
    type Item = Result<EmgFrame, PlaybackError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match read_frame(&mut self.reader, self.offset) {
            Ok(Some(frame)) => {
                self.offset += super::HEADER_LEN + frame.raw().len() * 2;
                if let Some(p) = &mut self.pacer {
                    p.pace(&frame);
                }
                self.index += 1;
                Some(Ok(frame))
            }
            Ok(None) => None,
            Err(source) => {
                self.failed = true;
                Some(Err(PlaybackError::CorruptFrame {
                    index: self.index,
                    offset: self.offset,
                    source,
                }))
            }
        }
    }
}
