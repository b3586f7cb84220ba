//! TCP transport for encoded frames.

use std::collections::VecDeque;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use super::frame::{encode_frame, read_frame, EmgFrame};
use super::SAMPLE_RATE_HZ;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pacing {
    /// One frame per frame duration of wall-clock time.
    RealTime,
    /// As fast as the consumer reads.
    Headless,
}

/// Deadline-based pacing: frame with first sample `i` is released at
/// `start + (i - origin) / fs`, so sleep overshoot never accumulates.
#[derive(Debug, Default)]
pub struct Pacer {
    start: Option<Instant>,
    origin: u64,
}

impl Pacer {
    pub fn pace(&mut self, frame: &EmgFrame) {
        let start = *self.start.get_or_insert_with(|| {
            self.origin = frame.sample_index;
            Instant::now()
        });
        let offset = frame.sample_index.saturating_sub(self.origin);
        let due = start + Duration::from_micros(offset * 1_000_000 / SAMPLE_RATE_HZ as u64);
        let now = Instant::now();
        if due > now {
            std::thread::sleep(due - now);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeReport {
    pub frames_sent: usize,
    /// True when the consumer hung up before the source was exhausted.
    pub consumer_closed: bool,
}

/// Serves `source` to the first consumer that connects to `listener`.
pub fn serve_stream<I>(source: I, listener: &TcpListener, pacing: Pacing) -> io::Result<ServeReport>
where
    I: IntoIterator<Item = EmgFrame>,
{
    let (stream, peer) = listener.accept()?;
    log::info!("stream consumer connected from {peer}");
    stream.set_nodelay(true)?;
    let mut out = BufWriter::new(stream);
    let mut pacer = Pacer::default();
    let mut sent = 0;
    for frame in source {
        if pacing == Pacing::RealTime {
            pacer.pace(&frame);
        }
        let bytes = encode_frame(&frame);
        let res = out.write_all(&bytes).and_then(|_| {
            if pacing == Pacing::RealTime {
                out.flush()
            } else {
                Ok(())
            }
        });
        if let Err(e) = res {
            log::warn!("stream consumer went away after {sent} frames: {e}");
            return Ok(ServeReport {
                frames_sent: sent,
                consumer_closed: true,
            });
        }
        sent += 1;
    }
    let closed = out.flush().is_err();
    Ok(ServeReport {
        frames_sent: sent,
        consumer_closed: closed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum StreamEvent {
    Frame(EmgFrame),
    /// Samples `[expected, got)` never arrived.
    Dropout {
        expected: u64,
        got: u64,
    },
    /// The stream is over; no further events follow.
    Ended {
        reason: String,
    },
}

/// Iterator over the events of one consumed stream.
pub struct FrameConsumer {
    reader: BufReader<TcpStream>,
    offset: usize,
    expected: Option<u64>,
    pending: VecDeque<StreamEvent>,
    done: bool,
}

pub fn consume_stream<A: ToSocketAddrs>(endpoint: A) -> io::Result<FrameConsumer> {
    let stream = TcpStream::connect(endpoint)?;
    stream.set_nodelay(true)?;
    Ok(FrameConsumer {
        reader: BufReader::with_capacity(1 << 16, stream),
        offset: 0,
        expected: None,
        pending: VecDeque::new(),
        done: false,
    })
}

impl FrameConsumer {
    /// Collects frames until the stream ends, returning them with the
    /// dropout gaps and the end reason.
    pub fn drain(self) -> (Vec<EmgFrame>, Vec<(u64, u64)>, String) {
        let mut frames = Vec::new();
        let mut gaps = Vec::new();
        let mut reason = String::new();
        for ev in self {
            match ev {
                StreamEvent::Frame(f) => frames.push(f),
                StreamEvent::Dropout { expected, got } => gaps.push((expected, got)),
                StreamEvent::Ended { reason: r } => reason = r,
            }
        }
        (frames, gaps, reason)
    }
}

impl Iterator for FrameConsumer {
    type Item = StreamEvent;

    fn next(&mut self) -> Option<StreamEvent> {
        if let Some(ev) = self.pending.pop_front() {
            return Some(ev);
        }
        if self.done {
            return None;
        }
        match read_frame(&mut self.reader, self.offset) {
            Ok(Some(frame)) => {
                self.offset += super::HEADER_LEN + frame.raw().len() * 2;
                if let Some(expected) = self.expected {
                    if frame.sample_index > expected {
                        self.pending.push_back(StreamEvent::Dropout {
                            expected,
                            got: frame.sample_index,
                        });
                    }
                }
                self.expected = Some(frame.end_index());
                self.pending.push_back(StreamEvent::Frame(frame));
                self.pending.pop_front()
            }
            Ok(None) => {
                self.done = true;
                Some(StreamEvent::Ended {
                    reason: "producer closed the stream".into(),
                })
            }
            Err(e) => {
                self.done = true;
                Some(StreamEvent::Ended {
                    reason: format!("connection lost: {e}"),
                })
            }
        }
    }
}
