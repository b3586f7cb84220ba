use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use crossbeam_channel::{bounded, Receiver, Sender, TrySendError};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tungstenite::Message;

use super::config::ConsoleConfig;
use super::log::LogRecord;
use super::operator::TaskMarker;
use super::robot::{Authority, RobotSide};
use super::session::Session;
use crate::dsp::Heatmap;
use crate::gesture::{Arm, Gesture};
use crate::intent::{ControlMode, GestureCommand};

/// Messages pushed to console clients, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConsoleOut {
    State(StateSnapshot),
    Heatmap {
        t_ms: u64,
        arm: Arm,
        /// Row-major µV.
        rows: Vec<Vec<f64>>,
    },
    Prediction {
        t_ms: u64,
        arm: Arm,
        /// Post-gate label, shown even outside gesture mode.
        gated: Gesture,
        voted: Gesture,
        /// Smoothed class probabilities; absent for injected labels.
        smoothed: Option<Vec<f64>>,
    },
    Mode {
        t_ms: u64,
        mode: ControlMode,
        source: String,
        mapping: Value,
    },
    Detection {
        t_ms: u64,
        detection: Value,
    },
    Plan {
        t_ms: u64,
        plan: Value,
    },
    Log {
        t_ms: u64,
        event: String,
        payload: Value,
    },
    CommandEcho {
        t_ms: u64,
        command: GestureCommand,
    },
}

impl ConsoleOut {
    pub fn kind(&self) -> &'static str {
        match self {
            ConsoleOut::State(_) => "state",
            ConsoleOut::Heatmap { .. } => "heatmap",
            ConsoleOut::Prediction { .. } => "prediction",
            ConsoleOut::Mode { .. } => "mode",
            ConsoleOut::Detection { .. } => "detection",
            ConsoleOut::Plan { .. } => "plan",
            ConsoleOut::Log { .. } => "log",
            ConsoleOut::CommandEcho { .. } => "command_echo",
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("console message")
    }
}

/// Messages accepted from console clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConsoleIn {
    TextCommand {
        text: String,
    },
    /// Currently held label per arm; sent at the label rate while keys are down.
    KeyboardGesture {
        left: Gesture,
        right: Gesture,
    },
    TaskMarker {
        marker: TaskMarker,
    },
}

pub fn parse_inbound(line: &str) -> Result<ConsoleIn, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub name: String,
    pub done: bool,
    pub completed: bool,
    pub elapsed_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub t_ms: u64,
    pub pose: [f64; 3],
    pub lift: f64,
    pub extension: f64,
    /// Yaw, pitch, roll.
    pub wrist: [f64; 3],
    pub gripper: f64,
    pub held: Option<String>,
    pub room: Option<String>,
    pub mode: ControlMode,
    pub gesture_active: bool,
    pub room_mode: bool,
    pub authority: Authority,
    pub blocked: bool,
    pub task: Option<TaskStatus>,
}

pub fn snapshot(session: &Session) -> StateSnapshot {
    let robot = session.robot();
    let sim = robot.sim();
    let s = sim.state();
    StateSnapshot {
        t_ms: session.t_ms(),
        pose: [s.pose.x, s.pose.y, s.pose.theta],
        lift: s.lift,
        extension: s.extension,
        wrist: [s.wrist_yaw, s.wrist_pitch, s.wrist_roll],
        gripper: s.gripper,
        held: sim.scene().held().map(|o| o.id.clone()),
        room: sim.room().map(str::to_string),
        mode: session.assembler().mode(),
        gesture_active: robot.gesture_active(),
        room_mode: robot.room_mode(),
        authority: robot.authority(),
        blocked: robot.is_blocked(),
        task: session.header().scenario.task.as_ref().map(|spec| {
            let r = session.task();
            TaskStatus {
                name: spec.name.clone(),
                done: r.is_some(),
                completed: r.is_some_and(|r| r.completed),
                elapsed_s: r.map(|r| r.elapsed_s),
            }
        }),
    }
}

pub fn heatmap_messages(t_ms: u64, maps: &[Heatmap; 2]) -> Vec<ConsoleOut> {
    maps.iter()
        .map(|h| ConsoleOut::Heatmap {
            t_ms,
            arm: h.arm,
            rows: h.rows(),
        })
        .collect()
}

/// High-rate kinds that have their own message or none at all.
const NOT_IN_FEED: [&str; 5] = ["window", "command", "control", "detection", "header"];

/// Console messages derived from one log record.
pub fn from_record(rec: &LogRecord, robot: &RobotSide) -> Vec<ConsoleOut> {
    let t_ms = rec.t_ms;
    let p = &rec.payload;
    let mut out = Vec::new();
    match rec.kind.as_str() {
        "window" => {
            let parsed = (
                serde_json::from_value::<Arm>(p["arm"].clone()),
                serde_json::from_value::<Gesture>(p["gated"].clone()),
                serde_json::from_value::<Gesture>(p["voted"].clone()),
                serde_json::from_value::<Option<Vec<f64>>>(p["smoothed"].clone()),
            );
            if let (Ok(arm), Ok(gated), Ok(voted), Ok(smoothed)) = parsed {
                out.push(ConsoleOut::Prediction {
                    t_ms,
                    arm,
                    gated,
                    voted,
                    smoothed,
                });
            }
        }
        "command" => {
            if let Ok(command) = serde_json::from_value(p["command"].clone()) {
                out.push(ConsoleOut::CommandEcho { t_ms, command });
            }
        }
        "mode" => {
            if let Ok(mode) = serde_json::from_value::<ControlMode>(p["mode"].clone()) {
                out.push(ConsoleOut::Mode {
                    t_ms,
                    mode,
                    source: p["source"].as_str().unwrap_or("").to_string(),
                    mapping: robot.mode_map(mode),
                });
            }
        }
        "detection" => out.push(ConsoleOut::Detection {
            t_ms,
            detection: p.clone(),
        }),
        "plan" => out.push(ConsoleOut::Plan {
            t_ms,
            plan: p.clone(),
        }),
        _ => {}
    }
    if !NOT_IN_FEED.contains(&rec.kind.as_str()) {
        out.push(ConsoleOut::Log {
            t_ms,
            event: rec.kind.clone(),
            payload: p.clone(),
        });
    }
    out
}

/// Per-client outbound queue depth; a slow client loses messages instead of
/// stalling the session.
const CLIENT_QUEUE: usize = 512;
const INBOUND_QUEUE: usize = 1024;
const WS_POLL: Duration = Duration::from_millis(10);

struct Clients {
    senders: Vec<Sender<Arc<str>>>,
    /// Latest message per sticky kind, replayed to new clients.
    latest: BTreeMap<&'static str, Arc<str>>,
    dropped: u64,
}

/// Console server: newline-delimited JSON over TCP and WebSocket.
pub struct ConsoleHub {
    clients: Arc<Mutex<Clients>>,
    tcp_addr: Option<SocketAddr>,
    ws_addr: Option<SocketAddr>,
}

impl ConsoleHub {
    /// Binds the configured listeners. Inbound messages from every client
    /// arrive on the returned receiver.
    pub fn bind(config: &ConsoleConfig) -> io::Result<(Self, Receiver<ConsoleIn>)> {
        let clients = Arc::new(Mutex::new(Clients {
            senders: Vec::new(),
            latest: BTreeMap::new(),
            dropped: 0,
        }));
        let (in_tx, in_rx) = bounded(INBOUND_QUEUE);
        let keyboard = config.keyboard;
        let mut hub = Self {
            clients: clients.clone(),
            tcp_addr: None,
            ws_addr: None,
        };
        if let Some(addr) = &config.tcp {
            let l = TcpListener::bind(addr)?;
            hub.tcp_addr = Some(l.local_addr()?);
            let (clients, in_tx) = (clients.clone(), in_tx.clone());
            thread::Builder::new()
                .name("console-tcp".into())
                .spawn(move || {
                    for stream in l.incoming().flatten() {
                        let rx = register(&clients);
                        if let Err(e) = spawn_tcp_client(stream, rx, in_tx.clone(), keyboard) {
                            log::warn!("console tcp client: {e}");
                        }
                    }
                })?;
        }
        if let Some(addr) = &config.websocket {
            let l = TcpListener::bind(addr)?;
            hub.ws_addr = Some(l.local_addr()?);
            let (clients, in_tx) = (clients.clone(), in_tx.clone());
            thread::Builder::new()
                .name("console-ws".into())
                .spawn(move || {
                    for stream in l.incoming().flatten() {
                        let rx = register(&clients);
                        let in_tx = in_tx.clone();
                        let spawned = thread::Builder::new()
                            .name("console-ws-client".into())
                            .spawn(move || ws_client(stream, rx, in_tx, keyboard));
                        if let Err(e) = spawned {
                            log::warn!("console ws client: {e}");
                        }
                    }
                })?;
        }
        Ok((hub, in_rx))
    }

    pub fn tcp_addr(&self) -> Option<SocketAddr> {
        self.tcp_addr
    }

    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    pub fn client_count(&self) -> usize {
        self.clients.lock().expect("console clients").senders.len()
    }

    /// Messages dropped because a client queue was full.
    pub fn dropped(&self) -> u64 {
        self.clients.lock().expect("console clients").dropped
    }

    pub fn broadcast(&self, msg: &ConsoleOut) {
        let line: Arc<str> = msg.to_line().into();
        let mut c = self.clients.lock().expect("console clients");
        if matches!(msg.kind(), "state" | "mode" | "plan") {
            c.latest.insert(msg.kind(), line.clone());
        }
        let mut dropped = 0;
        c.senders.retain(|tx| match tx.try_send(line.clone()) {
            Ok(()) => true,
            Err(TrySendError::Full(_)) => {
                dropped += 1;
                true
            }
            Err(TrySendError::Disconnected(_)) => false,
        });
        c.dropped += dropped;
    }
}

fn register(clients: &Mutex<Clients>) -> Receiver<Arc<str>> {
    let (tx, rx) = bounded(CLIENT_QUEUE);
    let mut c = clients.lock().expect("console clients");
    for line in c.latest.values() {
        let _ = tx.try_send(line.clone());
    }
    c.senders.push(tx);
    rx
}

fn forward(line: &str, in_tx: &Sender<ConsoleIn>, keyboard: bool) {
    let line = line.trim();
    if line.is_empty() {
        return;
    }
    match parse_inbound(line) {
        Ok(ConsoleIn::KeyboardGesture { .. }) if !keyboard => {
            log::debug!("keyboard input disabled")
        }
        Ok(msg) => {
            if in_tx.try_send(msg).is_err() {
                log::warn!("console inbound queue full, message dropped");
            }
        }
        Err(e) => log::warn!("console: bad message {line:?}: {e}"),
    }
}

fn spawn_tcp_client(
    stream: TcpStream,
    rx: Receiver<Arc<str>>,
    in_tx: Sender<ConsoleIn>,
    keyboard: bool,
) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut writer = stream.try_clone()?;
    thread::Builder::new()
        .name("console-tcp-out".into())
        .spawn(move || {
            for line in rx {
                if writer
                    .write_all(line.as_bytes())
                    .and_then(|_| writer.write_all(b"\n"))
                    .is_err()
                {
                    break;
                }
            }
            let _ = writer.shutdown(std::net::Shutdown::Both);
        })?;
    thread::Builder::new()
        .name("console-tcp-in".into())
        .spawn(move || {
            for line in BufReader::new(stream).lines() {
                match line {
                    Ok(l) => forward(&l, &in_tx, keyboard),
                    Err(_) => break,
                }
            }
        })?;
    Ok(())
}

fn would_block(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut))
}

fn ws_client(stream: TcpStream, rx: Receiver<Arc<str>>, in_tx: Sender<ConsoleIn>, keyboard: bool) {
    let _ = stream.set_nodelay(true);
    let mut ws = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            log::warn!("console ws handshake: {e}");
            return;
        }
    };
    if ws.get_ref().set_read_timeout(Some(WS_POLL)).is_err() {
        return;
    }
    loop {
        loop {
            match rx.try_recv() {
                Ok(line) => {
                    if ws.send(Message::Text(line.to_string())).is_err() {
                        return;
                    }
                }
                Err(crossbeam_channel::TryRecvError::Empty) => break,
                Err(crossbeam_channel::TryRecvError::Disconnected) => return,
            }
        }
        match ws.read() {
            Ok(Message::Text(t)) => t.lines().for_each(|l| forward(l, &in_tx, keyboard)),
            Ok(Message::Close(_)) => return,
            Ok(_) => {}
            Err(e) if would_block(&e) => {}
            Err(_) => return,
        }
    }
}

/// Minimal line client for the TCP console channel.
pub struct ConsoleClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl ConsoleClient {
    pub fn connect(addr: SocketAddr) -> io::Result<Self> {
        let writer = TcpStream::connect(addr)?;
        writer.set_nodelay(true)?;
        Ok(Self {
            reader: BufReader::new(writer.try_clone()?),
            writer,
        })
    }

    pub fn send(&mut self, msg: &ConsoleIn) -> io::Result<()> {
        let mut line = serde_json::to_string(msg).expect("console message");
        line.push('\n');
        self.writer.write_all(line.as_bytes())
    }

    /// Next message, or `None` on timeout or end of stream.
    pub fn recv(&mut self, timeout: Duration) -> io::Result<Option<ConsoleOut>> {
        self.writer.set_read_timeout(Some(timeout))?;
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => Ok(None),
            Ok(_) => serde_json::from_str(&line)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e)
                if matches!(
                    e.kind(),
                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                ) =>
            {
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }
}
